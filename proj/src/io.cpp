#include "rigidpose/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string_view>

#include "json.hpp"
#include "rigidpose/error.hpp"
#include "rigidpose/geometry.hpp"

namespace rigidpose {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for reading");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad())
    throw Error(ErrorCode::kIoError, "read failure on " + path.string());
  return text;
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out)
    throw Error(ErrorCode::kIoError, "write failure on " + path.string());
}

/// Parses a double out of [begin, end); returns chars consumed, 0 on failure.
std::size_t parse_double(const char* begin, const char* end, double& out) {
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc()) return 0;
  return static_cast<std::size_t>(res.ptr - begin);
}

struct Line {
  std::string_view text;
  int number;  // 1-based
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  int number = 1;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string_view line = text.substr(start, stop - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!(line.empty() && stop == text.size())) lines.push_back({line, number});
    start = stop + 1;
    ++number;
  }
  return lines;
}

void put_f64le(std::vector<std::uint8_t>& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

double get_f64le(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::uint16_t depth_to_mm(double meters) {
  if (!(meters > 0.0)) return 0;
  const long mm = std::lround(meters * 1000.0);
  return static_cast<std::uint16_t>(std::clamp(mm, 1l, 65534l));
}

double mm_to_depth(std::uint16_t mm) {
  if (mm == 0 || mm == 65535) return 0.0;
  return mm / 1000.0;
}

// ---- PGM ----

std::string encode_pgm(const DepthMap& depth) {
  std::string out = "P5\n" + std::to_string(depth.width) + " " +
                    std::to_string(depth.height) + "\n65535\n";
  out.reserve(out.size() + static_cast<std::size_t>(depth.size()) * 2);
  for (double v : depth.values) {
    const std::uint16_t mm = depth_to_mm(v);
    out.push_back(static_cast<char>(mm >> 8));  // PGM 16-bit is big-endian
    out.push_back(static_cast<char>(mm & 0xFF));
  }
  return out;
}

DepthMap decode_pgm(const std::string& data) {
  std::size_t pos = 0;
  // Header tokens may be separated by whitespace and '#' comments.
  const auto next_token = [&]() -> std::string {
    while (pos < data.size()) {
      const char ch = data[pos];
      if (ch == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < data.size() &&
           !std::isspace(static_cast<unsigned char>(data[pos])) && data[pos] != '#')
      ++pos;
    return data.substr(start, pos - start);
  };

  if (next_token() != "P5") throw ParseError("expected binary PGM magic P5", 1);
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw ParseError("malformed PGM header", 1);
  }
  if (width <= 0 || height <= 0)
    throw ParseError("PGM dimensions must be positive", 1);
  if (maxval != 65535)
    throw ParseError("depth PGM must be 16-bit (maxval 65535)", 1);
  ++pos;  // single whitespace byte after maxval
  const std::size_t need = static_cast<std::size_t>(width) * height * 2;
  if (data.size() - pos < need)
    throw ParseError("PGM pixel data truncated", 1);

  DepthMap depth(width, height);
  for (int i = 0; i < depth.size(); ++i) {
    const auto hi = static_cast<std::uint8_t>(data[pos + 2 * i]);
    const auto lo = static_cast<std::uint8_t>(data[pos + 2 * i + 1]);
    depth.values[i] = mm_to_depth(static_cast<std::uint16_t>(hi << 8 | lo));
  }
  return depth;
}

// ---- PNG ----

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

void save_png(const std::filesystem::path& path, const DepthMap& depth) {
  PngWriteCloser c;
  c.fp = std::fopen(path.string().c_str(), "wb");
  if (!c.fp)
    throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!c.png) throw Error(ErrorCode::kIoError, "png_create_write_struct failed");
  c.info = png_create_info_struct(c.png);
  if (!c.info) throw Error(ErrorCode::kIoError, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(c.png)))
    throw Error(ErrorCode::kIoError, "libpng write error on " + path.string());

  png_init_io(c.png, c.fp);
  png_set_IHDR(c.png, c.info, static_cast<png_uint_32>(depth.width),
               static_cast<png_uint_32>(depth.height), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(c.png, c.info);

  std::vector<std::uint8_t> row(static_cast<std::size_t>(depth.width) * 2);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const std::uint16_t mm = depth_to_mm(depth.at(x, y));
      row[2 * x] = static_cast<std::uint8_t>(mm >> 8);  // network byte order
      row[2 * x + 1] = static_cast<std::uint8_t>(mm & 0xFF);
    }
    png_write_row(c.png, row.data());
  }
  png_write_end(c.png, nullptr);
}

DepthMap load_png(const std::filesystem::path& path) {
  PngReadCloser c;
  c.fp = std::fopen(path.string().c_str(), "rb");
  if (!c.fp)
    throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for reading");
  c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!c.png) throw Error(ErrorCode::kIoError, "png_create_read_struct failed");
  c.info = png_create_info_struct(c.png);
  if (!c.info) throw Error(ErrorCode::kIoError, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(c.png)))
    throw ParseError("libpng failed to decode " + path.string(), 1);

  png_init_io(c.png, c.fp);
  png_read_info(c.png, c.info);
  const int width = static_cast<int>(png_get_image_width(c.png, c.info));
  const int height = static_cast<int>(png_get_image_height(c.png, c.info));
  if (png_get_color_type(c.png, c.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(c.png, c.info) != 16)
    throw ParseError("depth PNG must be 16-bit single-channel grayscale", 1);

  DepthMap depth(width, height);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * 2);
  for (int y = 0; y < height; ++y) {
    png_read_row(c.png, row.data(), nullptr);
    for (int x = 0; x < width; ++x) {
      const std::uint16_t mm =
          static_cast<std::uint16_t>(row[2 * x] << 8 | row[2 * x + 1]);
      depth.at(x, y) = mm_to_depth(mm);
    }
  }
  return depth;
}

// ---- JSON helpers ----

/// Wraps nlohmann parse errors as ParseError with line/column recovered
/// from the byte offset.
ordered_json parse_json(const std::string& text, const std::string& origin) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1, column = 1;
    const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(origin + ": " + e.what(), line, column);
  }
}

ordered_json vec3_to_json(const Eigen::Vector3d& v) {
  return ordered_json::array({v(0), v(1), v(2)});
}

Eigen::Vector3d json_to_vec3(const ordered_json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::kParseError, key + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string encode_doubles(const std::vector<double>& values) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(values.size() * 8);
  for (double v : values) put_f64le(bytes, v);
  return base64_encode(bytes.data(), bytes.size());
}

std::vector<double> decode_doubles(const std::string& text, std::size_t expect,
                                   const std::string& key) {
  const std::vector<std::uint8_t> bytes = base64_decode(text);
  if (bytes.size() != expect * 8)
    throw Error(ErrorCode::kParseError,
                key + ": expected " + std::to_string(expect * 8) + " bytes, got " +
                    std::to_string(bytes.size()));
  std::vector<double> values(expect);
  for (std::size_t i = 0; i < expect; ++i) {
    values[i] = get_f64le(bytes.data() + 8 * i);
    if (!std::isfinite(values[i]))
      throw Error(ErrorCode::kParseError, key + ": non-finite value at index " +
                                              std::to_string(i));
  }
  return values;
}

ordered_json scene_config_to_json(const SceneConfig& cfg) {
  ordered_json j;
  j["bounds_min"] = vec3_to_json(cfg.bounds.min());
  j["bounds_max"] = vec3_to_json(cfg.bounds.max());
  j["depth_min"] = cfg.depth_min;
  j["depth_max"] = cfg.depth_max;
  j["width"] = cfg.width;
  j["height"] = cfg.height;
  j["intrinsics"] = {{"fx", cfg.intrinsics.fx},
                     {"fy", cfg.intrinsics.fy},
                     {"cx", cfg.intrinsics.cx},
                     {"cy", cfg.intrinsics.cy}};
  return j;
}

SceneConfig scene_config_from_json(const ordered_json& j) {
  SceneConfig cfg;
  if (j.contains("bounds_min"))
    cfg.bounds.min() = json_to_vec3(j.at("bounds_min"), "bounds_min");
  if (j.contains("bounds_max"))
    cfg.bounds.max() = json_to_vec3(j.at("bounds_max"), "bounds_max");
  cfg.depth_min = j.value("depth_min", cfg.depth_min);
  cfg.depth_max = j.value("depth_max", cfg.depth_max);
  cfg.width = j.value("width", cfg.width);
  cfg.height = j.value("height", cfg.height);
  if (j.contains("intrinsics")) {
    const ordered_json& k = j.at("intrinsics");
    cfg.intrinsics.fx = k.value("fx", cfg.intrinsics.fx);
    cfg.intrinsics.fy = k.value("fy", cfg.intrinsics.fy);
    cfg.intrinsics.cx = k.value("cx", cfg.intrinsics.cx);
    cfg.intrinsics.cy = k.value("cy", cfg.intrinsics.cy);
  }
  return cfg;
}

}  // namespace

std::string format_double(double x) {
  std::array<char, 40> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

void save_correspondences(const std::filesystem::path& path,
                          const CorrespondenceSet& c) {
  c.validate();
  std::string out = "ax,ay,az,bx,by,bz,w\n";
  for (int i = 0; i < c.size(); ++i) {
    const Eigen::Vector3d& a = c.camera_points[i];
    const Eigen::Vector3d& b = c.scene_points[i];
    out += format_double(a(0)) + "," + format_double(a(1)) + "," +
           format_double(a(2)) + "," + format_double(b(0)) + "," +
           format_double(b(1)) + "," + format_double(b(2)) + "," +
           format_double(c.weights(i)) + "\n";
  }
  write_file(path, out);
}

CorrespondenceSet load_correspondences(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const std::vector<Line> lines = split_lines(text);
  if (lines.empty() || lines[0].text != "ax,ay,az,bx,by,bz,w")
    throw ParseError("expected header ax,ay,az,bx,by,bz,w", 1);

  CorrespondenceSet c;
  std::vector<double> weights;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto [line, number] = lines[li];
    if (line.empty()) continue;
    std::array<double, 7> fields{};
    std::size_t pos = 0;
    for (int f = 0; f < 7; ++f) {
      const std::size_t used =
          parse_double(line.data() + pos, line.data() + line.size(), fields[f]);
      if (used == 0)
        throw ParseError("expected a number", number, static_cast<int>(pos) + 1);
      pos += used;
      if (!std::isfinite(fields[f]))
        throw ParseError("non-finite value", number, static_cast<int>(pos) + 1);
      if (f < 6) {
        if (pos >= line.size() || line[pos] != ',')
          throw ParseError("expected ','", number, static_cast<int>(pos) + 1);
        ++pos;
      }
    }
    if (pos != line.size())
      throw ParseError("trailing characters after 7 fields", number,
                       static_cast<int>(pos) + 1);
    if (fields[6] < 0.0)
      throw ParseError("weight must be nonnegative", number);
    c.camera_points.emplace_back(fields[0], fields[1], fields[2]);
    c.scene_points.emplace_back(fields[3], fields[4], fields[5]);
    weights.push_back(fields[6]);
  }
  c.weights = Eigen::Map<Eigen::VectorXd>(weights.data(),
                                          static_cast<Eigen::Index>(weights.size()));
  return c;
}

void save_weights(const std::filesystem::path& path, const Eigen::VectorXd& w) {
  std::string out;
  for (Eigen::Index i = 0; i < w.size(); ++i) out += format_double(w(i)) + "\n";
  write_file(path, out);
}

Eigen::VectorXd load_weights(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<double> values;
  for (const auto& [line, number] : split_lines(text)) {
    if (line.empty()) continue;
    double v = 0.0;
    const std::size_t used = parse_double(line.data(), line.data() + line.size(), v);
    if (used != line.size()) throw ParseError("expected a single number", number);
    if (!std::isfinite(v)) throw ParseError("non-finite weight", number);
    if (v < 0.0) throw ParseError("weight must be nonnegative", number);
    values.push_back(v);
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<Eigen::Index>(values.size()));
}

void save_pose_file(const std::filesystem::path& path, const Pose& pose) {
  const Eigen::Matrix4d m = pose.homogeneous();
  std::string out;
  for (int r = 0; r < 4; ++r) {
    for (int col = 0; col < 4; ++col) {
      if (col) out += " ";
      out += format_double(m(r, col));
    }
    out += "\n";
  }
  write_file(path, out);
}

PoseLoadResult load_pose_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Eigen::Matrix4d m;
  int count = 0;
  for (const auto& [line, number] : split_lines(text)) {
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      if (pos == line.size()) break;
      if (count >= 16)
        throw ParseError("more than 16 matrix entries", number,
                         static_cast<int>(pos) + 1);
      double v = 0.0;
      const std::size_t used =
          parse_double(line.data() + pos, line.data() + line.size(), v);
      if (used == 0)
        throw ParseError("expected a number", number, static_cast<int>(pos) + 1);
      if (!std::isfinite(v))
        throw ParseError("non-finite matrix entry", number,
                         static_cast<int>(pos) + 1);
      m(count / 4, count % 4) = v;
      ++count;
      pos += used;
    }
  }
  if (count != 16)
    throw ParseError("expected 16 matrix entries, found " + std::to_string(count), 1);

  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9)
    throw ParseError("bottom row must be 0 0 0 1", 4);

  PoseLoadResult result;
  result.pose.rotation = m.topLeftCorner<3, 3>();
  result.pose.translation = m.topRightCorner<3, 1>();
  result.rotation_defect = result.pose.rotation_defect();
  if (result.rotation_defect > 1e-3)
    throw ParseError("rotation block is not a rotation (defect " +
                         format_double(result.rotation_defect) +
                         " exceeds 1e-3; reflections are rejected)",
                     1);
  if (result.rotation_defect > 1e-6) {
    // Tolerated but noisy: project to the nearest proper rotation so the
    // Pose invariants hold downstream.
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
        result.pose.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double d =
        (svd.matrixU() * svd.matrixV().transpose()).determinant() >= 0.0 ? 1.0
                                                                         : -1.0;
    result.pose.rotation = svd.matrixU() * Eigen::Vector3d(1.0, 1.0, d).asDiagonal() *
                           svd.matrixV().transpose();
    result.warning = true;
  }
  return result;
}

void save_depth_image(const std::filesystem::path& path, const DepthMap& depth) {
  if (depth.width <= 0 || depth.height <= 0)
    throw Error(ErrorCode::kInvalidArgument, "depth image dimensions must be positive");
  const std::string ext = path.extension().string();
  if (ext == ".pgm")
    write_file(path, encode_pgm(depth));
  else if (ext == ".png")
    save_png(path, depth);
  else
    throw Error(ErrorCode::kInvalidArgument,
                "unsupported depth image extension '" + ext + "' (use .pgm or .png)");
}

DepthMap load_depth_image(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() >= 4 && static_cast<unsigned char>(data[0]) == 0x89 &&
      data[1] == 'P' && data[2] == 'N' && data[3] == 'G')
    return load_png(path);
  if (data.size() >= 2 && data[0] == 'P' && data[1] == '5') return decode_pgm(data);
  throw ParseError("not a PNG or binary PGM depth image", 1);
}

void save_frame(const std::filesystem::path& path, const FrameSample& f) {
  ordered_json j;
  j["format"] = "rigidpose-frame";
  j["version"] = 1;
  j["config"] = scene_config_to_json(f.config);
  std::vector<double> rot_rows;
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col) rot_rows.push_back(f.gt_pose.rotation(r, col));
  j["gt_pose"]["rotation"] = rot_rows;  // row-major
  j["gt_pose"]["translation"] = vec3_to_json(f.gt_pose.translation);
  j["gt_coords_mean_offset"] = vec3_to_json(f.gt_coords.mean_offset);
  j["pred_coords_mean_offset"] = vec3_to_json(f.pred_coords.mean_offset);

  const auto coords_flat = [](const SceneCoordinateMap& m) {
    std::vector<double> flat;
    flat.reserve(m.values.size() * 3);
    for (const Eigen::Vector3d& v : m.values)
      for (int k = 0; k < 3; ++k) flat.push_back(v(k));
    return flat;
  };
  ordered_json grids;
  grids["gt_depth"] = encode_doubles(f.gt_depth.values);
  grids["gt_coords"] = encode_doubles(coords_flat(f.gt_coords));
  grids["pred_depth"] = encode_doubles(f.pred_depth.values);
  grids["pred_coords"] = encode_doubles(coords_flat(f.pred_coords));
  grids["outlier_mask"] = base64_encode(f.outlier_mask.data(), f.outlier_mask.size());
  grids["validity_mask"] =
      base64_encode(f.validity_mask.data(), f.validity_mask.size());
  j["grids"] = std::move(grids);

  write_file(path, j.dump(2) + "\n");
}

FrameSample load_frame(const std::filesystem::path& path) {
  const ordered_json j = parse_json(read_file(path), path.string());
  try {
    if (j.value("format", "") != std::string("rigidpose-frame"))
      throw Error(ErrorCode::kParseError,
                  path.string() + ": missing rigidpose-frame format tag");

    FrameSample f;
    f.config = scene_config_from_json(j.at("config"));
    f.config.validate();
    const int n = f.config.width * f.config.height;

    const auto& pose = j.at("gt_pose");
    const auto rot = pose.at("rotation").get<std::vector<double>>();
    if (rot.size() != 9)
      throw Error(ErrorCode::kParseError, "gt_pose.rotation must have 9 entries");
    for (int i = 0; i < 9; ++i) f.gt_pose.rotation(i / 3, i % 3) = rot[i];
    f.gt_pose.translation = json_to_vec3(pose.at("translation"), "translation");

    const auto& grids = j.at("grids");
    const auto load_depth_grid = [&](const char* key) {
      DepthMap m(f.config.width, f.config.height);
      m.values = decode_doubles(grids.at(key).get<std::string>(),
                                static_cast<std::size_t>(n), key);
      return m;
    };
    const auto load_coord_grid = [&](const char* key) {
      SceneCoordinateMap m(f.config.width, f.config.height);
      const std::vector<double> flat = decode_doubles(
          grids.at(key).get<std::string>(), static_cast<std::size_t>(n) * 3, key);
      for (int i = 0; i < n; ++i)
        m.values[i] = Eigen::Vector3d(flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]);
      return m;
    };
    const auto load_mask = [&](const char* key) {
      const std::vector<std::uint8_t> bytes =
          base64_decode(grids.at(key).get<std::string>());
      if (static_cast<int>(bytes.size()) != n)
        throw Error(ErrorCode::kParseError,
                    std::string(key) + ": expected " + std::to_string(n) + " bytes");
      return MaskGrid(bytes.begin(), bytes.end());
    };

    f.gt_depth = load_depth_grid("gt_depth");
    f.pred_depth = load_depth_grid("pred_depth");
    f.gt_coords = load_coord_grid("gt_coords");
    f.pred_coords = load_coord_grid("pred_coords");
    f.gt_coords.mean_offset =
        json_to_vec3(j.at("gt_coords_mean_offset"), "gt_coords_mean_offset");
    f.pred_coords.mean_offset =
        json_to_vec3(j.at("pred_coords_mean_offset"), "pred_coords_mean_offset");
    f.outlier_mask = load_mask("outlier_mask");
    f.validity_mask = load_mask("validity_mask");
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

SimulationConfig load_simulation_config(const std::filesystem::path& path) {
  const ordered_json j = parse_json(read_file(path), path.string());
  SimulationConfig cfg;
  try {
    if (j.contains("scene")) cfg.scene = scene_config_from_json(j.at("scene"));
    if (j.contains("noise")) {
      const ordered_json& n = j.at("noise");
      cfg.noise.depth_sigma = n.value("depth_sigma", cfg.noise.depth_sigma);
      cfg.noise.coord_sigma = n.value("coord_sigma", cfg.noise.coord_sigma);
      cfg.noise.outlier_fraction =
          n.value("outlier_fraction", cfg.noise.outlier_fraction);
      cfg.noise.invalid_fraction =
          n.value("invalid_fraction", cfg.noise.invalid_fraction);
      cfg.noise.seed = n.value("seed", cfg.noise.seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  cfg.scene.validate();
  cfg.noise.validate();
  return cfg;
}

OptimizerConfig load_optimizer_config(const std::filesystem::path& path) {
  const ordered_json j = parse_json(read_file(path), path.string());
  OptimizerConfig cfg;
  try {
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.eps = j.value("eps", cfg.eps);
    cfg.point_refinement_rate =
        j.value("point_refinement_rate", cfg.point_refinement_rate);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

SceneCoordinateMap depth_to_scene_coords(const DepthMap& depth, const Pose& pose,
                                         const CameraIntrinsics& intr) {
  intr.validate();
  SceneCoordinateMap out(depth.width, depth.height);
  int valid = 0;
  for (int y = 0; y < depth.height; ++y)
    for (int x = 0; x < depth.width; ++x) {
      const int idx = depth.index(x, y);
      if (!depth.valid(idx)) continue;
      out.values[idx] =
          transform(pose, unproject(intr, Eigen::Vector2d(x, y), depth.values[idx]));
      ++valid;
    }
  if (valid == 0)
    throw Error(ErrorCode::kEmptyMask, "depth map has no valid pixel");
  return out;
}

namespace {
constexpr char kBase64Chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::uint8_t* data, std::size_t size) {
  std::string out;
  out.reserve((size + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= size; i += 3) {
    const std::uint32_t v = data[i] << 16 | data[i + 1] << 8 | data[i + 2];
    out.push_back(kBase64Chars[v >> 18]);
    out.push_back(kBase64Chars[(v >> 12) & 63]);
    out.push_back(kBase64Chars[(v >> 6) & 63]);
    out.push_back(kBase64Chars[v & 63]);
  }
  if (i < size) {
    const bool two = i + 2 == size;
    const std::uint32_t v = data[i] << 16 | (two ? data[i + 1] << 8 : 0);
    out.push_back(kBase64Chars[v >> 18]);
    out.push_back(kBase64Chars[(v >> 12) & 63]);
    out.push_back(two ? kBase64Chars[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0)
    throw Error(ErrorCode::kParseError, "base64 length must be a multiple of 4");
  static const auto value_of = [] {
    std::array<std::int8_t, 256> table;
    table.fill(-1);
    for (int i = 0; i < 64; ++i)
      table[static_cast<unsigned char>(kBase64Chars[i])] = static_cast<std::int8_t>(i);
    return table;
  }();

  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      const char ch = text[i + k];
      if (ch == '=') {
        if (i + 4 != text.size() || k < 2)
          throw Error(ErrorCode::kParseError, "misplaced base64 padding");
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0)
        throw Error(ErrorCode::kParseError, "base64 data after padding");
      const std::int8_t digit = value_of[static_cast<unsigned char>(ch)];
      if (digit < 0)
        throw Error(ErrorCode::kParseError,
                    "invalid base64 character at offset " + std::to_string(i + k));
      v = v << 6 | static_cast<std::uint32_t>(digit);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

}  // namespace rigidpose
