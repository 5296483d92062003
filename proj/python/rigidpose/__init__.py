"""Rigid pose estimation from weighted 3D-3D correspondences."""

__version__ = "0.1.0"

from rigidpose._core import (
    CameraIntrinsics,
    FrameSample,
    GradCheckReport,
    NoiseModel,
    Pose,
    PoseError,
    RigidPoseError,
    SceneConfig,
    aggregate,
    compose,
    corrupt,
    endpoint_errors,
    generate_frame,
    grad_check,
    invert,
    kabsch_vjp,
    l_pose,
    load_frame,
    load_pose_file,
    pose_error,
    rotation_angle_deg,
    save_frame,
    save_pose_file,
    to_correspondences,
    transform,
    unproject,
    weighted_kabsch,
    weighted_objective,
)

__all__ = [
    "CameraIntrinsics",
    "FrameSample",
    "GradCheckReport",
    "NoiseModel",
    "Pose",
    "PoseError",
    "RigidPoseError",
    "SceneConfig",
    "aggregate",
    "compose",
    "corrupt",
    "endpoint_errors",
    "generate_frame",
    "grad_check",
    "invert",
    "kabsch_vjp",
    "l_pose",
    "load_frame",
    "load_pose_file",
    "pose_error",
    "rotation_angle_deg",
    "save_frame",
    "save_pose_file",
    "to_correspondences",
    "transform",
    "unproject",
    "weighted_kabsch",
    "weighted_objective",
]
