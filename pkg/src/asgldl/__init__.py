"""Anisotropic spherical Gaussian label-distribution learning for 3-D orientation."""

from .asg import AsgParams, NormalizationMode, PoseDistribution, decode_pose, decode_vector, encode
from .lattice import SphereLattice, fibonacci_sphere
from .loss import HeadOutput, LossBreakdown, head_loss, head_loss_grad
from .rotation import (AxisAngle, EulerAngles, Quaternion, axis_angle_to_matrix, euler_to_matrix,
                       geodesic_distance_deg, matrix_to_axis_angle, matrix_to_euler, matrix_to_quat,
                       project_to_so3, quat_to_matrix)

__version__ = "0.1.0"
