"""Human-to-robot grasp retargeting and force-closure annotation."""

__version__ = "0.1.0"

from ._backend import name as kernel_backend
from .actuation import (
    ActuatorCommand,
    CouplingMatrix,
    actuators_to_joints,
    joints_to_actuators,
    pseudoinverse,
    pseudoinverse_normal,
)
from .closure import (
    ClosureVerdict,
    Contact,
    FrictionCone,
    WrenchMatrix,
    check_force_closure,
    cone_edges,
    cone_half_angle,
    contacts_closure,
    grasp_matrix,
    tangent_basis,
)
from .dataset import (
    DatasetManifest,
    GraspEvalReport,
    GraspRecord,
    annotate_stream,
    dataset_stats,
    grasp_l1_error,
    split_dataset,
)
from .errors import *  # noqa: F401,F403
from .kinematics import (
    CameraIntrinsics,
    HandSkeletonLayout,
    HumanHandAngles,
    KeypointFrame,
    PalmFrame,
    abduction_angle,
    deproject,
    extract_angles,
    flexion_angle,
    palm_normal,
)
from .profile import HandProfile, load_profile
from .retarget import (
    CalibrationSet,
    MappingMatrix,
    RobotHandAngles,
    apply_mapping,
    fit_mapping,
    mapping_error,
)
