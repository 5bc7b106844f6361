"""v2sg: latent-space face reenactment toolkit.

Transfers rigid position, head pose, and local facial motion from driving
video latent trajectories onto a single reference identity, via an
input-feature transform, restricted W+ optimization, and per-channel S-space
blending over a pluggable StyleGAN3-shaped generator.
"""

from .backend import GeneratorSpec, ToyGenerator, load_pretrained, toy_generator
from .blend import (
    FrameBlendInput,
    baseline_code,
    blend_frame,
    render_frame,
    render_video,
    style_slices,
    video_blend_inputs,
)
from .container import (
    load_trajectory,
    read_trajectory,
    save_trajectory,
    trajectory_from_bytes,
    trajectory_to_bytes,
    write_trajectory,
)
from .metrics import MetricReport, consistency_protocol, fid, identity_distance, keypoint_distance
from .mining import ChannelCatalog, binarize_and_upsample, iou, mine_channels, normalize_map
from .pipeline import SessionConfig, canonical_align, ingest_video, prepare_session, run_session
from .pose import PoseMatchConfig, match_pose, pose_of_frame
from .rigid import (
    LandmarkSet,
    RigidTrack,
    compose_input_transform,
    face_axis,
    rigid_from_landmarks,
    smooth_track,
)
from .types import (
    BlendCoefficients,
    InputTransform,
    LatentTrajectory,
    LatentWPlus,
    MotionSource,
    PoseAngles,
    RigidParams,
    SChannelAddress,
    StyleVector,
)

__version__ = "0.1.0"
