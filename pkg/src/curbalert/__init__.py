"""Audio curb alerting at desk scale.

Segmentation masks (real or simulated) flow through alert-zone
classification, orientation estimation and multi-channel audio rendering;
a virtual world plus experiment harness replays the approach-and-stop
protocol with simulated agents, and a websocket service streams the live
session to an interactive client.
"""

from .audio import (
    BadAngle,
    BeepSpec,
    ChannelMismatch,
    NoAlert,
    PcmClip,
    beep_params,
    orientation_gains,
    orientation_image,
    pan_from_x,
    proximity_gains,
    sonify_image,
    spatialize,
    speech_text,
    synth_beep,
    write_wav,
)
from .config import AppConfig, WorldParams, load_config
from .experiment import (
    AgentPolicy,
    Condition,
    ExperimentConfig,
    StopOnContact,
    StopOnMediumAlert,
    TrialResult,
    iou,
    pixel_accuracy,
    results_to_csv,
    run_experiment,
    run_trial,
)
from .geometry import (
    AlertZoneConfig,
    CameraModel,
    HorizonError,
    OutOfFrame,
    Zone,
    ZoneLevel,
    classify_distance,
    ground_distance_to_row,
    row_to_ground_distance,
    sector_center_px,
    zone_radii_px,
)
from .mask import (
    CurbMask,
    DegenerateContour,
    EmptyInstance,
    LowerContour,
    NoCurb,
    OrientationEstimate,
    average_slope,
    closest_pixel,
    contour_turn_angle,
    curb_distance_cm,
    lower_contour,
    read_pgm,
    select_closest_curb,
    write_pgm,
)
from .pipeline import (
    AlertPipeline,
    AlertState,
    FrameInput,
    OrientationMode,
    TickOutput,
    run_offline,
)
from .scene import (
    AgentPose,
    World,
    apply_mask_noise,
    render_mask,
    step_agent,
    true_distance,
    true_relative_angle,
)

__version__ = "0.1.0"
