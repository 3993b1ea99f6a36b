"""Desk-scale simulator of an aerial push-button with reflected-ultrasound feedback."""

from .acoustics import (
    DiscTarget,
    DriveState,
    FieldGrid,
    FocusSpec,
    GridSpec,
    boundary_residual,
    field_grid,
    focal_metrics,
    focus_phases,
    mirror_point,
    pressure_at,
    radiation_force_disc,
    wavelength,
)
from .controller import (
    BudgetCheck,
    Condition,
    ControllerState,
    FeedbackConfig,
    FocusCommand,
    burst_envelope,
    check_latency_budget,
    controller_step,
    measure_latency,
)
from .geometry import (
    ArrayPose,
    ReflectingPlane,
    Scene,
    TransducerLattice,
    build_lattice,
    default_scene,
    load_scene,
    pose_array,
    save_scene,
)
from .harness import (
    SessionLog,
    SweepResult,
    TouchMode,
    Trajectory,
    add_chatter,
    dominant_period,
    run_force_sweep,
    run_session,
    sinusoid_trajectory,
)
from .sensing import (
    BeamModel,
    ButtonEvent,
    DetectorState,
    EventKind,
    FingerModel,
    Region,
    detector_step,
    occlusion,
    photovoltage,
)

__version__ = "0.1.0"
