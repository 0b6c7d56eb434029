"""Simulated replica of the curb-approach experiment, plus mask metrics.

An agent starts 3 m from the curb at an approach angle of 0/30/60 degrees and
walks forward in fixed ticks. System conditions run the full alert pipeline
on rendered masks and stop when the zone first reaches medium; the cane
baseline stops exactly when a cane tip held ``cane_reach_cm`` ahead touches
the curb. After stopping the agent reorients: system conditions turn by the
negated rounded feedback angle (plus seeded Gaussian noise), the cane
condition aligns to the oracle angle plus the same noise. Each trial records
the safety window (true distance at stop) and the residual orientation error.

Results export as CSV for external statistics; no ANOVA is computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .geometry import AlertZoneConfig, CameraModel, Zone, classify_distance
from .mask import CurbMask
from .pipeline import AlertPipeline, FrameInput, OrientationMode, SonificationEvent, SpeechEvent
from .scene import AgentPose, World, render_mask, step_agent, true_distance, true_relative_angle, wrap_angle_deg

__all__ = [
    "NonTermination",
    "Condition",
    "StopOnContact",
    "StopOnMediumAlert",
    "AgentPolicy",
    "ExperimentConfig",
    "TrialResult",
    "run_trial",
    "run_experiment",
    "results_to_csv",
    "DimensionMismatch",
    "EmptyGroundTruth",
    "EmptyUnion",
    "pixel_accuracy",
    "iou",
]


class NonTermination(RuntimeError):
    """Agent passed 50 cm beyond the curb or the trial never converged."""


class Condition(str, Enum):
    CANE_ALONE = "cane_alone"
    BEEPS_SONIFICATION = "beeps_sonification"
    BEEPS_SPEECH = "beeps_speech"


@dataclass(frozen=True)
class StopOnContact:
    cane_reach_cm: float = 100.0

    def __post_init__(self) -> None:
        if self.cane_reach_cm < 0:
            raise ValueError("cane_reach_cm must be nonnegative")


@dataclass(frozen=True)
class StopOnMediumAlert:
    pass


StopRule = StopOnContact | StopOnMediumAlert


@dataclass(frozen=True)
class AgentPolicy:
    stop: StopRule
    speed_cm_s: float = 50.0
    sigma_deg: float = 0.0

    def __post_init__(self) -> None:
        if self.speed_cm_s <= 0:
            raise ValueError("speed_cm_s must be positive")
        if self.sigma_deg < 0:
            raise ValueError("sigma_deg must be nonnegative")


@dataclass(frozen=True)
class ExperimentConfig:
    camera: CameraModel = field(default_factory=CameraModel)
    zones: AlertZoneConfig = field(default_factory=AlertZoneConfig)
    band_width_cm: float = 15.0
    start_distance_cm: float = 300.0
    speed_cm_s: float = 50.0
    tick_s: float = 0.05
    sigma_deg: float = 0.0
    cane_reach_cm: float = 100.0
    # Optional human-latency model: the agent keeps walking this long after
    # the stop trigger before halting. Not a measured value; defaults off.
    reaction_delay_s: float = 0.0


@dataclass(frozen=True)
class TrialResult:
    condition: Condition
    approach_deg: float
    safety_window_cm: float
    orientation_error_deg: float
    seed: int


def _start_world(config: ExperimentConfig, approach_deg: float) -> World:
    agent = AgentPose(0.0, config.start_distance_cm, approach_deg)
    return World(agent=agent, band_width_cm=config.band_width_cm)


def _max_ticks(config: ExperimentConfig, policy: AgentPolicy) -> int:
    step = policy.speed_cm_s * config.tick_s
    return int(math.ceil((config.start_distance_cm + 100.0) / step)) * 5


def _walk_system(
    world: World, policy: AgentPolicy, mode: OrientationMode, config: ExperimentConfig
) -> tuple[World, int | None]:
    """Walk until the pipeline-era zone reaches medium; returns the stop world
    and the last emitted feedback angle."""
    pipeline = AlertPipeline(config.camera, config.zones, mode, synth_audio=False)
    state = pipeline.initial_state()
    feedback: int | None = None
    step_cm = policy.speed_cm_s * config.tick_s
    limit = _max_ticks(config, policy)

    for k in range(limit + 1):
        if k > 0:
            world = replace(world, agent=step_agent(world.agent, step_cm, 0.0))
        frame = FrameInput(timestamp_s=k * config.tick_s, mask=render_mask(world, config.camera))
        state, out = pipeline.tick(state, frame, config.tick_s)
        for ev in out.events:
            if isinstance(ev, (SonificationEvent, SpeechEvent)):
                feedback = ev.angle_deg
        distance = true_distance(world)
        if distance < -50.0:
            raise NonTermination(f"agent passed {-distance:.1f} cm beyond the curb")
        if k > 0 and classify_distance(config.zones, max(distance, 0.0)).zone in (
            Zone.MEDIUM,
            Zone.NEAR,
        ):
            if feedback is None:
                feedback = state.last_orientation_deg
            return world, feedback
    raise NonTermination("medium alert never triggered")


def _walk_cane(
    world: World, policy: AgentPolicy, reach_cm: float, config: ExperimentConfig
) -> World:
    """Walk until the cane tip contacts the curb; the final step is cut at the
    exact contact point so the stop distance equals the cane reach."""
    step_cm = policy.speed_cm_s * config.tick_s
    limit = _max_ticks(config, policy)
    for _ in range(limit):
        d_cur = true_distance(world)
        if d_cur <= reach_cm:
            return world
        nxt = step_agent(world.agent, step_cm, 0.0)
        d_nxt = true_distance(replace(world, agent=nxt))
        if d_nxt <= reach_cm:
            frac = (d_cur - reach_cm) / (d_cur - d_nxt)
            contact = step_agent(world.agent, step_cm * frac, 0.0)
            return replace(world, agent=contact)
        world = replace(world, agent=nxt)
        if d_nxt < -50.0:
            raise NonTermination("agent passed 50 cm beyond the curb")
    raise NonTermination("cane contact never happened")


def run_trial(
    policy: AgentPolicy,
    approach_deg: float,
    mode: OrientationMode | None,
    config: ExperimentConfig,
    seed: int,
) -> TrialResult:
    """One approach-stop-reorient trial; deterministic given the seed."""
    rng = np.random.default_rng(seed)
    world = _start_world(config, approach_deg)

    if isinstance(policy.stop, StopOnMediumAlert):
        if mode is None:
            raise ValueError("system trials need an orientation mode")
        condition = (
            Condition.BEEPS_SONIFICATION
            if mode is OrientationMode.SONIFICATION
            else Condition.BEEPS_SPEECH
        )
        world, feedback = _walk_system(world, policy, mode, config)
        turn = -(feedback or 0)
    else:
        condition = Condition.CANE_ALONE
        world, feedback = _walk_cane(world, policy, policy.stop.cane_reach_cm, config), None
        turn = -true_relative_angle(world)

    if config.reaction_delay_s > 0:
        extra = policy.speed_cm_s * config.reaction_delay_s
        world = replace(world, agent=step_agent(world.agent, extra, 0.0))

    safety_window = true_distance(world)
    noise = float(rng.normal(0.0, policy.sigma_deg))
    world = replace(world, agent=step_agent(world.agent, 0.0, turn + noise))
    error = abs(wrap_angle_deg(true_relative_angle(world)))

    return TrialResult(
        condition=condition,
        approach_deg=approach_deg,
        safety_window_cm=safety_window,
        orientation_error_deg=error,
        seed=seed,
    )


_CONDITION_MODE = {
    Condition.CANE_ALONE: None,
    Condition.BEEPS_SONIFICATION: OrientationMode.SONIFICATION,
    Condition.BEEPS_SPEECH: OrientationMode.SPEECH,
}

CSV_HEADER = "condition,approach_deg,repetition,seed,safety_window_cm,orientation_error_deg"


@dataclass(frozen=True)
class TrialRow:
    condition: Condition
    approach_deg: float
    repetition: int
    seed: int
    result: TrialResult | None
    error: str | None = None


def run_experiment(
    conditions=tuple(Condition),
    approach_degs=(0.0, 30.0, 60.0),
    repetitions: int = 10,
    base_seed: int = 42,
    config: ExperimentConfig | None = None,
) -> list[TrialRow]:
    """Full grid, one row per condition x angle x repetition, in grid order.

    Per-trial seeds derive from ``base_seed`` plus the grid index, so the same
    arguments always reproduce the same rows; failed trials become rows with
    NaN measurements rather than aborting the grid.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    config = config or ExperimentConfig()
    rows: list[TrialRow] = []
    index = 0
    for condition in conditions:
        condition = Condition(condition)
        stop: StopRule = (
            StopOnContact(config.cane_reach_cm)
            if condition is Condition.CANE_ALONE
            else StopOnMediumAlert()
        )
        policy = AgentPolicy(stop=stop, speed_cm_s=config.speed_cm_s, sigma_deg=config.sigma_deg)
        for approach in approach_degs:
            for rep in range(1, repetitions + 1):
                seed = base_seed + index
                index += 1
                try:
                    result = run_trial(policy, approach, _CONDITION_MODE[condition], config, seed)
                    rows.append(TrialRow(condition, approach, rep, seed, result))
                except NonTermination as exc:
                    rows.append(TrialRow(condition, approach, rep, seed, None, str(exc)))
    return rows


def results_to_csv(rows: list[TrialRow]) -> str:
    """LF-terminated CSV with a fixed header and '.' decimal separator."""
    out = [CSV_HEADER]
    for row in rows:
        if row.result is not None:
            window = f"{row.result.safety_window_cm:.6f}"
            error = f"{row.result.orientation_error_deg:.6f}"
        else:
            window = error = "nan"
        out.append(
            f"{row.condition.value},{row.approach_deg:g},{row.repetition},{row.seed},{window},{error}"
        )
    return "".join(line + "\n" for line in out)


class DimensionMismatch(ValueError):
    """Prediction and ground truth differ in shape."""


class EmptyGroundTruth(ValueError):
    """Ground truth contains no curb pixel."""


class EmptyUnion(ValueError):
    """Neither mask contains a curb pixel."""


def _binary(mask) -> np.ndarray:
    px = mask.pixels if isinstance(mask, CurbMask) else np.asarray(mask)
    return px != 0


def pixel_accuracy(pred, gt) -> float:
    """Fraction of ground-truth curb pixels the prediction covers.

    A recall-style ratio: correctly predicted curb pixels over total
    ground-truth curb pixels.
    """
    p, g = _binary(pred), _binary(gt)
    if p.shape != g.shape:
        raise DimensionMismatch(f"shapes differ: {p.shape} vs {g.shape}")
    total = int(g.sum())
    if total == 0:
        raise EmptyGroundTruth("ground truth has no curb pixels")
    return float(int((p & g).sum()) / total)


def iou(pred, gt) -> float:
    """Intersection over union of the two curb masks."""
    p, g = _binary(pred), _binary(gt)
    if p.shape != g.shape:
        raise DimensionMismatch(f"shapes differ: {p.shape} vs {g.shape}")
    union = int((p | g).sum())
    if union == 0:
        raise EmptyUnion("both masks are empty")
    return float(int((p & g).sum()) / union)
