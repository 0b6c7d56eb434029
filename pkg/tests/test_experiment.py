"""Experiment harness and mask-metric tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curbalert.experiment import (
    AgentPolicy,
    Condition,
    DimensionMismatch,
    EmptyGroundTruth,
    EmptyUnion,
    ExperimentConfig,
    NonTermination,
    StopOnContact,
    StopOnMediumAlert,
    iou,
    pixel_accuracy,
    results_to_csv,
    run_experiment,
    run_trial,
)
from curbalert.mask import CurbMask
from curbalert.pipeline import OrientationMode

CONFIG = ExperimentConfig()
MEDIUM = AgentPolicy(StopOnMediumAlert())
SONIF = OrientationMode.SONIFICATION


# --- single trials -------------------------------------------------------------


def test_medium_stop_approach_zero():
    # 300 - 62*2.5 = 145: the first tick whose distance drops below 146
    r = run_trial(MEDIUM, 0.0, SONIF, CONFIG, seed=1)
    assert r.safety_window_cm == pytest.approx(145.0, abs=1e-9)
    assert r.condition is Condition.BEEPS_SONIFICATION


def test_medium_stop_bounds_all_approaches():
    step = CONFIG.speed_cm_s * CONFIG.tick_s
    for approach in (0.0, 30.0, 60.0):
        r = run_trial(MEDIUM, approach, SONIF, CONFIG, seed=2)
        assert 146.0 - step < r.safety_window_cm <= 146.0


def test_cane_contact_exact_reach():
    for approach in (0.0, 30.0, 60.0):
        r = run_trial(AgentPolicy(StopOnContact(100.0)), approach, None, CONFIG, seed=3)
        assert r.safety_window_cm == pytest.approx(100.0, abs=1e-9)
        assert r.condition is Condition.CANE_ALONE


def test_cane_contact_zero_reach():
    r = run_trial(AgentPolicy(StopOnContact(0.0)), 0.0, None, CONFIG, seed=4)
    assert 0.0 <= r.safety_window_cm < CONFIG.speed_cm_s * CONFIG.tick_s


def test_orientation_error_quantization_bound():
    for mode in (OrientationMode.SONIFICATION, OrientationMode.SPEECH):
        r = run_trial(MEDIUM, 30.0, mode, CONFIG, seed=5)
        assert r.orientation_error_deg <= 2.5


def test_orientation_error_all_approaches():
    for approach in (0.0, 30.0, 60.0):
        r = run_trial(MEDIUM, approach, SONIF, CONFIG, seed=6)
        assert r.orientation_error_deg <= 2.5
        rc = run_trial(AgentPolicy(StopOnContact(100.0)), approach, None, CONFIG, seed=6)
        assert rc.orientation_error_deg == pytest.approx(0.0, abs=1e-9)


def test_noise_changes_error_but_not_window():
    noisy = AgentPolicy(StopOnMediumAlert(), sigma_deg=4.0)
    clean = run_trial(MEDIUM, 30.0, SONIF, CONFIG, seed=7)
    with_noise = run_trial(noisy, 30.0, SONIF, CONFIG, seed=7)
    assert with_noise.safety_window_cm == clean.safety_window_cm
    assert with_noise.orientation_error_deg != clean.orientation_error_deg
    again = run_trial(noisy, 30.0, SONIF, CONFIG, seed=7)
    assert again == with_noise  # seeded noise is reproducible


def test_reaction_delay_shrinks_window():
    delayed = ExperimentConfig(reaction_delay_s=0.2)
    r = run_trial(MEDIUM, 0.0, SONIF, delayed, seed=8)
    assert r.safety_window_cm == pytest.approx(145.0 - 50.0 * 0.2, abs=1e-9)


def test_walking_away_never_terminates():
    with pytest.raises(NonTermination):
        run_trial(AgentPolicy(StopOnContact(0.0)), 170.0, None, CONFIG, seed=9)


# --- grid ------------------------------------------------------------------------


def test_grid_shape_and_determinism():
    rows_a = run_experiment(repetitions=2, base_seed=11, config=CONFIG)
    rows_b = run_experiment(repetitions=2, base_seed=11, config=CONFIG)
    assert len(rows_a) == 3 * 3 * 2
    assert results_to_csv(rows_a).encode() == results_to_csv(rows_b).encode()
    reps = {(r.condition, r.approach_deg, r.repetition) for r in rows_a}
    assert len(reps) == 18


def test_grid_csv_schema():
    rows = run_experiment(
        conditions=(Condition.CANE_ALONE,), approach_degs=(0.0,), repetitions=2, config=CONFIG
    )
    csv = results_to_csv(rows)
    lines = csv.splitlines()
    assert lines[0] == "condition,approach_deg,repetition,seed,safety_window_cm,orientation_error_deg"
    assert len(lines) == 3
    assert csv.endswith("\n") and "\r" not in csv
    cells = lines[1].split(",")
    assert cells[0] == "cane_alone" and cells[1] == "0" and cells[2] == "1"
    float(cells[4]), float(cells[5])


def test_grid_windows_system_above_cane():
    rows = run_experiment(repetitions=2, base_seed=3, config=CONFIG)
    system = [r.result.safety_window_cm for r in rows if r.condition is not Condition.CANE_ALONE]
    cane = [r.result.safety_window_cm for r in rows if r.condition is Condition.CANE_ALONE]
    assert min(system) > max(cane)


def test_grid_orientation_parity_with_noise():
    cfg = ExperimentConfig(sigma_deg=3.0)
    rows = run_experiment(repetitions=6, base_seed=21, config=cfg)
    by_condition = {}
    for r in rows:
        by_condition.setdefault(r.condition, []).append(r.result.orientation_error_deg)
    means = {c: float(np.mean(v)) for c, v in by_condition.items()}
    spread = max(means.values()) - min(means.values())
    assert spread < 5.0


def test_failed_trials_become_nan_rows():
    rows = run_experiment(
        conditions=(Condition.CANE_ALONE,), approach_degs=(170.0,), repetitions=1, config=CONFIG
    )
    assert len(rows) == 1 and rows[0].result is None and rows[0].error
    csv = results_to_csv(rows)
    assert csv.splitlines()[1].endswith(",nan,nan")


# --- metrics ------------------------------------------------------------------------


def M(rows):
    return CurbMask(np.array(rows, np.uint8))


def test_pixel_accuracy_examples():
    gt = M([[1, 1, 1, 1], [1, 1, 1, 1]])
    assert pixel_accuracy(gt, gt) == 1.0
    half = M([[1, 1, 0, 0], [1, 1, 0, 0]])
    assert pixel_accuracy(half, gt) == 0.5
    disjoint = M([[0, 0, 0, 0], [0, 0, 0, 0]])
    disjoint2 = M([[0, 1, 0, 0], [0, 0, 0, 0]])
    assert pixel_accuracy(disjoint, gt) == 0.0
    assert pixel_accuracy(disjoint2, M([[1, 0, 0, 0], [0, 0, 0, 0]])) == 0.0


def test_iou_examples():
    a = np.zeros((4, 4), np.uint8)
    a[0:2, 0:2] = 1
    b = np.zeros((4, 4), np.uint8)
    b[0:2, 1:3] = 1
    assert iou(a, a) == 1.0
    assert iou(a, b) == pytest.approx(1.0 / 3.0)
    c = np.zeros((4, 4), np.uint8)
    c[3, 3] = 1
    assert iou(a, c) == 0.0


def test_metric_errors():
    a = np.zeros((2, 2), np.uint8)
    b = np.zeros((3, 3), np.uint8)
    with pytest.raises(DimensionMismatch):
        iou(a, b)
    with pytest.raises(DimensionMismatch):
        pixel_accuracy(a, b)
    with pytest.raises(EmptyGroundTruth):
        pixel_accuracy(np.ones((2, 2), np.uint8), a)
    with pytest.raises(EmptyUnion):
        iou(a, np.zeros((2, 2), np.uint8))


def test_iou_symmetric():
    rng = np.random.default_rng(0)
    a = (rng.random((8, 8)) < 0.4).astype(np.uint8)
    b = (rng.random((8, 8)) < 0.4).astype(np.uint8)
    assert iou(a, b) == iou(b, a)


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=100, deadline=None)
def test_metrics_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    pred = (rng.random((16, 16)) < 0.3).astype(np.uint8)
    gt = (rng.random((16, 16)) < 0.3).astype(np.uint8)

    inter = correct = union = gt_total = 0
    for r in range(16):
        for c in range(16):
            p, g = pred[r, c] != 0, gt[r, c] != 0
            inter += p and g
            union += p or g
            gt_total += g
            correct += p and g
    if gt_total:
        assert pixel_accuracy(pred, gt) == correct / gt_total
    if union:
        assert iou(pred, gt) == inter / union


def test_multilabel_masks_are_binary_for_metrics():
    pred = M([[2, 0], [0, 3]])
    gt = M([[1, 0], [0, 1]])
    assert pixel_accuracy(pred, gt) == 1.0
    assert iou(pred, gt) == 1.0
