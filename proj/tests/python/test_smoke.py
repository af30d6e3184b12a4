import json
import math

import numpy as np
import pytest

import conbatch


def make_cube(m=6, t=4, k=3, seed=0):
    rng = np.random.default_rng(seed)
    cube = rng.random((m, t, k)) + 0.05
    return cube / cube.sum(axis=2, keepdims=True)


def test_entropy_basics():
    assert conbatch.entropy([1.0, 0.0]) == 0.0
    assert conbatch.entropy([0.25, 0.25, 0.25, 0.25]) == pytest.approx(math.log(4))
    with pytest.raises(ValueError):
        conbatch.entropy([0.9, 0.3])


def test_conditional_entropy_matches_numpy():
    cube = make_cube()
    got = conbatch.conditional_entropy(cube, 2)
    want = float(np.mean(-(cube[2] * np.log(cube[2])).sum(axis=1)))
    assert got == pytest.approx(want, rel=1e-12)


def test_batch_mi_nonnegative_and_single_point():
    cube = make_cube()
    mi1 = conbatch.batch_mutual_information(cube, [0])
    mean = cube[0].mean(axis=0)
    want = float(-(mean * np.log(mean)).sum()) - conbatch.conditional_entropy(cube, 0)
    assert mi1 == pytest.approx(want, rel=1e-12)
    mi3 = conbatch.batch_mutual_information(cube, [0, 3, 5])
    assert mi3 >= -1e-9


def test_score_candidates_orders_disagreement_first():
    # candidate 0: draws disagree completely; candidate 1: certain everywhere
    cube = np.zeros((2, 2, 2))
    cube[0, 0] = [1.0, 0.0]
    cube[0, 1] = [0.0, 1.0]
    cube[1, 0] = [1.0, 0.0]
    cube[1, 1] = [1.0, 0.0]
    scores = conbatch.score_candidates(cube, [], [0, 1])
    assert scores[0] == pytest.approx(math.log(2), rel=1e-12)
    assert scores[1] == pytest.approx(0.0, abs=1e-12)


def test_haversine():
    assert conbatch.haversine_m(52.0, 4.5, 52.0, 4.5) == 0.0
    d = conbatch.haversine_m(51.92, 4.47, 51.93, 4.48)
    assert 1200 < d < 1400


def test_dataset_roundtrip(tmp_path):
    spec = {"n_samples": 60, "dim": 4, "class_count": 3, "split_fractions": [0.2, 0.3, 0.5]}
    out = tmp_path / "ds"
    conbatch.generate_dataset(json.dumps(spec), 7, str(out))
    findings = conbatch.validate_dataset(str(out))
    assert not [f for f in findings if f[0] == "error"]


def test_run_experiment_end_to_end():
    config = {
        "synth": {"n_samples": 80, "dim": 4, "class_count": 2,
                  "split_fractions": [0.25, 0.25, 0.5]},
        "synth_seed": 3,
        "strategy": "greedy",
        "cost": "none",
        "budget": "inf",
        "batch_size": 2,
        "iterations": 2,
        "n_draws": 5,
        "record_timing": False,
        "model": {"width": 16, "epochs": 5},
    }
    series = conbatch.run_experiment(config, seed=1)
    assert len(series["records"]) == 2
    first = series["records"][0]
    assert first["batch_size"] == 2
    assert first["cumulative_samples"] == 2
    assert 0.0 <= first["test_accuracy"] <= 1.0
    again = conbatch.run_experiment(config, seed=1)
    assert again == series
