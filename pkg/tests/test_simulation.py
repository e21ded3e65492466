import os

import numpy as np
import pytest

from herdwatch.callbacks import BaseCallback, CheckpointCallback
from herdwatch.common.errors import MalformedInputError
from herdwatch.common.logging_ import Logger
from herdwatch.reid.bank import load_banks
from herdwatch.settings import (
    EmbeddingModelSettings,
    ReidConfig,
    ScenarioConfig,
    SweepGrid,
)
from herdwatch.simulation.harness import correct_stream, run_pipeline, sensitivity_sweep
from herdwatch.simulation.scenario import cluster_centers, generate, grid_cells, seed_banks

logger = Logger(verbose=False)


def _config(switch_plan=(), noise_sigma=0.0, seed=0, **kwargs):
    return ScenarioConfig(
        switch_plan=list(switch_plan),
        embedding_model=EmbeddingModelSettings(dim=64, noise_sigma=noise_sigma),
        seed=seed,
        **kwargs,
    )


class StopAfter(BaseCallback):
    def __init__(self, logger, frame):
        super().__init__(logger)
        self.frame = frame

    def _on_step(self) -> bool:
        return self.step < self.frame


def test_scenario_is_deterministic():
    cfg = _config([(51, 1, 2)], noise_sigma=0.05, seed=42)
    a, b = generate(cfg), generate(cfg)
    assert a.ground_truth == b.ground_truth
    assert a.corrupted == b.corrupted
    assert a.behaviours == b.behaviours
    for key in a.true_embeddings:
        np.testing.assert_array_equal(a.true_embeddings[key], b.true_embeddings[key])

    c = generate(_config([(51, 1, 2)], noise_sigma=0.05, seed=43))
    assert a.ground_truth != c.ground_truth


def test_scenario_layout():
    cfg = _config(num_frames=50)
    scenario = generate(cfg)
    cells = grid_cells(cfg)
    assert len(cells) == cfg.num_identities
    assert len(scenario.ground_truth) == cfg.num_identities * 50

    for record in scenario.ground_truth:
        x0, y0, w, h = cells[record.identity_id - 1]
        box = record.box
        assert x0 <= box.x_left and box.x_left + box.width <= x0 + w + 1e-9
        assert y0 <= box.y_top and box.y_top + box.height <= y0 + h + 1e-9
    assert scenario.timestamp(1) == 0.0
    assert scenario.timestamp(6) == pytest.approx(1.0)


def test_overcrowded_arena():
    # 10 x 10 cells of 128 x 72 px cannot hold 120 x 80 boxes
    cfg = ScenarioConfig(num_identities=100, embedding_model=EmbeddingModelSettings(dim=128))
    with pytest.raises(MalformedInputError):
        grid_cells(cfg)
    assert len(grid_cells(_config(num_identities=60))) == 60


@pytest.mark.parametrize("separation", [90.0, 60.0, 30.0])
def test_cluster_centres(separation):
    rng = np.random.default_rng(0)
    centers = cluster_centers(rng, 5, 32, separation)
    gram = centers @ centers.T
    np.testing.assert_allclose(np.diag(gram), 1.0)
    off_diagonal = gram[~np.eye(5, dtype=bool)]
    np.testing.assert_allclose(off_diagonal, max(np.cos(np.radians(separation)), 0.0), atol=1e-12)


def test_swap_corrupts_labels():
    scenario = generate(_config([(51, 1, 2)]))
    assert scenario.injected_switch_count == 1
    assert scenario.true_identity_of[(50, 1)] == 1
    assert scenario.true_identity_of[(51, 1)] == 2
    assert scenario.true_identity_of[(51, 2)] == 1
    assert scenario.corrupted.get(51, 1).box == scenario.ground_truth.get(51, 2).box


def test_seed_banks():
    scenario = generate(_config(noise_sigma=0.1))
    banks = seed_banks(scenario, warmup_frames=5)
    assert sorted(banks) == list(range(1, 9))
    entry = banks[3].latest
    assert entry.timestamp == scenario.timestamp(5)
    assert np.linalg.norm(entry.embedding.values) == pytest.approx(1.0)
    assert entry.behaviour_histogram.sum() == pytest.approx(1.0)
    with pytest.raises(MalformedInputError):
        seed_banks(scenario, warmup_frames=0)


def test_single_swap_is_corrected():
    report = run_pipeline(generate(_config([(51, 1, 2)])), ReidConfig(), logger=logger)
    assert report.idsw_before == 2
    assert report.idsw_after == 0
    assert report.corrected_switch_count == 1
    assert report.false_reinit_count == 0
    assert report.mot_after.idf1 == pytest.approx(1.0)
    assert report.mot_before.idf1 < 1.0
    assert report.events[0].frame == 51


def test_several_swaps_are_corrected():
    plan = [(20, 1, 2), (40, 3, 4), (60, 1, 5)]
    report = run_pipeline(generate(_config(plan)), ReidConfig(), logger=logger)
    assert report.idsw_before > 0
    assert report.idsw_after == 0
    assert report.false_reinit_count == 0
    assert report.corrected_switch_count == 3


def test_no_switch_no_false_reinit():
    report = run_pipeline(generate(_config(noise_sigma=0.05, seed=7)), ReidConfig(), logger=logger)
    assert report.idsw_before == report.idsw_after == 0
    assert report.false_reinit_count == 0
    assert report.events == []


def test_unreachable_tau_high_disables_correction():
    report = run_pipeline(
        generate(_config([(51, 1, 2)])), ReidConfig(tau_high=1.01), logger=logger
    )
    assert report.events == []
    assert report.idsw_after == report.idsw_before == 2


def test_harness_is_deterministic():
    cfg = _config([(30, 2, 5)], noise_sigma=0.05, seed=11)
    first = run_pipeline(generate(cfg), ReidConfig(), logger=logger)
    second = run_pipeline(generate(cfg), ReidConfig(), logger=logger)
    assert first == second


def test_corrected_labels_stay_unique():
    scenario = generate(_config([(20, 1, 2), (21, 2, 3)]))
    run = correct_stream(scenario, ReidConfig(), logger=logger)
    for frame in run.corrected.frames():
        assert len(run.corrected.at(frame)) == scenario.config.num_identities
    assert len(run.corrected) == len(scenario.corrupted)


def test_callback_stops_correction():
    scenario = generate(_config([(51, 1, 2)]))
    callback = StopAfter(logger, frame=40)
    run = correct_stream(scenario, ReidConfig(), logger=logger, callbacks=[callback])
    assert run.events == []
    assert callback.n_calls == scenario.config.num_frames
    assert callback.pool is not None


def test_checkpoint_callback(tmp_path):
    scenario = generate(_config([(51, 1, 2)], num_frames=60))
    callback = CheckpointCallback(logger, save_freq=25, save_path=str(tmp_path))
    correct_stream(scenario, ReidConfig(cadence_s=2.0), logger=logger, callbacks=[callback])

    assert sorted(os.listdir(tmp_path)) == ["banks_25_frames", "banks_50_frames"]
    banks = load_banks(str(tmp_path / "banks_50_frames"))
    assert sorted(banks) == list(range(1, 9))
    # one entry per 2 s cadence at 5 fps, plus the seed entry
    assert len(banks[1]) > 1

    callback.pool.banks.clear()
    callback.load(str(tmp_path / "missing"))
    assert callback.pool.banks == {}
    callback.load(str(tmp_path / "banks_50_frames"))
    assert len(callback.pool.banks[1]) == len(banks[1])


def test_sensitivity_sweep():
    grid = SweepGrid(tau_low=[0.5, 0.65], tau_high=[0.78, 0.99, 1.01], cadence_s=[3600.0])
    rows = sensitivity_sweep(_config([(51, 1, 2)]), ReidConfig(), grid, logger=logger)
    assert len(rows) == 6
    for row in rows:
        expected = 1 if row.tau_high <= 1 else 0
        assert row.report.corrected_switch_count == expected
        assert row.report.false_reinit_count == 0

    # corrected count never rises as tau_high rises
    for tau_low in grid.tau_low:
        counts = [
            row.report.corrected_switch_count
            for row in sorted(rows, key=lambda r: r.tau_high)
            if row.tau_low == tau_low
        ]
        assert len(counts) == 3
        assert counts == sorted(counts, reverse=True)

    with pytest.raises(MalformedInputError):
        sensitivity_sweep(
            _config(), ReidConfig(), SweepGrid(tau_low=[0.9], tau_high=[0.8]), logger=logger
        )


def test_sweep_grid_parse():
    grid = SweepGrid.parse("tau_low=0.6,0.65;tau-high=0.78;cadence_s=60,3600")
    assert list(grid.points()) == [
        (0.6, 0.78, 60.0),
        (0.6, 0.78, 3600.0),
        (0.65, 0.78, 60.0),
        (0.65, 0.78, 3600.0),
    ]
    with pytest.raises(MalformedInputError):
        SweepGrid.parse("alpha=0.5")


def test_scenario_from_dict():
    cfg = ScenarioConfig.from_dict(
        {
            "num_identities": 4,
            "num_frames": 30,
            "switch_plan": [[10, 1, 2]],
            "embedding_model": {"dim": 16},
            "motion": {"speed_px_per_frame": 2.0},
            "seed": 5,
        }
    )
    assert cfg.switch_plan == [(10, 1, 2)]
    assert cfg.embedding_model.dim == 16
    with pytest.raises(MalformedInputError):
        ScenarioConfig.from_dict({"unknown": 1})
    with pytest.raises(MalformedInputError):
        ScenarioConfig.from_dict({"switch_plan": [[1, 1, 2]]})
    with pytest.raises(MalformedInputError):
        ScenarioConfig.from_dict({"embedding_model": {"dim": 4}})


@pytest.mark.parametrize(
    "document",
    [
        {"arena": [1280]},
        {"box_size": [120, 80, 3]},
        {"arena": ["wide", 720]},
        {"switch_plan": [[51, 1]]},
        {"switch_plan": [5]},
        {"num_frames": "many"},
    ],
)
def test_scenario_from_dict_malformed(document):
    with pytest.raises(MalformedInputError):
        ScenarioConfig.from_dict(document)
