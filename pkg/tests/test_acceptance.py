"""
Monte-Carlo-Reproduktionen in Akzeptanzgröße.

Laufzeit jeweils Sekunden bis wenige Minuten; mit `pytest -m "not slow"` überspringen.
"""

import tracemalloc

import numpy as np
import pytest

import streaming_pca
from algorithm import block_orthogonal_iteration, empirical_schedule, theorem2_schedule
from conftest import write_docword
from model import make_model
from rng import make_rng, role_rng
from stream import stream_from_model
from theory import concentration_scaling

pytestmark = pytest.mark.slow


def test_rank1_success_with_ample_samples():
    # n = 1000 reicht bei p=100, σ=0.5 nicht für Fehler ≤ 0.05; n = 10⁵ liegt sicher in der Erfolgsphase
    fraction = streaming_pca.success_fraction(100, 0.5, 0.05, 100_000, trials=200, seed=0)
    assert fraction >= 0.85


def test_rank1_phase_boundary_moves_with_samples():
    small = streaming_pca.success_fraction(100, 0.5, 0.05, 1000, trials=50, seed=0)
    large = streaming_pca.success_fraction(100, 0.5, 0.05, 100_000, trials=50, seed=0)
    assert small < large


def test_minimal_samples_scale_linearly_in_p():
    frame = streaming_pca.scaling_table([50, 100, 200, 400], 0.5, 0.05, 0.5, trials=20, seed=0,
                                        with_batch=False)
    assert (frame['saturated'] == 0).all()
    assert frame['n_min'].is_monotonic_increasing
    assert 0.7 <= frame['loglog_slope'].iloc[0] <= 1.4


def test_rank_k_recovery_with_theorem2_schedule():
    experiment = streaming_pca.RecoveryExperiment(p=50, k=3, lambdas=(1.0, 0.8, 0.6), sigma=0.2, eps=0.1,
                                                  schedule_mode='theorem2', seed=0)
    assert experiment.schedule.block_count == 15
    frame = experiment.run(100)
    assert frame['success'].mean() >= 0.85


def test_median_distance_non_increasing_over_blocks():
    model = make_model(50, (1.0, 0.8, 0.6), 0.2, role_rng(0, "model"))
    schedule = theorem2_schedule(50, 3, 0.2, 0.6, 0.1)
    distances = []
    for seed in range(100):
        stream = stream_from_model(model, schedule.total_samples, seed)
        report = block_orthogonal_iteration(stream, 3, schedule, seed, reference=model.U)
        distances.append([row.distance for row in report.trace])
    medians = np.median(np.array(distances), axis=0)
    # nach der Konvergenz schwankt der Median auf dem Rauschniveau
    assert np.all(medians[1:] <= medians[:-1] * 1.05 + 1e-3)
    assert medians[-1] <= 0.1
    assert medians[-1] < medians[0]


def test_streaming_explained_variance_close_to_batch():
    lambdas = (1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7)
    ratios = []
    for seed in range(20):
        model = make_model(300, lambdas, 0.3, role_rng(seed, "model"))
        frame = streaming_pca.experiment_curve(stream_from_model(model, 3000, seed), 7, seed=seed)
        last = frame.iloc[-1]
        ratios.append(last['explained_variance_streaming'] / last['explained_variance_batch'])
    assert np.median(ratios) >= 0.92


def test_underparameterized_containment():
    experiment = streaming_pca.RecoveryExperiment(p=100, k=2, lambdas=(1.0, 0.9, 0.8, 0.7, 0.6), sigma=0.2,
                                                  eps=0.1, schedule_mode='theorem2', seed=0)
    assert experiment.mode == 'underparameterized'
    frame = experiment.run(100)
    assert frame['success'].mean() >= 0.85


def test_covariance_deviation_halves_when_block_quadruples():
    frame = concentration_scaling(20, 0.5, [500, 2000, 8000], trials=100, seed=0)
    medians = frame['median_deviation'].to_numpy()
    steps = medians[1:] / medians[:-1]
    assert np.all((steps >= 0.35) & (steps <= 0.65))


def test_memory_contract_at_scale():
    p, k, n = 10_000, 5, 100_000
    model = make_model(p, [1.0, 0.8, 0.6, 0.4, 0.2], 0.5, make_rng(0))
    stream = stream_from_model(model, n, 0)
    schedule = empirical_schedule(n, p)
    tracemalloc.start()
    try:
        block_orthogonal_iteration(stream, k, schedule, 0)
        peak = tracemalloc.get_traced_memory()[1]
    finally:
        tracemalloc.stop()
    assert stream.consumed_count == schedule.total_samples
    assert peak <= 8 * (4 * k * p + 64 * k * k + 16 * p)
    assert peak < 8 * p * p // 100


@pytest.mark.parametrize("argv", [
    ['recover', '--p', '30', '--sigma', '0.2', '--n', '3000', '--trials', '4'],
    ['recover', '--p', '30', '--k', '2', '--lambdas', '1,0.7', '--n', '3000', '--trials', '2', '--boost', '2'],
    ['scaling', '--p-list', '10,20', '--sigma', '0.2', '--eps', '0.2', '--trials', '4', '--n-cap', '4000'],
    ['phase', '--sigmas', '0.2,1.0', '--ns', '200,800', '--p', '20', '--eps', '0.2', '--trials', '4'],
    ['diagnose', '--lemma', 'init', '--p', '30', '--k', '2', '--trials', '100'],
    ['diagnose', '--lemma', 'concentration', '--p', '10', '--B', '50,200', '--trials', '10'],
    ['diagnose', '--lemma', 'recursion', '--max-tau', '20'],
])
def test_cli_output_is_byte_identical(capsys, argv):
    outputs = []
    for _ in range(2):
        assert streaming_pca.main(argv + ['--seed', '11', '--quiet']) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    assert outputs[0]


def test_realdata_output_is_byte_identical(capsys, tmp_path):
    rng = make_rng(3)
    triples = [(d, w, int(rng.integers(1, 5))) for d in range(1, 41) for w in range(1, 16)
               if rng.random() < 0.4]
    path = write_docword(tmp_path / 'docword.synth.txt.gz', 40, 15, triples, gz=True)
    outputs = []
    for _ in range(2):
        assert streaming_pca.main(['realdata', '--docword', path, '--k', '2', '--orientation', 'docs',
                                   '--quiet']) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
