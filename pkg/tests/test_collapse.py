import math

import numpy as np
import pytest

import pilotbox.collapse
from pilotbox import (
    BoxState,
    CollapseWeightError,
    collapse_state,
    collapsed_two_time_ensemble,
    ghz_state,
    octant_masses,
)
from pilotbox.observables import CorrelatorQuery, multitime_correlator
from pilotbox.sampling import sample_initial

LAMBDA = 8.0 / (3.0 * math.pi)


def test_weights_are_exact_born_probabilities():
    g = ghz_state()
    plus = collapse_state(g, 1, 1, 0.0, 64)
    minus = collapse_state(g, 1, -1, 0.0, 64)
    # the GHZ marginal is symmetric, so both halves carry exactly 1/2
    assert plus.weight == pytest.approx(0.5, abs=1e-15)
    assert minus.weight == pytest.approx(0.5, abs=1e-15)
    assert plus.weight + minus.weight == pytest.approx(1.0, abs=1e-15)

    ground = BoxState({(1,): 1.0})
    half = collapse_state(ground, 1, 1, 0.3, 64)
    assert half.weight == pytest.approx(0.5, abs=1e-15)


def test_weight_is_cutoff_independent():
    g = ghz_state()
    w32 = collapse_state(g, 1, 1, 0.0, 32).weight
    w96 = collapse_state(g, 1, 1, 0.0, 96).weight
    assert w32 == w96


def test_captured_norm_converges_from_below():
    g = ghz_state()
    caps = [collapse_state(g, 1, 1, 0.0, K).captured for K in (32, 64, 96)]
    assert caps[0] < caps[1] < caps[2] < 0.5
    assert caps[1] == pytest.approx(0.49844057390277496, abs=1e-12)


def test_post_state_layout():
    g = ghz_state()
    result = collapse_state(g, 2, -1, 0.4, 64)
    post = result.state
    assert post.t_ref == 0.4
    assert len(post.coeffs) == 66
    norm = sum(abs(c) ** 2 for c in post.coeffs.values())
    assert norm == pytest.approx(1.0, abs=1e-12)
    # untouched axes keep the original two modes; the measured axis spreads
    for n1, n2, n3 in post.coeffs:
        assert n1 in (1, 2)
        assert n3 in (1, 2)
        assert 1 <= n2 <= 64


def test_truncated_projection_is_nearly_idempotent():
    g = ghz_state()
    repeats = {}
    for K in (32, 64):
        first = collapse_state(g, 1, 1, 0.0, K)
        again = collapse_state(first.state, 1, 1, 0.0, K)
        repeats[K] = again.weight
        assert again.weight > 0.99
        assert again.captured <= 1.0 + 1e-12
    assert repeats[64] > repeats[32]


def test_branch_sum_recovers_uncollapsed_correlator():
    # signed, captured-weighted branch average of <1 x sign_s x sign_s>
    # over both outcomes must reproduce <sign_0 x sign_s x sign_s> exactly
    g = ghz_state()
    for K in (32, 64):
        for s in (0.0, 0.2, math.pi / 9, math.pi / 3):
            total = 0.0
            for side in (1, -1):
                r = collapse_state(g, 1, side, 0.0, K)
                val = multitime_correlator(
                    r.state, CorrelatorQuery(("ident", "sign", "sign"), (0.0, s, s))
                )
                total += side * r.captured * val
            plain = multitime_correlator(
                g, CorrelatorQuery(("sign", "sign", "sign"), (0.0, s, s))
            )
            assert total == pytest.approx(plain, abs=1e-12)


def test_conditional_quadrant_frequencies_match_collapsed_density():
    scipy_stats = pytest.importorskip("scipy.stats")
    g = ghz_state()
    post = collapse_state(g, 1, 1, 0.0, 64).state
    quad = octant_masses(post, 0.0).sum(axis=0)
    assert quad.sum() == pytest.approx(1.0, abs=1e-10)

    count = 4000
    batch = sample_initial(post, 0.0, count, 5)
    q = batch.points[:, 1:]
    observed = np.zeros((2, 2))
    for a in (0, 1):
        for b in (0, 1):
            observed[a, b] = np.sum(((q[:, 0] >= 0) == a) & ((q[:, 1] >= 0) == b))
    check = scipy_stats.chisquare(observed.ravel(), quad.ravel() * count)
    assert check.pvalue > 1e-3


def test_zero_support_outcome_raises(monkeypatch):
    g = ghz_state()

    def zero_projector(cutoff, side):
        return np.zeros((cutoff, cutoff))

    monkeypatch.setattr(pilotbox.collapse, "half_projector", zero_projector)
    with pytest.raises(CollapseWeightError):
        collapse_state(g, 1, 1, 0.0, 64)


def test_collapse_validation():
    g = ghz_state()
    with pytest.raises(ValueError):
        collapse_state(g, 0, 1, 0.0)
    with pytest.raises(ValueError):
        collapse_state(g, 4, 1, 0.0)
    with pytest.raises(ValueError):
        collapse_state(g, 1, 0, 0.0)
    with pytest.raises(ValueError):
        collapse_state(g, 1, 1, 0.0, cutoff=16)
    tall = BoxState({(70,): 1.0})
    with pytest.raises(ValueError):
        collapse_state(tall, 1, 1, 0.0, cutoff=64)


def test_collapsed_ensemble_initial_slice():
    # at s = 0 no integration happens and the estimator reduces to the
    # plain equal-time sign product over Born-distributed samples
    res = collapsed_two_time_ensemble(400, np.array([0.0]), 31)
    assert res.weight_plus == pytest.approx(0.5, abs=1e-15)
    assert res.weight_minus == pytest.approx(0.5, abs=1e-15)
    assert res.n_plus + res.n_minus == 400
    assert abs(res.n_plus / 400 - 0.5) < 0.07
    assert res.n_failed == 0
    assert abs(res.means[0] - (-(LAMBDA**3))) < 3.0 * res.stderrs[0]

    batch = sample_initial(ghz_state(), 0.0, 400, 31)
    signs = np.where(batch.points >= 0.0, 1.0, -1.0)
    assert res.means[0] == pytest.approx(float(np.prod(signs, axis=1).mean()))


def test_collapsed_ensemble_validation():
    with pytest.raises(ValueError):
        collapsed_two_time_ensemble(100, np.array([0.2, 0.1]), 1)
    with pytest.raises(ValueError):
        collapsed_two_time_ensemble(100, np.array([-0.1, 0.2]), 1)
    with pytest.raises(ValueError):
        collapsed_two_time_ensemble(100, np.zeros((2, 2)), 1)
