"""Effective collapse onto half-box outcomes and post-collapse ensembles.

A coarse position measurement of one particle with outcome ``side`` replaces
the wavefunction by the renormalized truncated expansion of (indicator x psi)
over box modes up to a cutoff.  The outcome weight reported alongside is the
exact Born probability of the half box, computed by sandwiching over the
(finitely many) modes of the pre-collapse state; it is therefore independent
of the expansion cutoff.  The norm captured by the truncated expansion is
exposed separately as a convergence diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .guiding import (
    ExcessiveFailureError,
    IntegratorConfig,
    _integrate_batch,
)
from .observables import CorrelatorQuery, half_projector, multitime_correlator
from .sampling import sample_initial
from .spectral import BoxState, ghz_state

__all__ = [
    "CollapseWeightError",
    "CollapseResult",
    "collapse_state",
    "CollapsedTwoTimeResult",
    "collapsed_two_time_ensemble",
]


class CollapseWeightError(RuntimeError):
    """Collapse onto an outcome the state has essentially no support on."""


@dataclass(frozen=True)
class CollapseResult:
    """Outcome of a half-box collapse.

    Attributes
    ----------
    state : BoxState
        Normalized post-collapse state, referenced at the collapse time.
    weight : float
        Exact Born probability of the outcome (cutoff independent).
    captured : float
        Squared norm of the truncated expansion before renormalization;
        approaches ``weight`` as the cutoff grows.
    """

    state: BoxState
    weight: float
    captured: float


def collapse_state(
    state: BoxState,
    particle: int,
    side: int,
    t_c: float,
    cutoff: int = 64,
) -> CollapseResult:
    """Collapse ``particle`` (1-based) onto the half box ``side`` at ``t_c``.

    The post-collapse coefficients are the half-projector matrix applied to
    the state's time-``t_c`` coefficients along the measured axis, truncated
    at ``cutoff`` modes and renormalized.  Raises
    :class:`CollapseWeightError` if the captured norm is below 1e-12.
    """
    if not 1 <= particle <= state.dims:
        raise ValueError("particle index out of range (1-based)")
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    if cutoff < 32:
        raise ValueError("collapse cutoff must be >= 32")
    if cutoff < state.cutoff:
        raise ValueError("collapse cutoff below the state's own mode cutoff")

    axis = particle - 1
    ops = tuple(
        ("proj+" if side == 1 else "proj-") if d == axis else "ident"
        for d in range(state.dims)
    )
    weight = multitime_correlator(state, CorrelatorQuery(ops, (t_c,) * state.dims))

    proj = half_projector(cutoff, side)
    modes = state.term_modes
    amps = state.coeff_at(t_c)
    new_coeffs: dict = {}
    for k in range(modes.shape[0]):
        key = tuple(int(n) for n in modes[k])
        column = proj[:, key[axis] - 1]
        hit = np.nonzero(column)[0]
        for j in hit:
            new_key = key[:axis] + (int(j) + 1,) + key[axis + 1 :]
            new_coeffs[new_key] = new_coeffs.get(new_key, 0.0) + amps[k] * column[j]

    captured = float(sum(abs(c) ** 2 for c in new_coeffs.values()))
    if captured < 1e-12:
        raise CollapseWeightError(
            f"collapse captured norm {captured:.3e}; outcome has no support"
        )
    scale = 1.0 / np.sqrt(captured)
    normalized = {k: c * scale for k, c in new_coeffs.items()}
    post = BoxState(normalized, t_ref=t_c)
    return CollapseResult(state=post, weight=float(weight), captured=captured)


@dataclass(frozen=True)
class CollapsedTwoTimeResult:
    """Monte Carlo two-time sign correlations through an intermediate
    collapse of particle 1 at t = 0."""

    s_grid: np.ndarray
    means: np.ndarray
    stderrs: np.ndarray
    count: int
    n_effective: int
    n_failed: int
    n_rescued: int
    weight_plus: float
    weight_minus: float
    n_plus: int
    n_minus: int


def collapsed_two_time_ensemble(
    count: int,
    s_grid,
    master_seed: int,
    cutoff: int = 64,
    config: IntegratorConfig | None = None,
    workers: int = 1,
) -> CollapsedTwoTimeResult:
    """Estimate E[sgn q1(0) sgn q2(s) sgn q3(s)] on the GHZ state with an
    effective collapse at the first measurement.

    Each sampled configuration records a = sgn(q1) at t = 0, the state is
    replaced by the corresponding half-box collapse (expansion cutoff
    ``cutoff``), and particles 2 and 3 are then carried to each grid time s
    by the post-collapse guiding field.

    ``s_grid`` must be strictly increasing and nonnegative; s = 0 rows read
    the initial configuration directly.
    """
    if config is None:
        config = IntegratorConfig()
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size < 1:
        raise ValueError("s_grid must be a one-dimensional time grid")
    if np.any(s_grid < 0) or np.any(np.diff(s_grid) <= 0):
        raise ValueError("s_grid must be nonnegative and strictly increasing")

    base = ghz_state()
    batch = sample_initial(base, 0.0, count, master_seed)
    outcome = np.where(batch.points[:, 0] >= 0.0, 1, -1)

    out_times = s_grid[s_grid > 0.0]
    n_s = s_grid.size
    products = np.full((count, n_s), np.nan)
    ok = np.zeros(count, dtype=bool)
    n_rescued = 0
    weights = {}
    group_sizes = {}

    for side in (1, -1):
        result = collapse_state(base, 1, side, 0.0, cutoff)
        weights[side] = result.weight
        idx = np.nonzero(outcome == side)[0]
        group_sizes[side] = idx.size
        if idx.size == 0:
            continue
        pts = batch.points[idx]
        positions, ok_g, rescued = _integrate_batch(
            result.state, pts, 0.0, out_times, config, workers
        )
        n_rescued += rescued
        sgn0 = np.where(pts[:, 1:] >= 0.0, 1.0, -1.0)
        j_mobile = 0
        for j, s in enumerate(s_grid):
            if s == 0.0:
                pair = sgn0[:, 0] * sgn0[:, 1]
            else:
                qs = positions[:, j_mobile, 1:]
                pair = np.prod(np.where(qs >= 0.0, 1.0, -1.0), axis=1)
                j_mobile += 1
            products[idx, j] = side * pair
        ok[idx] = ok_g

    n_failed = int(count - ok.sum())
    if n_failed > 0.01 * count:
        raise ExcessiveFailureError(
            f"{n_failed} of {count} collapsed trajectories failed to integrate"
        )
    n_eff = int(ok.sum())
    if n_eff < 2:
        raise ExcessiveFailureError("fewer than two usable trajectories")

    vals = products[ok]
    means = vals.mean(axis=0)
    stderrs = vals.std(axis=0, ddof=1) / np.sqrt(n_eff)

    return CollapsedTwoTimeResult(
        s_grid=s_grid,
        means=means,
        stderrs=stderrs,
        count=count,
        n_effective=n_eff,
        n_failed=n_failed,
        n_rescued=n_rescued,
        weight_plus=weights[1],
        weight_minus=weights[-1],
        n_plus=group_sizes[1],
        n_minus=group_sizes[-1],
    )
