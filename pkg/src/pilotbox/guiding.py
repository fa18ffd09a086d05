"""Guiding velocity field, trajectory integration, and sampled ensembles.

The velocity of particle i is v_i = 2 Im(grad_i psi / psi), the probability
current divided by the density for unit mass 1/2.  Trajectories integrate
this field with an adaptive embedded Runge-Kutta pair whose steps are capped
at every readout time, so a sweep over a grid of times is one integration
pass per trajectory and is identical to stopping at each time separately.

Ensemble estimators draw equal-weight samples from |psi|^2 and average
products of coarse position observables along trajectories.  Every sample
has its own RNG substream and its own integration, so results are
bit-reproducible for a fixed master seed regardless of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .sampling import sample_initial
from .spectral import BoxState, psi_eval, psi_grad

__all__ = [
    "NodeError",
    "ExcessiveFailureError",
    "IntegratorConfig",
    "Trajectory",
    "velocity",
    "integrate_trajectory",
    "ensemble_products",
    "ensemble_correlator",
    "default_node_epsilon",
]

PRODUCT_TAGS = ("sign", "ind+", "ind-", "skip")


class NodeError(ArithmeticError):
    """The wavefunction modulus fell inside the node guard."""


class ExcessiveFailureError(RuntimeError):
    """More than 1% of an ensemble's trajectories failed to integrate."""


def default_node_epsilon(dims: int) -> float:
    """Node guard on |psi|^2: 1e-12 times the squared uniform density scale
    (2/pi)^dims of the box."""
    return 1e-12 * (2.0 / math.pi) ** dims


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and guards for trajectory integration.

    ``node_epsilon = None`` resolves to :func:`default_node_epsilon` at the
    state's dimensionality.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    min_step: float = 1e-10
    node_epsilon: float | None = None
    max_steps: int = 500_000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.min_step <= 0:
            raise ValueError("min_step must be positive")
        if self.node_epsilon is not None and self.node_epsilon <= 0:
            raise ValueError("node_epsilon must be positive when given")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    def resolved_node_epsilon(self, dims: int) -> float:
        if self.node_epsilon is not None:
            return self.node_epsilon
        return default_node_epsilon(dims)


@dataclass(frozen=True)
class Trajectory:
    """One integrated trajectory sampled on a time grid.

    ``status`` is "completed", "node-rescued" (completed, but at least one
    step had to be retried at the node/boundary guard), or "failed".  On
    failure the positions from the failed segment onward are NaN.
    """

    times: np.ndarray
    positions: np.ndarray
    status: str
    rescues: int
    steps: int


def velocity(state: BoxState, t: float, q, node_epsilon: float | None = None):
    """Guiding velocity 2 Im(grad psi / psi) at time ``t``.

    Accepts a single configuration (dims,) or a batch (..., dims); raises
    :class:`NodeError` if any point sits inside the node guard.
    """
    if node_epsilon is None:
        node_epsilon = default_node_epsilon(state.dims)
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    psi = psi_eval(state, t, q)
    grad = psi_grad(state, t, q)
    psi_arr = np.asarray(psi)
    a2 = np.abs(psi_arr) ** 2
    if np.any(a2 <= node_epsilon):
        raise NodeError("configuration at or too close to a wavefunction node")
    v = 2.0 * np.imag(grad / (psi_arr[..., None] if not single else psi))
    return v


def _kernel_args(state: BoxState):
    modes = np.ascontiguousarray(state.term_modes)
    coeff = np.ascontiguousarray(state.term_coeff)
    cutoffs = np.ascontiguousarray(state.axis_cutoffs)
    return modes, coeff, float(state.t_ref), cutoffs


def _initial_step(span: float) -> float:
    return min(1e-2, span)


def _integrate_raw(
    state: BoxState,
    q0: np.ndarray,
    t0: float,
    out_times: np.ndarray,
    config: IntegratorConfig,
    direction: float = 1.0,
):
    """Low-level single-trajectory integration.

    ``out_times`` must be strictly monotone in ``direction`` and exclude
    ``t0``.  Returns (positions, status_code, rescues, steps).
    """
    modes, coeff, t_ref, cutoffs = _kernel_args(state)
    out_times = np.asarray(out_times, dtype=float)
    s_out = direction * (out_times - t0)
    if out_times.size and (s_out[0] <= 0 or np.any(np.diff(s_out) <= 0)):
        raise ValueError("readout times must move strictly forward from t0")
    out_pos = np.empty((out_times.size, state.dims))
    if out_times.size == 0:
        return out_pos, _kernels.STATUS_OK, 0, 0
    status, rescues, steps = _kernels.integrate_readouts(
        modes,
        coeff,
        t_ref,
        cutoffs,
        np.asarray(q0, dtype=float),
        float(t0),
        out_times,
        float(direction),
        config.rel_tol,
        config.abs_tol,
        config.min_step,
        config.resolved_node_epsilon(state.dims),
        config.max_steps,
        _initial_step(float(s_out[-1])),
        out_pos,
    )
    return out_pos, status, rescues, steps


def integrate_trajectory(
    state: BoxState,
    q0,
    t_grid,
    config: IntegratorConfig | None = None,
) -> Trajectory:
    """Integrate one trajectory from ``q0`` at ``t_grid[0]``.

    ``t_grid`` must be strictly increasing; the first row of positions is
    ``q0`` itself.
    """
    if config is None:
        config = IntegratorConfig()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError("t_grid must be a one-dimensional time grid")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    q0 = np.asarray(q0, dtype=float)
    if q0.shape != (state.dims,):
        raise ValueError(f"q0 must have shape ({state.dims},)")

    positions = np.full((t_grid.size, state.dims), np.nan)
    positions[0] = q0
    out, status, rescues, steps = _integrate_raw(
        state, q0, float(t_grid[0]), t_grid[1:], config
    )
    if status == _kernels.STATUS_OK:
        positions[1:] = out
        label = "node-rescued" if rescues > 0 else "completed"
    else:
        label = "failed"
    return Trajectory(
        times=t_grid, positions=positions, status=label, rescues=rescues, steps=steps
    )


def _integrate_batch(
    state: BoxState,
    points: np.ndarray,
    t0: float,
    out_times: np.ndarray,
    config: IntegratorConfig,
    workers: int = 1,
):
    """Integrate many trajectories to common readout times.

    Returns (positions (count, n_times, dims), ok mask, total rescued
    trajectories).  Rows of failed trajectories are NaN.
    """
    count = points.shape[0]
    n_times = out_times.size
    positions = np.full((count, n_times, state.dims), np.nan)
    ok = np.zeros(count, dtype=bool)
    rescued = np.zeros(count, dtype=bool)

    modes, coeff, t_ref, cutoffs = _kernel_args(state)
    node_eps = config.resolved_node_epsilon(state.dims)
    s_last = float(out_times[-1] - t0) if n_times else 0.0
    h0 = _initial_step(s_last)

    def run_range(lo: int, hi: int):
        out_pos = np.empty((n_times, state.dims))
        for i in range(lo, hi):
            status, rescues, _steps = _kernels.integrate_readouts(
                modes,
                coeff,
                t_ref,
                cutoffs,
                points[i],
                float(t0),
                out_times,
                1.0,
                config.rel_tol,
                config.abs_tol,
                config.min_step,
                node_eps,
                config.max_steps,
                h0,
                out_pos,
            )
            if status == _kernels.STATUS_OK:
                positions[i] = out_pos
                ok[i] = True
                rescued[i] = rescues > 0

    if n_times == 0:
        ok[:] = True
        return positions, ok, 0

    workers = max(1, int(workers))
    if workers == 1 or count < 2:
        run_range(0, count)
    else:
        chunk = (count + workers - 1) // workers
        bounds = [(lo, min(lo + chunk, count)) for lo in range(0, count, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_range, lo, hi) for lo, hi in bounds]
            for fut in futures:
                fut.result()

    return positions, ok, int(rescued.sum())


def _factor(op: str, x: np.ndarray) -> np.ndarray:
    if op == "sign":
        return np.where(x >= 0.0, 1.0, -1.0)
    if op == "ind+":
        return (x >= 0.0).astype(float)
    if op == "ind-":
        return (x < 0.0).astype(float)
    raise ValueError(f"unknown product tag {op!r}")


@dataclass(frozen=True)
class EnsembleStats:
    """Monte Carlo estimates of one or more product observables."""

    means: np.ndarray
    stderrs: np.ndarray
    count: int
    n_effective: int
    n_failed: int
    n_rescued: int


def ensemble_products(
    state: BoxState,
    rows,
    count: int,
    master_seed: int,
    config: IntegratorConfig | None = None,
    workers: int = 1,
    t0: float = 0.0,
) -> EnsembleStats:
    """Estimate several trajectory product observables from one ensemble.

    ``rows`` is a sequence of queries; each query lists, per particle, a pair
    ``(tag, time)`` with tag one of ``"sign"``, ``"ind+"``, ``"ind-"`` (sign
    and half-box indicators of the particle's position at that time) or
    ``"skip"`` (particle not used).  All times must be >= ``t0``.  Every
    trajectory is integrated once through the union of requested times.

    Failed trajectories are excluded from the averages; more than 1% of
    ``count`` failing raises :class:`ExcessiveFailureError`.
    """
    if config is None:
        config = IntegratorConfig()
    rows = list(rows)
    if not rows:
        raise ValueError("need at least one query row")
    for row in rows:
        if len(row) != state.dims:
            raise ValueError("each row needs one (tag, time) pair per particle")
        for op, tq in row:
            if op not in PRODUCT_TAGS:
                raise ValueError(f"unknown product tag {op!r}")
            if op != "skip" and tq < t0:
                raise ValueError("readout times must not precede t0")

    needed = sorted(
        {float(tq) for row in rows for op, tq in row if op != "skip" and tq > t0}
    )
    out_times = np.array(needed)
    batch = sample_initial(state, t0, count, master_seed)
    positions, ok, n_rescued = _integrate_batch(
        state, batch.points, t0, out_times, config, workers
    )
    n_failed = int(count - ok.sum())
    if n_failed > 0.01 * count:
        raise ExcessiveFailureError(
            f"{n_failed} of {count} trajectories failed to integrate"
        )
    n_eff = int(ok.sum())
    if n_eff < 2:
        raise ExcessiveFailureError("fewer than two usable trajectories")

    slot = {tq: j for j, tq in enumerate(needed)}

    def coordinate(d: int, tq: float) -> np.ndarray:
        if tq == t0:
            return batch.points[ok, d]
        return positions[ok, slot[float(tq)], d]

    means = np.empty(len(rows))
    stderrs = np.empty(len(rows))
    for r, row in enumerate(rows):
        values = np.ones(n_eff)
        for d, (op, tq) in enumerate(row):
            if op == "skip":
                continue
            values *= _factor(op, coordinate(d, tq))
        means[r] = values.mean()
        stderrs[r] = values.std(ddof=1) / math.sqrt(n_eff)

    return EnsembleStats(
        means=means,
        stderrs=stderrs,
        count=count,
        n_effective=n_eff,
        n_failed=n_failed,
        n_rescued=n_rescued,
    )


def ensemble_correlator(
    state: BoxState,
    times,
    count: int,
    master_seed: int,
    config: IntegratorConfig | None = None,
    workers: int = 1,
):
    """Monte Carlo estimate of the multi-time sign-product correlator.

    ``times`` gives one readout time per particle (all >= 0; sampling is at
    t = 0).  Returns ``(estimate, stderr, n_failed)``.
    """
    times = tuple(float(t) for t in times)
    if len(times) != state.dims:
        raise ValueError("need one time per particle")
    row = [("sign", t) for t in times]
    stats = ensemble_products(
        state, [row], count, master_seed, config=config, workers=workers, t0=0.0
    )
    return float(stats.means[0]), float(stats.stderrs[0]), stats.n_failed
