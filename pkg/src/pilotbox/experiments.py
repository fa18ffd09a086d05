"""Named experiment runners shared by the command line and the demos.

Every runner produces a :class:`RunResult` whose rows pair the analytic
quantum value of a correlator with its trajectory-ensemble estimate.  The
quantum column always goes through the observables module; no closed-form
constants are inlined here.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .collapse import collapsed_two_time_ensemble
from .guiding import IntegratorConfig, ensemble_products
from .observables import CorrelatorQuery, multitime_correlator, quarter_phase_time
from .spectral import fr_state, ghz_state

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "RunRow",
    "RunResult",
    "run_experiment",
]

EXPERIMENTS = (
    "analytic-sweep",
    "equal-times",
    "two-times",
    "collapse-two-times",
    "fr",
)

#: experiments that integrate trajectories and therefore require a seed
MONTE_CARLO_EXPERIMENTS = (
    "equal-times",
    "two-times",
    "collapse-two-times",
    "fr",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved parameters of one run."""

    experiment: str
    count: int = 1000
    seed: int | None = None
    grid: tuple | None = None  # (start, stop, points)
    cutoff: int = 64
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    workers: int = 1
    pattern: str = "equal"
    max_steps: int = 500_000
    min_step: float = 1e-10

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.experiment in MONTE_CARLO_EXPERIMENTS:
            if self.seed is None:
                raise ValueError(f"{self.experiment} requires a seed")
            if self.count < 100:
                raise ValueError("count must be >= 100")
        if self.pattern not in ("equal", "two"):
            raise ValueError("pattern must be 'equal' or 'two'")
        if self.grid is not None:
            start, stop, points = self.grid
            if points < 1 or stop < start:
                raise ValueError("grid must satisfy start <= stop, points >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            min_step=self.min_step,
            max_steps=self.max_steps,
        )


@dataclass(frozen=True)
class RunRow:
    """One output row: analytic value and, for Monte Carlo runs, the
    ensemble estimate with its uncertainty."""

    t: float
    quantum: float
    bohm_mean: float = math.nan
    bohm_stderr: float = math.nan
    n_effective: int = 0
    n_failed: int = 0


@dataclass(frozen=True)
class RunResult:
    """Rows plus the parameters needed to reproduce them."""

    experiment: str
    rows: tuple
    params: dict = field(repr=False)
    wall_time_s: float = 0.0


def _grid_values(config: ExperimentConfig, default) -> np.ndarray:
    start, stop, points = config.grid if config.grid is not None else default
    if points == 1:
        return np.array([float(start)])
    return np.linspace(start, stop, int(points))


def _equal_default():
    return (0.0, 2.0 * math.pi / 9.0, 12)

def _two_default():
    return (math.pi / 36.0, math.pi / 3.0, 12)


def _params(config: ExperimentConfig, grid: np.ndarray) -> dict:
    params = {
        "experiment": config.experiment,
        "grid": f"{float(grid[0])!r}:{float(grid[-1])!r}:{grid.size}",
        "cutoff": config.cutoff,
        "rel_tol": config.rel_tol,
        "abs_tol": config.abs_tol,
        "workers": config.workers,
    }
    if config.experiment in MONTE_CARLO_EXPERIMENTS:
        params["count"] = config.count
        params["seed"] = config.seed
    if config.experiment == "analytic-sweep":
        params["pattern"] = config.pattern
    return params


def _ghz_sign_query(pattern: str, t: float) -> CorrelatorQuery:
    if pattern == "equal":
        times = (t, t, t)
    else:
        times = (0.0, t, t)
    return CorrelatorQuery(("sign", "sign", "sign"), times)


def run_analytic_sweep(config: ExperimentConfig) -> RunResult:
    """Analytic GHZ sign correlator on a time grid, no sampling."""
    t_start = time.perf_counter()
    default = _equal_default() if config.pattern == "equal" else _two_default()
    grid = _grid_values(config, (default[0], default[1], 25))
    state = ghz_state()
    rows = tuple(
        RunRow(t=float(t), quantum=multitime_correlator(state, _ghz_sign_query(config.pattern, float(t))))
        for t in grid
    )
    return RunResult(
        experiment=config.experiment,
        rows=rows,
        params=_params(config, grid),
        wall_time_s=time.perf_counter() - t_start,
    )


def _run_ghz_ensemble(config: ExperimentConfig, pattern: str) -> RunResult:
    t_start = time.perf_counter()
    default = _equal_default() if pattern == "equal" else _two_default()
    grid = _grid_values(config, default)
    state = ghz_state()
    quantum = [
        multitime_correlator(state, _ghz_sign_query(pattern, float(t))) for t in grid
    ]
    if pattern == "equal":
        mc_rows = [[("sign", float(t))] * 3 for t in grid]
    else:
        mc_rows = [[("sign", 0.0), ("sign", float(t)), ("sign", float(t))] for t in grid]
    stats = ensemble_products(
        state,
        mc_rows,
        config.count,
        config.seed,
        config=config.integrator(),
        workers=config.workers,
    )
    rows = tuple(
        RunRow(
            t=float(t),
            quantum=quantum[j],
            bohm_mean=float(stats.means[j]),
            bohm_stderr=float(stats.stderrs[j]),
            n_effective=stats.n_effective,
            n_failed=stats.n_failed,
        )
        for j, t in enumerate(grid)
    )
    return RunResult(
        experiment=config.experiment,
        rows=rows,
        params=_params(config, grid),
        wall_time_s=time.perf_counter() - t_start,
    )


def run_equal_times(config: ExperimentConfig) -> RunResult:
    """GHZ sign product with all three particles read at the same time."""
    return _run_ghz_ensemble(config, "equal")


def run_two_times(config: ExperimentConfig) -> RunResult:
    """GHZ sign product with particle 1 read at t = 0 and particles 2, 3 at s."""
    return _run_ghz_ensemble(config, "two")


def run_collapse_two_times(config: ExperimentConfig) -> RunResult:
    """Two-time GHZ sign product with an effective collapse at the first
    measurement; compared against the no-collapse analytic correlator."""
    t_start = time.perf_counter()
    grid = _grid_values(config, _two_default())
    state = ghz_state()
    quantum = [
        multitime_correlator(state, _ghz_sign_query("two", float(t))) for t in grid
    ]
    mc = collapsed_two_time_ensemble(
        config.count,
        grid,
        config.seed,
        cutoff=config.cutoff,
        config=config.integrator(),
        workers=config.workers,
    )
    rows = tuple(
        RunRow(
            t=float(t),
            quantum=quantum[j],
            bohm_mean=float(mc.means[j]),
            bohm_stderr=float(mc.stderrs[j]),
            n_effective=mc.n_effective,
            n_failed=mc.n_failed,
        )
        for j, t in enumerate(grid)
    )
    return RunResult(
        experiment=config.experiment,
        rows=rows,
        params=_params(config, grid),
        wall_time_s=time.perf_counter() - t_start,
    )


def run_fr(config: ExperimentConfig) -> RunResult:
    """Two-time half-box joint probabilities on the Frauchiger-Renner style
    state, at the quarter-phase time and at t = 0.

    Four fixed queries (P[a at s, b at u] with sides a, b and times s, u):

    1. P[- at t_q, + at 0]   second particle first,
    2. P[+ at t_q, + at t_q] both at the quarter-phase time,
    3. P[+ at 0, - at t_q]   first particle first,
    4. P[+ at 0, + at 0]     both at the initial time.

    The CSV time column carries the latest measurement time of the row.
    """
    t_start = time.perf_counter()
    t_q = quarter_phase_time()
    state = fr_state()
    queries = [
        (("proj-", "proj+"), (t_q, 0.0), (("ind-", t_q), ("ind+", 0.0))),
        (("proj+", "proj+"), (t_q, t_q), (("ind+", t_q), ("ind+", t_q))),
        (("proj+", "proj-"), (0.0, t_q), (("ind+", 0.0), ("ind-", t_q))),
        (("proj+", "proj+"), (0.0, 0.0), (("ind+", 0.0), ("ind+", 0.0))),
    ]
    quantum = [
        multitime_correlator(state, CorrelatorQuery(ops, times))
        for ops, times, _ in queries
    ]
    stats = ensemble_products(
        state,
        [row for _, _, row in queries],
        config.count,
        config.seed,
        config=config.integrator(),
        workers=config.workers,
    )
    rows = tuple(
        RunRow(
            t=max(times),
            quantum=quantum[j],
            bohm_mean=float(stats.means[j]),
            bohm_stderr=float(stats.stderrs[j]),
            n_effective=stats.n_effective,
            n_failed=stats.n_failed,
        )
        for j, (_, times, _) in enumerate(queries)
    )
    grid = np.array([row.t for row in rows])
    return RunResult(
        experiment=config.experiment,
        rows=rows,
        params=_params(config, grid),
        wall_time_s=time.perf_counter() - t_start,
    )


_RUNNERS = {
    "analytic-sweep": run_analytic_sweep,
    "equal-times": run_equal_times,
    "two-times": run_two_times,
    "collapse-two-times": run_collapse_two_times,
    "fr": run_fr,
}


def run_experiment(config: ExperimentConfig) -> RunResult:
    """Dispatch to the runner named by ``config.experiment``."""
    return _RUNNERS[config.experiment](config)
