"""Acceptance suite.

Each test exercises one advertised guarantee end to end and prints a visible
``[PASS]``/``[FAIL]`` line with the measured numbers, so a plain pytest run
doubles as a checklist.  Tolerances and ensemble sizes are part of the
contract; do not tighten or loosen them casually.
"""

import math
import time

import numpy as np
import scipy.stats
from pilotbox import (
    IntegratorConfig,
    collapsed_two_time_ensemble,
    ensemble_products,
    fr_state,
    gauss_legendre,
    ghz_state,
    multitime_correlator,
    octant_masses,
    psi_eval,
    psi_grad,
    quarter_phase_time,
    sample_initial,
    sign_overlap,
    velocity,
)
from pilotbox.cli import main as cli_main
from pilotbox.guiding import _integrate_batch
from pilotbox.observables import CorrelatorQuery, heisenberg_sign_element

LAMBDA = 8.0 / (3.0 * math.pi)


def _check(capsys, ok: bool, label: str, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, f"{label}: {detail}"


def _ghz_quantum(times) -> float:
    return -(LAMBDA**3) * math.cos(3.0 * sum(times))


def test_criterion_01_sign_overlaps(capsys):
    start = time.perf_counter()
    errs = [
        abs(sign_overlap(1, 2) - 8.0 / (3.0 * math.pi)),
        abs(sign_overlap(2, 3) - (-8.0 / (5.0 * math.pi))),
        abs(sign_overlap(1, 3)),
        abs(sign_overlap(2, 4)),
        abs(heisenberg_sign_element(1, 2, math.pi / 6) - (-1j * 8.0 / (3.0 * math.pi))),
    ]
    elapsed = time.perf_counter() - start
    worst = max(errs)
    _check(
        capsys,
        worst < 1e-10 and elapsed < 1.0,
        "criterion 1 sign-operator elements",
        f"max error {worst:.2e}, {elapsed * 1e3:.0f} ms",
    )


def test_criterion_02_ghz_zero_time_value(capsys):
    start = time.perf_counter()
    val = multitime_correlator(
        ghz_state(), CorrelatorQuery(("sign",) * 3, (0.0, 0.0, 0.0))
    )
    elapsed = time.perf_counter() - start
    err = abs(val - (-(LAMBDA**3)))
    _check(
        capsys,
        err < 1e-10 and elapsed < 1.0,
        "criterion 2 GHZ equal-time value",
        f"C(0,0,0) = {val:.12f}, error {err:.2e}, {elapsed * 1e3:.0f} ms",
    )


def test_criterion_03_ghz_three_time_sweep(capsys):
    g = ghz_state()
    rng = np.random.default_rng(808)
    worst = 0.0
    for _ in range(1000):
        times = tuple(rng.uniform(0.0, 2.0 * math.pi / 3.0, size=3))
        got = multitime_correlator(g, CorrelatorQuery(("sign",) * 3, times))
        worst = max(worst, abs(got - _ghz_quantum(times)))
    special = multitime_correlator(
        g, CorrelatorQuery(("sign",) * 3, (math.pi / 6, math.pi / 6, 0.0))
    )
    worst = max(worst, abs(special - LAMBDA**3))
    _check(
        capsys,
        worst < 1e-10,
        "criterion 3 GHZ multi-time sweep",
        f"1000 random triples + sign-flip point, max error {worst:.2e}",
    )


def test_criterion_04_fr_probabilities(capsys):
    t_q = quarter_phase_time()
    state = fr_state()
    closed = {
        ("proj-", "proj+", t_q, 0.0): 0.25 - LAMBDA / 12 - LAMBDA**2 / 6,
        ("proj+", "proj+", t_q, t_q): 0.25 - LAMBDA / 6 - LAMBDA**2 / 12,
        ("proj+", "proj-", 0.0, t_q): 0.25 - LAMBDA / 12 - LAMBDA**2 / 6,
        ("proj+", "proj+", 0.0, 0.0): 0.25 - LAMBDA / 3 + LAMBDA**2 / 6,
    }
    worst = 0.0
    for (op1, op2, s, u), expect in closed.items():
        got = multitime_correlator(state, CorrelatorQuery((op1, op2), (s, u)))
        worst = max(worst, abs(got - expect))

    # equal-time rows re-checked by direct density quadrature over quadrants
    nodes, weights = gauss_legendre(120, 0.0, math.pi / 2)
    quad_worst = 0.0
    for t in (t_q, 0.0):
        xs, ys = np.meshgrid(nodes, nodes, indexing="ij")
        pts = np.column_stack([xs.ravel(), ys.ravel()])
        dens = np.abs(psi_eval(state, t, pts)) ** 2
        w2 = np.outer(weights, weights).ravel()
        integral = float(np.sum(dens * w2))
        got = multitime_correlator(
            state, CorrelatorQuery(("proj+", "proj+"), (t, t))
        )
        quad_worst = max(quad_worst, abs(integral - got))
    _check(
        capsys,
        worst < 1e-10 and quad_worst < 1e-8,
        "criterion 4 two-time half-box probabilities",
        f"closed-form error {worst:.2e}, quadrature error {quad_worst:.2e}",
    )


def test_criterion_05_continuity_and_initial_rest(capsys):
    rng = np.random.default_rng(515)
    h = 1e-4
    worst = 0.0
    for state, t in ((ghz_state(), 0.37), (fr_state(), 0.21)):
        dims = state.dims
        pts = []
        while len(pts) < 50:
            cand = rng.uniform(-1.45, 1.45, size=(200, dims))
            dens = np.abs(psi_eval(state, t, cand)) ** 2
            pts.extend(cand[dens > 1e-3][: 50 - len(pts)])
        pts = np.array(pts)

        def rho(tt, qq):
            return np.abs(psi_eval(state, tt, qq)) ** 2

        drho_dt = (rho(t + h, pts) - rho(t - h, pts)) / (2.0 * h)
        div_j = np.zeros(len(pts))
        for d in range(dims):
            shift = np.zeros(dims)
            shift[d] = h
            jp = 2.0 * np.imag(
                np.conj(psi_eval(state, t, pts + shift))
                * psi_grad(state, t, pts + shift)[:, d]
            )
            jm = 2.0 * np.imag(
                np.conj(psi_eval(state, t, pts - shift))
                * psi_grad(state, t, pts - shift)[:, d]
            )
            div_j += (jp - jm) / (2.0 * h)
        worst = max(worst, float(np.max(np.abs(drho_dt + div_j))))

    g = ghz_state()
    rest_pts = rng.uniform(-1.5, 1.5, size=(200, 3))
    dens = np.abs(psi_eval(g, 0.0, rest_pts)) ** 2
    rest_pts = rest_pts[dens > 1e-6]
    v0 = velocity(g, 0.0, rest_pts)
    rest_ok = bool(np.all(v0 == 0.0))
    _check(
        capsys,
        worst < 1e-5 and rest_ok,
        "criterion 5 continuity equation",
        f"max |d_t rho + div j| = {worst:.2e} over 100 points; "
        f"initial GHZ velocity identically zero: {rest_ok}",
    )


def test_criterion_06_equal_time_agreement(capsys):
    start = time.perf_counter()
    g = ghz_state()
    count = 1000
    grid = np.linspace(0.0, 2.0 * math.pi / 9.0, 12)
    stats = ensemble_products(
        g, [[("sign", float(t))] * 3 for t in grid], count, 2025
    )
    quantum = np.array([_ghz_quantum((t, t, t)) for t in grid])
    dev = np.abs(stats.means - quantum) / stats.stderrs
    hits = int(np.sum(dev <= 3.0))
    elapsed = time.perf_counter() - start
    _check(
        capsys,
        hits >= 11 and stats.n_failed <= 0.01 * count and elapsed < 300.0,
        "criterion 6 equal-time ensemble agreement",
        f"{hits}/12 points within 3 SE (worst {dev.max():.2f} SE), "
        f"{stats.n_failed} failures, {elapsed:.1f} s",
    )


def test_criterion_07_two_time_disagreement(capsys):
    g = ghz_state()
    count = 4000
    grid = np.linspace(math.pi / 36.0, math.pi / 3.0, 12)
    rows = [[("sign", 0.0), ("sign", float(s)), ("sign", float(s))] for s in grid]
    stats = ensemble_products(g, rows, count, 2025)
    quantum = np.array([_ghz_quantum((0.0, s, s)) for s in grid])
    dev = np.abs(stats.means - quantum) / stats.stderrs
    _check(
        capsys,
        float(dev.max()) > 5.0,
        "criterion 7 naive two-time disagreement",
        f"max deviation {dev.max():.1f} SE at s = {grid[int(dev.argmax())]:.4f} "
        f"(no-collapse trajectories vs quantum two-time value)",
    )


def test_criterion_08_equivariance_octants(capsys):
    g = ghz_state()
    count = 10_000
    t_star = math.pi / 9.0
    batch = sample_initial(g, 0.0, count, 777)
    positions, ok, _ = _integrate_batch(
        g, batch.points, 0.0, np.array([t_star]), IntegratorConfig(), 1
    )
    pos = positions[ok, 0, :]
    signs = (pos >= 0.0).astype(int)
    observed = np.zeros((2, 2, 2))
    for a in (0, 1):
        for b in (0, 1):
            for c in (0, 1):
                observed[a, b, c] = np.sum(
                    (signs[:, 0] == a) & (signs[:, 1] == b) & (signs[:, 2] == c)
                )
    masses = octant_masses(g, t_star)
    expected = masses / masses.sum() * ok.sum()
    result = scipy.stats.chisquare(observed.ravel(), expected.ravel())
    _check(
        capsys,
        result.pvalue > 1e-3 and int(count - ok.sum()) <= 0.01 * count,
        "criterion 8 octant equivariance",
        f"chi2 = {result.statistic:.2f} (7 dof), p = {result.pvalue:.3f}, "
        f"{int(count - ok.sum())} failures",
    )


def test_criterion_09_collapse_restores_agreement(capsys):
    start = time.perf_counter()
    count = 2000
    grid = np.linspace(math.pi / 36.0, math.pi / 3.0, 12)
    res = collapsed_two_time_ensemble(
        count,
        grid,
        424242,
        cutoff=64,
        config=IntegratorConfig(rel_tol=1e-6, abs_tol=1e-9),
    )
    quantum = np.array([_ghz_quantum((0.0, s, s)) for s in grid])
    dev = np.abs(res.means - quantum) / res.stderrs
    hits = int(np.sum(dev <= 3.0))
    elapsed = time.perf_counter() - start
    _check(
        capsys,
        hits >= 11 and res.n_failed <= 0.01 * count,
        "criterion 9 collapse restores two-time agreement",
        f"{hits}/12 points within 3 SE (worst {dev.max():.2f} SE), "
        f"{res.n_failed} failures, {elapsed:.1f} s",
    )


def test_criterion_10_byte_determinism(tmp_path, capsys):
    jobs = (
        ("equal-times", ["--count", "200", "--seed", "42", "--grid", "0:0.2:3"]),
        (
            "collapse-two-times",
            ["--count", "100", "--seed", "42",
             "--grid", f"{math.pi / 36}:{math.pi / 6}:2",
             "--rel-tol", "1e-6", "--abs-tol", "1e-9"],
        ),
    )
    all_same = True
    details = []
    for name, flags in jobs:
        outputs = []
        for workers in (1, 2, 3):
            out = str(tmp_path / f"{name}-{workers}.csv")
            code = cli_main(
                [name, *flags, "--workers", str(workers), "--out", out]
            )
            assert code == 0
            outputs.append(open(out, "rb").read())
        same = outputs[0] == outputs[1] == outputs[2]
        all_same = all_same and same
        details.append(f"{name}: {'identical' if same else 'DIFFER'}")
    _check(
        capsys,
        all_same,
        "criterion 10 reproducibility",
        "same seed across 1/2/3 workers, byte-identical CSV ("
        + "; ".join(details)
        + ")",
    )
