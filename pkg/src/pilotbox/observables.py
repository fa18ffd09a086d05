"""Sign observable algebra and analytic multi-time position correlators.

The central object is the matrix of the coarse position observable
sgn(x) in the box mode basis,

    S[m][n] = integral phi_m(x) sgn(x) phi_n(x) dx,

which vanishes whenever m and n share parity and has the closed form
(4 n_e / pi) / (n_e^2 - n_o^2) for an even index n_e paired with an odd
index n_o.  The half-box projector matrices are (I +/- S)/2.

Multi-time correlators of sign and half-box projector observables are
evaluated exactly by sandwiching Heisenberg-picture matrix elements
between the finitely many modes of a :class:`~pilotbox.spectral.BoxState`.
With A(t) = exp(iHt) A exp(-iHt) the matrix elements are

    <m| A(t) |n> = A[m][n] exp(i (E_m - E_n) t),

so for modes (1, 2) at t = pi/6 the sign element is -i 8/(3 pi).  This
pairing makes an equal-time correlator identical to the corresponding
integral of the forward-evolved density, which trajectory ensembles
reproduce by equivariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .spectral import BoxState, mode_energy

__all__ = [
    "sign_overlap",
    "sign_matrix",
    "half_projector",
    "heisenberg_sign_element",
    "quarter_phase_time",
    "CorrelatorQuery",
    "multitime_correlator",
    "octant_masses",
    "axis_marginal_masses",
]

#: Operator tags accepted by :class:`CorrelatorQuery`.
OPERATOR_TAGS = ("sign", "proj+", "proj-", "ident")


def sign_overlap(m: int, n: int) -> float:
    """Matrix element of sgn(x) between box modes ``m`` and ``n``.

    Exactly zero when the indices have the same parity.  Symmetric in its
    arguments.
    """
    if m < 1 or n < 1:
        raise ValueError("mode indices must be >= 1")
    if (m - n) % 2 == 0:
        return 0.0
    even = m if m % 2 == 0 else n
    odd = n if m % 2 == 0 else m
    return (4.0 * even / math.pi) / (even * even - odd * odd)


@lru_cache(maxsize=None)
def sign_matrix(cutoff: int) -> np.ndarray:
    """Sign-observable matrix on modes 1..cutoff.

    Entry [i, j] is ``sign_overlap(i + 1, j + 1)``.  The array is cached and
    read-only.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    idx = np.arange(1, cutoff + 1)
    row = idx[:, None].astype(float)
    col = idx[None, :].astype(float)
    col_even = idx[None, :] % 2 == 0
    even = np.where(col_even, col, row)
    odd = np.where(col_even, row, col)
    with np.errstate(divide="ignore", invalid="ignore"):
        mat = (4.0 * even / math.pi) / (even * even - odd * odd)
    # same-parity entries (where the quotient is garbage) are exactly zero
    opposite = (idx[:, None] % 2) != (idx[None, :] % 2)
    mat = np.where(opposite, mat, 0.0)
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def half_projector(cutoff: int, side: int) -> np.ndarray:
    """Matrix of the indicator of the half box with sign ``side`` (+1 or -1).

    Equals (I + side * S)/2 on modes 1..cutoff; read-only and cached.
    """
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    mat = 0.5 * (np.eye(cutoff) + side * sign_matrix(cutoff))
    mat.setflags(write=False)
    return mat


def heisenberg_sign_element(m: int, n: int, t: float) -> complex:
    """Heisenberg-picture sign matrix element <m| sgn_t |n>.

    Equal to ``sign_overlap(m, n) * exp(i (E_m - E_n) t)``; hermitian in
    (m, n) and of time-independent modulus.
    """
    return sign_overlap(m, n) * np.exp(1j * (mode_energy(m) - mode_energy(n)) * t)


def quarter_phase_time() -> float:
    """Time at which the two lowest modes accumulate a quarter-period
    relative phase: pi / (2 (E_2 - E_1))."""
    return math.pi / (2.0 * (mode_energy(2) - mode_energy(1)))


@dataclass(frozen=True)
class CorrelatorQuery:
    """One multi-time product observable.

    ``ops[i]`` is applied to particle i at time ``times[i]``.  Tags:
    ``"sign"`` for sgn(x), ``"proj+"``/``"proj-"`` for the half-box
    indicators, ``"ident"`` to leave a particle unmeasured.
    """

    ops: tuple
    times: tuple

    def __post_init__(self):
        if len(self.ops) != len(self.times):
            raise ValueError("ops and times must have equal length")
        if not self.ops:
            raise ValueError("query needs at least one particle")
        for op in self.ops:
            if op not in OPERATOR_TAGS:
                raise ValueError(f"unknown operator tag {op!r}")
        for t in self.times:
            if not math.isfinite(t):
                raise ValueError("times must be finite")


def _op_matrix(op: str, cutoff: int) -> np.ndarray:
    if op == "sign":
        return sign_matrix(cutoff)
    if op == "proj+":
        return half_projector(cutoff, 1)
    if op == "proj-":
        return half_projector(cutoff, -1)
    raise ValueError(f"unknown operator tag {op!r}")


def multitime_correlator(state: BoxState, query: CorrelatorQuery) -> float:
    """Exact expectation of a multi-time product of coarse observables.

    The product ``ops[0](times[0]) x ops[1](times[1]) x ...`` is evaluated in
    the Heisenberg picture by summing matrix elements over the state's mode
    pairs; this is exact because the state has finitely many modes.  The
    result must be real; a residual imaginary part above 1e-8 raises.
    """
    if len(query.ops) != state.dims:
        raise ValueError(
            f"query has {len(query.ops)} slots, state has {state.dims} particles"
        )
    modes = state.term_modes
    c0 = state.coeff_at(0.0)
    pair = np.conj(c0)[:, None] * c0[None, :]
    for d, (op, td) in enumerate(zip(query.ops, query.times)):
        md = modes[:, d]
        if op == "ident":
            pair = pair * (md[:, None] == md[None, :])
            continue
        mat = _op_matrix(op, state.cutoff)
        block = mat[np.ix_(md - 1, md - 1)]
        energy = md.astype(float) ** 2
        phase = np.exp(1j * td * (energy[:, None] - energy[None, :]))
        pair = pair * (block * phase)
    value = pair.sum()
    if abs(value.imag) > 1e-8:
        raise ArithmeticError(
            f"correlator has imaginary residue {value.imag!r}; expected a real value"
        )
    return float(value.real)


def octant_masses(state: BoxState, t: float) -> np.ndarray:
    """Probability mass of every orthant of the box at time ``t``.

    Returns an array of shape (2,) * dims; index 0 along an axis selects the
    negative half, index 1 the positive half.  Masses are computed from
    half-projector matrix elements, so they are exact for the finite-mode
    state.  They sum to 1.
    """
    modes = state.term_modes
    ct = state.coeff_at(t)
    base = np.conj(ct)[:, None] * ct[None, :]
    dims = state.dims
    blocks = []
    for d in range(dims):
        md = modes[:, d]
        per_side = []
        for side in (-1, 1):
            mat = half_projector(state.cutoff, side)
            per_side.append(mat[np.ix_(md - 1, md - 1)])
        blocks.append(per_side)

    out = np.empty((2,) * dims)
    for sides in product(range(2), repeat=dims):
        acc = base.copy()
        for d, s in enumerate(sides):
            acc *= blocks[d][s]
        value = acc.sum()
        if abs(value.imag) > 1e-8:
            raise ArithmeticError("orthant mass has a large imaginary residue")
        out[sides] = value.real
    return out


def axis_marginal_masses(state: BoxState, t: float, axis: int, edges) -> np.ndarray:
    """Probability of finding particle ``axis`` in each bin of ``edges``.

    ``edges`` is an increasing sequence inside [-pi/2, pi/2]; the return
    value has one entry per bin.  Bin overlaps of mode pairs are computed by
    Gauss-Legendre quadrature (order 60 per bin, ample for the smooth
    integrands here).
    """
    from .spectral import gauss_legendre, mode_eval

    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be increasing with at least two entries")
    if not (0 <= axis < state.dims):
        raise ValueError("axis out of range")

    modes = state.term_modes
    ct = state.coeff_at(t)
    pair = np.conj(ct)[:, None] * ct[None, :]
    # marginalizing the other axes forces their mode indices to match
    for d in range(state.dims):
        if d != axis:
            md = modes[:, d]
            pair = pair * (md[:, None] == md[None, :])

    md = modes[:, axis]
    uniq = np.unique(md)
    out = np.empty(edges.size - 1)
    for b in range(edges.size - 1):
        x, w = gauss_legendre(60, edges[b], edges[b + 1])
        vals = {n: mode_eval(int(n), x) for n in uniq}
        overlap = np.empty((uniq.size, uniq.size))
        for i, mi in enumerate(uniq):
            for j, nj in enumerate(uniq):
                overlap[i, j] = np.sum(w * vals[mi] * vals[nj])
        pos = {int(n): k for k, n in enumerate(uniq)}
        row = np.array([pos[int(n)] for n in md])
        block = overlap[np.ix_(row, row)]
        value = (pair * block).sum()
        out[b] = value.real
    return out
