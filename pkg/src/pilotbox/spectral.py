"""Hard-wall box eigenmodes and finite-mode multi-particle states.

The box is the open interval (-pi/2, pi/2) with Dirichlet walls.  With the
Hamiltonian H = -d^2/dx^2 the eigenfunctions split by the parity of the
index:

    phi_n(x) = sqrt(2/pi) * cos(n x)    n odd   (even function)
    phi_n(x) = sqrt(2/pi) * sin(n x)    n even  (odd function)

with energies E_n = n^2.  Multi-particle states are finite complex
combinations of tensor products of these modes, carried by :class:`BoxState`.
Wavefunction evaluation is vectorized over batches of configuration points.

Energy gaps are never stored as constants; they emerge from ``mode_energy``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "HALF_WIDTH",
    "mode_energy",
    "mode_parity",
    "mode_eval",
    "mode_grad",
    "BoxState",
    "ghz_state",
    "fr_state",
    "psi_eval",
    "psi_grad",
    "gauss_legendre",
]

HALF_WIDTH = math.pi / 2.0
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def _check_mode(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"mode index must be a positive integer, got {n!r}")
    return int(n)


def mode_energy(n: int) -> float:
    """Energy E_n = n^2 of box mode ``n``."""
    return float(_check_mode(n) ** 2)


def mode_parity(n: int) -> int:
    """Spatial parity of mode ``n``: +1 for odd indices (cosine branch),
    -1 for even indices (sine branch)."""
    return 1 if _check_mode(n) % 2 == 1 else -1


def _check_inside(x: np.ndarray) -> None:
    if np.any(np.abs(x) >= HALF_WIDTH):
        raise ValueError("position outside the open box (-pi/2, pi/2)")


def mode_eval(n: int, x) -> np.ndarray:
    """Evaluate phi_n at positions ``x`` strictly inside the box.

    Parameters
    ----------
    n : int
        Mode index (1-based).
    x : array_like
        Positions with |x| < pi/2.

    Returns
    -------
    ndarray or float
        phi_n(x), same shape as ``x``.
    """
    n = _check_mode(n)
    x = np.asarray(x, dtype=float)
    _check_inside(x)
    if n % 2 == 1:
        out = _SQRT_2_OVER_PI * np.cos(n * x)
    else:
        out = _SQRT_2_OVER_PI * np.sin(n * x)
    return out if out.ndim else float(out)


def mode_grad(n: int, x) -> np.ndarray:
    """Spatial derivative phi_n'(x) for ``x`` strictly inside the box."""
    n = _check_mode(n)
    x = np.asarray(x, dtype=float)
    _check_inside(x)
    if n % 2 == 1:
        out = -n * _SQRT_2_OVER_PI * np.sin(n * x)
    else:
        out = n * _SQRT_2_OVER_PI * np.cos(n * x)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class BoxState:
    """Finite superposition of tensor-product box modes.

    Coefficients are given in the mode basis at reference time ``t_ref``;
    the state at time t has coefficients c_n * exp(-i E_n (t - t_ref)) with
    E_n the sum of the per-axis mode energies.

    Parameters
    ----------
    coeffs : dict
        Map from mode-index tuples (one index per particle, 1-based) to
        complex amplitudes.  All keys must have the same length; the sum of
        |c|^2 must be 1 within 1e-12.
    t_ref : float
        Reference time of the coefficients.
    """

    coeffs: dict = field(repr=False)
    t_ref: float = 0.0

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("state needs at least one mode term")
        dims = None
        for key, amp in self.coeffs.items():
            if not isinstance(key, tuple):
                raise ValueError(f"mode key must be a tuple, got {key!r}")
            if dims is None:
                dims = len(key)
            elif len(key) != dims:
                raise ValueError("all mode tuples must have the same length")
            for n in key:
                _check_mode(n)
        norm = sum(abs(amp) ** 2 for amp in self.coeffs.values())
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond 1e-12")

    @property
    def dims(self) -> int:
        """Number of particles."""
        return self.term_modes.shape[1]

    @property
    def cutoff(self) -> int:
        """Largest mode index present on any axis."""
        return int(self.term_modes.max())

    @cached_property
    def term_modes(self) -> np.ndarray:
        """(n_terms, dims) int64 array of mode indices, fixed ordering."""
        keys = sorted(self.coeffs.keys())
        arr = np.array(keys, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def term_coeff(self) -> np.ndarray:
        """(n_terms,) complex amplitudes aligned with ``term_modes``."""
        keys = sorted(self.coeffs.keys())
        arr = np.array([self.coeffs[k] for k in keys], dtype=np.complex128)
        arr.setflags(write=False)
        return arr

    @cached_property
    def term_energy(self) -> np.ndarray:
        """(n_terms,) total energies, one per term."""
        arr = (self.term_modes.astype(float) ** 2).sum(axis=1)
        arr.setflags(write=False)
        return arr

    @cached_property
    def axis_cutoffs(self) -> np.ndarray:
        """(dims,) largest mode index per axis."""
        arr = self.term_modes.max(axis=0)
        arr.setflags(write=False)
        return arr

    def coeff_at(self, t: float) -> np.ndarray:
        """Coefficients evolved to absolute time ``t``."""
        return self.term_coeff * np.exp(-1j * self.term_energy * (t - self.t_ref))


def ghz_state() -> BoxState:
    """Three-particle GHZ-type state (g g g - e e e)/sqrt(2).

    g is mode 1 and e is mode 2; the coefficients are real, so the t = 0
    wavefunction is real and the guiding velocity vanishes there.
    """
    amp = 1.0 / math.sqrt(2.0)
    return BoxState({(1, 1, 1): amp, (2, 2, 2): -amp})


def fr_state() -> BoxState:
    """Two-particle Frauchiger-Renner style state (f b + b f - i b b)/sqrt(3).

    f = (g + i e)/sqrt(2) and b = (g - i e)/sqrt(2) are the circular
    combinations of the two lowest modes.  The expansion back onto the
    g/e product basis is carried out explicitly here.
    """
    s2 = 1.0 / math.sqrt(2.0)
    f = {1: s2, 2: 1j * s2}
    b = {1: s2, 2: -1j * s2}

    coeffs: dict = {}

    def _add(left, right, scale):
        for m, cl in left.items():
            for n, cr in right.items():
                key = (m, n)
                coeffs[key] = coeffs.get(key, 0.0) + scale * cl * cr

    scale = 1.0 / math.sqrt(3.0)
    _add(f, b, scale)
    _add(b, f, scale)
    _add(b, b, -1j * scale)
    return BoxState(coeffs)


def _evaluate(state: BoxState, t: float, q, want_grad: bool):
    q_in = np.asarray(q, dtype=float)
    single = q_in.ndim == 1
    q2 = np.atleast_2d(q_in)
    if q2.shape[-1] != state.dims:
        raise ValueError(
            f"configuration has {q2.shape[-1]} coordinates, state has {state.dims}"
        )
    _check_inside(q2)
    lead = q2.shape[:-1]
    q2 = q2.reshape(-1, state.dims)

    modes = state.term_modes
    weights = state.coeff_at(t)

    fvals = []
    dvals = []
    for d in range(state.dims):
        uniq, inv = np.unique(modes[:, d], return_inverse=True)
        nx = q2[:, d : d + 1] * uniq[None, :]
        odd = (uniq % 2) == 1
        f = np.where(odd, np.cos(nx), np.sin(nx)) * _SQRT_2_OVER_PI
        fvals.append(f[:, inv])
        if want_grad:
            df = np.where(odd, -np.sin(nx), np.cos(nx)) * (_SQRT_2_OVER_PI * uniq)
            dvals.append(df[:, inv])

    prod = fvals[0].copy()
    for f in fvals[1:]:
        prod *= f
    psi = prod @ weights

    if not want_grad:
        return psi.reshape(lead) if not single else complex(psi[0])

    grads = np.empty((q2.shape[0], state.dims), dtype=np.complex128)
    for d in range(state.dims):
        g = dvals[d].copy()
        for d2 in range(state.dims):
            if d2 != d:
                g *= fvals[d2]
        grads[:, d] = g @ weights
    if single:
        return complex(psi[0]), grads[0]
    return psi.reshape(lead), grads.reshape(lead + (state.dims,))


def psi_eval(state: BoxState, t: float, q):
    """Wavefunction value at time ``t`` and configuration(s) ``q``.

    Parameters
    ----------
    state : BoxState
    t : float
        Absolute time.
    q : array_like, shape (..., dims)
        Configurations strictly inside the box.

    Returns
    -------
    complex or ndarray
        psi(t, q) with the leading shape of ``q``.
    """
    return _evaluate(state, t, q, want_grad=False)


def psi_grad(state: BoxState, t: float, q):
    """Configuration gradient of the wavefunction.

    Returns the complex gradient with shape ``q.shape`` (one derivative per
    coordinate).  For a single configuration the value of psi is not
    returned; use :func:`psi_eval` alongside.
    """
    _, grads = _evaluate(state, t, q, want_grad=True)
    return grads


def gauss_legendre(n: int, a: float, b: float):
    """Gauss-Legendre nodes and weights on [a, b].

    The fixed-order rule (order 200 per axis unless stated otherwise) is the
    quadrature standard for all norm and overlap integrals in this package.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w
