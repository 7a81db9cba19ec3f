"""Jost solutions and the stationary scattering matrix (Lambda > 0).

Stationary system
-----------------
The reduced Hamiltonian Gamma^1 D_x + W with D_x = -i d/dx and
W = [[0, k], [k^*, 0]] leads to the first-order system

    X'(x) = i Gamma^1 (xi - W(x)) X(x).

Jost solutions F_l, F_r behave like exp(i Gamma^1 xi x) at +inf and -inf.
In the interaction picture Y = exp(-i Gamma^1 xi x) X the free oscillation
is removed and

    Y' = -i Gamma^1 What(x) Y,   What = [[0, e^{-2i xi x} k], [e^{2i xi x} k^*, 0]],

so that a_r = Y_r(+inf) (with Y_r(-inf) = I) and a_l = Y_l(-inf) = a_r^{-1}
(with Y_l(+inf) = I).  The Faddeev matrices are
M = exp(i Gamma^1 xi x) Y exp(-i Gamma^1 xi x) = F exp(-i Gamma^1 xi x).

Scheme
------
On each cell the potential is frozen at the midpoint; the exact cell
propagator is exp(A h) = cos(mu h) I + sin(mu h)/mu A with
A = i Gamma^1 (xi - W) and mu^2 = xi^2 - |k|^2 (A^2 = -mu^2 I because k k^*
is scalar).  Oscillations in xi are therefore integrated exactly and the
scheme is the symmetric exponential midpoint rule, whose error expands in
even powers of h; one Richardson step (h, h/2) makes it fourth order.
Products over cells are batched over energies and reduced pairwise.

Scattering data
---------------
Incoming waves from the left are normalised by a_l1, incoming waves from
the right by a_r4, which gives

    T_L = a_l1^{-1},  R = -a_l1^{-1} a_l2 = a_r2 a_r4^{-1},
    L = a_l3 a_l1^{-1} = -a_r4^{-1} a_r3,  T_R = a_r4^{-1},

and S_0 = [[T_L, R], [L, T_R]] is unitary by flux conservation.  Row one
and column two of S_0 S_0^* = I are exactly T_L T_L^* = I - R R^* and
T_R^* T_R = I - R^* R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, NumericalQualityError, PreconditionError
from .reduction import ReducedPotential

__all__ = [
    "FaddeevData",
    "ScatteringMatrix",
    "JostSolver",
    "decay_rate",
    "strip_half_width",
    "faddeev_left",
    "faddeev_fixed_point",
    "transition_coeffs",
    "scattering_matrix",
    "full_s_matrix",
    "sweep",
]

_GAMMA1_DIAG = np.array([1.0, 1.0, -1.0, -1.0])


def _blocks(a: np.ndarray):
    """Split (..., 4, 4) into the four (..., 2, 2) blocks."""
    return a[..., :2, :2], a[..., :2, 2:], a[..., 2:, :2], a[..., 2:, 2:]


def _dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


# ---------------------------------------------------------------------------
# Decay of the potential
# ---------------------------------------------------------------------------

def decay_rate(potential: ReducedPotential, n: int = 4001) -> float | None:
    """Fitted exponential decay rate of ||k|| at both ends (the smaller one).

    Fits log||k|| against x on the outer parts of the support where the
    norm lies between 1e-11 and 1e-4 of its maximum.  Returns ``None`` for
    potentials without a measurable exponential tail (zero or compactly
    supported synthetic data).
    """
    if potential.is_zero:
        return None
    x = np.linspace(potential.x_min, potential.x_max, n)
    nk = potential.norm(x)
    peak = nk.max()
    if peak == 0:
        return None
    i_peak = int(np.argmax(nk))
    rates = []
    for sl, sign in ((slice(0, i_peak), 1.0), (slice(i_peak, n), -1.0)):
        xs, ns = x[sl], nk[sl]
        sel = (ns > 1e-11 * peak) & (ns < 1e-4 * peak)
        if sel.sum() < 10:
            return None
        slope = np.polyfit(xs[sel], np.log(ns[sel]), 1)[0]
        rates.append(sign * slope)
    rate = min(rates)
    return rate if rate > 0 else None


def strip_half_width(potential: ReducedPotential) -> float:
    """Half the fitted decay rate: complex energies need |Im xi| below it."""
    rate = decay_rate(potential)
    if rate is None:
        return math.inf if potential.is_zero else 0.0
    return 0.5 * rate


def _check_strip(potential: ReducedPotential, xi: np.ndarray) -> None:
    if np.iscomplexobj(xi) and np.any(np.imag(xi) != 0):
        width = strip_half_width(potential)
        if np.max(np.abs(np.imag(xi))) >= width:
            raise PreconditionError(
                f"|Im xi| must stay below the strip half-width {width:.6g}")


# ---------------------------------------------------------------------------
# Cell propagators
# ---------------------------------------------------------------------------

def _cell_propagators(xi, xm, km, w2, h):
    """Interaction-picture propagators of shape (cells, energies, 4, 4).

    A negative ``h`` gives the inverse propagators of the same cells.
    """
    xi = np.asarray(xi)
    mu = np.sqrt(xi[None, :] ** 2 - w2[:, None] + 0j)
    cosv = np.cos(mu * h)
    sinc = h * np.sinc(mu * h / np.pi)
    shift = np.exp(-1j * xi * h)[None, :]
    d1 = shift * (cosv + 1j * xi[None, :] * sinc)
    d2 = (cosv - 1j * xi[None, :] * sinc) / shift
    phase = np.exp(-2j * xi[None, :] * xm[:, None])
    n_c, n_e = mu.shape
    out = np.zeros((n_c, n_e, 4, 4), dtype=complex)
    out[..., 0, 0] = d1
    out[..., 1, 1] = d1
    out[..., 2, 2] = d2
    out[..., 3, 3] = d2
    up = (-1j * sinc * phase)[..., None, None]
    lo = (1j * sinc / phase)[..., None, None]
    out[..., :2, 2:] = up * km[:, None]
    out[..., 2:, :2] = lo * _dagger(km)[:, None]
    return out


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """Product mats[n-1] @ ... @ mats[0] along axis 0, by pairwise reduction."""
    while mats.shape[0] > 1:
        n = mats.shape[0]
        even = mats[0:n - 1:2]
        odd = mats[1:n:2]
        prod = odd @ even
        if n % 2:
            prod = np.concatenate([prod, mats[-1:]], axis=0)
        mats = prod
    return mats[0]


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class JostSolver:
    """Transfer-matrix solver on the support of a reduced potential.

    Parameters
    ----------
    potential : ReducedPotential
    h : float
        Coarse cell width.  It is reduced automatically so that
        ``|xi| h <= omega_max`` for the largest requested energy, which
        keeps the cell lattice away from aliasing 2 xi onto 2 pi / h.
    richardson : bool
        Combine cell widths h and h/2 (fourth-order result).
    omega_max : float
        Bound on ``|xi| h``.
    chunk_budget : int
        Upper bound on cells x energies held in memory at once.
    """

    potential: ReducedPotential
    h: float = 0.02
    richardson: bool = True
    omega_max: float = 1.5
    chunk_budget: int = 1 << 18
    _cache: dict = field(default_factory=dict, repr=False)

    def cell_width(self, xi) -> float:
        top = float(np.max(np.abs(xi))) if np.size(xi) else 0.0
        h = self.h
        if top > 0:
            h = min(h, self.omega_max / top)
        span = self.potential.x_max - self.potential.x_min
        n = max(2, int(math.ceil(span / h)))
        return span / n

    def samples(self, h: float):
        """Cell midpoints, k and |k|^2 at the midpoints for width ``h``."""
        key = round(h, 15)
        if key not in self._cache:
            p = self.potential
            n = int(round((p.x_max - p.x_min) / h))
            xm = p.x_min + (np.arange(n) + 0.5) * h
            km = p.k(xm)
            w2 = 0.5 * np.real(np.einsum("nij,nij->n", km, np.conj(km)))
            self._cache[key] = (xm, km, w2)
        return self._cache[key]

    def _transfer_single(self, xi: np.ndarray, h: float) -> np.ndarray:
        xm, km, w2 = self.samples(h)
        n_e = xi.size
        total = np.broadcast_to(np.eye(4, dtype=complex), (n_e, 4, 4)).copy()
        if self.potential.is_zero:
            return total
        step = max(1, self.chunk_budget // max(n_e, 1))
        for start in range(0, xm.size, step):
            sl = slice(start, start + step)
            cells = _cell_propagators(xi, xm[sl], km[sl], w2[sl], h)
            total = _ordered_product(cells) @ total
        return total

    def transfer(self, xi) -> np.ndarray:
        """a_r(xi) for an array of energies, shape (n, 4, 4)."""
        xi = np.atleast_1d(np.asarray(xi))
        h = self.cell_width(xi)
        fine = self._transfer_single(xi, 0.5 * h)
        if not self.richardson:
            return fine
        coarse = self._transfer_single(xi, h)
        return (4.0 * fine - coarse) / 3.0

    # -- nodal Jost data for one energy --------------------------------------
    def nodal(self, xi: complex, h: float | None = None):
        """Y_l and Y_r at the cell boundaries for a single energy.

        Returns ``(x, Y_l, Y_r)`` with arrays of shape (nodes, 4, 4).  With
        Richardson enabled the values on the coarse nodes are extrapolated.
        """
        xi_arr = np.array([xi])
        h = self.cell_width(xi_arr) if h is None else h
        x_f, yl_f, yr_f = self._nodal_single(xi_arr, 0.5 * h)
        if not self.richardson:
            return x_f, yl_f, yr_f
        x_c, yl_c, yr_c = self._nodal_single(xi_arr, h)
        yl = (4.0 * yl_f[::2] - yl_c) / 3.0
        yr = (4.0 * yr_f[::2] - yr_c) / 3.0
        return x_c, yl, yr

    def _nodal_single(self, xi_arr, h):
        xm, km, w2 = self.samples(h)
        n = xm.size
        x_nodes = self.potential.x_min + np.arange(n + 1) * h
        if self.potential.is_zero:
            ident = np.broadcast_to(np.eye(4, dtype=complex), (n + 1, 4, 4)).copy()
            return x_nodes, ident, ident.copy()
        fwd = _cell_propagators(xi_arr, xm, km, w2, h)[:, 0]
        bwd = _cell_propagators(xi_arr, xm, km, w2, -h)[:, 0]
        yr = np.empty((n + 1, 4, 4), dtype=complex)
        yl = np.empty((n + 1, 4, 4), dtype=complex)
        yr[0] = np.eye(4)
        yl[n] = np.eye(4)
        for j in range(n):
            yr[j + 1] = fwd[j] @ yr[j]
        for j in range(n - 1, -1, -1):
            yl[j] = bwd[j] @ yl[j + 1]
        return x_nodes, yl, yr


# ---------------------------------------------------------------------------
# Faddeev data and transition coefficients
# ---------------------------------------------------------------------------

def _to_faddeev(x, y, xi):
    """M = exp(i G1 xi x) Y exp(-i G1 xi x)."""
    ph = np.exp(1j * xi * x)
    left = ph[:, None] ** _GAMMA1_DIAG[None, :]
    return left[:, :, None] * y / left[:, None, :]


@dataclass(frozen=True, eq=False)
class FaddeevData:
    """Faddeev matrices on the x-grid and transition matrices at one energy.

    ``M_l`` and ``M_r`` have shape (nodes, 4, 4); ``a_l`` and ``a_r`` are
    the endpoint values of the interaction-picture solutions.  ``k_nodes``
    holds k at the grid nodes for the integral representations.
    """

    xi: complex
    x: np.ndarray
    M_l: np.ndarray
    M_r: np.ndarray
    a_l: np.ndarray
    a_r: np.ndarray
    k_nodes: np.ndarray

    @property
    def M_l_blocks(self):
        return _blocks(self.M_l)

    @property
    def M_r_blocks(self):
        return _blocks(self.M_r)

    @property
    def boundary_residual(self) -> float:
        """||M_l - I|| at the right edge and ||M_r - I|| at the left edge."""
        eye = np.eye(4)
        return float(max(np.linalg.norm(self.M_l[-1] - eye, 2),
                         np.linalg.norm(self.M_r[0] - eye, 2)))

    @property
    def inverse_defect(self) -> float:
        """||a_l a_r - I||."""
        return float(np.linalg.norm(self.a_l @ self.a_r - np.eye(4), 2))


def faddeev_left(potential: ReducedPotential, xi: complex, *, h: float = 0.02,
                 richardson: bool = True) -> FaddeevData:
    """Left (and right) Faddeev matrices by back-integration of the system.

    The Jost solution normalised at +inf is integrated from the right edge
    of the support with the cell propagators of :class:`JostSolver`; the
    right Jost solution is integrated forward from the left edge.
    """
    _check_strip(potential, np.array([xi]))
    solver = JostSolver(potential, h=h, richardson=richardson)
    x, yl, yr = solver.nodal(xi)
    M_l = _to_faddeev(x, yl, xi)
    M_r = _to_faddeev(x, yr, xi)
    return FaddeevData(xi=xi, x=x, M_l=M_l, M_r=M_r, a_l=yl[0].copy(),
                       a_r=yr[-1].copy(), k_nodes=potential.k(x))


def transition_coeffs(fd: FaddeevData):
    """a_l and a_r from the integral representations over the Faddeev blocks.

    With M_l1..M_l4 the blocks of the left Faddeev matrix:

        a_l1 = I + i int k M_l3,           a_l2 = i int e^{-2i xi y} k M_l4,
        a_l3 = -i int e^{2i xi y} k^* M_l1, a_l4 = I - i int k^* M_l2,

    and for the right Faddeev matrix

        a_r1 = I - i int k M_r3,           a_r2 = -i int e^{-2i xi y} k M_r4,
        a_r3 = i int e^{2i xi y} k^* M_r1,  a_r4 = I + i int k^* M_r2.

    Integrals use the trapezoidal rule on the Faddeev grid.

    Raises
    ------
    NumericalQualityError
        If a_l1 is numerically singular (it is invertible on the real axis).
    """
    x, k, xi = fd.x, fd.k_nodes, fd.xi
    kd = _dagger(k)
    em = np.exp(-2j * xi * x)[:, None, None]
    ep = np.exp(2j * xi * x)[:, None, None]
    eye = np.eye(2)

    def integral(vals):
        return np.trapezoid(vals, x, axis=0)

    l1, l2, l3, l4 = fd.M_l_blocks
    r1, r2, r3, r4 = fd.M_r_blocks
    a_l = np.block([[eye + 1j * integral(k @ l3), 1j * integral(em * k @ l4)],
                    [-1j * integral(ep * kd @ l1), eye - 1j * integral(kd @ l2)]])
    a_r = np.block([[eye - 1j * integral(k @ r3), -1j * integral(em * k @ r4)],
                    [1j * integral(ep * kd @ r1), eye + 1j * integral(kd @ r2)]])
    if np.linalg.cond(a_l[:2, :2]) > 1e12:
        raise NumericalQualityError(f"a_l1 is numerically singular at xi={xi}")
    return a_l, a_r


def _fixed_point_sweeps(potential, xi, n, tol, max_iter):
    x = np.linspace(potential.x_min, potential.x_max, n + 1)
    dx = x[1] - x[0]
    k = potential.k(x)
    kd = _dagger(k)
    ep = np.exp(2j * xi * x)[:, None, None]
    em = np.exp(-2j * xi * x)[:, None, None]

    def tail(vals):
        # int_x^inf by the trapezoidal rule, for every node
        seg = 0.5 * dx * (vals[1:] + vals[:-1])
        out = np.zeros_like(vals)
        out[:-1] = np.cumsum(seg[::-1], axis=0)[::-1]
        return out

    src3 = -1j * em * tail(ep * kd)
    M3 = np.zeros((n + 1, 2, 2), dtype=complex)
    M4 = np.broadcast_to(np.eye(2, dtype=complex), (n + 1, 2, 2)).copy()
    history = []
    for _ in range(max_iter):
        new3 = src3 + em * tail(ep * kd @ tail(k @ M3))
        new4 = np.eye(2) + tail(ep * kd @ tail(em * k @ M4))
        change = max(np.abs(new3 - M3).max(), np.abs(new4 - M4).max())
        M3, M4 = new3, new4
        history.append(float(change))
        if change < tol:
            return x, M3, M4, history
    raise ConvergenceError(
        f"fixed-point iteration stalled at change {history[-1]:.3e} "
        f"after {max_iter} sweeps (last changes: {history[-3:]})")


def faddeev_fixed_point(potential: ReducedPotential, xi: complex, *,
                        h: float = 0.02, refine: int = 2, richardson: bool = True,
                        tol: float = 1e-12, max_iter: int = 500):
    """Solve the uncoupled Volterra equations for M_l3 and M_l4 by iteration.

        M_l3(x) = -i int_x^inf e^{2i xi (y-x)} k^*(y) dy
                  + int_x^inf int_y^inf e^{2i xi (y-x)} k^*(y) k(z) M_l3(z) dz dy
        M_l4(x) = I + int_x^inf int_y^inf e^{-2i xi (z-y)} k^*(y) k(z) M_l4(z) dz dy

    Integrals are cumulative trapezoidal sums.  The grid has ``refine``
    cells per cell of the :class:`JostSolver` grid of width ``h``, so the
    nodes of both methods coincide.  With ``richardson`` the sweep is
    repeated on a grid twice as fine and the two results are combined.

    Returns
    -------
    x, M3, M4, history
        ``history`` lists the sup-norm change of each sweep.

    Raises
    ------
    ConvergenceError
        If the change does not fall below ``tol`` within ``max_iter``.
    """
    _check_strip(potential, np.array([xi]))
    span = potential.x_max - potential.x_min
    n = max(2, int(math.ceil(span / h))) * refine
    x, M3, M4, history = _fixed_point_sweeps(potential, xi, n, tol, max_iter)
    if richardson:
        _, f3, f4, _ = _fixed_point_sweeps(potential, xi, 2 * n, tol, max_iter)
        M3 = (4.0 * f3[::2] - M3) / 3.0
        M4 = (4.0 * f4[::2] - M4) / 3.0
    return x, M3, M4, history


# ---------------------------------------------------------------------------
# Scattering matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScatteringMatrix:
    """Blocks of S_0 (or of the dressed S) on an energy grid.

    Arrays ``T_L, R, L, T_R`` have shape (n, 2, 2).  ``beta`` records the
    dressing phase when ``dressed`` is true.
    """

    xi: np.ndarray
    T_L: np.ndarray
    R: np.ndarray
    L: np.ndarray
    T_R: np.ndarray
    dressed: bool = False
    beta: float = 0.0

    def __len__(self) -> int:
        return self.xi.size

    def matrix(self) -> np.ndarray:
        """Full 4x4 matrices [[T_L, R], [L, T_R]], shape (n, 4, 4)."""
        top = np.concatenate([self.T_L, self.R], axis=-1)
        bot = np.concatenate([self.L, self.T_R], axis=-1)
        return np.concatenate([top, bot], axis=-2)

    def unitarity_defect(self) -> np.ndarray:
        """||S S^* - I|| (spectral norm) per energy."""
        s = self.matrix()
        return np.linalg.norm(s @ _dagger(s) - np.eye(4), ord=2, axis=(-2, -1))

    def distance_to_identity(self) -> np.ndarray:
        return np.linalg.norm(self.matrix() - np.eye(4), ord=2, axis=(-2, -1))

    def dress(self, beta: float) -> "ScatteringMatrix":
        """Blocks e^{-i beta} T_L, e^{-2i beta} R, L, e^{-i beta} T_R."""
        if self.dressed:
            raise PreconditionError("matrix is already dressed")
        ph = np.exp(-1j * beta)
        return ScatteringMatrix(self.xi, ph * self.T_L, ph * ph * self.R, self.L.copy(),
                                ph * self.T_R, dressed=True, beta=float(beta))

    def take(self, idx) -> "ScatteringMatrix":
        return ScatteringMatrix(self.xi[idx], self.T_L[idx], self.R[idx], self.L[idx],
                                self.T_R[idx], self.dressed, self.beta)

    def block(self, name: str) -> np.ndarray:
        return getattr(self, name)


def _from_transition(xi, a_r, tol: float, check: bool) -> ScatteringMatrix:
    a_l = np.linalg.inv(a_r)
    l1, l2, l3, _ = _blocks(a_l)
    _, r2, r3, r4 = _blocks(a_r)
    cond = np.linalg.cond(l1)
    if np.any(cond > 1e12):
        bad = xi[np.argmax(cond)]
        raise NumericalQualityError(f"a_l1 is numerically singular near xi={bad}")
    inv_l1 = np.linalg.inv(l1)
    inv_r4 = np.linalg.inv(r4)
    R = -inv_l1 @ l2
    L = l3 @ inv_l1
    sm = ScatteringMatrix(xi, inv_l1, R, L, inv_r4)
    if check:
        r_alt = r2 @ inv_r4
        l_alt = -inv_r4 @ r3
        gap = max(np.abs(R - r_alt).max(), np.abs(L - l_alt).max())
        if gap > 1e-7:
            raise NumericalQualityError(
                f"reflection formulas disagree by {gap:.3e}")
        if not np.iscomplexobj(xi) or np.all(np.imag(xi) == 0):
            defect = sm.unitarity_defect()
            worst = int(np.argmax(defect))
            if defect[worst] > tol:
                raise NumericalQualityError(
                    f"unitarity defect {defect[worst]:.3e} at xi={xi[worst]} "
                    f"exceeds {tol:.1e}")
    return sm


def scattering_matrix(potential: ReducedPotential, xi, *, h: float = 0.02,
                      richardson: bool = True, tol: float = 1e-6,
                      check: bool = True) -> ScatteringMatrix:
    """Undressed S_0 at one energy or an array of energies.

    Raises
    ------
    NumericalQualityError
        If the unitarity defect exceeds ``tol`` (real energies) or the two
        reflection formulas disagree.
    """
    xi = np.atleast_1d(np.asarray(xi))
    _check_strip(potential, xi)
    solver = JostSolver(potential, h=h, richardson=richardson)
    return _from_transition(xi, solver.transfer(xi), tol, check)


def full_s_matrix(potential: ReducedPotential, beta: float | None, xi,
                  **kwargs) -> ScatteringMatrix:
    """Dressed S(xi) = [[e^{-i b} T_L, e^{-2i b} R], [L, e^{-i b} T_R]]."""
    b = potential.beta if beta is None else beta
    return scattering_matrix(potential, xi, **kwargs).dress(b)


def sweep(potential: ReducedPotential, xi_grid, *, h: float = 0.02,
          richardson: bool = True, tol: float = 1e-6, check: bool = True,
          dressed: bool = False) -> ScatteringMatrix:
    """Scattering matrices on an energy grid.

    Every energy is processed independently (batched), so the result does
    not depend on the order of the grid.  Errors name the offending energy.
    """
    xi = np.asarray(xi_grid)
    sm = scattering_matrix(potential, xi, h=h, richardson=richardson, tol=tol,
                           check=check)
    return sm.dress(potential.beta) if dressed else sm
