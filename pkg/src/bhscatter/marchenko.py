"""Inverse scattering: Marchenko equations and recovery of k(x).

Kernels
-------
With ``R_hat(alpha) = (1/2 pi) int R(xi) e^{i xi alpha} d xi`` (and the
same for L) the right and left Marchenko equations read

    B1(x, a) = -R_hat(a + 2x)
               + int int B1(x, g) R_hat(d + g + 2x)^* R_hat(a + d + 2x) dg dd,
    B2(x, a) = -L_hat(a - 2x)^*
               + int int B2(x, g) L_hat(d + g - 2x) L_hat(a + d - 2x)^* dg dd,

on a, g, d > 0, and the potential follows from the boundary values

    k(x) = -2i B1(x, 0+)  (x > 0),     k(x) = 2i B2(x, 0+)  (x < 0).

In the Born limit R_hat(a) = -(i/2) k(a/2) and L_hat(a) = -(i/2) k(-a/2)^*.

Discretisation
--------------
The unknown B(x, .) is sampled at the midpoints a_i = (i + 1/2) da, so the
double integral becomes the block Hankel matrix H_{jl} = K((j + l + 1) da) da
with K the shifted kernel, and the equation becomes

    B (I - H^* H) = -h,     h_i = K(a_i).

I - H^* H is Hermitian positive definite whenever sup ||R|| < 1, and is
solved by conjugate gradients with FFT-based Hankel products; plain
fixed-point iteration (the Neumann series) is kept as a reference.  The
boundary value at 0+ is the quadratic extrapolation through the first
three nodes.  Placing x on multiples of da/4 puts every kernel argument on
the grid of spacing da/2 on which the kernels are tabulated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import fft as sfft
from scipy.sparse.linalg import LinearOperator, cg

from .errors import (ConvergenceError, CoverageError, InconsistentDataError,
                     PreconditionError, UnsupportedError)
from .jost import ScatteringMatrix, scattering_matrix
from .recovery import DE_SITTER, RecoveryReport, recover_parameters_dS
from .reduction import FieldParams, ReducedPotential

__all__ = [
    "MarchenkoKernels",
    "MarchenkoSlice",
    "MarchenkoSolution",
    "DecayCertificate",
    "marchenko_energy_grid",
    "reflection_table",
    "fourier_kernels",
    "decay_certificate",
    "solve_marchenko",
    "solve_marchenko_grid",
    "recover_k",
    "recover_bh_from_k",
]

# Quadratic extrapolation from the nodes da/2, 3da/2, 5da/2 to 0
_EDGE_WEIGHTS = np.array([15.0, -10.0, 3.0]) / 8.0


def _dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def _norms(a: np.ndarray) -> np.ndarray:
    return np.linalg.norm(a, ord=2, axis=(-2, -1))


# ---------------------------------------------------------------------------
# Energy grids and reflection tables
# ---------------------------------------------------------------------------

def marchenko_energy_grid(d_alpha: float, n_fft: int, xi_cut: float) -> np.ndarray:
    """Energies n d_xi with |n d_xi| <= xi_cut and d_xi = 2 pi / (n_fft d_alpha)."""
    d_xi = 2.0 * math.pi / (n_fft * d_alpha)
    n = int(math.floor(xi_cut / d_xi))
    if 2 * n + 1 > n_fft:
        raise PreconditionError("xi_cut exceeds the band pi / d_alpha of the alpha grid")
    return np.arange(-n, n + 1) * d_xi


def reflection_table(potential: ReducedPotential, d_alpha: float, n_fft: int,
                     xi_cut: float, **jost_kwargs) -> ScatteringMatrix:
    """Undressed scattering matrices on the energy grid used by the kernels."""
    xi = marchenko_energy_grid(d_alpha, n_fft, xi_cut)
    return scattering_matrix(potential, xi, **jost_kwargs)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MarchenkoKernels:
    """R_hat and L_hat on the periodic grid alpha_j = j d_alpha / 2.

    ``R_grid[j]`` and ``L_grid[j]`` (shape (2 n_fft, 2, 2)) hold the
    kernels at ``j d_alpha / 2`` for ``j`` taken modulo ``2 n_fft``, which
    covers ``[-n_fft d_alpha / 2, n_fft d_alpha / 2)``.
    """

    d_alpha: float
    n_fft: int
    R_grid: np.ndarray
    L_grid: np.ndarray
    sup_R: float
    sup_L: float
    l1_R: float
    l1_L: float
    decay_rate: float | None
    alpha_top_R: float
    alpha_top_L: float
    parseval: dict = field(default_factory=dict)

    @property
    def alpha(self) -> np.ndarray:
        """Alpha values in storage order (non-negative first, then negative)."""
        return _alpha_grid(self.d_alpha, self.n_fft)

    def _index(self, alpha) -> np.ndarray:
        j = np.asarray(alpha, dtype=float) / (0.5 * self.d_alpha)
        jr = np.rint(j)
        if np.any(np.abs(j - jr) > 1e-6):
            raise PreconditionError("alpha must lie on the grid of spacing d_alpha / 2")
        return np.mod(jr.astype(np.int64), 2 * self.n_fft)

    def R_hat(self, alpha) -> np.ndarray:
        return self.R_grid[self._index(alpha)]

    def L_hat(self, alpha) -> np.ndarray:
        return self.L_grid[self._index(alpha)]

    @property
    def preconditions_hold(self) -> bool:
        return self.sup_R < 1.0 and self.sup_L < 1.0


def _alpha_grid(d_alpha: float, n_fft: int) -> np.ndarray:
    j = np.arange(2 * n_fft)
    return 0.5 * d_alpha * np.where(j < n_fft, j, j - 2 * n_fft)


def _transform(values: np.ndarray, n_idx: np.ndarray, d_xi: float, d_alpha: float,
               n_fft: int) -> np.ndarray:
    """Kernel on the half grid from samples at xi_n = n d_xi.

    Integer nodes m d_alpha go to even storage slots and half nodes
    (m + 1/2) d_alpha to odd ones, so slot j holds alpha = j d_alpha / 2
    with negative alpha wrapped to the end.
    """
    xi = n_idx * d_xi
    out = np.empty((2 * n_fft, 2, 2), dtype=complex)
    for half in (0, 1):
        buf = np.zeros((n_fft, 2, 2), dtype=complex)
        buf[np.mod(n_idx, n_fft)] = values * np.exp(0.5j * half * xi * d_alpha)[:, None, None]
        trans = sfft.ifft(buf, axis=0) * (n_fft * d_xi / (2.0 * math.pi))
        out[half::2] = trans
    return out


def _fit_tail_rates(alpha, norms, window):
    """Exponential decay rates of ``norms`` on both sides of the peak."""
    order = np.argsort(alpha)
    a, v = alpha[order], norms[order]
    peak = v.max()
    ip = int(np.argmax(v))
    lo, hi = window
    rates = []
    for sl, sign in ((slice(0, ip), 1.0), (slice(ip, a.size), -1.0)):
        aa, vv = a[sl], v[sl]
        sel = (vv > lo * peak) & (vv < hi * peak)
        if sel.sum() >= 8:
            slope = np.polyfit(aa[sel], np.log(vv[sel]), 1)[0]
            rates.append(sign * slope)
    return rates


def _extent(alpha, norms, trunc, side):
    """Largest (side=+1) or smallest (side=-1) alpha with norm above trunc * peak."""
    above = norms > trunc * norms.max()
    if not np.any(above):
        return 0.0
    vals = alpha[above]
    return float(vals.max() if side > 0 else vals.min())


def fourier_kernels(table: ScatteringMatrix, d_alpha: float, *, tail_tol: float = 1e-8,
                    truncation: float = 1e-10,
                    decay_window: tuple[float, float] = (1e-7, 1e-3)) -> MarchenkoKernels:
    """Fourier transforms of R and L from an undressed table on ``n d_xi``.

    The energy grid must be uniform, contain 0, and satisfy
    ``d_xi d_alpha n_fft = 2 pi`` for an integer ``n_fft``.  Outside the
    table the reflection blocks are taken as zero, which requires their
    norm at the table edges to be below ``tail_tol``.

    Raises
    ------
    CoverageError
        If R or L has not decayed at the edges of the energy window.
    PreconditionError
        If the energy grid does not fit the alpha grid.
    """
    if table.dressed:
        raise PreconditionError("kernels are built from the undressed matrix")
    xi = np.real(np.asarray(table.xi))
    if xi.size < 3:
        raise PreconditionError("need at least three energies")
    d_xi = float(np.median(np.diff(xi)))
    n_idx = np.rint(xi / d_xi).astype(np.int64)
    if np.any(np.abs(xi - n_idx * d_xi) > 1e-9 * max(1.0, abs(xi).max())) \
            or np.any(np.diff(n_idx) != 1):
        raise PreconditionError("energies must form a uniform grid through 0")
    n_fft_f = 2.0 * math.pi / (d_xi * d_alpha)
    n_fft = int(round(n_fft_f))
    if abs(n_fft_f - n_fft) > 1e-6 * n_fft or n_idx.size > n_fft:
        raise PreconditionError("energy spacing does not match d_alpha (need integer n_fft)")
    nR, nL = _norms(table.R), _norms(table.L)
    edge = max(nR[0], nR[-1], nL[0], nL[-1])
    if edge > tail_tol:
        top = abs(xi).max()
        raise CoverageError(
            f"reflection norm {edge:.3e} at |xi|={top:.4g} exceeds {tail_tol:.1e}; "
            f"extend the energy window to about xi_max={2 * top:.4g}")
    R_grid = _transform(table.R, n_idx, d_xi, d_alpha, n_fft)
    L_grid = _transform(table.L, n_idx, d_xi, d_alpha, n_fft)
    alpha = _alpha_grid(d_alpha, n_fft)
    nRh, nLh = _norms(R_grid), _norms(L_grid)
    step = 0.5 * d_alpha
    l1_R = float(nRh.sum() * step)
    l1_L = float(nLh.sum() * step)
    rates = _fit_tail_rates(alpha, nRh, decay_window)
    rate = min(rates) if rates else None
    # Parseval with the 1/(2 pi) convention: int |R_hat|^2 = (1/2 pi) int |R|^2
    fro = lambda a: np.sum(np.abs(a) ** 2, axis=(-2, -1))
    lhs = float(fro(R_grid[::2]).sum() * d_alpha)
    rhs = float(fro(table.R).sum() * d_xi / (2.0 * math.pi))
    top_R = _extent(alpha, nRh, truncation, +1)
    top_L = _extent(alpha, nLh, truncation, +1)
    if max(top_R, top_L) >= 0.5 * d_alpha * (n_fft - 2):
        raise CoverageError(
            "kernels do not decay within the alpha period; increase n_fft")
    return MarchenkoKernels(d_alpha, n_fft, R_grid, L_grid, float(nR.max()), float(nL.max()),
                            l1_R, l1_L, rate, top_R, top_L,
                            {"kernel_side": lhs, "energy_side": rhs})


@dataclass(frozen=True)
class DecayCertificate:
    """Exponential decay of R_hat and summability of the weighted kernel.

    ``weighted_slopes`` are the outward slopes of log(exp(kappa' |alpha|)
    ||R_hat||) on the fitted tails; ``weighted_l2`` is the squared sum over
    the grid plus the geometric remainders implied by those slopes, and
    ``tail_fraction`` is the share of the remainders in it.
    """

    rate: float | None
    kappa_prime: float | None
    weighted_slopes: tuple
    weighted_l2: float
    tail_fraction: float

    @property
    def passed(self) -> bool:
        return (self.rate is not None and self.rate > 0
                and len(self.weighted_slopes) > 0
                and all(s < 0 for s in self.weighted_slopes)
                and math.isfinite(self.weighted_l2))


def decay_certificate(kernels: MarchenkoKernels,
                      window: tuple[float, float] = (1e-7, 1e-3)) -> DecayCertificate:
    """Check that exp(kappa' |alpha|) ||R_hat(alpha)|| is square summable.

    ``kappa'`` is half the fitted decay rate of ||R_hat||.  On each tail
    the weighted sequence is fitted by an exponential in the window where
    ||R_hat|| lies between ``window`` times its peak; a negative outward
    slope makes the sequence square summable, and the remainder beyond the
    noise floor is added as a geometric series.
    """
    rate = kernels.decay_rate
    if rate is None or rate <= 0:
        return DecayCertificate(rate, None, (), math.inf, 1.0)
    kp = 0.5 * rate
    order = np.argsort(kernels.alpha)
    a = kernels.alpha[order]
    nr = _norms(kernels.R_grid)[order]
    weighted = np.exp(kp * np.abs(a)) * nr
    peak = nr.max()
    ip = int(np.argmax(nr))
    live = nr > window[0] * peak
    step = 0.5 * kernels.d_alpha
    body = float(np.sum(weighted[live] ** 2) * step)
    slopes, remainder = [], 0.0
    for sl, toward in ((slice(0, ip), -1.0), (slice(ip, a.size), 1.0)):
        sel = (nr[sl] > window[0] * peak) & (nr[sl] < window[1] * peak)
        if sel.sum() < 8:
            continue
        slope = float(toward * np.polyfit(a[sl][sel], np.log(weighted[sl][sel]), 1)[0])
        slopes.append(slope)
        idx = np.flatnonzero(live[sl])
        edge = weighted[sl][idx[0] if toward < 0 else idx[-1]]
        remainder += math.inf if slope >= 0 else edge ** 2 / (-2.0 * slope)
    total = body + remainder
    return DecayCertificate(rate, kp, tuple(slopes), total,
                            remainder / total if total > 0 else 0.0)


# ---------------------------------------------------------------------------
# Solving the Marchenko equations at one x
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MarchenkoSlice:
    """Solution B(x, .) of one Marchenko equation at a fixed x.

    ``B`` has shape (n, 2, 2) on the midpoints ``alpha``; ``boundary`` is
    the extrapolated value at 0+.  ``history`` lists residual norms (CG)
    or update norms (fixed point) per iteration.
    """

    x: float
    equation: str
    alpha: np.ndarray
    B: np.ndarray
    boundary: np.ndarray
    iterations: int
    residual: float
    history: tuple = ()

    @property
    def l1_norm(self) -> float:
        return float(_norms(self.B).sum() * (self.alpha[1] - self.alpha[0])
                     if self.alpha.size > 1 else 0.0)


class _Hankel:
    """Block Hankel operator H_{jl} = c_{j+l} applied through FFTs."""

    def __init__(self, coeffs: np.ndarray, n: int):
        self.n = n
        self.size = sfft.next_fast_len(3 * n - 2)
        self.c_hat = sfft.fft(coeffs, n=self.size, axis=0)
        self.ch_hat = sfft.fft(_dagger(coeffs), n=self.size, axis=0)

    def _apply(self, c_hat, u):
        u_hat = sfft.fft(u[::-1], n=self.size, axis=0)
        conv = sfft.ifft(c_hat @ u_hat, axis=0)
        return conv[self.n - 1:2 * self.n - 1]

    def forward(self, u):
        return self._apply(self.c_hat, u)

    def adjoint(self, u):
        return self._apply(self.ch_hat, u)

    def normal(self, u):
        """(I - H^* H) u."""
        return u - self.adjoint(self.forward(u))


def _equation_data(kernels: MarchenkoKernels, x: float, equation: str,
                   n_alpha: int | None):
    """Hankel coefficients c_m (m < 2n - 1) and right-hand side h_i."""
    da = kernels.d_alpha
    p = 4.0 * x / da           # 2x in units of the kernel grid spacing
    pr = int(round(p))
    if abs(p - pr) > 1e-6:
        raise PreconditionError("x must be a multiple of d_alpha / 4")
    if equation == "right":
        top = kernels.alpha_top_R - 2.0 * x
    elif equation == "left":
        top = kernels.alpha_top_L + 2.0 * x
    else:
        raise PreconditionError("equation must be 'right' or 'left'")
    if n_alpha is None:
        n_alpha = max(3, int(math.ceil(top / da)) + 2)
    half = kernels.n_fft  # alpha range limit in units of d_alpha / 2
    m = np.arange(2 * n_alpha - 1)
    i = np.arange(n_alpha)
    # kernel index j means alpha = j d_alpha / 2; beyond the truncation
    # point the kernel is below the noise floor and is set to zero
    if equation == "right":
        jc, jh = pr + 2 * (m + 1), pr + 2 * i + 1
        grid, limit, adj = kernels.R_grid, kernels.alpha_top_R, False
    else:
        jc, jh = -pr + 2 * (m + 1), 2 * i + 1 - pr
        grid, limit, adj = kernels.L_grid, kernels.alpha_top_L, True
    if min(jc.min(), jh.min()) <= -half:
        raise CoverageError(f"x={x} needs kernel values below the tabulated alpha range")

    def pick(j):
        vals = grid[np.mod(j, 2 * half)]
        vals[0.5 * da * j > limit] = 0.0
        return _dagger(vals) if adj else vals

    coeffs = pick(jc) * da
    rhs = pick(jh)
    return coeffs, rhs, n_alpha


def solve_marchenko(kernels: MarchenkoKernels, x: float, *, equation: str = "right",
                    method: str = "cg", tol: float = 1e-9, max_iter: int = 5000,
                    n_alpha: int | None = None) -> MarchenkoSlice:
    """Solve the right (B1) or left (B2) Marchenko equation at one x.

    Parameters
    ----------
    method : {"cg", "fixed_point", "born"}
        Conjugate gradients on the Hermitian system, the Neumann series,
        or only its first term ``B = -h``.
    tol : float
        CG: relative residual.  Fixed point: sup-norm of the update.

    Raises
    ------
    PreconditionError
        If sup ||R|| or sup ||L|| is not below 1.
    ConvergenceError
        If the iteration does not reach ``tol``.
    """
    if not kernels.preconditions_hold:
        raise PreconditionError(
            f"Marchenko solve needs sup||R|| < 1 and sup||L|| < 1 "
            f"(got {kernels.sup_R:.6g}, {kernels.sup_L:.6g})")
    coeffs, rhs, n = _equation_data(kernels, x, equation, n_alpha)
    alpha = (np.arange(n) + 0.5) * kernels.d_alpha
    op = _Hankel(coeffs, n)
    target = -_dagger(rhs)          # unknown u_i = B_i^*, (I - H^* H) u = -h^*
    history: list[float] = []
    if method == "born":
        u, iters, resid = target, 1, 0.0
    elif method == "fixed_point":
        u = target.copy()
        iters = 0
        for iters in range(1, max_iter + 1):
            new = target + op.adjoint(op.forward(u))
            change = float(np.abs(new - u).max())
            u = new
            history.append(change)
            if change < tol:
                break
        else:
            raise ConvergenceError(
                f"Marchenko fixed point at x={x} stalled at update {history[-1]:.3e}")
        resid = float(np.abs(op.normal(u) - target).max())
    elif method == "cg":
        shape = target.shape
        u = np.empty_like(target)
        iters = 0
        resid = 0.0
        for col in range(2):
            b = target[:, :, col].ravel()
            if not np.any(b):
                u[:, :, col] = 0.0
                continue

            def mv(v):
                vv = v.reshape(n, 2, 1)
                return op.normal(vv).ravel()

            lin = LinearOperator((2 * n, 2 * n), matvec=mv, dtype=complex)
            count = [0]

            def cb(_):
                count[0] += 1

            sol, info = cg(lin, b, rtol=tol, atol=0.0, maxiter=max_iter, callback=cb)
            if info != 0:
                raise ConvergenceError(
                    f"CG for the {equation} Marchenko equation at x={x} did not "
                    f"converge in {max_iter} iterations")
            u[:, :, col] = sol.reshape(n, 2)
            iters = max(iters, count[0])
            resid = max(resid, float(np.linalg.norm(mv(sol) - b) / np.linalg.norm(b)))
        u = u.reshape(shape)
    else:
        raise PreconditionError(f"unknown method {method!r}")
    B = _dagger(u)
    boundary = np.tensordot(_EDGE_WEIGHTS, B[:3], axes=(0, 0))
    return MarchenkoSlice(float(x), equation, alpha, B, boundary, iters, resid,
                          tuple(history))


# ---------------------------------------------------------------------------
# Solutions on an x-grid and recovery of k
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MarchenkoSolution:
    """Boundary values of B1 (x >= 0) and B2 (x <= 0) on an x-grid.

    ``B1_l1`` and ``B2_l1`` are the L1 norms of B(x, .) over alpha.
    ``mismatch`` compares the two recovery formulas at x = 0 when 0 is on
    the grid (NaN otherwise).
    """

    x: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    B1_l1: np.ndarray
    B2_l1: np.ndarray
    iterations: np.ndarray
    max_residual: float
    mismatch: float = math.nan


def solve_marchenko_grid(kernels: MarchenkoKernels, x_grid, *, method: str = "cg",
                         tol: float = 1e-9, max_iter: int = 5000) -> MarchenkoSolution:
    """Solve B1 on x >= 0 and B2 on x <= 0 for each grid point."""
    x_grid = np.asarray(x_grid, dtype=float)
    n = x_grid.size
    B1 = np.full((n, 2, 2), np.nan + 0j)
    B2 = np.full((n, 2, 2), np.nan + 0j)
    l1a = np.full(n, np.nan)
    l1b = np.full(n, np.nan)
    iters = np.zeros(n, dtype=int)
    worst = 0.0
    for idx, x in enumerate(x_grid):
        if x >= 0:
            s = solve_marchenko(kernels, x, equation="right", method=method, tol=tol,
                                max_iter=max_iter)
            B1[idx], l1a[idx] = s.boundary, s.l1_norm
            iters[idx] = s.iterations
            worst = max(worst, s.residual)
        if x <= 0:
            s = solve_marchenko(kernels, x, equation="left", method=method, tol=tol,
                                max_iter=max_iter)
            B2[idx], l1b[idx] = s.boundary, s.l1_norm
            iters[idx] = max(iters[idx], s.iterations)
            worst = max(worst, s.residual)
    mismatch = math.nan
    zero = np.flatnonzero(x_grid == 0.0)
    if zero.size:
        j = zero[0]
        mismatch = float(np.linalg.norm(-2j * B1[j] - 2j * B2[j], 2))
    return MarchenkoSolution(x_grid, B1, B2, l1a, l1b, iters, worst, mismatch)


def recover_k(solution: MarchenkoSolution) -> np.ndarray:
    """k(x) = -2i B1(x, 0+) for x > 0 and 2i B2(x, 0+) for x < 0.

    At x = 0 the two values are averaged; their difference is reported in
    ``solution.mismatch``.
    """
    x = solution.x
    k = np.where((x > 0)[:, None, None], -2j * solution.B1, 2j * solution.B2)
    zero = x == 0.0
    if np.any(zero):
        k[zero] = 0.5 * (-2j * solution.B1[zero] + 2j * solution.B2[zero])
    return k


# ---------------------------------------------------------------------------
# Parameters from k
# ---------------------------------------------------------------------------

def _tail_phase_slope(x, k, norms, side, window, tol):
    peak = norms.max()
    ip = int(np.argmax(norms))
    sl = slice(0, ip) if side < 0 else slice(ip, x.size)
    xs, ks, ns = x[sl], k[sl], norms[sl]
    sel = (ns > window[0] * peak) & (ns < window[1] * peak)
    if sel.sum() < 4:
        raise InconsistentDataError(
            f"too few samples with ||k|| in {window} of the peak on the "
            f"{'left' if side < 0 else 'right'} tail; widen the window or refine the grid")
    xs = xs[sel]
    z = ks[sel, 0, 1]
    steps = np.angle(z[1:] / z[:-1])
    if np.any(np.abs(steps) > 0.9 * math.pi):
        raise InconsistentDataError("phase of k jumps by pi between samples; refine the grid")
    phase = np.concatenate([[0.0], np.cumsum(steps)])
    coef = np.polyfit(xs, phase, 1)
    resid = float(np.max(np.abs(np.polyval(coef, xs) - phase)))
    if resid > tol:
        raise InconsistentDataError(
            f"phase of k too noisy to differentiate (affine residual {resid:.3e}); "
            "smooth k or move the tail window to larger ||k||")
    return 0.5 * float(coef[0]), resid


def recover_bh_from_k(x, k_by_weight: Mapping[int, np.ndarray], field: FieldParams, *,
                      window: tuple[float, float] = (1e-6, 1e-4),
                      phase_tol: float = 1e-3) -> RecoveryReport:
    """Black-hole parameters from samples of k for several weights.

    W^2 = tr(k k^*) / 2 is integrated over the grid (trapezoidal rule,
    which is spectrally accurate for exponentially decaying integrands);
    the phase slope of k on the two tails gives c0 and c_+ (the phase of
    k equals 2 C^-(x) up to a constant, and C^- has slope c); the weight
    fit and the horizon system then follow as for high-energy data.  A
    constant phase factor on k changes none of these quantities.
    """
    x = np.asarray(x, dtype=float)
    if field.q_f == 0:
        raise PreconditionError("q_f must be nonzero to recover the charge")
    ws = sorted(k_by_weight)
    if len(ws) < 2:
        raise PreconditionError("at least two distinct weights are needed (underdetermined)")
    if field.m_f == 0:
        raise UnsupportedError("Z unavailable: with m_f = 0 the constant term vanishes")
    J, c0s, cps, scalar_dev, resid = {}, [], [], 0.0, 0.0
    for w in ws:
        k = np.asarray(k_by_weight[w])
        kk = k @ _dagger(k)
        w2 = 0.5 * np.real(np.trace(kk, axis1=-2, axis2=-1))
        scalar_dev = max(scalar_dev, float(np.max(np.abs(kk - w2[:, None, None] * np.eye(2)))))
        J[w] = float(np.trapezoid(w2, x))
        norms = np.sqrt(w2)
        c0, r0 = _tail_phase_slope(x, k, norms, -1, window, phase_tol)
        cp, r1 = _tail_phase_slope(x, k, norms, +1, window, phase_tol)
        c0s.append(c0)
        cps.append(cp)
        resid = max(resid, r0, r1)
    X = float(np.mean(c0s) - np.mean(cps))
    w2s = np.array([w * w for w in ws], dtype=float)
    design = np.column_stack([w2s, np.ones_like(w2s)])
    vals = np.array([J[w] for w in ws])
    (Y, const), *_ = np.linalg.lstsq(design, vals, rcond=None)
    Z = const / field.m_f ** 2
    sol = recover_parameters_dS(X, float(Y), float(Z), field.q_f)
    extracted = {"X": X, "Y": float(Y), "Z": float(Z), "c0": float(np.mean(c0s)),
                 "c_plus": float(np.mean(cps))}
    extracted.update({f"J_w{w}": v for w, v in J.items()})
    recovered = {"M": sol.M, "Q": sol.Q, "Lambda": sol.Lambda, "r0": sol.r0,
                 "r_plus": sol.r_plus}
    residuals = {"phase_fit": resid, "scalar_kk": scalar_dev,
                 "horizon": sol.horizon_residual,
                 "weight_fit": float(np.max(np.abs(design @ np.array([Y, const]) - vals)))}
    diagnostics = {"n_weights": len(ws), "determinant": sol.determinant,
                   "condition": sol.condition,
                   "c0_spread": float(np.ptp(c0s)), "c_plus_spread": float(np.ptp(cps))}
    return RecoveryReport(DE_SITTER, extracted, recovered, residuals, diagnostics)
