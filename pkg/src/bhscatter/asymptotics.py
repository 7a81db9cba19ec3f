"""High-energy reconstruction data and transmission pairings.

Reconstruction pair
-------------------
Both regimes are described by the same two-parameter shapes

    Theta(x) = exp(i theta0 + i theta1 x),   A(x) = Theta(x) (a0 + a1 x).

Lambda > 0:  theta0 = -beta, theta1 = c0 - c_+, a0 = (i/2) int W^2, a1 = 0.
Lambda = 0:  theta0 = -int_{-inf}^0 (c - c0), theta1 = c0,
             a0 = int a_l^2 + int_{-inf}^0 b^2 + int_0^inf (b - m)^2, a1 = m^2.

The first-order term of the expansion is ``(1/lambda) <A ...>`` when
Lambda > 0 and ``(i / 2 lambda) <A ...>`` when Lambda = 0; the prefactor
is stored on the pair so the two conventions are never mixed.

Pairings
--------
Inner products are ``<u, v> = int v^H u dx`` and packets are given in
momentum space with ``u_hat(eta) = (2 pi)^{-1/2} int e^{-i eta x} u(x) dx``.
Multiplication by Theta shifts momentum by theta1, multiplication by x
acts as ``i d/d eta``, so every position-space pairing is a single
quadrature over the momentum support of the test packet.

The stationary representation of the transmission pairings for
Lambda > 0 reads, with X = c0 - c_+,

    F_l(lam) = e^{-i beta} int phi_lo(eta + X)^H T_R(c_+ - lam - eta) psi_lo(eta) d eta,
    G_l(lam) = e^{-i beta} int phi_up(eta + X)^H T_L(eta + c0 + lam) psi_up(eta) d eta,

where ``lo`` and ``up`` denote the components with Gamma^1 = -1 and +1.
The dressed blocks e^{-i beta} T_R, e^{-i beta} T_L enter directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import interpolate, stats

from .errors import CoverageError, PreconditionError, UnsupportedError
from .jost import ScatteringMatrix, scattering_matrix
from .reduction import PotentialProfile, ReducedPotential, w_squared_integrals

__all__ = [
    "ReconstructionPair",
    "WavePacket",
    "WavePacketPair",
    "PairingTerms",
    "ResidualScan",
    "reconstruction_pair",
    "chebyshev_energies",
    "pairing_window",
    "pairing_table",
    "predicted_pairing",
    "predicted_terms",
    "stationary_pairing",
    "fit_expansion",
    "expansion_residual_scan",
]

_CHANNELS = ("T_R", "T_L")
_LOWER = slice(2, 4)
_UPPER = slice(0, 2)


def _channel(channel: str) -> tuple[slice, float]:
    """Components and sign of the first-order term for a channel."""
    if channel == "T_R":
        return _LOWER, 1.0
    if channel == "T_L":
        return _UPPER, -1.0
    raise PreconditionError(f"channel must be one of {_CHANNELS}, got {channel!r}")


# ---------------------------------------------------------------------------
# Reconstruction pair
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReconstructionPair:
    """Zeroth- and first-order multiplication operators (Theta, A).

    Attributes
    ----------
    de_sitter : bool
        Regime tag.
    theta0, theta1 : float
        Theta(x) = exp(i theta0 + i theta1 x).
    a0 : complex
        Constant part of A / Theta.
    a1 : float
        Slope of A / Theta in x.
    first_order_factor : complex
        Prefactor multiplying ``<A ...> / lambda`` in the expansion.
    """

    de_sitter: bool
    theta0: float
    theta1: float
    a0: complex
    a1: float = 0.0

    @property
    def first_order_factor(self) -> complex:
        return 1.0 if self.de_sitter else 0.5j

    def theta(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(1j * (self.theta0 + self.theta1 * x))

    def ratio(self, x) -> np.ndarray:
        """A(x) / Theta(x)."""
        x = np.asarray(x, dtype=float)
        return self.a0 + self.a1 * x + 0j

    def A(self, x) -> np.ndarray:
        return self.theta(x) * self.ratio(x)


def reconstruction_pair(profile: PotentialProfile) -> ReconstructionPair:
    """Theta and A for one harmonic, from the reduction-module integrals."""
    ints = w_squared_integrals(profile)
    if profile.de_sitter:
        return ReconstructionPair(True, -profile.beta, profile.c0 - profile.c_plus,
                                  0.5j * ints.total, 0.0)
    m = profile.field.m_f
    return ReconstructionPair(False, -profile.left_phase, profile.c0,
                              complex(ints.reconstruction_constant), m * m)


# ---------------------------------------------------------------------------
# Wave packets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WavePacket:
    """Smooth compactly supported 4-component momentum profile.

    ``psi_hat(eta) = amplitude * g(u) * exp(-i eta shift)`` with
    ``u = (eta - center) / half_width`` and the bump-times-Gaussian
    ``g(u) = exp(-1 / (1 - u^2) - u^2 / (2 sigma^2))`` on |u| < 1.
    A nonzero ``shift`` translates the packet in position space.
    """

    amplitude: tuple = (1.0, 1.0, 1.0, 1.0)
    center: float = 0.0
    half_width: float = 1.0
    sigma: float = 0.5
    shift: float = 0.0

    def __post_init__(self):
        if len(self.amplitude) != 4:
            raise PreconditionError("packet amplitude needs four components")
        if self.half_width <= 0 or self.sigma <= 0:
            raise PreconditionError("half_width and sigma must be positive")

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.half_width, self.center + self.half_width

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.amplitude, dtype=complex)

    def _profile(self, eta):
        u = (np.asarray(eta, dtype=float) - self.center) / self.half_width
        inside = np.abs(u) < 1.0
        g = np.zeros_like(u)
        dg = np.zeros_like(u)
        ui = u[inside]
        one = 1.0 - ui * ui
        gi = np.exp(-1.0 / one - ui * ui / (2.0 * self.sigma**2))
        g[inside] = gi
        dg[inside] = gi * (-2.0 * ui / one**2 - ui / self.sigma**2) / self.half_width
        return g, dg

    def __call__(self, eta) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        g, _ = self._profile(eta)
        ph = np.exp(-1j * eta * self.shift)
        return (g * ph)[..., None] * self.vector

    def derivative(self, eta) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        g, dg = self._profile(eta)
        ph = np.exp(-1j * eta * self.shift)
        return ((dg - 1j * self.shift * g) * ph)[..., None] * self.vector

    def shifted(self, shift: float) -> "WavePacket":
        return WavePacket(self.amplitude, self.center, self.half_width, self.sigma, shift)


@dataclass(frozen=True)
class WavePacketPair:
    """Test packets psi (acted on) and phi (paired against)."""

    psi: WavePacket = field(default_factory=WavePacket)
    phi: WavePacket = field(default_factory=WavePacket)
    n_nodes: int = 2001

    def shifted(self, shift: float) -> "WavePacketPair":
        return WavePacketPair(self.psi.shifted(shift), self.phi.shifted(shift), self.n_nodes)

    def nodes(self) -> np.ndarray:
        """Quadrature nodes on the support of phi (trapezoidal, spectral here)."""
        lo, hi = self.phi.support
        return np.linspace(lo, hi, self.n_nodes)

    def inner_product(self, channel: str | None = None) -> complex:
        """<psi, phi> (optionally restricted to the channel's components)."""
        eta = self.nodes()
        comps = slice(0, 4) if channel is None else _channel(channel)[0]
        vals = np.einsum("ni,ni->n", np.conj(self.phi(eta)[:, comps]),
                         self.psi(eta)[:, comps])
        return complex(np.trapezoid(vals, eta))


# ---------------------------------------------------------------------------
# Predicted pairings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairingTerms:
    """Zeroth-order term <Theta P psi, P phi> and first-order term <A P psi, P phi>."""

    theta_term: complex
    a_term: complex


def predicted_terms(pair: ReconstructionPair, packets: WavePacketPair,
                    channel: str = "T_R") -> PairingTerms:
    """Position-space pairings with Theta and A, computed in momentum space."""
    comps, _ = _channel(channel)
    eta = packets.nodes()
    phi = np.conj(packets.phi(eta)[:, comps])
    moved = eta - pair.theta1
    psi = packets.psi(moved)[:, comps]
    dpsi = packets.psi.derivative(moved)[:, comps]
    phase = np.exp(1j * pair.theta0)
    plain = phase * np.trapezoid(np.einsum("ni,ni->n", phi, psi), eta)
    with_x = phase * np.trapezoid(np.einsum("ni,ni->n", phi, 1j * dpsi), eta)
    return PairingTerms(complex(plain), complex(pair.a0 * plain + pair.a1 * with_x))


def predicted_pairing(pair: ReconstructionPair, packets: WavePacketPair, lam: float,
                      channel: str = "T_R", order: int = 1) -> complex:
    """Two-term high-energy prediction of the transmission pairing.

    Returns ``<Theta P psi, P phi> +- f / lam <A P psi, P phi>`` with the
    plus sign for the T_R channel, the minus sign for T_L, and ``f`` the
    regime's first-order prefactor.  ``order=0`` drops the second term.
    """
    if lam <= 0:
        raise PreconditionError("lambda must be positive")
    _, sign = _channel(channel)
    terms = predicted_terms(pair, packets, channel)
    if order == 0:
        return terms.theta_term
    return terms.theta_term + sign * pair.first_order_factor * terms.a_term / lam


# ---------------------------------------------------------------------------
# Stationary pairings
# ---------------------------------------------------------------------------

def chebyshev_energies(lo: float, hi: float, n: int) -> np.ndarray:
    """Chebyshev points of the second kind on [lo, hi], increasing."""
    j = np.arange(n)
    return 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(np.pi * j / (n - 1))


def pairing_window(potential: ReducedPotential, packets: WavePacketPair, lam: float,
                   channel: str = "T_R") -> tuple[float, float]:
    """Energy interval on which the transmission block is sampled."""
    lo, hi = packets.psi.support
    if channel == "T_R":
        return potential.c_plus - lam - hi, potential.c_plus - lam - lo
    _channel(channel)
    return lo + potential.c0 + lam, hi + potential.c0 + lam


def pairing_table(potential: ReducedPotential, packets: WavePacketPair, lam: float,
                  channel: str = "T_R", n_nodes: int = 24, **jost_kwargs) -> ScatteringMatrix:
    """Dressed scattering matrices on Chebyshev energies covering the window."""
    lo, hi = pairing_window(potential, packets, lam, channel)
    pad = 1e-9 * max(1.0, abs(lo), abs(hi))
    xi = chebyshev_energies(lo - pad, hi + pad, n_nodes)
    return scattering_matrix(potential, xi, **jost_kwargs).dress(potential.beta)


def _block_interpolant(table: ScatteringMatrix, name: str):
    xi = np.real(table.xi)
    order = np.argsort(xi)
    vals = table.block(name)[order]
    return interpolate.BarycentricInterpolator(xi[order], vals.reshape(len(xi), 4)), \
        (xi[order][0], xi[order][-1])


def stationary_pairing(table: ScatteringMatrix, packets: WavePacketPair, lam: float,
                       channel: str = "T_R", *, c0: float, c_plus: float) -> complex:
    """Transmission pairing F_l (T_R channel) or G_l (T_L channel).

    Parameters
    ----------
    table : ScatteringMatrix
        Dressed scattering matrices on nodes suited to polynomial
        interpolation (see :func:`pairing_table`).
    packets : WavePacketPair
    lam : float
        Momentum shift lambda > 0.
    channel : {"T_R", "T_L"}
    c0, c_plus : float
        Limits of the electric potential at the two horizons.

    Raises
    ------
    CoverageError
        If the shifted packet support leaves the tabulated energies.
    """
    if lam <= 0:
        raise PreconditionError("lambda must be positive")
    if not table.dressed:
        raise PreconditionError("stationary pairings need the dressed scattering matrix")
    comps, _ = _channel(channel)
    eta = packets.psi.support[0] + (packets.psi.support[1] - packets.psi.support[0]) \
        * np.linspace(0.0, 1.0, packets.n_nodes)
    if channel == "T_R":
        xi = c_plus - lam - eta
        name = "T_R"
    else:
        xi = eta + c0 + lam
        name = "T_L"
    interp, (t_lo, t_hi) = _block_interpolant(table, name)
    slack = 1e-8 * max(1.0, abs(t_lo), abs(t_hi))
    if xi.min() < t_lo - slack or xi.max() > t_hi + slack:
        raise CoverageError(
            f"pairing at lambda={lam} needs xi in [{xi.min():.6g}, {xi.max():.6g}], "
            f"table covers [{t_lo:.6g}, {t_hi:.6g}]")
    block = interp(np.clip(xi, t_lo, t_hi)).reshape(-1, 2, 2)
    psi = packets.psi(eta)[:, comps]
    phi = np.conj(packets.phi(eta + (c0 - c_plus))[:, comps])
    vals = np.einsum("ni,nij,nj->n", phi, block, psi)
    return complex(np.trapezoid(vals, eta))


# ---------------------------------------------------------------------------
# Fits over lambda
# ---------------------------------------------------------------------------

def fit_expansion(lams, values, n_terms: int = 3) -> np.ndarray:
    """Least-squares coefficients of ``sum_j f_j lam^{-j}``, j < n_terms."""
    lams = np.asarray(lams, dtype=float)
    values = np.asarray(values)
    if lams.size < n_terms:
        raise PreconditionError(f"need at least {n_terms} lambda values for the fit")
    design = lams[:, None] ** -np.arange(n_terms)[None, :]
    coef, *_ = np.linalg.lstsq(design.astype(complex), values.astype(complex), rcond=None)
    return coef


@dataclass(frozen=True)
class ResidualScan:
    """Outcome of a residual scan over lambda.

    ``slope`` and ``intercept`` describe log r = intercept + slope log lam;
    ``slope_ci`` is the 95 percent confidence interval of the slope.
    ``noise_floor`` is set when the residuals sit below ``floor``.
    """

    lams: np.ndarray
    stationary: np.ndarray
    predicted: np.ndarray
    residual: np.ndarray
    slope: float
    intercept: float
    slope_ci: tuple[float, float]
    noise_floor: bool = False

    def rows(self):
        """(lambda, F, prediction, residual) records for tabulation."""
        return list(zip(self.lams, self.stationary, self.predicted, self.residual))


def expansion_residual_scan(potential: ReducedPotential, pair: ReconstructionPair,
                            lams, packets: WavePacketPair | None = None,
                            channel: str = "T_R", order: int = 1,
                            n_nodes: int = 24, floor: float = 1e-12,
                            **jost_kwargs) -> ResidualScan:
    """Residual of the expansion against stationary pairings over a lambda grid.

    The residual ``|stationary - predicted|`` is fitted against lambda on
    log-log axes.  With ``order=0`` only the zeroth-order term is
    subtracted.  Residuals below ``floor`` are reported, not fitted.
    """
    if not pair.de_sitter:
        raise UnsupportedError("stationary pairings are only available when Lambda > 0")
    packets = packets or WavePacketPair()
    lams = np.asarray(lams, dtype=float)
    stat = np.empty(lams.size, dtype=complex)
    pred = np.empty(lams.size, dtype=complex)
    for i, lam in enumerate(lams):
        table = pairing_table(potential, packets, lam, channel, n_nodes, **jost_kwargs)
        stat[i] = stationary_pairing(table, packets, lam, channel,
                                     c0=potential.c0, c_plus=potential.c_plus)
        pred[i] = predicted_pairing(pair, packets, lam, channel, order)
    res = np.abs(stat - pred)
    if np.all(res < floor):
        return ResidualScan(lams, stat, pred, res, math.nan, math.nan,
                            (math.nan, math.nan), noise_floor=True)
    fit = stats.linregress(np.log(lams), np.log(np.maximum(res, floor)))
    t = stats.t.ppf(0.975, max(lams.size - 2, 1))
    ci = (fit.slope - t * fit.stderr, fit.slope + t * fit.stderr)
    return ResidualScan(lams, stat, pred, res, float(fit.slope), float(fit.intercept),
                        (float(ci[0]), float(ci[1])))
