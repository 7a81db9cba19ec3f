"""Per-harmonic potentials, phase integrals and the reduced matrix potential.

For a harmonic of weight ``w = l + 1/2`` and a Dirac field of mass ``m``
and charge ``q`` the one-dimensional potentials along the tortoise
coordinate are

    a_l(x) = -w sqrt(F) / r,   b(x) = m sqrt(F),   c(x) = q Q / r.

The long-range electric part is removed by the phase

    C^-(x) = int_{-inf}^x (c - c_0) + c_0 x,

which leaves the off-diagonal block

    k(x) = exp(2i C^-(x)) [[-i b, a_l], [-a_l, i b]]

of the 4x4 potential W = [[0, k], [k^*, 0]].  With the Dirac matrices
Gamma^1 = diag(1, 1, -1, -1) and Gamma^0, Gamma^2 as used throughout the
package, W = e^{i Gamma^1 C^-} (a_l Gamma^2 + b Gamma^0) e^{-i Gamma^1 C^-}.

All integrals over x are computed in the radial variable, where the
exponential tails at the horizons become finite endpoint contributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, optimize

from .errors import ConfigError, RangeError, UnsupportedError
from .geometry import ReggeWheelerMap, metric_function
from .quadrature import CumulativeQuadrature

__all__ = [
    "FieldParams",
    "HarmonicWeight",
    "PotentialProfile",
    "PotentialSample",
    "ReducedPotential",
    "WSquaredIntegrals",
    "GAMMA0",
    "GAMMA1",
    "GAMMA2",
    "potential_profile",
    "beta_constant",
    "phase_C_minus",
    "reduced_k",
    "assemble_W",
    "w_squared_integrals",
]

# Dirac matrices (Gamma^1 diagonal; Gamma^0 and Gamma^2 anticommute with it)
GAMMA1 = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
GAMMA2 = np.array([[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]],
                  dtype=complex)
GAMMA0 = np.array([[0, 0, -1j, 0], [0, 0, 0, 1j], [1j, 0, 0, 0], [0, -1j, 0, 0]],
                  dtype=complex)


@dataclass(frozen=True)
class FieldParams:
    """Mass ``m_f >= 0`` and charge ``q_f`` of the Dirac field."""

    m_f: float = 0.0
    q_f: float = 0.0

    def __post_init__(self):
        for name in ("m_f", "q_f"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite")
            object.__setattr__(self, name, float(value))
        if self.m_f < 0:
            raise ConfigError(f"m_f must be non-negative, got {self.m_f}")


@dataclass(frozen=True)
class HarmonicWeight:
    """Integer weight ``w = l + 1/2`` of a half-integer harmonic ``l``."""

    w: int

    def __post_init__(self):
        if int(self.w) != self.w or self.w < 1:
            raise ConfigError(f"harmonic weight must be an integer >= 1, got {self.w}")
        object.__setattr__(self, "w", int(self.w))

    @classmethod
    def from_l(cls, l: float) -> "HarmonicWeight":
        return cls(int(round(l + 0.5)))


class PotentialSample(NamedTuple):
    """Potentials and geometry sampled on an x-grid."""

    x: np.ndarray
    r: np.ndarray
    F: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


class PotentialProfile:
    """Potentials a_l, b, c of one harmonic on a fixed background.

    Attributes
    ----------
    c0, c_plus : float
        Limits of c at the event and cosmological horizons (``c_plus`` is
        0 when Lambda = 0, the limit at spatial infinity).
    left_phase : float
        ``int_{-inf}^0 (c - c_0) dx``.
    beta : float or None
        ``int_{-inf}^0 (c - c_0) + int_0^inf (c - c_+)`` (Lambda > 0 only).
    """

    def __init__(self, rw: ReggeWheelerMap, field: FieldParams,
                 weight: HarmonicWeight | int, order: int = 20):
        self.map = rw
        self.field = field
        self.weight = weight if isinstance(weight, HarmonicWeight) else HarmonicWeight(weight)
        h = rw.horizon
        qQ = field.q_f * rw.params.Q
        self._qQ = qQ
        self.c0 = qQ / h.r_0
        self.c_plus = qQ / h.r_plus if h.de_sitter else 0.0
        phi_left, phi_right = rw.left.phi, (rw.right.phi if rw.right else None)

        def kern_left(s):
            return 1.0 / ((h.r_0 + s) * phi_left(s))

        self._k_left = CumulativeQuadrature(kern_left, rw.left.integral.breaks, order)
        s_a = rw.r_anchor - h.r_0
        self.left_phase = -qQ / h.r_0 * float(self._k_left(s_a))
        if h.de_sitter:
            def kern_right(t):
                return 1.0 / ((h.r_plus - t) * phi_right(t))

            self._k_right = CumulativeQuadrature(kern_right, rw.right.integral.breaks, order)
            self._t_a = h.r_plus - rw.r_anchor
            self._k_right_anchor = float(self._k_right(self._t_a))
            self.beta = self.left_phase + qQ / h.r_plus * self._k_right_anchor
        else:
            self._k_right = None
            self.beta = None

    @property
    def de_sitter(self) -> bool:
        return self.map.horizon.de_sitter

    @property
    def w(self) -> int:
        return self.weight.w

    # -- pointwise evaluators -------------------------------------------------
    def evaluate(self, x) -> PotentialSample:
        """Sample r, F, a_l, b, c at ``x``."""
        x = np.asarray(x, dtype=float)
        st = self.map.state(x)
        root_f = np.sqrt(st.F)
        a = -self.w * root_f / st.r
        b = self.field.m_f * root_f
        c = self._qQ / st.r
        return PotentialSample(x, st.r, st.F, a, b, c)

    def a(self, x):
        return self.evaluate(x).a

    def b(self, x):
        return self.evaluate(x).b

    def c(self, x):
        return self.evaluate(x).c

    def w_squared(self, x):
        """W^2 = a_l^2 + b^2 at ``x``."""
        smp = self.evaluate(x)
        return smp.a**2 + smp.b**2

    def phase_C_minus(self, x):
        """C^-(x) = int_{-inf}^x (c - c_0) + c_0 x."""
        x = np.asarray(x, dtype=float)
        st = self.map.state(x)
        h = self.map.horizon
        out = np.empty_like(x)
        if not self.de_sitter:
            return self.c0 * x - self._qQ / h.r_0 * self._k_left(st.s)
        left = x <= 0.0
        out[left] = self.c0 * x[left] - self._qQ / h.r_0 * self._k_left(st.s[left])
        xr = x[~left]
        out[~left] = (self.left_phase + self.c_plus * xr
                      + self._qQ / h.r_plus
                      * (self._k_right_anchor - self._k_right(st.t[~left])))
        return out

    def reduced_k(self, x):
        """k(x) as an array of shape ``x.shape + (2, 2)``."""
        x = np.asarray(x, dtype=float)
        smp = self.evaluate(x)
        phase = np.exp(2j * self.phase_C_minus(x))
        k = np.empty(x.shape + (2, 2), dtype=complex)
        k[..., 0, 0] = -1j * smp.b
        k[..., 0, 1] = smp.a
        k[..., 1, 0] = -smp.a
        k[..., 1, 1] = 1j * smp.b
        return k * phase[..., None, None]

    # -- tails -----------------------------------------------------------------
    def tail_cut(self, tol: float = 1e-12) -> tuple[float, float]:
        """Coordinates beyond which ``int ||k||`` is below ``tol/4`` per side.

        The potentials decay like exp(kappa_0 x) and exp(kappa_+ x); the tail
        integral is estimated as W(X)/|kappa| and the cut solved by root
        finding in x.  The factor 2 margin per side absorbs the deviation
        of the tails from a pure exponential, so both tails together stay
        strictly below ``tol``.
        """
        h = self.map.horizon
        if not self.de_sitter:
            raise UnsupportedError("potentials do not decay at +infinity when Lambda = 0")

        def gap(x, rate):
            return math.log(math.sqrt(float(self.w_squared(np.array([x]))[0])) / rate) \
                - math.log(0.25 * tol)

        cuts = []
        for side, rate in ((-1.0, h.kappa_0), (1.0, -h.kappa_plus)):
            inner = 0.0
            outer = side * 10.0 / rate
            while gap(outer, rate) > 0:
                inner, outer = outer, 2.0 * outer
                if abs(outer) > 1e5:
                    raise RangeError("tail cut not found")
            cuts.append(optimize.brentq(gap, min(inner, outer), max(inner, outer),
                                        args=(rate,), xtol=1e-8))
        return cuts[0], cuts[1]


def potential_profile(rw: ReggeWheelerMap, field: FieldParams,
                      weight: HarmonicWeight | int) -> PotentialProfile:
    """Build the potentials of one harmonic on the background ``rw``."""
    return PotentialProfile(rw, field, weight)


def beta_constant(profile: PotentialProfile) -> float:
    """beta = int_{-inf}^0 (c - c_0) + int_0^{inf} (c - c_+) (Lambda > 0).

    Raises
    ------
    UnsupportedError
        For Lambda = 0.
    """
    if not profile.de_sitter:
        raise UnsupportedError("beta is defined for Lambda > 0 only")
    return float(profile.beta)


def phase_C_minus(profile: PotentialProfile, x):
    """Accumulated phase C^-(x); see :meth:`PotentialProfile.phase_C_minus`."""
    return profile.phase_C_minus(x)


def reduced_k(profile: PotentialProfile, x):
    """Reduced 2x2 potential k(x); see :meth:`PotentialProfile.reduced_k`."""
    return profile.reduced_k(x)


def assemble_W(k: np.ndarray) -> np.ndarray:
    """The 4x4 potential [[0, k], [k^*, 0]] from 2x2 blocks ``k``."""
    k = np.asarray(k)
    out = np.zeros(k.shape[:-2] + (4, 4), dtype=complex)
    out[..., :2, 2:] = k
    out[..., 2:, :2] = np.conj(np.swapaxes(k, -1, -2))
    return out


# ---------------------------------------------------------------------------
# Reduced potential as consumed by the scattering solvers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ReducedPotential:
    """A 2x2 matrix potential k on a finite support ``[x_min, x_max]``.

    ``k_func`` maps an array of x to an array of shape ``(n, 2, 2)``.
    Outside the support the potential is taken to be zero.  ``c0``,
    ``c_plus`` and ``beta`` are carried along for the dressing of the
    scattering matrix and for the stationary pairings.
    """

    k_func: Callable[[np.ndarray], np.ndarray]
    x_min: float
    x_max: float
    c0: float = 0.0
    c_plus: float = 0.0
    beta: float = 0.0
    profile: PotentialProfile | None = None

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ConfigError("support must satisfy x_min < x_max")

    def k(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape + (2, 2), dtype=complex)
        inside = (x >= self.x_min) & (x <= self.x_max)
        if np.any(inside):
            out[inside] = self.k_func(x[inside])
        return out

    def norm(self, x) -> np.ndarray:
        """Operator norm of k(x) (equal to W(x) for physical potentials)."""
        return np.linalg.norm(self.k(x), ord=2, axis=(-2, -1))

    @property
    def is_zero(self) -> bool:
        return getattr(self.k_func, "_zero", False)

    @classmethod
    def from_profile(cls, profile: PotentialProfile, tail_tol: float = 1e-12):
        """Truncate a Lambda > 0 profile where the tails fall below ``tail_tol``."""
        lo, hi = profile.tail_cut(tail_tol)
        return cls(profile.reduced_k, lo, hi, profile.c0, profile.c_plus,
                   profile.beta, profile)

    @classmethod
    def zero(cls, x_min: float = -1.0, x_max: float = 1.0, c0: float = 0.0,
             c_plus: float = 0.0, beta: float = 0.0):
        def func(x):
            return np.zeros(np.shape(x) + (2, 2), dtype=complex)

        func._zero = True
        return cls(func, x_min, x_max, c0, c_plus, beta)

    def scaled(self, factor: float) -> "ReducedPotential":
        """Same potential multiplied by ``factor`` (weak-coupling studies)."""
        base = self.k_func
        return ReducedPotential(lambda x: factor * base(x), self.x_min, self.x_max,
                                self.c0, self.c_plus, self.beta, None)


# ---------------------------------------------------------------------------
# Integrals of W^2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WSquaredIntegrals:
    """Integrals of the squared potentials along x.

    Lambda > 0: ``a_sq`` and ``b_sq`` over the whole line, ``total`` their
    sum.  Lambda = 0: ``a_sq`` over the line, ``b_sq_left`` over x < 0 and
    ``b_dev_sq_right`` = int_0^inf (b - m)^2; their sum is
    ``reconstruction_constant``.
    """

    de_sitter: bool
    a_sq: float
    b_sq: float | None = None
    b_sq_left: float | None = None
    b_dev_sq_right: float | None = None

    @property
    def total(self) -> float:
        if not self.de_sitter:
            raise UnsupportedError(
                "int b^2 over the whole line diverges when Lambda = 0")
        return self.a_sq + self.b_sq

    @property
    def reconstruction_constant(self) -> float:
        if self.de_sitter:
            return self.total
        return self.a_sq + self.b_sq_left + self.b_dev_sq_right


def _quad(func, a, b):
    val, err = integrate.quad(func, a, b, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


def w_squared_integrals(profile: PotentialProfile) -> WSquaredIntegrals:
    """Integrals of a_l^2 and b^2 along x, computed with dx = dr / F.

    Since a_l^2 = w^2 F / r^2 and b^2 = m^2 F the factor F cancels and
    the integrands are smooth in r up to the horizons.
    """
    h = profile.map.horizon
    p = profile.map.params
    w, m = profile.w, profile.field.m_f
    if profile.de_sitter:
        a_sq = w * w * _quad(lambda y: 1.0 / (y * y), h.r_0, h.r_plus)
        b_sq = m * m * _quad(lambda y: 1.0, h.r_0, h.r_plus)
        return WSquaredIntegrals(True, a_sq, b_sq=b_sq)
    r_a = profile.map.r_anchor
    a_sq = w * w * _quad(lambda y: 1.0 / (y * y), h.r_0, np.inf)
    b_left = m * m * _quad(lambda y: 1.0, h.r_0, r_a)

    def dev(y):
        F = metric_function(p, y)
        one_minus = 2.0 * p.M / y - p.Q**2 / y**2      # 1 - F
        return one_minus**2 / (F * (1.0 + math.sqrt(F))**2)

    b_right = m * m * _quad(dev, r_a, np.inf)
    return WSquaredIntegrals(False, a_sq, b_sq_left=b_left, b_dev_sq_right=b_right)
