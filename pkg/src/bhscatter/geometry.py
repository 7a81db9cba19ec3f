"""Black-hole background: metric function, horizons and tortoise coordinate.

The exterior of a (de Sitter-)Reissner-Nordstrom black hole is described
by the metric function

    F(r) = 1 - 2M/r + Q^2/r^2 - Lambda r^2 / 3,

whose roots are the horizons.  The Regge-Wheeler (tortoise) coordinate x
solves dr/dx = F(r) and maps the exterior r_0 < r < r_+ onto the real
line.

Numerical strategy
------------------
Near a horizon the radius itself carries no information once
``r - r_0`` drops below the double-precision spacing of ``r_0``, yet the
potentials built on top of the map still have to be evaluated there.  The
map therefore works with horizon offsets ``s = r - r_0`` (left branch) and
``t = r_+ - r`` (right branch, Lambda > 0).  With ``F = s * phi_0(r)`` the
coordinate is

    x = log(s / s_a) / (2 kappa_0) + int_{s_a}^{s} (1/phi_0 - 1/phi_0(r_0)) / s' ds'

(and the mirror formula on the right), where the remaining integrand is
smooth and is integrated by composite Gauss-Legendre quadrature.  Inversion
is a vectorised Newton iteration in ``log s`` (or ``log t``), seeded from a
dense monotone table.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize

from .errors import ConfigError, DomainError, RangeError
from .quadrature import CumulativeQuadrature, graded_breaks

__all__ = [
    "BlackHoleParams",
    "HorizonData",
    "MapState",
    "ReggeWheelerMap",
    "metric_function",
    "metric_derivative",
    "horizon_data",
    "build_rw_map",
    "x_event_form",
    "x_cosmological_form",
    "x_closed_form_rn",
]


# ---------------------------------------------------------------------------
# Parameters and metric
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlackHoleParams:
    """Mass ``M``, charge ``Q`` and cosmological constant ``Lambda``.

    Validation happens at construction: ``M > 0``, ``Lambda >= 0``,
    ``M > |Q|`` when ``Lambda == 0`` and three distinct positive horizons
    when ``Lambda > 0``.
    """

    M: float
    Q: float = 0.0
    Lambda: float = 0.0

    def __post_init__(self):
        for name in ("M", "Q", "Lambda"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) \
                    or not math.isfinite(value):
                raise ConfigError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.M <= 0:
            raise ConfigError(f"M must be positive, got {self.M}")
        if self.Lambda < 0:
            raise ConfigError(f"Lambda must be non-negative, got {self.Lambda}")
        if self.Lambda == 0 and self.M <= abs(self.Q):
            raise ConfigError(
                f"Lambda = 0 requires M > |Q| (got M={self.M}, Q={self.Q})")
        if self.Lambda > 0:
            _de_sitter_roots(self.M, self.Q, self.Lambda)

    @property
    def de_sitter(self) -> bool:
        """True when the cosmological horizon exists (Lambda > 0)."""
        return self.Lambda > 0


def metric_function(params: BlackHoleParams, r):
    """Evaluate F(r) = 1 - 2M/r + Q^2/r^2 - Lambda r^2/3.

    Raises
    ------
    DomainError
        If any ``r <= 0``.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise DomainError("metric_function requires r > 0")
    M, Q, L = params.M, params.Q, params.Lambda
    out = 1.0 - 2.0 * M / r_arr + Q * Q / r_arr**2 - L * r_arr**2 / 3.0
    return float(out) if np.ndim(out) == 0 else out


def metric_derivative(params: BlackHoleParams, r):
    """Closed-form F'(r) = 2M/r^2 - 2Q^2/r^3 - 2 Lambda r / 3."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise DomainError("metric_derivative requires r > 0")
    M, Q, L = params.M, params.Q, params.Lambda
    out = 2.0 * M / r_arr**2 - 2.0 * Q * Q / r_arr**3 - 2.0 * L * r_arr / 3.0
    return float(out) if np.ndim(out) == 0 else out


def _quartic(M, Q, L, r):
    # r^2 F(r), a polynomial with no singularity at r = 0.
    return -L / 3.0 * r**4 + r * r - 2.0 * M * r + Q * Q


def _quartic_prime(M, Q, L, r):
    return -4.0 * L / 3.0 * r**3 + 2.0 * r - 2.0 * M


def _de_sitter_roots(M: float, Q: float, L: float) -> tuple[float, float, float]:
    """Three positive roots of r^2 F(r) for Lambda > 0, by bracketing."""
    r_top = math.sqrt(3.0 / L)
    grid = np.unique(np.concatenate([
        np.geomspace(1e-12 * r_top, r_top, 20000),
        np.linspace(0.0, r_top, 20001)[1:],
    ]))
    vals = _quartic(M, Q, L, grid)
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    roots = []
    for i in flips:
        a, b = grid[i], grid[i + 1]
        root = optimize.brentq(lambda r: _quartic(M, Q, L, r), a, b,
                               xtol=1e-300, rtol=4 * np.finfo(float).eps,
                               maxiter=500)
        for _ in range(2):
            d = _quartic_prime(M, Q, L, root)
            if d == 0:
                break
            step = _quartic(M, Q, L, root) / d
            cand = root - step
            if a <= cand <= b and abs(_quartic(M, Q, L, cand)) <= abs(_quartic(M, Q, L, root)):
                root = cand
        roots.append(float(root))
    # exact zeros on grid nodes
    for r in grid[vals == 0]:
        roots.append(float(r))
    if Q == 0:
        roots.append(0.0)
    roots = sorted(set(roots))
    if len(roots) != 3:
        raise ConfigError(
            "extremal or over-sized Lambda: F(r) does not have three distinct "
            f"positive roots for M={M}, Q={Q}, Lambda={L} (found {len(roots)})")
    return roots[0], roots[1], roots[2]


# ---------------------------------------------------------------------------
# Horizons
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HorizonData:
    """Horizon radii and surface gravities.

    ``r_plus`` is ``math.inf`` and ``kappa_plus`` is ``None`` when
    Lambda = 0.  ``r_negative`` is the fourth (negative) root of r^2 F(r)
    for Lambda > 0; it is used for factored evaluation of F.
    """

    r_minus: float
    r_0: float
    r_plus: float
    kappa_0: float
    kappa_plus: float | None = None
    r_negative: float | None = None

    @property
    def de_sitter(self) -> bool:
        return math.isfinite(self.r_plus)

    @property
    def width(self) -> float:
        """r_+ - r_0 (infinite for Lambda = 0)."""
        return self.r_plus - self.r_0


def horizon_data(params: BlackHoleParams) -> HorizonData:
    """Locate and order the horizons and attach surface gravities.

    For Lambda = 0 the closed forms r_0 = M + sqrt(M^2 - Q^2) and
    r_- = Q^2 / r_0 (the same root, written without cancellation) are
    used; for Lambda > 0 the roots come from a sign-change scan of
    r^2 F(r) over (0, sqrt(3/Lambda)) with bisection and Newton polish.
    """
    M, Q, L = params.M, params.Q, params.Lambda
    if L == 0:
        if M <= abs(Q):
            raise ConfigError("Lambda = 0 requires M > |Q|")
        r0 = M + math.sqrt((M - Q) * (M + Q))
        rm = Q * Q / r0
        kappa0 = (r0 - rm) / (2.0 * r0 * r0)
        return HorizonData(r_minus=rm, r_0=r0, r_plus=math.inf, kappa_0=kappa0)
    rm, r0, rp = _de_sitter_roots(M, Q, L)
    rn = -(rm + r0 + rp)
    kappa0 = 0.5 * metric_derivative(params, r0)
    kappap = 0.5 * metric_derivative(params, rp)
    if not (kappa0 > 0 and kappap < 0):
        raise ConfigError("surface gravities have unexpected signs; "
                          "parameters too close to extremality")
    return HorizonData(r_minus=rm, r_0=r0, r_plus=rp, kappa_0=kappa0,
                       kappa_plus=kappap, r_negative=rn)


# ---------------------------------------------------------------------------
# Regge-Wheeler map
# ---------------------------------------------------------------------------

class MapState(NamedTuple):
    """Radius with accurate horizon offsets and metric value at given x."""

    r: np.ndarray
    s: np.ndarray      # r - r_0
    t: np.ndarray      # r_+ - r (inf when Lambda = 0)
    F: np.ndarray


@dataclass(frozen=True)
class _Branch:
    """One side of the anchor, parametrised by a horizon offset."""

    sign: float                  # +1: x grows with the offset, -1: decreases
    coeff: float                 # coefficient of log(offset)
    offset_anchor: float
    integral: CumulativeQuadrature
    phi: object                  # callable offset -> F / offset
    u_nodes: np.ndarray          # log offsets of the table
    x_nodes: np.ndarray          # coordinate values of the table (increasing)
    const: float                 # integral evaluated at the anchor

    def x_of_offset(self, off):
        off = np.asarray(off, dtype=float)
        return (self.coeff * np.log(off / self.offset_anchor)
                + self.sign * (self.integral(off) - self.const))

    def dx_du(self, off):
        return self.sign / self.phi(off)


@dataclass(frozen=True, eq=False)
class ReggeWheelerMap:
    """Invertible tortoise coordinate with anchor ``x(r_anchor) = 0``.

    Use :func:`build_rw_map` to construct.  ``x_min`` and ``x_max`` bound
    the tabulated range (where F exceeds ``edge_metric``); :meth:`state`
    extends past it through the horizon-offset representation, which is
    needed to truncate potentials far below double-precision noise in r.
    """

    params: BlackHoleParams
    horizon: HorizonData
    r_anchor: float
    edge_metric: float
    r_max: float
    left: _Branch
    right: _Branch | None
    r_lo: float = field(repr=False)
    r_hi: float = field(repr=False)

    # -- tabulated range ---------------------------------------------------
    @property
    def x_min(self) -> float:
        return float(self.left.x_nodes[0])

    @property
    def x_max(self) -> float:
        if self.right is None:
            return float(self.left.x_nodes[-1])
        return float(self.right.x_nodes[-1])

    @property
    def table(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense monotone table ``(r, x)`` of the map nodes."""
        h = self.horizon
        r_left = h.r_0 + np.exp(self.left.u_nodes)
        x_left = self.left.x_nodes
        if self.right is None:
            return r_left, x_left.copy()
        r_right = h.r_plus - np.exp(self.right.u_nodes[::-1])
        # drop the duplicated anchor node
        r = np.concatenate([r_left, r_right[1:]])
        x = np.concatenate([x_left, self.right.x_nodes[1:]])
        return r, x

    # -- forward map ---------------------------------------------------------
    def x_of_r(self, r):
        """Tortoise coordinate of radius ``r`` (tabulated range only)."""
        r_arr = np.asarray(r, dtype=float)
        slack = 1e-14 * self.r_hi
        if np.any(r_arr < self.r_lo - slack) or np.any(r_arr > self.r_hi + slack):
            raise RangeError(
                f"radius outside covered range [{self.r_lo!r}, {self.r_hi!r}]")
        h = self.horizon
        out = np.empty_like(r_arr)
        on_left = r_arr <= self.r_anchor if self.right is not None \
            else np.ones_like(r_arr, dtype=bool)
        out[on_left] = self.left.x_of_offset(r_arr[on_left] - h.r_0)
        if self.right is not None:
            out[~on_left] = self.right.x_of_offset(h.r_plus - r_arr[~on_left])
        return float(out) if out.ndim == 0 else out

    # -- inverse map ---------------------------------------------------------
    def r_of_x(self, x):
        """Radius at coordinate ``x`` (tabulated range only)."""
        x_arr = np.asarray(x, dtype=float)
        slack = 1e-12 * max(1.0, abs(self.x_min), abs(self.x_max))
        if np.any(x_arr < self.x_min - slack) or np.any(x_arr > self.x_max + slack):
            raise RangeError(
                f"coordinate outside covered range [{self.x_min!r}, {self.x_max!r}]")
        r = self.state(x_arr).r
        return float(r) if np.ndim(r) == 0 else r

    def state(self, x) -> MapState:
        """Radius, offsets and F at ``x``; valid beyond the table edges.

        Raises
        ------
        RangeError
            When the offset would underflow (x absurdly far out) or, for
            Lambda = 0, beyond ``r_max``.
        """
        x_arr = np.asarray(x, dtype=float)
        flat = x_arr.ravel()
        h = self.horizon
        s = np.empty_like(flat)
        t = np.full_like(flat, np.inf)
        if self.right is None:
            if flat.size and flat.max() > self.x_max:
                raise RangeError(f"x beyond the r_max edge {self.x_max!r}")
            s[:] = np.exp(self._invert(self.left, flat))
        else:
            on_left = flat <= 0.0
            s[on_left] = np.exp(self._invert(self.left, flat[on_left]))
            t[~on_left] = np.exp(self._invert(self.right, flat[~on_left]))
            s[~on_left] = h.width - t[~on_left]
            t[on_left] = h.width - s[on_left]
        if np.any(s <= 0) or np.any(t <= 0):
            raise RangeError("x too far beyond the horizons: offset underflow")
        if self.right is None:
            r = h.r_0 + s
            F = s * self.left.phi(s)
        else:
            r = np.where(flat <= 0.0, h.r_0 + s, h.r_plus - t)
            F = np.where(flat <= 0.0, s * self.left.phi(s), t * self.right.phi(t))
        shape = x_arr.shape
        return MapState(r.reshape(shape), s.reshape(shape), t.reshape(shape),
                        F.reshape(shape))

    def metric_at(self, x):
        """F(r(x)) evaluated through the horizon offsets."""
        return self.state(x).F

    @staticmethod
    def _invert(branch: _Branch, x: np.ndarray) -> np.ndarray:
        if x.size == 0:
            return x.copy()
        xn, un = branch.x_nodes, branch.u_nodes
        if branch.sign < 0:
            # right branch: x decreases with u; table stored increasing in x
            un = un[::-1]
        u = np.interp(x, xn, un)
        slope = 1.0 / branch.coeff
        below, above = x < xn[0], x > xn[-1]
        u[below] = un[0] + (x[below] - xn[0]) * slope
        u[above] = un[-1] + (x[above] - xn[-1]) * slope
        u_cap = math.log(branch.integral.upper)
        tol = 1e-14 * np.maximum(1.0, np.abs(x))
        for _ in range(60):
            u = np.minimum(u, u_cap)
            off = np.exp(u)
            f = branch.x_of_offset(off) - x
            if np.all(np.abs(f) <= tol):
                break
            u = u - f / branch.dx_du(off)
        return np.minimum(u, u_cap)


def _phi_factories(horizon: HorizonData, params: BlackHoleParams):
    """Return F/s on the left and F/t on the right as offset functions."""
    h = horizon
    L = params.Lambda
    if not h.de_sitter:
        gap = h.r_0 - h.r_minus

        def phi_left(s):
            r = h.r_0 + s
            return (gap + s) / (r * r)

        return phi_left, None
    width = h.width
    gap = h.r_0 - h.r_minus
    neg = h.r_0 - h.r_negative

    def phi_left(s):
        r = h.r_0 + s
        return (L / 3.0) * (gap + s) * (width - s) * (neg + s) / (r * r)

    def phi_right(t):
        r = h.r_plus - t
        return (L / 3.0) * (gap + width - t) * (width - t) * (neg + width - t) / (r * r)

    return phi_left, phi_right


def _edge_offset(phi, target: float) -> float:
    off = target / phi(0.0)
    for _ in range(50):
        new = target / phi(off)
        if abs(new - off) <= 1e-15 * off:
            off = new
            break
        off = new
    return off * (1.0 + 1e-6)


def build_rw_map(params: BlackHoleParams, horizon: HorizonData | None = None,
                 anchor: float | None = None, *, edge_metric: float = 1e-14,
                 r_max: float | None = None, n_table: int = 401,
                 n_panels: int = 64, order: int = 20) -> ReggeWheelerMap:
    """Build the Regge-Wheeler map.

    Parameters
    ----------
    params : BlackHoleParams
    horizon : HorizonData, optional
        Computed from ``params`` when omitted.
    anchor : float, optional
        Radius with ``x(anchor) = 0``.  Defaults to ``(r_0 + r_+)/2`` for
        Lambda > 0 and ``2 r_0`` for Lambda = 0.
    edge_metric : float
        The tabulated range stops where F drops to this value near each
        horizon.
    r_max : float, optional
        Outer radius of the table for Lambda = 0 (default ``1000 r_0``).
    n_table : int
        Table nodes per branch.
    n_panels, order : int
        Composite Gauss-Legendre layout of the smooth remainder integral.
    """
    h = horizon if horizon is not None else horizon_data(params)
    if not (0 < edge_metric < 1e-3):
        raise ConfigError("edge_metric must lie in (0, 1e-3)")
    if h.de_sitter:
        r_a = 0.5 * (h.r_0 + h.r_plus) if anchor is None else float(anchor)
        if not (h.r_0 < r_a < h.r_plus):
            raise RangeError("anchor must lie strictly between the horizons")
        r_top = h.r_plus
    else:
        r_a = 2.0 * h.r_0 if anchor is None else float(anchor)
        r_top = 1000.0 * h.r_0 if r_max is None else float(r_max)
        if not (h.r_0 < r_a < r_top):
            raise RangeError("anchor must lie in (r_0, r_max)")
    phi_left, phi_right = _phi_factories(h, params)

    # left branch -----------------------------------------------------------
    s_a = r_a - h.r_0
    coeff0 = 1.0 / phi_left(0.0)          # 1 / (2 kappa_0)

    def g_left(s):
        return (1.0 / phi_left(s) - coeff0) / s

    if h.de_sitter:
        breaks = graded_breaks(s_a, n_panels)
        s_top = s_a
    else:
        s_top = r_top - h.r_0
        breaks = np.unique(np.concatenate([
            graded_breaks(s_a, n_panels),
            np.geomspace(s_a, s_top, n_panels + 1)]))
    quad_left = CumulativeQuadrature(g_left, breaks, order)
    # snap the edge to a representable radius so x_of_r and the table agree
    s_edge = (h.r_0 + _edge_offset(phi_left, edge_metric)) - h.r_0
    if s_edge >= s_a:
        raise RangeError("edge_metric too large: exclusion zone reaches the anchor")
    u_left = np.linspace(math.log(s_edge), math.log(s_top), n_table)
    left = _Branch(sign=1.0, coeff=coeff0, offset_anchor=s_a, integral=quad_left,
                   phi=phi_left, u_nodes=u_left, x_nodes=np.empty(0),
                   const=float(quad_left(s_a)))
    object.__setattr__(left, "x_nodes", left.x_of_offset(np.exp(u_left)))

    right = None
    r_hi = r_top
    if h.de_sitter:
        t_a = h.r_plus - r_a
        coeffp = 1.0 / phi_right(0.0)      # -1 / (2 kappa_+) > 0

        def g_right(t):
            return (1.0 / phi_right(t) - coeffp) / t

        quad_right = CumulativeQuadrature(g_right, graded_breaks(t_a, n_panels), order)
        t_edge = h.r_plus - (h.r_plus - _edge_offset(phi_right, edge_metric))
        if t_edge >= t_a:
            raise RangeError("edge_metric too large: exclusion zone reaches the anchor")
        u_right = np.linspace(math.log(t_edge), math.log(t_a), n_table)
        right = _Branch(sign=-1.0, coeff=-coeffp, offset_anchor=t_a,
                        integral=quad_right, phi=phi_right, u_nodes=u_right,
                        x_nodes=np.empty(0), const=float(quad_right(t_a)))
        # table stored with x increasing: from the anchor towards r_+
        object.__setattr__(right, "u_nodes", u_right[::-1].copy())
        object.__setattr__(right, "x_nodes", right.x_of_offset(np.exp(right.u_nodes)))
        object.__setattr__(right, "u_nodes", u_right)  # keep ascending offsets
        r_hi = h.r_plus - t_edge
    if not np.all(np.diff(left.x_nodes) > 0):
        raise RangeError("left table is not monotone")
    if right is not None and not np.all(np.diff(right.x_nodes) > 0):
        raise RangeError("right table is not monotone")
    return ReggeWheelerMap(params=params, horizon=h, r_anchor=r_a,
                           edge_metric=edge_metric, r_max=r_top, left=left,
                           right=right, r_lo=h.r_0 + s_edge, r_hi=r_hi)


# ---------------------------------------------------------------------------
# Closed-form and alternate representations (cross-checks)
# ---------------------------------------------------------------------------

def x_event_form(rw: ReggeWheelerMap, r):
    """Event-horizon representation of x, re-anchored to ``rw``.

    x = [log(r - r_0) - int_{r_0}^r (1/(y - r_0) - 2 kappa_0 / F(y)) dy] / (2 kappa_0) + C,
    with the integral done by adaptive quadrature (independent of the map).
    """
    h, p = rw.horizon, rw.params
    k0 = h.kappa_0

    def body(rr):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(
                lambda y: 1.0 / (y - h.r_0) - 2.0 * k0 / metric_function(p, y),
                h.r_0, rr, epsabs=1e-13, epsrel=1e-13, limit=200)
        return (math.log(rr - h.r_0) - val) / (2.0 * k0)

    const = -body(rw.r_anchor)
    return np.vectorize(lambda rr: body(float(rr)) + const)(np.asarray(r, float))


def x_cosmological_form(rw: ReggeWheelerMap, r):
    """Cosmological-horizon representation of x (Lambda > 0 only).

    x = [log(r_+ - r) - int_r^{r_+} (1/(r_+ - y) + 2 kappa_+ / F(y)) dy] / (2 kappa_+) + C.
    """
    h, p = rw.horizon, rw.params
    if not h.de_sitter:
        raise ConfigError("the cosmological form needs Lambda > 0")
    kp = h.kappa_plus

    def body(rr):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(
                lambda y: 1.0 / (h.r_plus - y) + 2.0 * kp / metric_function(p, y),
                rr, h.r_plus, epsabs=1e-13, epsrel=1e-13, limit=200)
        return (math.log(h.r_plus - rr) - val) / (2.0 * kp)

    const = -body(rw.r_anchor)
    return np.vectorize(lambda rr: body(float(rr)) + const)(np.asarray(r, float))


def x_closed_form_rn(params: BlackHoleParams, r, anchor: float | None = None,
                     flipped_sign: bool = False):
    """Elementary closed form of x for Lambda = 0.

    Partial fractions of r^2 / ((r - r_-)(r - r_0)) give

        x = r + r_0^2/(r_0 - r_-) log(r - r_0) - r_-^2/(r_0 - r_-) log(r - r_-) + C.

    ``flipped_sign=True`` flips the sign of the last logarithm, which is the
    variant that does not satisfy dx/dr = 1/F when Q != 0 (kept so the
    discrepancy can be demonstrated).
    """
    if params.de_sitter:
        raise ConfigError("closed form is for Lambda = 0")
    h = horizon_data(params)
    r0, rm = h.r_0, h.r_minus
    sgn = 1.0 if flipped_sign else -1.0
    r_a = 2.0 * r0 if anchor is None else float(anchor)

    def raw(rr):
        out = rr + r0 * r0 / (r0 - rm) * np.log(rr - r0)
        if rm > 0:
            out = out + sgn * rm * rm / (r0 - rm) * np.log(rr - rm)
        return out

    return raw(np.asarray(r, dtype=float)) - raw(r_a)
