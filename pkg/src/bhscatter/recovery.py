"""Recovery of black-hole parameters from high-energy reconstruction data.

Data enter as samples of Theta(x) and of A(x) / Theta(x) for several
harmonic weights.  From them:

Lambda > 0
    X = c0 - c_+ is the slope of arg Theta, J(w) = 2 Im(A / Theta) is the
    integral of W^2, and J(w) = w^2 Y + m^2 Z with Y = 1/r0 - 1/r_+ and
    Z = r_+ - r0.  Then Q = X / (q Y), r0 r_+ = Z / Y, and (M, Lambda)
    solve the linear system F(r0) = F(r_+) = 0.
Lambda = 0
    c0 is the slope of arg Theta; A / Theta is real and affine in x with
    slope m^2 and intercept w^2 / r0 + (terms independent of w).  Then
    Q = c0 r0 / q and M = (r0^2 + Q^2) / (2 r0).
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .asymptotics import (WavePacketPair, fit_expansion, pairing_table,
                          reconstruction_pair, stationary_pairing)
from .errors import (DegenerateError, InconsistentDataError, PreconditionError,
                     ScatterError, UnsupportedError)
from .geometry import BlackHoleParams, build_rw_map
from .reduction import FieldParams, ReducedPotential, potential_profile

__all__ = [
    "PairSamples",
    "WIntegralFit",
    "ParameterSolution",
    "RecoveryReport",
    "samples_from_pair",
    "samples_from_pairings",
    "extract_phase_slope",
    "extract_w_integrals",
    "recover_parameters_dS",
    "recover_parameters_RN",
    "full_pipeline",
    "high_energy_recovery",
]

DE_SITTER = "de_sitter"
FLAT = "reissner_nordstrom"


@contextlib.contextmanager
def _stage(name: str):
    """Prefix errors raised inside a pipeline stage with the stage name."""
    try:
        yield
    except ScatterError as exc:
        raise type(exc)(f"[{name}] {exc}") from exc


# ---------------------------------------------------------------------------
# Samples of (Theta, A)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairSamples:
    """Samples of Theta and A / Theta for one harmonic weight.

    ``theta`` may carry an arbitrary constant unimodular factor (only its
    phase slope is used).  ``diagnostics`` holds fit residuals of the
    sampling procedure.
    """

    regime: str
    w: int
    x: np.ndarray
    theta: np.ndarray
    ratio: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def samples_from_pair(profile_or_pair, w: int, x) -> PairSamples:
    """Sample an analytic reconstruction pair on an x-grid."""
    pair = profile_or_pair
    if not hasattr(pair, "theta0"):
        pair = reconstruction_pair(profile_or_pair)
    x = np.asarray(x, dtype=float)
    regime = DE_SITTER if pair.de_sitter else FLAT
    return PairSamples(regime, int(w), x, pair.theta(x), pair.ratio(x))


def samples_from_pairings(potential: ReducedPotential, w: int, lams: Sequence[float],
                          shifts: Sequence[float], packets: WavePacketPair | None = None,
                          channel: str = "T_R", n_nodes: int = 24,
                          n_terms: int = 3, **jost_kwargs) -> PairSamples:
    """Estimate Theta and A / Theta from stationary transmission pairings.

    For every position shift ``x_j`` the packets are translated by ``x_j``
    and the pairing F(lam) is fitted by ``f0 + f1 / lam + ...`` over the
    lambda grid.  Since Theta is an exponential, ``f0_j / f0_0`` equals
    ``Theta(x_j) / Theta(0)``; the first-order coefficient gives
    ``f1_j / f0_j = A / Theta`` (T_R channel, Lambda > 0).  The scattering
    tables are computed once per lambda and shared by all shifts.
    """
    if channel != "T_R":
        raise PreconditionError("sampling uses the T_R channel")
    packets = packets or WavePacketPair()
    lams = np.asarray(lams, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    vals = np.empty((shifts.size, lams.size), dtype=complex)
    for i, lam in enumerate(lams):
        table = pairing_table(potential, packets, lam, channel, n_nodes, **jost_kwargs)
        for j, xs in enumerate(shifts):
            vals[j, i] = stationary_pairing(table, packets.shifted(xs), lam, channel,
                                            c0=potential.c0, c_plus=potential.c_plus)
    coefs = np.array([fit_expansion(lams, v, n_terms) for v in vals])
    f0, f1 = coefs[:, 0], coefs[:, 1]
    ref = f0[np.argmin(np.abs(shifts))]
    ratio_theta = f0 / ref
    theta = ratio_theta / np.abs(ratio_theta)
    design = lams[:, None] ** -np.arange(n_terms)[None, :]
    fit_res = float(np.max(np.abs(design @ coefs.T - vals.T)))
    diag = {"modulus_deviation": float(np.max(np.abs(np.abs(ratio_theta) - 1.0))),
            "fit_residual": fit_res, "lambdas": lams.size}
    return PairSamples(DE_SITTER, int(w), shifts, theta, f1 / f0, diag)


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------

def _affine_fit(x, y):
    coef = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(np.polyval(coef, x) - y))) if x.size > 2 else 0.0
    return float(coef[0]), float(coef[1]), resid


def extract_phase_slope(x, theta, *, tol: float = 1e-6,
                        unimodular_tol: float = 1e-6) -> float:
    """Slope of the unwrapped phase of Theta on an x-grid.

    The slope is c0 - c_+ when Lambda > 0 (Theta = exp(-i beta - i (c_+ - c0) x))
    and c0 when Lambda = 0.

    Raises
    ------
    PreconditionError
        Fewer than two samples, or samples that are not unimodular.
    InconsistentDataError
        Phase jumps of pi or more between neighbours, or an unwrapped phase
        that is not affine within ``tol``.
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=complex)
    if x.size < 2 or x.size != theta.size:
        raise PreconditionError("need at least two matching (x, Theta) samples")
    dev = float(np.max(np.abs(np.abs(theta) - 1.0)))
    if dev > unimodular_tol:
        raise PreconditionError(f"Theta samples are not unimodular (deviation {dev:.3e})")
    order = np.argsort(x)
    x, theta = x[order], theta[order]
    steps = np.angle(theta[1:] / theta[:-1])
    if np.any(np.abs(steps) > 0.9 * np.pi):
        raise InconsistentDataError("x-grid too coarse: phase step near pi between samples")
    phase = np.angle(theta[0]) + np.concatenate([[0.0], np.cumsum(steps)])
    slope, _, resid = _affine_fit(x, phase)
    if resid > tol:
        raise InconsistentDataError(
            f"unwrapped phase of Theta is not affine (residual {resid:.3e} > {tol:.1e})")
    return slope


@dataclass(frozen=True)
class WIntegralFit:
    """Result of the fit over harmonic weights.

    Lambda > 0: ``Y`` and ``Z`` (``Z`` is None without a mass term).
    Lambda = 0: ``m_sq`` and ``r0``.
    """

    regime: str
    Y: float | None = None
    Z: float | None = None
    m_sq: float | None = None
    r0: float | None = None
    residual: float = 0.0
    n_weights: int = 0
    integrals: dict = field(default_factory=dict)


def _weights_check(samples):
    ws = sorted({s.w for s in samples})
    if len(ws) < 2:
        raise PreconditionError("at least two distinct weights are needed (underdetermined)")
    return ws


def extract_w_integrals(samples: Sequence[PairSamples], m_f: float | None = None, *,
                        tol: float = 1e-6) -> WIntegralFit:
    """Fit the weight dependence of A / Theta.

    Lambda > 0: J(w) = 2 Im(A / Theta) is fitted as ``w^2 Y + m^2 Z`` with
    the configured mass ``m_f``.  Lambda = 0: each A / Theta must be real
    and affine in x; the slopes give m^2 and the intercepts, fitted against
    w^2, give 1 / r0.

    Raises
    ------
    PreconditionError
        Fewer than two distinct weights, or ``m_f`` missing when Lambda > 0.
    UnsupportedError
        Lambda > 0 with m_f = 0: Z is unavailable.
    InconsistentDataError
        Lambda = 0 data whose A / Theta is not real and affine, or mixed regimes.
    """
    samples = list(samples)
    regimes = {s.regime for s in samples}
    if len(regimes) != 1:
        raise InconsistentDataError("samples mix the two regimes")
    regime = regimes.pop()
    ws = _weights_check(samples)
    w2 = np.array([s.w ** 2 for s in samples], dtype=float)
    if regime == DE_SITTER:
        if m_f is None:
            raise PreconditionError("the field mass is required when Lambda > 0")
        J = np.array([2.0 * float(np.mean(np.imag(s.ratio))) for s in samples])
        spread = max(float(np.ptp(np.imag(s.ratio))) for s in samples)
        design = np.column_stack([w2, np.ones_like(w2)])
        (y_coef, const), *_ = np.linalg.lstsq(design, J, rcond=None)
        resid = float(np.max(np.abs(design @ np.array([y_coef, const]) - J)))
        if m_f == 0:
            raise UnsupportedError(
                "Z unavailable: with m_f = 0 the constant term vanishes (Y only)")
        return WIntegralFit(regime, Y=float(y_coef), Z=float(const / m_f ** 2),
                            residual=max(resid, spread), n_weights=len(ws),
                            integrals={s.w: float(j) for s, j in zip(samples, J)})
    slopes, intercepts, resid = [], [], 0.0
    for s in samples:
        scale = max(1.0, float(np.max(np.abs(s.ratio))))
        imag = float(np.max(np.abs(np.imag(s.ratio))))
        if imag > tol * scale:
            raise InconsistentDataError(
                f"A/Theta is not real (imaginary part {imag:.3e}); "
                "data are not of the Lambda = 0 form")
        slope, icpt, r = _affine_fit(np.asarray(s.x), np.real(s.ratio))
        if r > tol * scale:
            raise InconsistentDataError(
                f"A/Theta is not affine in x (residual {r:.3e})")
        slopes.append(slope)
        intercepts.append(icpt)
        resid = max(resid, r)
    slopes = np.array(slopes)
    design = np.column_stack([w2, np.ones_like(w2)])
    (inv_r0, _), *_ = np.linalg.lstsq(design, np.array(intercepts), rcond=None)
    if inv_r0 <= 0:
        raise InconsistentDataError("w^2 coefficient of A/Theta is not positive")
    return WIntegralFit(regime, m_sq=float(np.mean(slopes)), r0=float(1.0 / inv_r0),
                        residual=max(resid, float(np.ptp(slopes))), n_weights=len(ws),
                        integrals={s.w: float(c) for s, c in zip(samples, intercepts)})


# ---------------------------------------------------------------------------
# Parameter solves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParameterSolution:
    """Recovered black-hole parameters and the conditioning of the solve."""

    M: float
    Q: float
    Lambda: float
    r0: float
    r_plus: float = math.inf
    determinant: float = math.nan
    condition: float = math.nan
    horizon_residual: float = 0.0

    def params(self) -> BlackHoleParams:
        return BlackHoleParams(self.M, self.Q, max(self.Lambda, 0.0))


def recover_parameters_dS(X: float, Y: float, Z: float, q_f: float) -> ParameterSolution:
    """Solve for (M, Q, Lambda) from X = c0 - c_+, Y and Z.

    Raises
    ------
    PreconditionError
        q_f = 0.
    DegenerateError
        Y or Z not positive, or a singular horizon system.
    InconsistentDataError
        Recovered M not positive or Lambda negative.
    """
    if q_f == 0:
        raise PreconditionError("q_f must be nonzero to recover the charge")
    if not (Y > 0 and Z > 0):
        raise DegenerateError(f"Y and Z must be positive (got Y={Y}, Z={Z})")
    Q = X / (q_f * Y)
    disc = Z * Z + 4.0 * Z / Y
    if disc <= 0:
        raise InconsistentDataError("non-positive discriminant for the horizon radii")
    r0 = 0.5 * (-Z + math.sqrt(disc))
    rp = r0 + Z
    mat = np.array([[2.0 / r0, r0 * r0 / 3.0], [2.0 / rp, rp * rp / 3.0]])
    det = float(np.linalg.det(mat))
    if abs(det) <= 1e-12:
        raise DegenerateError(f"horizon system is singular (determinant {det:.3e})")
    rhs = np.array([1.0 + Q * Q / r0**2, 1.0 + Q * Q / rp**2])
    M, Lam = np.linalg.solve(mat, rhs)
    if M <= 0:
        raise InconsistentDataError(f"recovered mass is not positive ({M})")
    if Lam < -1e-9:
        raise InconsistentDataError(f"recovered Lambda is negative ({Lam})")
    Lam = max(float(Lam), 0.0)
    resid = _horizon_residual(float(M), Q, Lam, (r0, rp))
    return ParameterSolution(float(M), float(Q), Lam, r0, rp, det,
                             float(np.linalg.cond(mat)), resid)


def _horizon_residual(M, Q, Lam, radii) -> float:
    r = np.asarray(radii, dtype=float)
    return float(np.max(np.abs(1.0 - 2.0 * M / r + Q * Q / r**2 - Lam * r**2 / 3.0)))


def recover_parameters_RN(c0: float, r0: float, q_f: float) -> ParameterSolution:
    """Solve for (M, Q) from c0 = q Q / r0 and the horizon radius r0.

    Raises
    ------
    PreconditionError
        q_f = 0 or r0 not positive.
    InconsistentDataError
        r0 not above |Q| (the radius would not be the event horizon).
    """
    if q_f == 0:
        raise PreconditionError("q_f must be nonzero to recover the charge")
    if r0 <= 0:
        raise PreconditionError("r0 must be positive")
    Q = c0 * r0 / q_f
    M = (r0 * r0 + Q * Q) / (2.0 * r0)
    if not (M > abs(Q) and r0 > abs(Q)):
        raise InconsistentDataError(
            f"recovered M={M:.6g} does not exceed |Q|={abs(Q):.6g}")
    return ParameterSolution(M, Q, 0.0, r0,
                             horizon_residual=_horizon_residual(M, Q, 0.0, (r0,)))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecoveryReport:
    """Everything the pipeline extracted, recovered and checked."""

    regime: str
    extracted: dict
    recovered: dict
    residuals: dict
    diagnostics: dict

    def as_dict(self) -> dict:
        """Flat mapping ``section.name -> value`` for serialization."""
        out = {"regime": self.regime}
        for section in ("extracted", "recovered", "residuals", "diagnostics"):
            for key, val in getattr(self, section).items():
                out[f"{section}.{key}"] = val
        return out

    def relative_errors(self, truth: BlackHoleParams) -> dict:
        rec = self.recovered
        out = {}
        for key, ref in (("M", truth.M), ("Q", truth.Q), ("Lambda", truth.Lambda)):
            if key in rec:
                scale = abs(ref) if ref != 0 else 1.0
                out[key] = abs(rec[key] - ref) / scale
        return out


def full_pipeline(samples: Sequence[PairSamples], field: FieldParams, *,
                  tol: float = 1e-6, unimodular_tol: float = 1e-6) -> RecoveryReport:
    """Chain phase extraction, weight fit and parameter solve.

    Errors carry the name of the stage that raised them.
    """
    samples = list(samples)
    if not samples:
        raise PreconditionError("no samples supplied")
    with _stage("regime"):
        regimes = {s.regime for s in samples}
        if len(regimes) != 1:
            raise InconsistentDataError("inputs mix the two regimes")
        regime = regimes.pop()
    with _stage("phase"):
        slopes = np.array([extract_phase_slope(s.x, s.theta, tol=tol,
                                               unimodular_tol=unimodular_tol)
                           for s in samples])
        slope = float(np.mean(slopes))
    with _stage("weights"):
        fit = extract_w_integrals(samples, field.m_f, tol=tol)
    diag = {"n_weights": fit.n_weights, "slope_spread": float(np.ptp(slopes))}
    for s in samples:
        for key, val in s.diagnostics.items():
            diag[f"w{s.w}.{key}"] = val
    with _stage("solve"):
        if regime == DE_SITTER:
            sol = recover_parameters_dS(slope, fit.Y, fit.Z, field.q_f)
            extracted = {"X": slope, "Y": fit.Y, "Z": fit.Z}
            extracted.update({f"J_w{w}": v for w, v in fit.integrals.items()})
            recovered = {"M": sol.M, "Q": sol.Q, "Lambda": sol.Lambda,
                         "r0": sol.r0, "r_plus": sol.r_plus}
            diag.update(determinant=sol.determinant, condition=sol.condition)
        else:
            sol = recover_parameters_RN(slope, fit.r0, field.q_f)
            m_rec = math.sqrt(max(fit.m_sq, 0.0))
            extracted = {"c0": slope, "m_sq": fit.m_sq, "r0": fit.r0}
            extracted.update({f"K_w{w}": v for w, v in fit.integrals.items()})
            recovered = {"M": sol.M, "Q": sol.Q, "r0": sol.r0, "m_f": m_rec}
            diag["m_f_deviation"] = abs(m_rec - field.m_f)
    residuals = {"weight_fit": fit.residual, "horizon": sol.horizon_residual,
                 "phase_slope_spread": float(np.ptp(slopes))}
    return RecoveryReport(regime, extracted, recovered, residuals, diag)


def high_energy_recovery(params: BlackHoleParams, field: FieldParams,
                         weights: Sequence[int] = (1, 2), *,
                         lams: Sequence[float] = (40.0, 50.0, 70.0, 100.0, 140.0, 200.0),
                         shifts: Sequence[float] | None = None,
                         packets: WavePacketPair | None = None,
                         tail_tol: float = 1e-12, tol: float = 1e-4,
                         **jost_kwargs) -> RecoveryReport:
    """Forward-generate pairing data for a Lambda > 0 background and invert it."""
    if not params.de_sitter:
        raise UnsupportedError("pairing data need Lambda > 0 (no forward solver otherwise)")
    shifts = np.linspace(-4.0, 4.0, 9) if shifts is None else np.asarray(shifts)
    rw = build_rw_map(params)
    samples = []
    for w in weights:
        with _stage(f"forward w={w}"):
            prof = potential_profile(rw, field, w)
            pot = ReducedPotential.from_profile(prof, tail_tol)
            samples.append(samples_from_pairings(pot, w, lams, shifts, packets,
                                                 **jost_kwargs))
    return full_pipeline(samples, field, tol=tol, unimodular_tol=tol)
