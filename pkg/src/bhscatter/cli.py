"""Command-line front end.

Usage::

    bhscatter geometry   CONFIG [--out DIR]
    bhscatter forward    CONFIG [--out DIR] [--threads N]
    bhscatter asymptotics CONFIG [--out DIR]
    bhscatter invert     CONFIG --mode {highenergy,marchenko} [--data DIR] [--out DIR]
    bhscatter verify     CONFIG [--tolerance NAME=VALUE ...]

CONFIG is a JSON object whose keys are the fields of :class:`RunConfig`.
Tables are written as comma-separated text with one header line; reports
are ``key=value`` lines (``#`` starts a comment) that parse back to the
same values.  Exit codes: 0 success, 2 configuration error, 3 I/O error,
4 numerical-quality failure, 5 convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy import integrate

from . import __version__
from .asymptotics import (WavePacket, WavePacketPair, expansion_residual_scan,
                          reconstruction_pair)
from .errors import (ConfigError, DataIOError, NumericalQualityError, ScatterError)
from .geometry import BlackHoleParams, build_rw_map, horizon_data
from .jost import ScatteringMatrix, sweep
from .marchenko import (decay_certificate, fourier_kernels, reflection_table,
                        recover_bh_from_k, recover_k, solve_marchenko_grid)
from .recovery import DE_SITTER, PairSamples, full_pipeline, samples_from_pairings
from .reduction import FieldParams, ReducedPotential, potential_profile

log = logging.getLogger("bhscatter")

BLOCKS = ("T_L", "R", "L", "T_R")
ENTRIES = ("11", "12", "21", "22")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """All knobs of a run.  Lengths are in the same geometric units as M."""

    M: float = 1.0
    Q: float = 0.5
    Lambda: float = 0.05
    m_f: float = 0.2
    q_f: float = 1.0
    weights: list = field(default_factory=lambda: [1, 2])
    synthetic: str = "none"            # "none" or "zero" (k identically zero)
    # energy grid of the forward tables
    xi_min: float = -10.0
    xi_max: float = 10.0
    xi_count: int = 201
    # x-support: tails cut where the potential drops below tail_tol, or |x| <= x_max
    tail_tol: float = 1e-12
    x_max: float | None = None
    jost_h: float = 0.02
    # asymptotics
    lambdas: list = field(default_factory=lambda: [20.0, 30.0, 50.0, 80.0, 120.0, 200.0])
    recovery_lambdas: list = field(default_factory=lambda: [40.0, 50.0, 70.0, 100.0,
                                                            140.0, 200.0])
    shifts: list = field(default_factory=lambda: [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0,
                                                  2.0, 3.0, 4.0])
    packet_half_width: float = 1.0
    packet_sigma: float = 0.5
    chebyshev_nodes: int = 24
    # Marchenko
    d_alpha: float = 0.2
    n_fft: int = 8192
    xi_cut: float = 6.0
    marchenko_h: float = 0.05
    x_step: float = 0.25
    # tolerances
    tol_unitarity: float = 1e-6
    tol_iteration: float = 1e-9
    tol_fit: float = 1e-4
    tol_integral: float = 1e-6
    tol_reflection_tail: float = 1e-8
    # housekeeping
    geometry_rows: int = 41
    seed: int = 0
    out_dir: str = "out"

    # -- validation ------------------------------------------------------------
    def validate(self) -> "RunConfig":
        def need(cond, name, msg):
            if not cond:
                raise ConfigError(f"config field '{name}': {msg}")

        for name in ("M", "Q", "Lambda", "m_f", "q_f", "xi_min", "xi_max", "tail_tol",
                     "jost_h", "d_alpha", "xi_cut", "marchenko_h", "x_step"):
            val = getattr(self, name)
            need(isinstance(val, (int, float)) and math.isfinite(val), name,
                 "must be a finite number")
        need(self.M > 0, "M", "must be positive")
        need(self.Lambda >= 0, "Lambda", "must be non-negative")
        need(self.m_f >= 0, "m_f", "must be non-negative")
        need(isinstance(self.weights, list) and len(self.weights) > 0, "weights",
             "must be a non-empty list")
        for w in self.weights:
            need(isinstance(w, int) and w >= 1, "weights", "entries must be integers >= 1")
        need(self.synthetic in ("none", "zero"), "synthetic", "must be 'none' or 'zero'")
        need(self.xi_min < self.xi_max, "xi_min", "must be below xi_max")
        need(isinstance(self.xi_count, int) and self.xi_count >= 1, "xi_count",
             "must be a positive integer")
        for name in ("lambdas", "recovery_lambdas", "shifts"):
            val = getattr(self, name)
            need(isinstance(val, list) and len(val) > 0, name, "must be a non-empty list")
        need(min(self.lambdas) > 0, "lambdas", "must be positive")
        need(min(self.recovery_lambdas) > 0, "recovery_lambdas", "must be positive")
        need(self.x_max is None or self.x_max > 0, "x_max", "must be positive or null")
        for name in ("tol_unitarity", "tol_iteration", "tol_fit", "tol_integral",
                     "tol_reflection_tail", "tail_tol"):
            val = getattr(self, name)
            need(0 < val < 1, name, "must lie in (0, 1)")
        need(self.jost_h > 0 and self.marchenko_h > 0, "jost_h", "cell widths must be positive")
        need(self.d_alpha > 0, "d_alpha", "must be positive")
        need(isinstance(self.n_fft, int) and self.n_fft >= 16, "n_fft",
             "must be an integer >= 16")
        need(self.x_step > 0, "x_step", "must be positive")
        need(self.chebyshev_nodes >= 4, "chebyshev_nodes", "must be at least 4")
        need(self.packet_half_width > 0 and self.packet_sigma > 0, "packet_half_width",
             "packet widths must be positive")
        need(isinstance(self.geometry_rows, int) and self.geometry_rows >= 2,
             "geometry_rows", "must be an integer >= 2")
        return self

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        return cls(**data).validate()

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise DataIOError(f"cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_mapping(data)

    def override(self, items) -> "RunConfig":
        """Apply ``name=value`` overrides (tolerances and other scalars)."""
        data = dataclasses.asdict(self)
        for item in items or ():
            if "=" not in item:
                raise ConfigError(f"override '{item}' must have the form name=value")
            name, value = item.split("=", 1)
            key = name if name in data else f"tol_{name}"
            if key not in data:
                raise ConfigError(f"unknown config field '{name}'")
            try:
                data[key] = json.loads(value)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"override '{item}' has a malformed value") from exc
        return RunConfig.from_mapping(data)

    # -- derived objects -----------------------------------------------------
    @property
    def params(self) -> BlackHoleParams:
        return BlackHoleParams(self.M, self.Q, self.Lambda)

    @property
    def field_params(self) -> FieldParams:
        return FieldParams(self.m_f, self.q_f)

    @property
    def xi_grid(self) -> np.ndarray:
        return np.linspace(self.xi_min, self.xi_max, self.xi_count)

    def packets(self) -> WavePacketPair:
        pk = WavePacket(half_width=self.packet_half_width, sigma=self.packet_sigma)
        return WavePacketPair(pk, pk)


def _potential(cfg: RunConfig, rw, w: int) -> ReducedPotential:
    if cfg.synthetic == "zero":
        span = cfg.x_max or 10.0
        return ReducedPotential.zero(-span, span)
    prof = potential_profile(rw, cfg.field_params, w)
    pot = ReducedPotential.from_profile(prof, cfg.tail_tol)
    if cfg.x_max is not None:
        lo, hi = max(pot.x_min, -cfg.x_max), min(pot.x_max, cfg.x_max)
        pot = ReducedPotential(pot.k_func, lo, hi, pot.c0, pot.c_plus, pot.beta, prof)
    return pot


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _fmt(val: Any) -> str:
    if isinstance(val, (bool, np.bool_)):
        return "true" if val else "false"
    if isinstance(val, (int, np.integer)):
        return str(int(val))
    if isinstance(val, (float, np.floating)):
        return repr(float(val))
    if isinstance(val, (complex, np.complexfloating)):
        return f"{repr(float(val.real))}{'+' if val.imag >= 0 or math.isnan(val.imag) else '-'}" \
               f"{repr(abs(float(val.imag)))}j"
    text = str(val)
    if "\n" in text:
        raise ValueError("report values must be single-line")
    return text


def _parse_value(text: str) -> Any:
    if text in ("true", "false"):
        return text == "true"
    for conv in (int, float, complex):
        try:
            return conv(text)
        except ValueError:
            continue
    return text


def format_report(data: dict, title: str | None = None) -> str:
    lines = [f"# {title}"] if title else []
    lines += [f"{key}={_fmt(val)}" for key, val in data.items()]
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict:
    out = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataIOError(f"malformed report line: {raw!r}")
        key, val = line.split("=", 1)
        out[key] = _parse_value(val)
    return out


def write_table(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(float(v)) if not isinstance(v, str) else v for v in row])


def read_table(path: Path) -> tuple[list[str], np.ndarray]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    except (OSError, StopIteration) as exc:
        raise DataIOError(f"cannot read table {path}: {exc}") from exc
    except ValueError as exc:
        raise DataIOError(f"table {path} has non-numeric entries: {exc}") from exc
    return header, data.reshape(-1, len(header))


def scattering_header() -> list[str]:
    cols = ["xi"]
    for b in BLOCKS:
        for e in ENTRIES:
            cols += [f"{b}_{e}_re", f"{b}_{e}_im"]
    return cols + ["unitarity_defect"]


def scattering_rows(sm: ScatteringMatrix):
    defect = sm.unitarity_defect()
    for i, xi in enumerate(np.real(sm.xi)):
        row = [xi]
        for b in BLOCKS:
            blk = sm.block(b)[i]
            for a in range(2):
                for c in range(2):
                    row += [blk[a, c].real, blk[a, c].imag]
        yield row + [defect[i]]


def scattering_from_table(header, data) -> ScatteringMatrix:
    if header != scattering_header():
        raise DataIOError("table header does not describe a scattering table")
    xi = data[:, 0]
    blocks = {}
    col = 1
    for b in BLOCKS:
        arr = np.empty((xi.size, 2, 2), dtype=complex)
        for a in range(2):
            for c in range(2):
                arr[:, a, c] = data[:, col] + 1j * data[:, col + 1]
                col += 2
        blocks[b] = arr
    return ScatteringMatrix(xi, blocks["T_L"], blocks["R"], blocks["L"], blocks["T_R"])


def samples_header() -> list[str]:
    return ["x", "theta_re", "theta_im", "ratio_re", "ratio_im"]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _out(cfg: RunConfig, args) -> Path:
    path = Path(args.out or cfg.out_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataIOError(f"cannot create output directory {path}: {exc}") from exc
    return path


def cmd_geometry(cfg: RunConfig, args) -> int:
    hz = horizon_data(cfg.params)
    rw = build_rw_map(cfg.params, hz)
    report = {"M": cfg.M, "Q": cfg.Q, "Lambda": cfg.Lambda, "r_minus": hz.r_minus,
              "r_0": hz.r_0, "r_plus": hz.r_plus, "kappa_0": hz.kappa_0,
              "kappa_plus": hz.kappa_plus, "r_anchor": rw.r_anchor,
              "x_min": rw.x_min, "x_max": rw.x_max}
    out = _out(cfg, args)
    x = np.linspace(max(rw.x_min, -50.0), min(rw.x_max, 50.0), cfg.geometry_rows)
    r = rw.r_of_x(x)
    write_table(out / "geometry_table.csv", ["x", "r"], zip(x, r))
    text = format_report(report, "horizon data")
    (out / "geometry_report.txt").write_text(text)
    sys.stdout.write(text)
    return 0


def _map_weights(cfg: RunConfig, args, func):
    threads = max(1, int(getattr(args, "threads", 1) or 1))
    if threads == 1:
        return [func(w) for w in cfg.weights]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, cfg.weights))


def _rw(cfg: RunConfig):
    if cfg.synthetic == "zero":
        return None
    if not cfg.params.de_sitter:
        raise ConfigError("config field 'Lambda': forward scattering needs Lambda > 0")
    return build_rw_map(cfg.params)


def cmd_forward(cfg: RunConfig, args) -> int:
    rw = _rw(cfg)
    out = _out(cfg, args)

    def run(w):
        pot = _potential(cfg, rw, w)
        sm = sweep(pot, cfg.xi_grid, h=cfg.jost_h, tol=cfg.tol_unitarity)
        tables = {"scattering": sm}
        if args.marchenko:
            tables["reflection"] = reflection_table(pot, cfg.d_alpha, cfg.n_fft, cfg.xi_cut,
                                                    h=cfg.marchenko_h, tol=cfg.tol_unitarity)
        return w, pot, tables

    report = {}
    for w, pot, tables in _map_weights(cfg, args, run):
        for name, sm in tables.items():
            write_table(out / f"{name}_w{w}.csv", scattering_header(), scattering_rows(sm))
        defect = float(tables["scattering"].unitarity_defect().max())
        report[f"w{w}.beta"] = pot.beta
        report[f"w{w}.max_unitarity_defect"] = defect
        report[f"w{w}.sup_R"] = float(np.linalg.norm(tables["scattering"].R, 2,
                                                     axis=(1, 2)).max())
        report[f"w{w}.x_min"] = pot.x_min
        report[f"w{w}.x_max"] = pot.x_max
    text = format_report(report, "forward scattering")
    (out / "forward_report.txt").write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_asymptotics(cfg: RunConfig, args) -> int:
    rw = _rw(cfg)
    if rw is None:
        raise ConfigError("config field 'synthetic': asymptotics needs a physical profile")
    out = _out(cfg, args)
    packets = cfg.packets()
    report = {}
    for w in cfg.weights:
        prof = potential_profile(rw, cfg.field_params, w)
        pot = _potential(cfg, rw, w)
        pair = reconstruction_pair(prof)
        scan = expansion_residual_scan(pot, pair, cfg.lambdas, packets,
                                       n_nodes=cfg.chebyshev_nodes, h=cfg.jost_h,
                                       tol=cfg.tol_unitarity)
        write_table(out / f"expansion_w{w}.csv",
                    ["lambda", "F_re", "F_im", "pred_re", "pred_im", "residual"],
                    ([lam, f.real, f.imag, p.real, p.imag, r] for lam, f, p, r in scan.rows()))
        smp = samples_from_pairings(pot, w, cfg.recovery_lambdas, cfg.shifts, packets,
                                    n_nodes=cfg.chebyshev_nodes, h=cfg.jost_h,
                                    tol=cfg.tol_unitarity)
        write_table(out / f"samples_w{w}.csv", samples_header(),
                    zip(smp.x, smp.theta.real, smp.theta.imag, smp.ratio.real, smp.ratio.imag))
        report[f"w{w}.slope"] = scan.slope
        report[f"w{w}.slope_ci_low"] = scan.slope_ci[0]
        report[f"w{w}.slope_ci_high"] = scan.slope_ci[1]
        report[f"w{w}.noise_floor"] = scan.noise_floor
    text = format_report(report, "high-energy expansion")
    (out / "asymptotics_report.txt").write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_invert(cfg: RunConfig, args) -> int:
    data_dir = Path(args.data or cfg.out_dir)
    out = _out(cfg, args)
    if args.mode == "highenergy":
        samples = []
        for w in cfg.weights:
            header, data = read_table(data_dir / f"samples_w{w}.csv")
            if header != samples_header():
                raise DataIOError(f"samples_w{w}.csv has an unexpected header")
            samples.append(PairSamples(DE_SITTER, w, data[:, 0], data[:, 1] + 1j * data[:, 2],
                                       data[:, 3] + 1j * data[:, 4]))
        rep = full_pipeline(samples, cfg.field_params, tol=cfg.tol_fit,
                            unimodular_tol=cfg.tol_fit)
    else:
        rw = _rw(cfg)
        ks, xgrid = {}, None
        for w in cfg.weights:
            header, data = read_table(data_dir / f"reflection_w{w}.csv")
            table = scattering_from_table(header, data)
            kern = fourier_kernels(table, cfg.d_alpha, tail_tol=cfg.tol_reflection_tail)
            if xgrid is None:
                pot = _potential(cfg, rw, w)
                step = cfg.x_step
                xgrid = np.arange(math.ceil(pot.x_min / step), math.floor(pot.x_max / step) + 1) * step
            sol = solve_marchenko_grid(kern, xgrid, tol=cfg.tol_iteration)
            ks[w] = recover_k(sol)
        write_table(out / "recovered_k.csv",
                    ["x"] + [f"w{w}_{e}_{p}" for w in cfg.weights for e in ENTRIES
                             for p in ("re", "im")],
                    (np.concatenate([[xv]] + [[ks[w][i].ravel()[j].real if p == 0
                                                else ks[w][i].ravel()[j].imag
                                                for j in range(4) for p in (0, 1)]
                                               for w in cfg.weights])
                     for i, xv in enumerate(xgrid)))
        rep = recover_bh_from_k(xgrid, ks, cfg.field_params)
    data = rep.as_dict()
    if cfg.synthetic == "none":
        for key, val in rep.relative_errors(cfg.params).items():
            data[f"relative_error.{key}"] = val
    text = format_report(data, f"recovery ({args.mode})")
    (out / f"invert_{args.mode}_report.txt").write_text(text)
    sys.stdout.write(text)
    return 0


def _x_space_integral(func, lo: float, hi: float, pieces: int = 40) -> float:
    """Adaptive quadrature of a vectorized func over [lo, hi] in x."""
    edges = np.linspace(lo, hi, pieces + 1)
    return sum(integrate.quad(lambda x: float(func(np.array([x]))[0]), a, b,
                              epsabs=1e-14, epsrel=1e-13, limit=200)[0]
               for a, b in zip(edges[:-1], edges[1:]))


def _verify_checks(cfg: RunConfig):
    """Identity checks as (name, value, threshold) with pass meaning value <= threshold."""
    checks = []
    params = cfg.params
    rw = build_rw_map(params)
    hz = rw.horizon
    for w in cfg.weights:
        prof = potential_profile(rw, cfg.field_params, w)
        # closed form in r against quadrature along the tortoise coordinate
        if params.de_sitter:
            ref = w * w * (1 / hz.r_0 - 1 / hz.r_plus) + cfg.m_f ** 2 * (hz.r_plus - hz.r_0)
            val = _x_space_integral(prof.w_squared, *prof.tail_cut(1e-14))
        else:
            ref = w * w / hz.r_0
            val = _x_space_integral(lambda x: prof.a(x) ** 2, rw.x_min, rw.x_max)
            val += w * w / float(rw.r_of_x(rw.x_max))
        checks.append((f"integral_w{w}", abs(val - ref) / abs(ref), cfg.tol_integral))
    if not params.de_sitter:
        return checks
    w = cfg.weights[0]
    prof = potential_profile(rw, cfg.field_params, w)
    pot = ReducedPotential.from_profile(prof, cfg.tail_tol)
    sm = sweep(pot, np.linspace(-10, 10, 41), h=cfg.jost_h, check=False)
    checks.append(("unitarity", float(sm.unitarity_defect().max()), cfg.tol_unitarity))
    scan = expansion_residual_scan(pot, reconstruction_pair(prof), [20.0, 50.0, 100.0, 200.0],
                                   cfg.packets(), n_nodes=cfg.chebyshev_nodes, h=cfg.jost_h,
                                   tol=1.0)
    checks.append(("expansion_slope_distance", abs(scan.slope + 2.1) - 0.4, 0.0))
    table = reflection_table(pot, cfg.d_alpha, cfg.n_fft, cfg.xi_cut, h=cfg.marchenko_h,
                             check=False)
    kern = fourier_kernels(table, cfg.d_alpha, tail_tol=cfg.tol_reflection_tail)
    cert = decay_certificate(kern)
    checks.append(("fourier_decay_slope", max(cert.weighted_slopes, default=math.inf), 0.0))
    parseval = abs(kern.parseval["kernel_side"] - kern.parseval["energy_side"]) \
        / kern.parseval["energy_side"]
    checks.append(("parseval", parseval, cfg.tol_integral))
    return checks


def cmd_verify(cfg: RunConfig, args) -> int:
    checks = _verify_checks(cfg)
    report = {}
    failed = 0
    for name, value, thr in checks:
        ok = bool(value <= thr)
        failed += not ok
        report[f"{name}.status"] = "pass" if ok else "fail"
        report[f"{name}.value"] = float(value)
        report[f"{name}.threshold"] = float(thr)
    report["summary.passed"] = len(checks) - failed
    report["summary.failed"] = failed
    text = format_report(report, "verification")
    if args.out:
        out = _out(cfg, args)
        (out / "verify_report.txt").write_text(text)
    sys.stdout.write(text)
    if failed:
        raise NumericalQualityError(f"{failed} verification check(s) failed")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bhscatter", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON configuration file")
        p.add_argument("--out", default=None, help="output directory (default: out_dir)")
        p.add_argument("--threads", type=int, default=1, help="worker threads over weights")
        p.add_argument("--tolerance", action="append", default=[], metavar="NAME=VALUE",
                       help="override a tolerance or other config field")

    common(sub.add_parser("geometry", help="horizons and tortoise map"))
    fwd = sub.add_parser("forward", help="scattering tables")
    common(fwd)
    fwd.add_argument("--marchenko", action="store_true",
                     help="also write reflection tables on the Marchenko energy grid")
    common(sub.add_parser("asymptotics", help="expansion residuals and pairing samples"))
    inv = sub.add_parser("invert", help="parameter recovery")
    common(inv)
    inv.add_argument("--mode", choices=("highenergy", "marchenko"), required=True)
    inv.add_argument("--data", default=None, help="directory with input tables")
    common(sub.add_parser("verify", help="identity checks with pass/fail summary"))
    return parser


COMMANDS = {"geometry": cmd_geometry, "forward": cmd_forward,
            "asymptotics": cmd_asymptotics, "invert": cmd_invert, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig.load(args.config).override(args.tolerance)
        return COMMANDS[args.command](cfg, args)
    except ScatterError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
