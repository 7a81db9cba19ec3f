"""Shared fixtures: black holes, profiles, potentials and Marchenko data."""

from __future__ import annotations

import time

import numpy as np
import pytest

from bhscatter.geometry import BlackHoleParams, build_rw_map
from bhscatter.marchenko import fourier_kernels, recover_k, reflection_table, solve_marchenko_grid
from bhscatter.reduction import FieldParams, ReducedPotential, potential_profile
from bhscatter.recovery import high_energy_recovery

# Marchenko discretization used throughout the tests
D_ALPHA = 0.2
N_FFT = 8192
XI_CUT = 6.0
MARCHENKO_H = 0.05
X_STEP = 0.25

# wall-clock seconds spent building the expensive session fixtures
TIMINGS: dict[str, float] = {}
# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ds_params():
    return BlackHoleParams(1.0, 0.5, 0.05)


@pytest.fixture(scope="session")
def ds_field():
    return FieldParams(0.2, 1.0)


@pytest.fixture(scope="session")
def ds_map(ds_params):
    return build_rw_map(ds_params)


@pytest.fixture(scope="session")
def ds_profiles(ds_map, ds_field):
    return {w: potential_profile(ds_map, ds_field, w) for w in (1, 2, 3)}


@pytest.fixture(scope="session")
def ds_potentials(ds_profiles):
    return {w: ReducedPotential.from_profile(ds_profiles[w]) for w in (1, 2)}


@pytest.fixture(scope="session")
def rn_params():
    return BlackHoleParams(5.0, 3.0, 0.0)


@pytest.fixture(scope="session")
def rn_field():
    return FieldParams(0.1, 1.0)


@pytest.fixture(scope="session")
def rn_map(rn_params):
    return build_rw_map(rn_params)


@pytest.fixture(scope="session")
def rn_profiles(rn_map, rn_field):
    return {w: potential_profile(rn_map, rn_field, w) for w in (1, 2, 3)}


@pytest.fixture(scope="session")
def marchenko_kernels(ds_potentials):
    """Reflection tables and Fourier kernels for weights 1 and 2."""
    start = time.perf_counter()
    out = {}
    for w, pot in ds_potentials.items():
        table = reflection_table(pot, D_ALPHA, N_FFT, XI_CUT, h=MARCHENKO_H)
        out[w] = fourier_kernels(table, D_ALPHA)
    TIMINGS["marchenko_kernels"] = time.perf_counter() - start
    return out


@pytest.fixture(scope="session")
def marchenko_grid(ds_potentials):
    lo = min(p.x_min for p in ds_potentials.values())
    hi = max(p.x_max for p in ds_potentials.values())
    return np.arange(np.ceil(lo / X_STEP) * X_STEP, hi, X_STEP)


@pytest.fixture(scope="session")
def marchenko_solutions(marchenko_kernels, marchenko_grid):
    start = time.perf_counter()
    out = {w: solve_marchenko_grid(k, marchenko_grid) for w, k in marchenko_kernels.items()}
    TIMINGS["marchenko_solutions"] = time.perf_counter() - start
    return out


@pytest.fixture(scope="session")
def marchenko_k(marchenko_solutions):
    return {w: recover_k(s) for w, s in marchenko_solutions.items()}


@pytest.fixture(scope="session")
def high_energy_report(ds_params, ds_field):
    start = time.perf_counter()
    rep = high_energy_recovery(ds_params, ds_field, (1, 2))
    TIMINGS["high_energy_report"] = time.perf_counter() - start
    return rep
