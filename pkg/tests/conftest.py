"""Shared fixtures: the expensive solves are session-scoped so the module
tests and the acceptance battery reuse the same states."""

import pytest

from nmcool.constants import TWO_PI
from nmcool.hilbert import make_space, mode_population
from nmcool.liouvillian import build_generator, steady_state
from nmcool.magnonics import EffectiveParams
from nmcool.protocols import default_qswitch_schedule, run_cooling, run_q_switched

KHZ = TWO_PI * 1e3

# baseline bath: n_th = 1, kappa_0/2pi = 0.1 kHz, kappa_h/2pi = 1 MHz
K0 = 0.1 * KHZ
KH = 1000.0 * KHZ


def params(n_th=1.0, kappa_0=K0, kappa_h=KH, G_h=10 * KHZ, omega_0=0.0, detuning=0.0):
    return EffectiveParams(
        omega_0=omega_0, detuning=detuning, G_h=G_h, kappa_0=kappa_0, kappa_h=kappa_h, n_th=n_th
    )


def moment_steady(n_th, k0, kh, G):
    """Exact fixed point of the first-moment equations (independent oracle)."""
    return k0 * n_th * (kh + 4 * G**2 / (k0 + kh)) / (4 * G**2 + k0 * kh)


@pytest.fixture(scope="session")
def space1212():
    return make_space(12, 12)


@pytest.fixture(scope="session")
def space126():
    return make_space(12, 6)


@pytest.fixture(scope="session")
def steady_g10(space1212):
    return steady_state(build_generator(params(G_h=10 * KHZ), space1212))


@pytest.fixture(scope="session")
def steady_g30(space1212):
    return steady_state(build_generator(params(G_h=30 * KHZ), space1212))


@pytest.fixture(scope="session")
def steady_strong(space1212):
    return steady_state(build_generator(params(G_h=1000 * KHZ), space1212))


@pytest.fixture(scope="session")
def strong_run(space1212):
    # strong-coupling transient: swaps at 2G inside the decaying envelope
    return run_cooling(params(G_h=1000 * KHZ), space1212, 4e-6, samples=801)


@pytest.fixture(scope="session")
def plateau_scan(space1212):
    """(G/kappa_h, steady n0, q-switched final n0) on a log grid across the plateau."""
    rows = []
    for ratio in (1.0, 1.8, 3.2, 5.6, 10.0):
        p = params(G_h=ratio * KH)
        n_cont = mode_population(steady_state(build_generator(p, space1212)), "magnon")
        sched = default_qswitch_schedule(p, cycles=6)
        n_sw = run_q_switched(p, space1212, sched, samples_per_cycle=40).n0_steady
        rows.append((ratio, float(n_cont), float(n_sw)))
    return rows
