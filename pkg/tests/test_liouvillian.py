import dataclasses
import math

import numpy as np
import pytest

from nmcool.constants import TWO_PI
from nmcool.hilbert import (
    DensityMatrix,
    OperatorMatrix,
    annihilation,
    fock_state,
    make_space,
    mode_population,
    thermal_state,
)
from nmcool.liouvillian import (
    IntegrationError,
    LindbladGenerator,
    RateSchedule,
    SteadyStateError,
    build_generator,
    build_hamiltonian,
    propagate,
    steady_state,
    validate_state,
)
from nmcool.magnonics import EffectiveParams

from conftest import moment_steady, params


def rng_state(space, seed=7):
    """Random full-rank density matrix for oracle checks."""
    rng = np.random.default_rng(seed)
    d = space.dim
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = m @ m.conj().T
    return DensityMatrix(space, rho / np.trace(rho))


# ------------------------------------------------------------- hamiltonian


def test_hamiltonian_matrix_elements():
    sp = make_space(3, 2)
    p = EffectiveParams(omega_0=5.0, detuning=0.7, G_h=2.0, kappa_0=0, kappa_h=0, n_th=0)
    H = build_hamiltonian(p, sp).entries
    assert np.allclose(H, H.conj().T)
    # |1,1> diagonal: w0 * 1 + (w0 + Delta) * 1
    idx_11 = 1 * 2 + 1
    assert H[idx_11, idx_11] == pytest.approx(5.0 + 5.7)
    # coupling <0,1|H|1,0> = G sqrt(1*1)
    idx_01, idx_10 = 0 * 2 + 1, 1 * 2 + 0
    assert H[idx_01, idx_10] == pytest.approx(2.0)
    # <1,1|H|2,0> = G sqrt(2)
    idx_20 = 2 * 2 + 0
    assert H[idx_11, idx_20] == pytest.approx(2.0 * math.sqrt(2))


def test_generator_frame_shift_preserves_coupling():
    sp = make_space(4, 4)
    p = params(G_h=3 * TWO_PI * 1e3, omega_0=TWO_PI * 1e7)
    lit = build_hamiltonian(p, sp).entries
    gen = build_generator(p, sp)  # shifted frame by default
    gen_lit = build_generator(p, sp, shift_frame=False)
    assert np.allclose(gen_lit.hamiltonian.entries, lit)
    # shift acts on the diagonal only
    off = ~np.eye(16, dtype=bool)
    assert np.allclose(gen.hamiltonian.entries[off], lit[off])
    assert gen.hamiltonian.entries[0, 0] == 0.0


def test_generator_dissipator_rates():
    sp = make_space(3, 3)
    p = params(n_th=0.5, kappa_0=10.0, kappa_h=100.0, G_h=1.0)
    gen = build_generator(p, sp)
    rates = [r for r, _ in gen.dissipators]
    assert rates == [100.0, 15.0, 5.0]  # cavity, a-down, a-up


def test_superoperator_matches_dense_lindblad_action():
    # the vectorized generator against a direct matrix-product evaluation
    sp = make_space(3, 2)
    p = EffectiveParams(omega_0=1.3, detuning=0.4, G_h=0.9, kappa_0=0.31, kappa_h=1.7, n_th=0.6)
    gen = build_generator(p, sp, shift_frame=False)
    rho = rng_state(sp).entries
    H = gen.hamiltonian.entries
    expected = -1j * (H @ rho - rho @ H)
    for rate, op in gen.dissipators:
        L = op.entries
        LdL = L.conj().T @ L
        expected += rate * (L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL))
    got = (gen.superoperator() @ rho.reshape(-1)).reshape(sp.dim, sp.dim)
    assert np.allclose(got, expected, atol=1e-12)


# --------------------------------------------------------------- propagate


def test_free_decay_is_exponential():
    sp = make_space(12, 2)
    kappa = 2.0
    p = EffectiveParams(omega_0=0, detuning=0, G_h=0, kappa_0=kappa, kappa_h=0, n_th=0)
    gen = build_generator(p, sp)
    t = np.linspace(0, 2.0, 9)
    rec = propagate(gen, thermal_state(sp, 2.0, 0.0), t)
    n0 = rec.n_magnon[0]
    assert np.allclose(rec.n_magnon, n0 * np.exp(-kappa * t), rtol=1e-6)
    assert np.all(rec.trace_error < 1e-9)


def test_relaxation_to_thermal_occupation():
    sp = make_space(12, 2)
    p = EffectiveParams(omega_0=0, detuning=0, G_h=0, kappa_0=1.0, kappa_h=0, n_th=0.5)
    rec = propagate(build_generator(p, sp), thermal_state(sp, 0.0, 0.0), np.linspace(0, 20, 5))
    assert rec.n_magnon[-1] == pytest.approx(0.5, abs=1e-4)


def test_closed_system_rabi_swap():
    sp = make_space(3, 3)
    G = TWO_PI * 1e5
    p = EffectiveParams(omega_0=0, detuning=0, G_h=G, kappa_0=0, kappa_h=0, n_th=0)
    gen = build_generator(p, sp)
    quarter, half = math.pi / (4 * G), math.pi / (2 * G)
    rec = propagate(gen, fock_state(sp, 1, 0), np.array([0.0, quarter, half]))
    assert rec.n_magnon[0] == pytest.approx(1.0)
    assert rec.n_magnon[1] == pytest.approx(0.5, abs=1e-7)
    assert rec.n_magnon[2] == pytest.approx(0.0, abs=1e-7)
    assert rec.n_photon[2] == pytest.approx(1.0, abs=1e-7)


def test_propagate_grid_validation():
    sp = make_space(3, 3)
    gen = build_generator(params(), sp)
    rho = thermal_state(sp, 0.0, 0.0)
    with pytest.raises(ValueError):
        propagate(gen, rho, np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        propagate(gen, rho, np.array([0.0, 0.2, 0.2]))


def test_trace_drift_raises():
    # a non-hermitian generator leaks trace; the integrator must notice
    sp = make_space(3, 2)
    bad = np.zeros((6, 6), dtype=complex)
    bad[0, 1] = 1e6
    gen = LindbladGenerator(
        space=sp,
        hamiltonian=OperatorMatrix(sp, bad),
        dissipators=((1.0, annihilation(sp, "magnon")),),
    )
    with pytest.raises(IntegrationError, match="trace"):
        propagate(gen, thermal_state(sp, 1.0, 0.5), np.linspace(0, 1e-3, 3))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")  # inf rate -> nan error norms, on purpose
def test_step_underflow_raises():
    sp = make_space(3, 2)
    gen = LindbladGenerator(
        space=sp,
        hamiltonian=OperatorMatrix(sp, np.zeros((6, 6), dtype=complex)),
        dissipators=((float("inf"), annihilation(sp, "magnon")),),
    )
    with pytest.raises(IntegrationError, match="step size"):
        propagate(gen, thermal_state(sp, 1.0, 0.0), np.linspace(0, 1.0, 3))


# --------------------------------------------------------------- schedules


def test_rate_schedule_lookup():
    s = RateSchedule(times=(0.0, 1.0, 2.0), values=(5.0, 0.5, 7.0))
    assert s.rate_at(0.0) == 5.0
    assert s.rate_at(0.999) == 5.0
    assert s.rate_at(1.0) == 0.5  # right-continuous at the switch
    assert s.rate_at(10.0) == 7.0


def test_rate_schedule_validation():
    with pytest.raises(ValueError):
        RateSchedule(times=(0.5, 1.0), values=(1.0, 2.0))
    with pytest.raises(ValueError):
        RateSchedule(times=(0.0, 1.0), values=(1.0, -2.0))
    with pytest.raises(ValueError):
        RateSchedule(times=(0.0, 1.0, 1.0), values=(1.0, 2.0, 3.0))


def test_scheduled_propagation_matches_manual_stitching():
    sp = make_space(6, 6)
    p = params(G_h=TWO_PI * 2e5, kappa_0=0.0, kappa_h=TWO_PI * 1e5, n_th=1.0)
    t_switch, t_end = 2e-6, 4e-6
    k_lo, k_hi = TWO_PI * 1e4, TWO_PI * 1e6

    gen = build_generator(p, sp)
    sched = dataclasses.replace(
        gen, schedules={0: RateSchedule(times=(0.0, t_switch), values=(k_lo, k_hi))}
    )
    rec = propagate(sched, thermal_state(sp, 1.0, 0.0), np.array([0.0, t_end]))

    gen_lo = build_generator(dataclasses.replace(p, kappa_h=k_lo), sp)
    gen_hi = build_generator(dataclasses.replace(p, kappa_h=k_hi), sp)
    leg1 = propagate(gen_lo, thermal_state(sp, 1.0, 0.0), np.array([0.0, t_switch]))
    leg2 = propagate(gen_hi, leg1.final_state, np.array([0.0, t_end - t_switch]))

    assert rec.n_magnon[-1] == pytest.approx(leg2.n_magnon[-1], abs=1e-9)
    assert np.allclose(rec.final_state.entries, leg2.final_state.entries, atol=1e-9)


def test_switch_times_interior_only():
    sp = make_space(3, 3)
    gen = build_generator(params(), sp)
    sched = dataclasses.replace(
        gen, schedules={0: RateSchedule(times=(0.0, 1.0, 2.0, 5.0), values=(1, 2, 3, 4))}
    )
    assert sched.switch_times(2.5) == [1.0, 2.0]


# ------------------------------------------------------------ steady state


def test_steady_state_matches_moment_equations():
    sp = make_space(12, 6)
    k0, kh, G = TWO_PI * 1e3, TWO_PI * 1e5, TWO_PI * 1e4
    rho = steady_state(build_generator(params(kappa_0=k0, kappa_h=kh, G_h=G), sp))
    n = mode_population(rho, "magnon")
    assert n == pytest.approx(moment_steady(1.0, k0, kh, G), rel=5e-3)
    assert mode_population(rho, "photon") < n  # photons leak out much faster


def test_steady_state_no_dissipation_rejected():
    sp = make_space(4, 4)
    p = EffectiveParams(omega_0=0, detuning=0, G_h=1.0, kappa_0=0, kappa_h=0, n_th=0)
    with pytest.raises(ValueError, match="dissipation"):
        steady_state(build_generator(p, sp))


def test_steady_state_degenerate_manifold_detected():
    # photon sector untouched (G = 0, kappa_h = 0): a continuum of fixed points
    sp = make_space(6, 4)
    p = EffectiveParams(omega_0=0, detuning=0, G_h=0, kappa_0=10.0, kappa_h=0, n_th=1.0)
    with pytest.raises(SteadyStateError, match="not unique"):
        steady_state(build_generator(p, sp))


def test_steady_state_rejects_schedules():
    sp = make_space(3, 3)
    gen = dataclasses.replace(
        build_generator(params(), sp),
        schedules={0: RateSchedule(times=(0.0,), values=(1.0,))},
    )
    with pytest.raises(ValueError, match="schedules"):
        steady_state(gen)


def test_steady_state_unique_check_optional(space126, steady_g10):
    sp = make_space(12, 6)
    gen = build_generator(params(), sp)
    fast = steady_state(gen, check_unique=False)
    slow = steady_state(gen)
    assert np.allclose(fast.entries, slow.entries, atol=1e-12)


# ------------------------------------------------------------- diagnostics


def test_validate_state_happy_path():
    sp = make_space(8, 8)
    diag = validate_state(thermal_state(sp, 0.5, 0.2))
    assert diag.ok
    assert not diag.truncation_warning
    assert diag.trace_defect < 1e-12


def test_validate_state_flags_truncation():
    sp = make_space(4, 4)
    diag = validate_state(fock_state(sp, 3, 0))  # top magnon level fully occupied
    assert diag.truncation_warning
    assert diag.top_level_occupation["magnon"] == pytest.approx(1.0)
    assert diag.top_level_occupation["photon"] == pytest.approx(0.0, abs=1e-14)


def test_validate_state_reports_defects():
    sp = make_space(3, 3)
    diag = validate_state(DensityMatrix(sp, np.eye(9, dtype=complex) / 3))
    assert not diag.ok
    assert diag.trace_defect == pytest.approx(2.0)
