"""Lindblad generator for the coupled magnon-photon pair: assembly, propagation, steady states.

The equation of motion is

    d rho / dt = i [rho, H] + kappa_h xi(b) rho
               + kappa_0 (n_th + 1) xi(a) rho + kappa_0 n_th xi(a^dag) rho,

with xi(o) rho = o rho o^dag - (o^dag o rho + rho o^dag o)/2.  The generator
is vectorized row-major, vec(A rho B) = (A kron B^T) vec(rho), into a sparse
d^2 x d^2 superoperator; propagation uses an adaptive embedded Dormand-Prince
5(4) scheme and steady states come from a sparse LU solve of the
trace-constrained null problem.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .hilbert import (
    DensityMatrix,
    FockSpace,
    OperatorMatrix,
    annihilation,
    number_diagonal,
    partial_trace,
    von_neumann_entropy,
)
from .magnonics import EffectiveParams

RTOL_DEFAULT = 1e-8
ATOL_DEFAULT = 1e-10
TRACE_DRIFT_LIMIT = 1e-6
TOP_LEVEL_THRESHOLD = 0.01  # truncation-adequacy warning level


class IntegrationError(RuntimeError):
    """Time propagation failed (step-size underflow or trace drift)."""


class SteadyStateError(RuntimeError):
    """The trace-constrained fixed-point solve failed or is not unique."""


@dataclass(frozen=True)
class RateSchedule:
    """Piecewise-constant rate: values[i] applies on [times[i], times[i+1]).

    times must start at 0 and increase strictly; the last value holds forever.
    """

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.times) != len(self.values) or not self.times:
            raise ValueError("times and values must be equal-length and nonempty")
        if self.times[0] != 0.0:
            raise ValueError("schedule must start at t = 0")
        if any(t1 <= t0 for t0, t1 in zip(self.times, self.times[1:])):
            raise ValueError("schedule times must increase strictly")
        if any(v < 0 for v in self.values):
            raise ValueError("schedule rates must be >= 0")

    def rate_at(self, t: float) -> float:
        return self.values[bisect_right(self.times, t) - 1]


@dataclass(frozen=True)
class LindbladGenerator:
    """Hamiltonian plus dissipators; dissipator 0 is the cavity loss channel.

    schedules maps a dissipator index to a RateSchedule that overrides its
    constant rate (used for Q-switched cavity loss).
    """

    space: FockSpace
    hamiltonian: OperatorMatrix
    dissipators: tuple[tuple[float, OperatorMatrix], ...]
    schedules: Mapping[int, RateSchedule] | None = None

    def __post_init__(self) -> None:
        for rate, op in self.dissipators:
            if rate < 0:
                raise ValueError(f"dissipator rates must be >= 0, got {rate}")
            if op.space != self.space:
                raise ValueError("jump operators must act on the generator's space")
        if self.schedules:
            for idx in self.schedules:
                if not 0 <= idx < len(self.dissipators):
                    raise ValueError(f"schedule index {idx} has no dissipator")

    def rates_at(self, t: float) -> tuple[float, ...]:
        rates = [rate for rate, _ in self.dissipators]
        if self.schedules:
            for idx, sched in self.schedules.items():
                rates[idx] = sched.rate_at(t)
        return tuple(rates)

    def switch_times(self, t_end: float) -> list[float]:
        """Strictly interior times where any scheduled rate changes."""
        out: set[float] = set()
        if self.schedules:
            for sched in self.schedules.values():
                out.update(t for t in sched.times[1:] if 0.0 < t < t_end)
        return sorted(out)

    def superoperator(self, rates: Sequence[float] | None = None) -> sp.csr_matrix:
        """Sparse vectorized generator (row-major convention)."""
        if rates is None:
            rates = [rate for rate, _ in self.dissipators]
        d = self.space.dim
        ident = sp.identity(d, format="csr", dtype=complex)
        H = sp.csr_matrix(self.hamiltonian.entries)
        L = -1j * (sp.kron(H, ident, format="csr") - sp.kron(ident, H.T, format="csr"))
        for rate, (_, op) in zip(rates, self.dissipators):
            if rate == 0.0:
                continue
            J = sp.csr_matrix(op.entries)
            JdJ = (J.conj().T @ J).tocsr()
            L = L + rate * (
                sp.kron(J, J.conj(), format="csr")
                - 0.5 * sp.kron(JdJ, ident, format="csr")
                - 0.5 * sp.kron(ident, JdJ.T, format="csr")
            )
        return L.tocsr()


def build_hamiltonian(params: EffectiveParams, space: FockSpace) -> OperatorMatrix:
    """Rotating-frame two-mode Hamiltonian.

    H = w0 a^dag a + (w0 + Delta) b^dag b + G_h (b^dag a + a^dag b),
    hermitian by construction.
    """
    a = annihilation(space, "magnon").entries
    b = annihilation(space, "photon").entries
    n_a = number_diagonal(space, "magnon")
    n_b = number_diagonal(space, "photon")
    mat = np.diag(params.omega_0 * n_a + (params.omega_0 + params.detuning) * n_b).astype(complex)
    coupling = params.G_h * (b.conj().T @ a)
    mat += coupling + coupling.conj().T
    return OperatorMatrix(space, mat)


def build_generator(
    params: EffectiveParams, space: FockSpace, shift_frame: bool = True
) -> LindbladGenerator:
    """Generator with the three dissipation channels (cavity thermal photons neglected).

    By default the common rotation at omega_0 is removed from the Hamiltonian
    (H -> H - w0 (n_a + n_b), leaving Delta b^dag b + G_h (b^dag a + h.c.)):
    it commutes with every jump operator and with the recorded observables, so
    it only strips a fast global phase that would otherwise dominate the step
    size.  Pass shift_frame=False for the literal frame.
    """
    H = build_hamiltonian(params, space)
    if shift_frame:
        shift = params.omega_0 * (
            number_diagonal(space, "magnon") + number_diagonal(space, "photon")
        )
        H = OperatorMatrix(space, H.entries - np.diag(shift).astype(complex))
    a = annihilation(space, "magnon")
    b = annihilation(space, "photon")
    dissipators = (
        (params.kappa_h, b),
        (params.kappa_0 * (params.n_th + 1.0), a),
        (params.kappa_0 * params.n_th, a.dag()),
    )
    return LindbladGenerator(space=space, hamiltonian=H, dissipators=dissipators)


@dataclass(frozen=True)
class TrajectoryRecord:
    """Observables sampled on the requested grid, plus the final state."""

    times: np.ndarray
    n_magnon: np.ndarray
    n_photon: np.ndarray
    entropy_magnon: np.ndarray
    trace_error: np.ndarray
    min_eig: np.ndarray
    final_state: DensityMatrix


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_DP_E = tuple(b5 - b4 for b5, b4 in zip(_DP_B5, _DP_B4))


def _advance(
    L: sp.csr_matrix,
    y: np.ndarray,
    t0: float,
    t1: float,
    h: float,
    d: int,
    rtol: float,
    atol: float,
    h_floor: float,
) -> tuple[np.ndarray, float]:
    """Integrate y' = L y from t0 to t1 exactly, re-symmetrizing each accepted step."""
    t = t0
    k = [None] * 7
    k[0] = L @ y
    while t < t1:
        h_try = min(h, t1 - t)
        if h_try < h_floor:
            raise IntegrationError(f"step size underflow at t = {t:.9g} s")
        for i in range(1, 7):
            yi = y + h_try * sum(a * k[j] for j, a in enumerate(_DP_A[i]) if a != 0.0)
            k[i] = L @ yi
        y_new = y + h_try * sum(b * k[i] for i, b in enumerate(_DP_B5) if b != 0.0)
        err = h_try * sum(e * k[i] for i, e in enumerate(_DP_E) if e != 0.0)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        enorm = math.sqrt(float(np.mean(np.abs(err / sc) ** 2)))
        if not math.isfinite(enorm):
            h = 0.2 * h_try
            continue
        if enorm <= 1.0:
            # accept: enforce hermiticity, guard the trace
            r = y_new.reshape(d, d)
            r = 0.5 * (r + r.conj().T)
            y = r.reshape(-1)
            tr_err = abs(float(np.real(np.trace(r))) - 1.0)
            if tr_err > TRACE_DRIFT_LIMIT:
                raise IntegrationError(
                    f"trace drift {tr_err:.3e} exceeds {TRACE_DRIFT_LIMIT:.0e} at t = {t + h_try:.9g} s"
                )
            t += h_try
            k[0] = L @ y  # fresh slope for the symmetrized state
            h = h_try * min(5.0, max(0.2, 0.9 * enorm ** -0.2)) if enorm > 0 else h_try * 5.0
        else:
            h = h_try * min(5.0, max(0.2, 0.9 * enorm ** -0.2))
    return y, h


def propagate(
    gen: LindbladGenerator,
    rho0: DensityMatrix,
    t_grid,
    rtol: float = RTOL_DEFAULT,
    atol: float = ATOL_DEFAULT,
) -> TrajectoryRecord:
    """Propagate rho0 over t_grid (strictly increasing from 0), recording observables.

    Piecewise-constant rate schedules are honored by stopping exactly at each
    switch time and rebuilding the superoperator for the next segment.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1 or t_grid[0] != 0.0:
        raise ValueError("t_grid must be a 1-d grid starting at 0")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must increase strictly")
    rho0.validate()

    space = gen.space
    d = space.dim
    t_end = float(t_grid[-1])
    tiny = 1e-12 * max(t_end, 1e-300)
    h_floor = 1e-18 * max(t_end, 1.0)

    n_a = number_diagonal(space, "magnon")
    n_b = number_diagonal(space, "photon")

    n_rec = len(t_grid)
    out_na = np.empty(n_rec)
    out_nb = np.empty(n_rec)
    out_S = np.empty(n_rec)
    out_tr = np.empty(n_rec)
    out_me = np.empty(n_rec)

    def record(idx: int, y: np.ndarray) -> None:
        r = y.reshape(d, d)
        pops = np.real(np.diag(r))
        out_na[idx] = float(n_a @ pops)
        out_nb[idx] = float(n_b @ pops)
        state = DensityMatrix(space, r)
        out_S[idx] = von_neumann_entropy(partial_trace(state, "magnon"))
        out_tr[idx] = abs(float(pops.sum()) - 1.0)
        out_me[idx] = float(np.linalg.eigvalsh(r)[0])

    # targets: grid points to record, split at schedule switch times
    switches = gen.switch_times(t_end)
    targets: list[tuple[float, int | None]] = []  # (time, record index or None)
    si = 0
    for gi in range(1, n_rec):
        tg = float(t_grid[gi])
        while si < len(switches) and switches[si] < tg - tiny:
            targets.append((switches[si], None))
            si += 1
        if si < len(switches) and abs(switches[si] - tg) <= tiny:
            si += 1  # switch coincides with a grid point
        targets.append((tg, gi))

    y = rho0.entries.astype(complex).reshape(-1).copy()
    record(0, y)

    t = 0.0
    rates = gen.rates_at(0.0)
    cache: dict[tuple[float, ...], sp.csr_matrix] = {rates: gen.superoperator(rates)}
    L = cache[rates]

    # conservative first step from the local slope
    d1 = float(np.linalg.norm(L @ y))
    h = min(t_end, 0.01 * float(np.linalg.norm(y)) / d1) if d1 > 0 else t_end

    for tt, rec_idx in targets:
        if tt - t > tiny:
            y, h = _advance(L, y, t, tt, h, d, rtol, atol, h_floor)
        t = tt
        if rec_idx is not None:
            record(rec_idx, y)
        new_rates = gen.rates_at(t)
        if new_rates != rates:
            rates = new_rates
            if rates not in cache:
                cache[rates] = gen.superoperator(rates)
            L = cache[rates]

    final = DensityMatrix(space, y.reshape(d, d))
    return TrajectoryRecord(
        times=t_grid.copy(),
        n_magnon=out_na,
        n_photon=out_nb,
        entropy_magnon=out_S,
        trace_error=out_tr,
        min_eig=out_me,
        final_state=final,
    )


def _constrained_solve(L, d: int, w: float, row: int) -> np.ndarray:
    """Solve L x = 0 with row `row` replaced by the scaled trace functional."""
    A = L.tolil(copy=True)
    tr_row = np.zeros(d * d)
    tr_row[:: d + 1] = w
    A[row, :] = tr_row
    rhs = np.zeros(d * d, dtype=complex)
    rhs[row] = w
    return spla.splu(A.tocsc()).solve(rhs)


def steady_state(gen: LindbladGenerator, check_unique: bool = True) -> DensityMatrix:
    """Unique fixed point of the generator, via the trace-constrained sparse solve.

    One row of the vectorized generator is replaced by the (scaled) trace
    functional and the resulting system solved by sparse LU; the solution is
    re-hermitized and validated.  Requires time-independent rates with at
    least one strictly positive channel.

    Uniqueness check: the left null vector of any trace-preserving generator
    is the trace functional itself, so every diagonal-position row of L is
    redundant and may host the constraint.  If the fixed point is unique both
    placements give the same solution; on a degenerate manifold the two
    singular systems generically land on different fixed points, which is the
    tell.  (LU does not reliably flag the singularity itself.)
    """
    if gen.schedules:
        raise ValueError("steady_state requires time-independent rates (no schedules)")
    if not any(rate > 0 for rate, _ in gen.dissipators):
        raise ValueError("steady_state needs at least one strictly positive dissipation rate")
    d = gen.space.dim
    L = gen.superoperator()
    w = float(abs(L).max()) or 1.0
    try:
        x = _constrained_solve(L, d, w, 0)
        x_alt = _constrained_solve(L, d, w, d * d - 1) if check_unique else x
    except RuntimeError as exc:
        raise SteadyStateError(
            f"steady state is not unique (degenerate fixed-point manifold): {exc}"
        ) from exc
    if check_unique and float(np.max(np.abs(x - x_alt))) > 1e-6:
        raise SteadyStateError(
            "steady state is not unique (degenerate fixed-point manifold): "
            "constraint placement changes the solution"
        )
    residual = float(np.max(np.abs(L @ x)))
    if residual > 1e-8 * w:
        raise SteadyStateError(
            f"constrained solve left residual {residual:.3e} (generator scale {w:.3e}); "
            "the steady state is ill-determined"
        )
    rho = x.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    state = DensityMatrix(gen.space, rho)
    state.validate()  # StateValidationError carries the violated invariant
    return state


@dataclass(frozen=True)
class StateDiagnostics:
    herm_defect: float
    trace_defect: float
    min_eigenvalue: float
    top_level_occupation: dict[str, float]
    truncation_warning: bool
    ok: bool


def validate_state(
    rho: DensityMatrix, top_level_threshold: float = TOP_LEVEL_THRESHOLD
) -> StateDiagnostics:
    """Non-raising diagnostics: invariant defects plus truncation adequacy."""
    from .hilbert import HERM_TOL, MIN_EIG_TOL, TRACE_TOL

    m = rho.entries
    herm = float(np.max(np.abs(m - m.conj().T)))
    tr = float(abs(np.trace(m) - 1.0))
    lam_min = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
    pops = np.real(np.diag(m))
    top: dict[str, float] = {}
    if rho.space is None:
        top["mode"] = float(pops[-1])
    else:
        for mode in ("magnon", "photon"):
            nd = number_diagonal(rho.space, mode)
            top[mode] = float(pops[nd == nd.max()].sum())
    warn = any(v > top_level_threshold for v in top.values())
    ok = herm <= HERM_TOL and tr <= TRACE_TOL and lam_min >= MIN_EIG_TOL
    return StateDiagnostics(
        herm_defect=herm,
        trace_defect=tr,
        min_eigenvalue=lam_min,
        top_level_occupation=top,
        truncation_warning=warn,
        ok=ok,
    )
