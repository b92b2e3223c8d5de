"""Physics-to-parameters pipeline for cavity cooling of a nuclear-magnon mode.

Derives the effective master-equation parameters (mode frequency, collective
opto-nuclear quadrupolar coupling, relaxation rates, thermal occupation) from
hardware-level inputs: nuclear species, lattice, exchange strength, pump field,
and cavity properties.

Unit convention: every frequency, rate, and energy-over-hbar is an angular
rate in rad/s.  Quantities quoted in Hz-family units are 2*pi*value here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import BOHR_RADIUS, E_CHARGE, EPS0, HBAR, K_B

LATTICES = ("simple_cubic", "fcc")

# coordination numbers
_Z_C = {"simple_cubic": 6, "fcc": 12}

# four-magnon scattering prefactor (pi/2) * (3/(4 pi))^(4/3)
FOUR_MAGNON_PREFACTOR = (math.pi / 2.0) * (3.0 / (4.0 * math.pi)) ** (4.0 / 3.0)

_ELECTRON_SPIN_DEGENERACY = 2.0


class ResonanceError(ValueError):
    """A sum-over-states denominator fell within tolerance of zero."""


def _require_positive(name: str, value: float) -> None:
    if value is None or not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


def _check_spin(spin_I: float) -> None:
    if spin_I < 0.5 or abs(2 * spin_I - round(2 * spin_I)) > 1e-9:
        raise ValueError(f"spin_I must be a half-integer >= 1/2, got {spin_I}")


@dataclass(frozen=True)
class PhysicalConfig:
    """Hardware-level inputs.

    Required: the spin-lattice block (gamma_n .. lattice_const).  The pump /
    cavity / bath block may be left None when only the dispersion is needed;
    derivations that need a missing field raise with its name.
    """

    gamma_n: float          # nuclear gyromagnetic ratio, rad/s/T
    B_field: float          # static field, T
    J_exchange: float       # nearest-neighbor exchange J, rad/s
    spin_I: float           # nuclear spin quantum number
    lattice: str            # "simple_cubic" or "fcc"
    lattice_const: float    # m
    rho_n: float | None = None        # nuclear number density, m^-3
    g_onq: float | None = None        # ONQ response, rad/s per (V/m)^2
    E_pump: float | None = None       # pump field amplitude, V/m
    omega_h: float | None = None      # cavity photon frequency, rad/s
    Q_h: float | None = None          # cavity quality factor
    temperature: float | None = None  # bath temperature, K
    N_spins: float | None = None      # spin count (optional; density used otherwise)
    V_h: float | None = None          # cavity mode volume, m^3 (optional)

    def __post_init__(self) -> None:
        _require_positive("gamma_n", self.gamma_n)
        _require_positive("B_field", self.B_field)
        _require_positive("J_exchange", self.J_exchange)
        _check_spin(self.spin_I)
        if self.lattice not in LATTICES:
            raise ValueError(f"lattice must be one of {LATTICES}, got {self.lattice!r}")
        _require_positive("lattice_const", self.lattice_const)
        for name in ("rho_n", "g_onq", "E_pump", "omega_h", "Q_h", "N_spins", "V_h"):
            v = getattr(self, name)
            if v is not None:
                _require_positive(name, v)
        if self.temperature is not None and self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")

    def _need(self, name: str) -> float:
        v = getattr(self, name)
        if v is None:
            raise ValueError(f"PhysicalConfig.{name} is required for this derivation")
        return v

    def spin_density(self) -> float:
        """N/V_h when both are given, else the bulk density rho_n."""
        if self.N_spins is not None and self.V_h is not None:
            return self.N_spins / self.V_h
        return self._need("rho_n")


@dataclass(frozen=True)
class EffectiveParams:
    """Two-mode master-equation parameters (all angular rates)."""

    omega_0: float    # magnon frequency, rad/s
    detuning: float   # cavity detuning from the anti-Stokes sideband, rad/s
    G_h: float        # collective coupling, rad/s
    kappa_0: float    # magnon relaxation rate, rad/s
    kappa_h: float    # photon dissipation rate, rad/s
    n_th: float       # thermal magnon occupation

    def __post_init__(self) -> None:
        for name in ("G_h", "kappa_0", "kappa_h", "n_th"):
            v = getattr(self, name)
            if v < 0:
                raise ValueError(f"{name} must be >= 0, got {v}")


def _neighbor_vectors(lattice: str, a: float) -> np.ndarray:
    if lattice == "simple_cubic":
        vecs = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
        return a * np.array(vecs, dtype=float)
    # fcc: 12 nearest neighbors at (a/2)(+-1, +-1, 0) and permutations
    vecs = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        for si in (1, -1):
            for sj in (1, -1):
                v = [0.0, 0.0, 0.0]
                v[i], v[j] = si, sj
                vecs.append(v)
    return 0.5 * a * np.array(vecs, dtype=float)


def magnon_dispersion(k, cfg: PhysicalConfig):
    """Narrow-band magnon dispersion, omega(k) = gamma_n*B + J*I*(z_c - Z(k)).

    Z(k) = sum over nearest-neighbor vectors delta of cos(k . delta); at the
    zone center Z = z_c so omega(0) = gamma_n*B exactly.  Accepts a single
    wavevector (3,) or a batch (N, 3) in rad/m.
    """
    kv = np.asarray(k, dtype=float)
    single = kv.ndim == 1
    kv = np.atleast_2d(kv)
    if kv.shape[1] != 3:
        raise ValueError(f"wavevectors must have 3 components, got shape {kv.shape}")
    delta = _neighbor_vectors(cfg.lattice, cfg.lattice_const)
    z_c = _Z_C[cfg.lattice]
    Z = np.cos(kv @ delta.T).sum(axis=1)
    omega = cfg.gamma_n * cfg.B_field + cfg.J_exchange * cfg.spin_I * (z_c - Z)
    return float(omega[0]) if single else omega


def four_magnon_rate(cfg: PhysicalConfig, n_0: float) -> float:
    """Magnon relaxation from four-magnon scattering.

    kappa_0 = (pi/2)(3/4pi)^(4/3) * (J/I) * n_0 (n_0 + 1); vanishes with the
    mode occupation, so it is evaluated at a fixed reference occupation and
    then frozen for a run.
    """
    if n_0 < 0:
        raise ValueError(f"n_0 must be >= 0, got {n_0}")
    return FOUR_MAGNON_PREFACTOR * (cfg.J_exchange / cfg.spin_I) * n_0 * (n_0 + 1.0)


def thermal_occupation(omega_0: float, temperature: float) -> float:
    """Bose-Einstein occupation 1/(exp(hbar w / kB T) - 1); 0 at T = 0."""
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        return 0.0
    if omega_0 <= 0:
        raise ValueError(f"omega_0 must be positive for a finite Bose factor, got {omega_0}")
    x = HBAR * omega_0 / (K_B * temperature)
    if x > 700:  # exp overflow guard; occupation is zero to double precision anyway
        return 0.0
    return 1.0 / math.expm1(x)


def zero_point_field(omega_h: float, V_h: float) -> float:
    """Vacuum field amplitude of the cavity mode, sqrt(hbar w_h / (2 eps0 V_h)) [V/m]."""
    _require_positive("omega_h", omega_h)
    _require_positive("V_h", V_h)
    return math.sqrt(HBAR * omega_h / (2.0 * EPS0 * V_h))


def collective_coupling(cfg: PhysicalConfig) -> float:
    """Collective coupling G_h = g * sqrt(N) * E_pump * E_zpf.

    sqrt(N) * E_zpf depends on N and V_h only through N/V_h, so when the mode
    volume is unspecified the bulk density stands in: G_h =
    g * E_pump * sqrt(hbar w_h rho_n / (2 eps0)).
    """
    g = cfg._need("g_onq")
    e_p = cfg._need("E_pump")
    w_h = cfg._need("omega_h")
    if cfg.N_spins is not None and cfg.V_h is not None:
        return g * e_p * math.sqrt(cfg.N_spins) * zero_point_field(w_h, cfg.V_h)
    return g * e_p * math.sqrt(HBAR * w_h * cfg.spin_density() / (2.0 * EPS0))


def onq_estimate(spin_I: float, q: float, E_g: float, omega_p: float) -> float:
    """Order-of-magnitude ONQ response for a gapped material.

    Keeps the dominant virtual transition at the gap, with position matrix
    elements ~ a_Bohr and EFG matrix elements ~ e/(4 pi eps0 a_Bohr^3):

        D ~ [g_S / (2I(2I-1))] * e^4 q / (4 pi eps0 a_Bohr) / (hbar^3 E_g (E_g - w_p))

    E_g and omega_p are angular rates (E/hbar); the hbar^3 carries the
    conversion so D comes out in rad/s per (V/m)^2.  Requires omega_p < E_g
    (sub-gap pumping; the resonant regime is rejected).
    """
    _check_spin(spin_I)
    if spin_I == 0.5:
        raise ValueError("quadrupolar response needs I >= 1 (I = 1/2 has no quadrupole moment)")
    _require_positive("q", q)
    _require_positive("E_g", E_g)
    if omega_p >= E_g:
        raise ValueError(
            f"omega_p must stay below the gap to avoid resonant one-photon "
            f"absorption (omega_p = {omega_p:.4g}, E_g = {E_g:.4g})"
        )
    pref = _ELECTRON_SPIN_DEGENERACY / (2.0 * spin_I * (2.0 * spin_I - 1.0))
    return (
        pref
        * E_CHARGE**4
        * q
        / (4.0 * math.pi * EPS0 * BOHR_RADIUS)
        / (HBAR**3 * E_g * (E_g - omega_p))
    )


@dataclass(frozen=True)
class ElectronicToyModel:
    """Few-level electronic structure for the sum-over-states ONQ response.

    energies: (n,) state energies as angular rates (E/hbar).
    occupations: (n,) occupation factors in [0, 1].
    position: (3, n, n) position matrix elements [r_i]_mn in meters.
    efg: (3, 3, n, n) EFG matrix elements [V_ij]_mn in V/m^2.
    q: nuclear quadrupole moment, m^2.  spin_I: nuclear spin.
    """

    energies: np.ndarray
    occupations: np.ndarray
    position: np.ndarray
    efg: np.ndarray
    q: float
    spin_I: float

    def __post_init__(self) -> None:
        n = len(self.energies)
        if self.occupations.shape != (n,):
            raise ValueError("occupations must match the number of states")
        if self.position.shape != (3, n, n):
            raise ValueError(f"position must have shape (3, {n}, {n})")
        if self.efg.shape != (3, 3, n, n):
            raise ValueError(f"efg must have shape (3, 3, {n}, {n})")
        if np.any(self.occupations < -1e-12) or np.any(self.occupations > 1 + 1e-12):
            raise ValueError("occupations must lie in [0, 1]")
        for i in range(3):
            if np.max(np.abs(self.position[i] - self.position[i].conj().T)) > 1e-12 * max(
                1.0, np.max(np.abs(self.position[i]))
            ):
                raise ValueError(f"position block r_{i} is not hermitian")
            for j in range(3):
                blk = self.efg[i, j]
                if np.max(np.abs(blk - blk.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(blk))):
                    raise ValueError(f"EFG block V_{i}{j} is not hermitian")
        _check_spin(self.spin_I)
        if self.spin_I == 0.5:
            raise ValueError("quadrupolar response needs I >= 1")

    @property
    def n_states(self) -> int:
        return len(self.energies)


def onq_sum_over_states(
    model: ElectronicToyModel,
    omega_p: float,
    omega_q: float,
    i: int,
    j: int,
    p: int,
    q: int,
    denom_tol: float = 1e-6,
) -> complex:
    """Second-order quadrupolar response D_ij^pq(w_p - w_q; w_p, -w_q).

    Full triple sum over electronic states (m, n, l):

        D = e^3 q_mom / (2I(2I-1) hbar^3) * sum_mnl  V_ij[m,n] / (w_mn - (w_p - w_q))
              * { f_lm r_p[n,l] r_q[l,m] / (w_ml - w_p)
                - f_nl r_q[n,l] r_p[l,m] / (w_ln - w_p) }
            + (field exchange)

    where w_mn = w_m - w_n, f_lm = f_l - f_m, and the field-exchange term is
    the same sum with r_p <-> r_q and w_p -> -w_q (the two fields enter with
    frequencies w_p and -w_q, so exchanging them swaps both the Cartesian
    label and the signed frequency; the w_p - w_q combination is invariant).

    Terms whose numerator is exactly zero are skipped before the resonance
    check; any surviving denominator within denom_tol of the smallest nonzero
    level spacing raises ResonanceError naming the (m, n, l) triple.
    """
    n_states = model.n_states
    if n_states == 0:
        return complex(0.0)
    w = np.asarray(model.energies, dtype=float)
    f = np.asarray(model.occupations, dtype=float)
    V = model.efg[i, j]
    R = (model.position[p], model.position[q])

    gaps = np.abs(w[:, None] - w[None, :])
    nz = gaps[gaps > 0]
    # absolute fallback for fully degenerate toy spectra
    guard = denom_tol * (float(nz.min()) if nz.size else 1.0)

    def _den(value: float, m: int, n: int, l: int) -> float:
        if abs(value) <= guard:
            raise ResonanceError(
                f"near-resonant denominator {value:.6g} rad/s at states "
                f"(m={m}, n={n}, l={l}); move the drive frequencies off resonance"
            )
        return value

    total = 0.0 + 0.0j
    # the two symmetrized field orderings: (r_first, r_second, signed frequency)
    orderings = ((R[0], R[1], omega_p), (R[1], R[0], -omega_q))
    for m in range(n_states):
        for n in range(n_states):
            v_mn = V[m, n]
            if v_mn == 0:
                continue
            den0 = (w[m] - w[n]) - (omega_p - omega_q)
            for l in range(n_states):
                for r_a, r_b, w_field in orderings:
                    num1 = (f[l] - f[m]) * r_a[n, l] * r_b[l, m]
                    num2 = (f[n] - f[l]) * r_b[n, l] * r_a[l, m]
                    if num1 == 0 and num2 == 0:
                        continue
                    bracket = 0.0 + 0.0j
                    if num1 != 0:
                        bracket += num1 / _den((w[m] - w[l]) - w_field, m, n, l)
                    if num2 != 0:
                        bracket -= num2 / _den((w[l] - w[n]) - w_field, m, n, l)
                    total += v_mn * bracket / _den(den0, m, n, l)

    pref = E_CHARGE**3 * model.q / (2.0 * model.spin_I * (2.0 * model.spin_I - 1.0) * HBAR**3)
    return complex(pref * total)


def derive_effective_params(cfg: PhysicalConfig, n_0_ref: float | None = None) -> EffectiveParams:
    """Assemble the effective two-mode parameters from hardware inputs.

    omega_0 = gamma_n * B; kappa_h = omega_h / Q_h; n_th from the Bose factor
    at the bath temperature; kappa_0 from four-magnon scattering at a fixed
    reference occupation (default: n_th); G_h from the collective coupling.
    The cavity is taken resonant with the anti-Stokes sideband (detuning 0).
    """
    omega_0 = cfg.gamma_n * cfg.B_field
    kappa_h = cfg._need("omega_h") / cfg._need("Q_h")
    n_th = thermal_occupation(omega_0, cfg._need("temperature"))
    if n_0_ref is None:
        n_0_ref = n_th
    kappa_0 = four_magnon_rate(cfg, n_0_ref)
    G_h = collective_coupling(cfg)
    return EffectiveParams(
        omega_0=omega_0,
        detuning=0.0,
        G_h=G_h,
        kappa_0=kappa_0,
        kappa_h=kappa_h,
        n_th=n_th,
    )
