"""Truncated two-mode bosonic operator algebra.

The joint Hilbert space is magnon (a) tensor photon (b), both truncated, with
magnon-major ordering: joint index = i_magnon * dim_photon + i_photon.  All
operators and states here are dense numpy arrays -- joint dimensions stay in
the hundreds, where dense algebra is both faster and simpler than sparse.

States and operators are treated as immutable after construction (nothing in
the package mutates them in place), so they can be shared freely across
concurrent sweep workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MODES = ("magnon", "photon")

# density-matrix validation tolerances
HERM_TOL = 1e-10
TRACE_TOL = 1e-10
MIN_EIG_TOL = -1e-8

# eigenvalues below this are treated as exact zeros in entropies
ENTROPY_CLAMP = 1e-14


class StateValidationError(ValueError):
    """A matrix violated a density-matrix invariant (hermiticity, trace, or positivity)."""


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


@dataclass(frozen=True)
class FockSpace:
    """Joint truncation of the (magnon, photon) Fock space, magnon-major ordering."""

    dim_magnon: int
    dim_photon: int

    def __post_init__(self) -> None:
        if self.dim_magnon < 2 or self.dim_photon < 2:
            raise ValueError(
                f"Fock truncations must be >= 2 per mode, got "
                f"({self.dim_magnon}, {self.dim_photon})"
            )

    @property
    def dim(self) -> int:
        return self.dim_magnon * self.dim_photon

    def mode_dim(self, mode: str) -> int:
        _check_mode(mode)
        return self.dim_magnon if mode == "magnon" else self.dim_photon


def make_space(dim_magnon: int, dim_photon: int) -> FockSpace:
    """Build a FockSpace; rejects truncations below 2 levels per mode."""
    return FockSpace(int(dim_magnon), int(dim_photon))


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator on a joint FockSpace."""

    space: FockSpace
    entries: np.ndarray

    def __post_init__(self) -> None:
        d = self.space.dim
        if self.entries.shape != (d, d):
            raise ValueError(
                f"operator shape {self.entries.shape} does not match joint dim {d}"
            )

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.entries.conj().T)


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix, either on a joint FockSpace or (space=None) a single mode."""

    space: FockSpace | None
    entries: np.ndarray

    def __post_init__(self) -> None:
        n, m = self.entries.shape
        if n != m:
            raise ValueError(f"density matrix must be square, got {self.entries.shape}")
        if self.space is not None and n != self.space.dim:
            raise ValueError(f"state dim {n} does not match joint dim {self.space.dim}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def validate(self) -> "DensityMatrix":
        """Raise StateValidationError unless hermitian/unit-trace/PSD to tolerance."""
        herm = float(np.max(np.abs(self.entries - self.entries.conj().T)))
        if herm > HERM_TOL:
            raise StateValidationError(f"hermiticity defect {herm:.3e} > {HERM_TOL:.0e}")
        tr = float(abs(np.trace(self.entries) - 1.0))
        if tr > TRACE_TOL:
            raise StateValidationError(f"trace defect {tr:.3e} > {TRACE_TOL:.0e}")
        lam_min = float(np.linalg.eigvalsh(self.entries)[0])
        if lam_min < MIN_EIG_TOL:
            raise StateValidationError(f"minimum eigenvalue {lam_min:.3e} < {MIN_EIG_TOL:.0e}")
        return self


def lowering(dim: int) -> np.ndarray:
    """Single-mode truncated lowering operator: entry (n-1, n) = sqrt(n)."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def annihilation(space: FockSpace, mode: str) -> OperatorMatrix:
    """Mode lowering operator embedded in the joint space (identity on the other mode)."""
    _check_mode(mode)
    if mode == "magnon":
        mat = np.kron(lowering(space.dim_magnon), np.eye(space.dim_photon))
    else:
        mat = np.kron(np.eye(space.dim_magnon), lowering(space.dim_photon))
    return OperatorMatrix(space, mat)


def number_diagonal(space: FockSpace, mode: str) -> np.ndarray:
    """Diagonal of the mode number operator in the joint basis (cheaper than the matrix)."""
    _check_mode(mode)
    if mode == "magnon":
        return np.repeat(np.arange(space.dim_magnon, dtype=float), space.dim_photon)
    return np.tile(np.arange(space.dim_photon, dtype=float), space.dim_magnon)


def _thermal_weights(n: float, dim: int) -> np.ndarray:
    """Truncated geometric (Bose-Einstein) weights, renormalized to unit sum."""
    if n < 0:
        raise ValueError(f"thermal occupation must be >= 0, got {n}")
    if n == 0:
        w = np.zeros(dim)
        w[0] = 1.0
        return w
    r = n / (n + 1.0)
    w = r ** np.arange(dim, dtype=float)
    return w / w.sum()


def thermal_state(space: FockSpace, n_magnon: float, n_photon: float) -> DensityMatrix:
    """Product of per-mode truncated thermal states.

    Renormalization after truncation biases the realized population slightly
    below the requested n (e.g. n=1 at 2 levels gives 1/3); the bias vanishes
    as the truncation grows.
    """
    w = np.kron(
        _thermal_weights(n_magnon, space.dim_magnon),
        _thermal_weights(n_photon, space.dim_photon),
    )
    return DensityMatrix(space, np.diag(w).astype(complex))


def fock_state(space: FockSpace, n_magnon: int, n_photon: int) -> DensityMatrix:
    """Projector onto the joint Fock state |n_magnon, n_photon>."""
    if not (0 <= n_magnon < space.dim_magnon and 0 <= n_photon < space.dim_photon):
        raise ValueError("Fock labels outside the truncation")
    rho = np.zeros((space.dim, space.dim), dtype=complex)
    idx = n_magnon * space.dim_photon + n_photon
    rho[idx, idx] = 1.0
    return DensityMatrix(space, rho)


def mode_population(rho: DensityMatrix, mode: str = "magnon") -> float:
    """Tr(rho a^dag a) for the named mode (for single-mode states, of that mode)."""
    pops = np.real(np.diag(rho.entries))
    if rho.space is None:
        weights = np.arange(rho.dim, dtype=float)
    else:
        weights = number_diagonal(rho.space, mode)
    return float(weights @ pops)


def partial_trace(rho: DensityMatrix, keep: str) -> DensityMatrix:
    """Reduced state of the kept mode; requires a joint-space input."""
    _check_mode(keep)
    if rho.space is None:
        raise ValueError("partial_trace needs a joint two-mode state")
    dm, dp = rho.space.dim_magnon, rho.space.dim_photon
    blocks = rho.entries.reshape(dm, dp, dm, dp)
    if keep == "magnon":
        red = np.einsum("apbp->ab", blocks)
    else:
        red = np.einsum("apaq->pq", blocks)
    return DensityMatrix(None, red)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-sum lam ln lam in nats, with eigenvalues below 1e-14 clamped to zero."""
    lam = np.linalg.eigvalsh(0.5 * (rho.entries + rho.entries.conj().T))
    lam = lam[lam > ENTROPY_CLAMP]
    return float(-np.sum(lam * np.log(lam)))


def thermal_entropy(n: float) -> float:
    """Entropy of a (untruncated) thermal bosonic state: (n+1)ln(n+1) - n ln n."""
    if n < 0:
        raise ValueError(f"thermal occupation must be >= 0, got {n}")
    if n == 0:
        return 0.0
    return float((n + 1.0) * math.log(n + 1.0) - n * math.log(n))
