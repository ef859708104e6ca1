"""Truncated multi-mode Fock x multi-spin operator algebra.

Everything downstream works with dense complex matrices on the space

    (C^n_max)^(x n_modes)  (x)  (C^2)^(x n_spins)

in Kronecker order: mode 1 is the slowest index, then mode 2, ..., then the
spin factors (fastest).  Each spin factor orders the excited state |e> before
the ground state |g>, so sigma_z = diag(+1, -1) and 2x2 operator-block
notation over (e, g) maps directly onto Kronecker products.

Truncation is hard: a_dag annihilates the top Fock level.  Displacements and
propagators are built by exponentiating the *truncated* generator, so they are
exactly unitary on the truncated space; identities that hold in infinite
dimension are then verified only on a guarded subspace (all mode indices below
``n_max - guard``), which isolates truncation error from method error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Mapping, Sequence

import numpy as np

UNITARY_ATOL = 1e-12
HERMITIAN_ATOL = 1e-10


class DimensionMismatchError(ValueError):
    """Operands live on different Hilbert-space configurations."""


class NumericalValidationError(RuntimeError):
    """A tagged matrix failed its unitarity or hermiticity check."""


@dataclass(frozen=True)
class HilbertConfig:
    """Dimensions and basis conventions of the truncated state space.

    Parameters
    ----------
    n_modes : int
        Number of vibrational modes.
    n_max : int
        Fock cutoff per mode; levels |0> .. |n_max - 1> are kept.
    n_spins : int
        Number of two-level ions carried in the state space.
    guard : int
        Width of the truncation guard band.  Basis states with any mode
        index >= n_max - guard are excluded from guarded norms.
    """

    n_modes: int
    n_max: int
    n_spins: int = 1
    guard: int = 0

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if self.n_max < 2:
            raise ValueError("n_max must be >= 2")
        if self.n_spins < 1:
            raise ValueError("n_spins must be >= 1")
        if not 0 <= self.guard < self.n_max:
            raise ValueError("guard must satisfy 0 <= guard < n_max")

    @property
    def dim(self) -> int:
        return self.n_max**self.n_modes * 2**self.n_spins


@lru_cache(maxsize=None)
def guard_mask(config: HilbertConfig) -> np.ndarray:
    """Boolean mask of basis states whose every mode index is < n_max - guard."""
    idx = np.arange(config.dim)
    rem = idx // (2**config.n_spins)
    keep = np.ones(config.dim, dtype=bool)
    for _ in range(config.n_modes):
        keep &= (rem % config.n_max) < config.n_max - config.guard
        rem //= config.n_max
    keep.setflags(write=False)
    return keep


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense complex square matrix with attached Hilbert-space metadata.

    ``hermitian`` and ``unitary`` are construction tags; a tagged matrix is
    verified against the corresponding tolerance at construction time.
    Instances are treated as immutable.
    """

    config: HilbertConfig
    entries: np.ndarray
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (self.config.dim, self.config.dim):
            raise DimensionMismatchError(
                f"matrix shape {m.shape} does not match config dimension {self.config.dim}"
            )
        object.__setattr__(self, "entries", m)
        if self.unitary:
            err = np.abs(m.conj().T @ m - np.eye(self.config.dim)).max()
            if err > UNITARY_ATOL:
                raise NumericalValidationError(
                    f"matrix tagged unitary violates ||U^dag U - I||_max <= {UNITARY_ATOL} (got {err:.3e})"
                )
        if self.hermitian:
            err = np.abs(m - m.conj().T).max()
            if err > HERMITIAN_ATOL:
                raise NumericalValidationError(
                    f"matrix tagged hermitian violates ||H - H^dag||_max <= {HERMITIAN_ATOL} (got {err:.3e})"
                )

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(
            self.config, self.entries.conj().T, hermitian=self.hermitian, unitary=self.unitary
        )

    def _check_config(self, other: "OperatorMatrix"):
        if self.config != other.config:
            raise DimensionMismatchError("operands have different Hilbert configurations")

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_config(other)
        return OperatorMatrix(
            self.config, self.entries @ other.entries, unitary=self.unitary and other.unitary
        )

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_config(other)
        return OperatorMatrix(
            self.config, self.entries + other.entries, hermitian=self.hermitian and other.hermitian
        )

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_config(other)
        return OperatorMatrix(
            self.config, self.entries - other.entries, hermitian=self.hermitian and other.hermitian
        )

    def __mul__(self, scalar) -> "OperatorMatrix":
        s = complex(scalar)
        return OperatorMatrix(
            self.config, s * self.entries, hermitian=self.hermitian and s.imag == 0.0
        )

    __rmul__ = __mul__


def _mode_destroy(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), 1).astype(complex)


_SPIN_2X2 = {
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),   # |e><g|
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),  # |g><e|
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
}


def embed_factors(
    config: HilbertConfig,
    mode_ops: Mapping[int, np.ndarray] | None = None,
    spin_ops: Mapping[int, np.ndarray] | None = None,
) -> np.ndarray:
    """Kronecker-assemble single-factor operators, identity elsewhere.

    Keys are 1-based mode / ion indices, matching the basis ordering.
    """
    mode_ops = mode_ops or {}
    spin_ops = spin_ops or {}
    for p in mode_ops:
        if not 1 <= p <= config.n_modes:
            raise ValueError(f"mode index {p} out of range 1..{config.n_modes}")
    for j in spin_ops:
        if not 1 <= j <= config.n_spins:
            raise ValueError(f"ion index {j} out of range 1..{config.n_spins}")
    eye_m = np.eye(config.n_max, dtype=complex)
    eye_s = np.eye(2, dtype=complex)
    factors = [np.asarray(mode_ops.get(p, eye_m), dtype=complex) for p in range(1, config.n_modes + 1)]
    factors += [np.asarray(spin_ops.get(j, eye_s), dtype=complex) for j in range(1, config.n_spins + 1)]
    return reduce(np.kron, factors)


def ladder(config: HilbertConfig, mode: int, kind: str) -> OperatorMatrix:
    """Truncated annihilation / creation / number operator on one mode.

    a|n> = sqrt(n)|n-1>, a_dag|n> = sqrt(n+1)|n+1> for n+1 < n_max, and
    a_dag|n_max - 1> = 0 (hard truncation).
    """
    if not 1 <= mode <= config.n_modes:
        raise ValueError(f"mode index {mode} out of range 1..{config.n_modes}")
    a = _mode_destroy(config.n_max)
    if kind == "annihilate":
        op, herm = a, False
    elif kind == "create":
        op, herm = a.conj().T, False
    elif kind == "number":
        op, herm = a.conj().T @ a, True
    else:
        raise ValueError(f"unknown ladder kind {kind!r}")
    return OperatorMatrix(config, embed_factors(config, {mode: op}), hermitian=herm)


def spin_op(config: HilbertConfig, ion: int, kind: str) -> OperatorMatrix:
    """Pauli operator on the ion-th spin factor (|e> before |g|)."""
    if not 1 <= ion <= config.n_spins:
        raise ValueError(f"ion index {ion} out of range 1..{config.n_spins}")
    try:
        s = _SPIN_2X2[kind]
    except KeyError:
        raise ValueError(f"unknown spin kind {kind!r}") from None
    return OperatorMatrix(config, embed_factors(config, spin_ops={ion: s}), hermitian=kind in ("z", "x"))


def _expm_hermitian(entries: np.ndarray, t: float) -> np.ndarray:
    """exp(-i * entries * t) for a hermitian matrix, via eigendecomposition."""
    w, v = np.linalg.eigh(entries)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def _displacement_1mode(n_max: int, alpha: complex) -> np.ndarray:
    """exp(alpha a_dag - alpha* a) on a single truncated mode, exactly unitary."""
    a = _mode_destroy(n_max)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return _expm_hermitian(1j * gen, 1.0)


def displacement(config: HilbertConfig, mode: int, alpha: complex) -> OperatorMatrix:
    """Displacement operator D(alpha) = exp(alpha a_dag - alpha* a) on one mode.

    Built from the truncated generator, so D is exactly unitary on the
    truncated space; the shift property D a D^dag = a - alpha holds only on
    the guarded subspace.
    """
    if not 1 <= mode <= config.n_modes:
        raise ValueError(f"mode index {mode} out of range 1..{config.n_modes}")
    d1 = _displacement_1mode(config.n_max, complex(alpha))
    return OperatorMatrix(config, embed_factors(config, {mode: d1}), unitary=True)


def displacement_product(config: HilbertConfig, alphas: Sequence[complex]) -> np.ndarray:
    """prod_p D_p(alphas[p]) as a raw full-space matrix (one alpha per mode)."""
    if len(alphas) != config.n_modes:
        raise ValueError("need one displacement amplitude per mode")
    mats = {p + 1: _displacement_1mode(config.n_max, complex(al)) for p, al in enumerate(alphas)}
    return embed_factors(config, mats)


def expm_unitary(h: OperatorMatrix, t: float) -> OperatorMatrix:
    """exp(-i H t) for hermitian H, via eigendecomposition.

    Rejects input that is not tagged hermitian or fails the numerical
    hermiticity check.
    """
    if not h.hermitian:
        raise NumericalValidationError("expm_unitary requires a hermitian-tagged operator")
    err = np.abs(h.entries - h.entries.conj().T).max()
    if err > HERMITIAN_ATOL:
        raise NumericalValidationError(f"hermiticity check failed: ||H - H^dag||_max = {err:.3e}")
    return OperatorMatrix(h.config, _expm_hermitian(h.entries, t), unitary=True)


def guarded_norm(m: np.ndarray | OperatorMatrix, config: HilbertConfig | None = None) -> float:
    """Spectral norm ||P M P||_2 with P the guard-band projector."""
    if isinstance(m, OperatorMatrix):
        config = m.config
        m = m.entries
    if config is None:
        raise ValueError("config required for raw matrices")
    keep = guard_mask(config)
    sub = m[np.ix_(keep, keep)]
    return float(np.linalg.norm(sub, 2))


def guarded_distance(a: OperatorMatrix, b: OperatorMatrix) -> float:
    """||P (A - B) P||_2 over the guarded subspace.

    A pseudo-metric: zero on equal inputs, symmetric, triangle inequality.
    With guard = 0 it reduces to the plain spectral distance.
    """
    a._check_config(b)
    return guarded_norm(a.entries - b.entries, a.config)


def guarded_infidelity(u: OperatorMatrix, v: OperatorMatrix) -> float:
    """1 - |tr(P U^dag V P)| / tr(P), a phase-insensitive unitary mismatch."""
    u._check_config(v)
    keep = guard_mask(u.config)
    overlap = np.sum(np.conj(u.entries[:, keep]) * v.entries[:, keep])
    return float(1.0 - abs(overlap) / np.count_nonzero(keep))


@lru_cache(maxsize=None)
def mode_occupations(config: HilbertConfig) -> np.ndarray:
    """Fock index of every mode for every basis state; shape (n_modes, dim)."""
    idx = np.arange(config.dim)
    rem = idx // (2**config.n_spins)
    occ = np.empty((config.n_modes, config.dim), dtype=np.int64)
    for p in range(config.n_modes - 1, -1, -1):
        occ[p] = rem % config.n_max
        rem //= config.n_max
    occ.setflags(write=False)
    return occ


@lru_cache(maxsize=None)
def spin_signs(config: HilbertConfig) -> np.ndarray:
    """sigma_z eigenvalue (+1 for e, -1 for g) per ion and basis state."""
    idx = np.arange(config.dim)
    signs = np.empty((config.n_spins, config.dim), dtype=float)
    rem = idx
    for j in range(config.n_spins - 1, -1, -1):
        signs[j] = 1.0 - 2.0 * (rem % 2)
        rem //= 2
    signs.setflags(write=False)
    return signs


def basis_state(config: HilbertConfig, fock: Sequence[int], spins: Sequence[str]) -> np.ndarray:
    """Product basis state |n_1 .. n_k> (x) |s_1 .. s_m>, spins 'e' or 'g'."""
    if len(fock) != config.n_modes or len(spins) != config.n_spins:
        raise ValueError("need one Fock index per mode and one spin label per ion")
    idx = 0
    for n in fock:
        if not 0 <= n < config.n_max:
            raise ValueError(f"Fock index {n} outside 0..{config.n_max - 1}")
        idx = idx * config.n_max + int(n)
    for s in spins:
        if s not in ("e", "g"):
            raise ValueError("spin labels must be 'e' or 'g'")
        idx = idx * 2 + (0 if s == "e" else 1)
    vec = np.zeros(config.dim, dtype=complex)
    vec[idx] = 1.0
    return vec


def coherent_state(config: HilbertConfig, alphas: Sequence[complex], spins: Sequence[str]) -> np.ndarray:
    """Normalized truncated coherent state on every mode, definite spin per ion."""
    if len(alphas) != config.n_modes or len(spins) != config.n_spins:
        raise ValueError("need one amplitude per mode and one spin label per ion")
    vec = np.ones(1, dtype=complex)
    for al in alphas:
        col = np.zeros(config.n_max, dtype=complex)
        col[0] = math.exp(-abs(al) ** 2 / 2.0)
        for n in range(1, config.n_max):
            col[n] = col[n - 1] * al / math.sqrt(n)
        vec = np.kron(vec, col)
    for s in spins:
        if s not in ("e", "g"):
            raise ValueError("spin labels must be 'e' or 'g'")
        col = np.array([1.0, 0.0] if s == "e" else [0.0, 1.0], dtype=complex)
        vec = np.kron(vec, col)
    return vec / np.linalg.norm(vec)


def population_above_guard(config: HilbertConfig, state: np.ndarray) -> float:
    """Probability weight the state carries outside the guarded subspace."""
    keep = guard_mask(config)
    return float(np.sum(np.abs(state[~keep]) ** 2))
