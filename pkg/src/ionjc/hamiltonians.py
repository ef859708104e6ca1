"""Hamiltonians of the driven ion chain, in every frame of the pipeline.

All frequencies are in units of the axial trap frequency.  Scalar constants
that unitary transformations would otherwise drop are tracked explicitly as
offsets, so unitary-equivalence checks close including global phases: an
``OffsetHamiltonian`` with offset c is unitarily equivalent to the
rotating-frame Hamiltonian plus c times the identity.

The anharmonic part of the Coulomb interaction is carried as a named zero
placeholder (``include_W``); it commutes with every transformation used here
and is reserved for a perturbative treatment.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .chain import ChainModel, LaserDrive, lamb_dicke_matrix
from .fock import (
    HilbertConfig,
    OperatorMatrix,
    _expm_hermitian,
    _mode_destroy,
    displacement_product,
    embed_factors,
    mode_occupations,
    spin_signs,
)
from .transforms import BalancedParams, balanced_params

_SP = np.array([[0, 1], [0, 0]], dtype=complex)
_SM = np.array([[0, 0], [1, 0]], dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Chain, drives and Hilbert settings of one simulation instance."""

    chain: ChainModel
    drives: tuple[LaserDrive, ...]
    config: HilbertConfig
    omega_ge: float = 0.0
    include_W: bool = False

    def __post_init__(self):
        object.__setattr__(self, "drives", tuple(self.drives))
        if self.include_W:
            raise NotImplementedError("anharmonic correction is a placeholder, must stay off")
        if self.config.n_modes != self.chain.N:
            raise ValueError("config.n_modes must equal the chain ion count")
        if len(self.drives) != self.config.n_spins:
            raise ValueError("need exactly one drive per spin factor")
        ions = [d.ion for d in self.drives]
        if sorted(set(ions)) != ions:
            raise ValueError("drive ions must be distinct and listed in increasing order")
        for d in self.drives:
            if d.ion > self.chain.N:
                raise ValueError(f"drive targets ion {d.ion}, chain has {self.chain.N}")
            if d.omega_ge != self.omega_ge:
                raise ValueError("all drives must share the model's omega_ge")

    def eta_matrix(self) -> np.ndarray:
        """Lamb-Dicke rows, one per drive."""
        return lamb_dicke_matrix(self.chain, self.drives)

    def balanced(self) -> tuple[BalancedParams, ...]:
        """Balanced parameters per drive; rejects undriven ions."""
        eta = self.eta_matrix()
        return tuple(balanced_params(d, eta[i]) for i, d in enumerate(self.drives))

    def with_drive(self, index: int, **changes) -> "ModelSpec":
        """Copy of the model with one drive's fields replaced (1-based index)."""
        drives = list(self.drives)
        drives[index - 1] = replace(drives[index - 1], **changes)
        return ModelSpec(
            chain=self.chain,
            drives=tuple(drives),
            config=self.config,
            omega_ge=self.omega_ge,
            include_W=self.include_W,
        )


@dataclass(frozen=True, eq=False)
class OffsetHamiltonian:
    """Hermitian matrix plus the scalar that makes it equivalent to the rotating-frame Hamiltonian.

    matrix + offset * I has the same spectrum as the rotating-frame
    Hamiltonian of the model (offset 0 for that Hamiltonian itself).
    """

    matrix: OperatorMatrix
    offset: float


def _number_diagonal(model: ModelSpec) -> np.ndarray:
    """Diagonal of sum_p nu_p n_p over the full space."""
    occ = mode_occupations(model.config)
    return model.chain.nu @ occ


def rotating_frame_hamiltonian(model: ModelSpec) -> OffsetHamiltonian:
    """Time-independent Hamiltonian in the frame rotating at the laser frequencies.

    sum_p nu_p n_p + sum_j [ delta_j sigma_z^j / 2
                             + Omega_j (sigma_-^j D_j^dag2 + sigma_+^j D_j^2) ]

    with D_j^2 = prod_p D_p(i eta_jp).  Hermitian exactly, including at the
    Fock cutoff.
    """
    config = model.config
    eta = model.eta_matrix()
    diag = _number_diagonal(model).astype(complex)
    signs = spin_signs(config)
    for j, drive in enumerate(model.drives):
        diag = diag + 0.5 * drive.detuning * signs[j]
    h = np.diag(diag)
    for j, drive in enumerate(model.drives, start=1):
        if drive.Omega_R == 0.0:
            continue
        d2 = displacement_product(config, 1j * eta[j - 1])
        sp = embed_factors(config, spin_ops={j: _SP})
        sm = embed_factors(config, spin_ops={j: _SM})
        h = h + drive.Omega_R * (sm @ d2.conj().T + sp @ d2)
    return OffsetHamiltonian(OperatorMatrix(config, h, hermitian=True), 0.0)


def standard_rwa_generator(
    model: ModelSpec, resonance: str, mode: int | None = None, drive: int = 1
) -> OffsetHamiltonian:
    """Effective generator kept by the conventional rotating wave approximation.

    resonance selects the carrier, the blue sideband of one mode
    (i eta Omega (a^dag sigma_+ - a sigma_-)) or the red sideband
    (i eta Omega (a sigma_+ - a^dag sigma_-)); the red sideband is the
    Jaynes-Cummings generator.
    """
    config = model.config
    d = model.drives[drive - 1]
    eta = model.eta_matrix()[drive - 1]
    if resonance == "carrier":
        gen = d.Omega_R * embed_factors(config, spin_ops={drive: _SX})
    elif resonance in ("blue", "red"):
        if mode is None or not 1 <= mode <= config.n_modes:
            raise ValueError(f"resonance {resonance!r} needs a mode index in 1..{config.n_modes}")
        a = embed_factors(config, {mode: _mode_destroy(config.n_max)})
        sp = embed_factors(config, spin_ops={drive: _SP})
        sm = embed_factors(config, spin_ops={drive: _SM})
        coupling = 1j * eta[mode - 1] * d.Omega_R
        if resonance == "blue":
            gen = coupling * (a.conj().T @ sp - a @ sm)
        else:
            gen = coupling * (a @ sp - a.conj().T @ sm)
    else:
        raise ValueError(f"unknown resonance kind {resonance!r}")
    return OffsetHamiltonian(OperatorMatrix(config, gen, hermitian=True), 0.0)


class LinearizedParts(NamedTuple):
    """Single-drive Hamiltonian right after the spin-flip linearization.

    Built from its own closed expressions, independently of the transformation
    builders, for verification purposes only.
    """

    h0: OperatorMatrix
    flip: OperatorMatrix
    offset: float


def _require_single_drive(model: ModelSpec) -> LaserDrive:
    if len(model.drives) != 1:
        raise ValueError("intermediate-frame construction is defined for a single drive")
    return model.drives[0]


def dropped_linearization_constant(eta_row: np.ndarray, nu: np.ndarray) -> float:
    """Constant (1/4) sum_p eta_p^2 nu_p absorbed by the linearization step."""
    return float(0.25 * np.sum(np.asarray(eta_row) ** 2 * nu))


def linearized_hamiltonian(model: ModelSpec) -> LinearizedParts:
    """sum nu n + Omega sigma_z - (delta/2) sigma_x, plus the residual mode-spin coupling.

    The flip part is i sum_p (eta_p nu_p / 2)(a_p - a_p^dag) sigma_x.
    """
    drive = _require_single_drive(model)
    config = model.config
    eta = model.eta_matrix()[0]
    nu = model.chain.nu
    sx = embed_factors(config, spin_ops={1: _SX})
    h0 = (
        np.diag(_number_diagonal(model).astype(complex))
        + drive.Omega_R * embed_factors(config, spin_ops={1: np.diag([1.0, -1.0]).astype(complex)})
        - 0.5 * drive.detuning * sx
    )
    flip = np.zeros_like(h0)
    a1 = _mode_destroy(config.n_max)
    for p in range(1, config.n_modes + 1):
        a = embed_factors(config, {p: a1})
        flip = flip + 0.5 * eta[p - 1] * nu[p - 1] * (1j * (a - a.conj().T)) @ sx
    return LinearizedParts(
        OperatorMatrix(config, h0, hermitian=True),
        OperatorMatrix(config, flip, hermitian=True),
        dropped_linearization_constant(eta, nu),
    )


class MixedParts(NamedTuple):
    """Single-drive Hamiltonian after the mixing rotation, for verification."""

    h0: OperatorMatrix
    flip: OperatorMatrix
    offset: float


def mixed_hamiltonian(model: ModelSpec) -> MixedParts:
    """Frame in which the large component is (delta_eff/2) sigma_z plus a mode shift.

    h0 = sum nu n + [ delta_eff/2 - (Delta/(2 sqrt(4+Delta^2))) sum eta nu
    i(a - a^dag) ] sigma_z; the flip part couples i(a - a^dag) to sigma_x with
    the bounded weight 1/sqrt(4 + Delta^2).
    """
    drive = _require_single_drive(model)
    config = model.config
    par = model.balanced()[0]
    nu = model.chain.nu
    sz = embed_factors(config, spin_ops={1: np.diag([1.0, -1.0]).astype(complex)})
    sx = embed_factors(config, spin_ops={1: _SX})
    a1 = _mode_destroy(config.n_max)
    h0 = np.diag(_number_diagonal(model).astype(complex)) + 0.5 * par.delta_eff * sz
    flip = np.zeros_like(h0)
    root = 1.0 / np.sqrt(4.0 + par.Delta**2)
    for p in range(1, config.n_modes + 1):
        a = embed_factors(config, {p: a1})
        x = 1j * (a - a.conj().T)
        h0 = h0 - (par.Delta * root / 2.0) * par.eta[p - 1] * nu[p - 1] * (x @ sz)
        flip = flip + root * par.eta[p - 1] * nu[p - 1] * (x @ sx)
    return MixedParts(
        OperatorMatrix(config, h0, hermitian=True),
        OperatorMatrix(config, flip, hermitian=True),
        dropped_linearization_constant(par.eta, nu),
    )


def restored_displacement_constant(par: BalancedParams, nu: np.ndarray) -> float:
    """Constant sum_p |alpha_p|^2 nu_p restored by the conditional displacement."""
    return float(np.sum(np.abs(par.alpha) ** 2 * nu))


def balanced_hamiltonian(model: ModelSpec) -> tuple[OffsetHamiltonian, OperatorMatrix]:
    """Balanced-frame Hamiltonian: exactly diagonal part plus bounded flip part.

    The diagonal part is sum_p nu_p n_p + sum_j (delta_eff_j / 2) sigma_z^j,
    returned with the accumulated scalar offset.  The flip part is

        sum_jp (i/Delta_j) etaeff_jp nu_p (a_p - a_p^dag)
               (sigma_-^j Dj^dag2 + sigma_+^j Dj^2)
      - sum_jp (1/Delta_j) etaeff_jp^2 nu_p (sigma_-^j Dj^dag2 - sigma_+^j Dj^2)

    with Dj^2 = prod_p D_p(i etaeff_jp).  On the truncated space this
    expression is hermitian only away from the Fock cutoff; the anti-hermitian
    edge defect is removed by symmetrization, which leaves the guarded
    interior untouched.

    With several drives the expression drops cross-ion couplings of order
    eta_j eta_j'; the single-drive form is unitarily equivalent to the
    rotating-frame Hamiltonian up to truncation error only.
    """
    config = model.config
    nu = model.chain.nu
    params = model.balanced()
    diag = _number_diagonal(model).astype(complex)
    signs = spin_signs(config)
    offset = 0.0
    for j, par in enumerate(params):
        diag = diag + 0.5 * par.delta_eff * signs[j]
        offset += dropped_linearization_constant(par.eta, nu) - restored_displacement_constant(par, nu)
    h0 = OperatorMatrix(config, np.diag(diag), hermitian=True)

    flip = np.zeros((config.dim, config.dim), dtype=complex)
    a1 = _mode_destroy(config.n_max)
    for j, par in enumerate(params, start=1):
        d2 = displacement_product(config, 1j * par.eta_eff)
        sp = embed_factors(config, spin_ops={j: _SP})
        sm = embed_factors(config, spin_ops={j: _SM})
        w_sum = sm @ d2.conj().T + sp @ d2
        w_dif = sm @ d2.conj().T - sp @ d2
        for p in range(1, config.n_modes + 1):
            a = embed_factors(config, {p: a1})
            x = 1j * (a - a.conj().T)
            flip = flip + par.eta_eff_by_Delta[p - 1] * nu[p - 1] * (x @ w_sum)
        flip = flip - float(np.sum(par.eta_eff_by_Delta * par.eta_eff * nu)) * w_dif
    flip = (flip + flip.conj().T) / 2.0
    return OffsetHamiltonian(h0, offset), OperatorMatrix(config, flip, hermitian=True)


def _time_displaced_product(
    config: HilbertConfig, eta_eff_row: np.ndarray, nu: np.ndarray, t: float
) -> np.ndarray:
    """prod_p exp(i etaeff_p (e^{-i nu_p t} a_p + e^{i nu_p t} a_p^dag))."""
    a1 = _mode_destroy(config.n_max)
    mats = {}
    for p in range(1, config.n_modes + 1):
        gen = eta_eff_row[p - 1] * (np.exp(-1j * nu[p - 1] * t) * a1 + np.exp(1j * nu[p - 1] * t) * a1.conj().T)
        mats[p] = _expm_hermitian(gen, -1.0)  # exp(+i gen)
    return embed_factors(config, mats)


def jc_interaction(model: ModelSpec, t: float) -> OperatorMatrix:
    """Interaction-picture coupling JC(t) relative to the balanced diagonal part.

    Built directly from the closed expression with phase factors
    e^{-i omega_p^- t}, e^{-i omega_p^+ t} and e^{-i delta_eff t}, where
    omega_p^+- = nu_p +- delta_eff; equals the conjugation of the flip part by
    exp(i H0 t).  Symmetrized at the Fock cutoff like the flip part itself.
    """
    config = model.config
    nu = model.chain.nu
    a1 = _mode_destroy(config.n_max)
    out = np.zeros((config.dim, config.dim), dtype=complex)
    for j, par in enumerate(model.balanced(), start=1):
        dt = _time_displaced_product(config, par.eta_eff, nu, t)
        sp = embed_factors(config, spin_ops={j: _SP})
        sm = embed_factors(config, spin_ops={j: _SM})
        for p in range(1, config.n_modes + 1):
            a = embed_factors(config, {p: a1})
            coup = par.eta_eff_by_Delta[p - 1] * nu[p - 1]
            w_minus = nu[p - 1] - par.delta_eff
            w_plus = nu[p - 1] + par.delta_eff
            out = out + 1j * coup * (
                np.exp(-1j * w_minus * t) * (a @ dt @ sp)
                - np.exp(1j * w_minus * t) * (a.conj().T @ dt.conj().T @ sm)
            )
            out = out + 1j * coup * (
                np.exp(-1j * w_plus * t) * (a @ dt.conj().T @ sm)
                - np.exp(1j * w_plus * t) * (a.conj().T @ dt @ sp)
            )
        kappa = float(np.sum(par.eta_eff_by_Delta * par.eta_eff * nu))
        out = out - kappa * (
            np.exp(-1j * par.delta_eff * t) * (dt.conj().T @ sm)
            - np.exp(1j * par.delta_eff * t) * (dt @ sp)
        )
    out = (out + out.conj().T) / 2.0
    return OperatorMatrix(config, out, hermitian=True)


@dataclass(frozen=True)
class ResonanceRow:
    """Sideband offsets of one (drive, mode) pair, in units of nu_1."""

    ion: int
    mode: int
    nu: float
    omega_minus: float
    omega_plus: float
    required_abs_delta: float | None  # detuning that zeroes omega_minus, None if unreachable


@dataclass(frozen=True)
class ResonanceReport:
    rows: tuple[ResonanceRow, ...]
    nearest_ion: int
    nearest_mode: int


def resonance_offsets(model: ModelSpec) -> ResonanceReport:
    """Intensity-corrected sideband offsets omega_jp^+- = nu_p +- delta_eff_j.

    For each pair also reports the |detuning| that would put the pair exactly
    on resonance at the given Rabi frequency, by inverting delta_eff^2 =
    4 Omega^2 + delta^2; a mode below 2 Omega is unreachable because
    delta_eff >= 2 Omega.
    """
    nu = model.chain.nu
    params = model.balanced()
    rows = []
    best = (np.inf, 1, 1)
    for j, (drive, par) in enumerate(zip(model.drives, params), start=1):
        for p in range(1, model.config.n_modes + 1):
            w_minus = float(nu[p - 1] - par.delta_eff)
            w_plus = float(nu[p - 1] + par.delta_eff)
            gap = nu[p - 1] ** 2 - 4.0 * drive.Omega_R**2
            required = float(np.sqrt(gap)) if gap >= 0 else None
            rows.append(
                ResonanceRow(
                    ion=drive.ion,
                    mode=p,
                    nu=float(nu[p - 1]),
                    omega_minus=w_minus,
                    omega_plus=w_plus,
                    required_abs_delta=required,
                )
            )
            if abs(w_minus) < best[0]:
                best = (abs(w_minus), j, p)
    return ResonanceReport(rows=tuple(rows), nearest_ion=model.drives[best[1] - 1].ion, nearest_mode=best[2])
