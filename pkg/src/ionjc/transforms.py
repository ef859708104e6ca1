"""Unitary transformations that balance the ion-laser coupling.

The chain of transformations acts per driven ion: a spin-flip linearization
(mapping the exponential coupling onto sigma_z), a spin rotation by theta with
tan(theta) = Delta / 2, and a spin-conditioned displacement.  Their product is
the balanced transform whose closed block form has displacement entries
weighted by kappa_plus / kappa_minus.

All displacement arguments in this chain are purely imaginary multiples of the
same per-mode generator a_p + a_p^dag, so products of these operators compose
exactly even on the truncated space; only conjugations of ladder operators
feel the cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chain import LaserDrive
from .fock import (
    HilbertConfig,
    OperatorMatrix,
    displacement_product,
    embed_factors,
)

_E_EE = np.array([[1, 0], [0, 0]], dtype=complex)
_E_EG = np.array([[0, 1], [0, 0]], dtype=complex)
_E_GE = np.array([[0, 0], [1, 0]], dtype=complex)
_E_GG = np.array([[0, 0], [0, 1]], dtype=complex)


class NoDriveError(ValueError):
    """Raised when balanced parameters are requested at zero Rabi frequency."""


@dataclass(frozen=True, eq=False)
class BalancedParams:
    """Derived per-drive bundle consumed by the transformation builders.

    Attributes
    ----------
    Delta : float
        Dimensionless detuning ratio delta / Omega_R.
    delta_eff : float
        Intensity-corrected detuning sqrt(4 Omega_R^2 + delta^2); always
        >= max(2 Omega_R, |delta|).
    theta : float
        Mixing angle, tan(theta) = Delta / 2, in [-pi/2, pi/2].
    eta : ndarray
        Bare Lamb-Dicke row of the driven ion.
    eta_eff : ndarray
        Balanced Lamb-Dicke row (Delta / sqrt(4 + Delta^2)) eta; tends to
        sign(delta) eta at weak field and to 0 at strong field.
    eta_eff_by_Delta : ndarray
        eta_eff / Delta evaluated stably as eta / sqrt(4 + Delta^2); this is
        the bounded sideband coupling row, |eta_eff / Delta| <= |eta| / 2.
    kappa_plus, kappa_minus : float
        Closed-block-form weights; kappa_plus^2 + kappa_minus^2 = 1 and
        kappa_plus kappa_minus = 1 / sqrt(4 + Delta^2).
    eps_plus, eps_minus : float
        Displacement fractions; eps_plus - eps_minus = 1 and
        eps_plus + eps_minus = Delta / sqrt(4 + Delta^2).
    alpha : ndarray
        Spin-conditioned displacement amplitudes i (Delta / (2 sqrt(4 +
        Delta^2))) eta.
    """

    Delta: float
    delta_eff: float
    theta: float
    eta: np.ndarray
    eta_eff: np.ndarray
    eta_eff_by_Delta: np.ndarray
    kappa_plus: float
    kappa_minus: float
    eps_plus: float
    eps_minus: float
    alpha: np.ndarray


def balanced_params(drive: LaserDrive, eta_row: Sequence[float]) -> BalancedParams:
    """Balanced parameters of one drive, given its Lamb-Dicke row.

    sign(Delta) is taken as +1 at Delta = 0; the term it weights vanishes
    there, the convention just keeps outputs deterministic.
    """
    if drive.Omega_R <= 0.0:
        raise NoDriveError(
            "balanced parameters are undefined at Omega_R = 0; use the free Hamiltonian instead"
        )
    eta = np.asarray(eta_row, dtype=float)
    delta = drive.detuning
    big_delta = delta / drive.Omega_R
    root = 1.0 / np.sqrt(4.0 + big_delta**2)
    sign = 1.0 if big_delta >= 0 else -1.0
    outer = np.sqrt(0.25 + root / 2.0)
    inner = np.sqrt(max(0.25 - root / 2.0, 0.0))
    return BalancedParams(
        Delta=big_delta,
        delta_eff=float(np.hypot(2.0 * drive.Omega_R, delta)),
        theta=float(np.arctan(big_delta / 2.0)),
        eta=eta,
        eta_eff=big_delta * root * eta,
        eta_eff_by_Delta=root * eta,
        kappa_plus=float(outer + sign * inner),
        kappa_minus=float(outer - sign * inner),
        eps_plus=float(big_delta * root / 2.0 + 0.5),
        eps_minus=float(big_delta * root / 2.0 - 0.5),
        alpha=1j * (big_delta * root / 2.0) * eta,
    )


def rotating_frame(config: HilbertConfig, drives: Sequence[LaserDrive], t: float) -> OperatorMatrix:
    """Frame rotation prod_j exp(i (omega_L^j t + phase^j) sigma_z^j / 2).

    Diagonal in the standard basis; drives are matched to spin factors in
    list order.
    """
    if len(drives) != config.n_spins:
        raise ValueError("need one drive per spin factor")
    return OperatorMatrix(config, np.diag(rotating_frame_diagonal(config, drives, t)), unitary=True)


def rotating_frame_diagonal(
    config: HilbertConfig, drives: Sequence[LaserDrive], t: float
) -> np.ndarray:
    """Diagonal of the frame rotation, as a phase vector."""
    diag = np.ones(1, dtype=complex)
    for drive in drives:
        beta = drive.omega_L * t + drive.phase
        diag = np.kron(diag, np.array([np.exp(1j * beta / 2), np.exp(-1j * beta / 2)]))
    return np.kron(np.ones(config.n_max**config.n_modes), diag)


def linearizing_transform(config: HilbertConfig, eta_row: Sequence[float], ion: int) -> OperatorMatrix:
    """Unitary mapping the exponential spin-flip coupling of one ion onto sigma_z.

    Block form over (e, g): (1/sqrt(2)) [[D^dag, D], [-D^dag, D]] with
    D = prod_p D_p(i eta_p / 2).
    """
    d = displacement_product(config, 0.5j * np.asarray(eta_row, dtype=float))
    t1 = (
        d.conj().T @ embed_factors(config, spin_ops={ion: _E_EE - _E_GE})
        + d @ embed_factors(config, spin_ops={ion: _E_EG + _E_GG})
    ) / np.sqrt(2.0)
    return OperatorMatrix(config, t1, unitary=True)


def mixing_rotation(config: HilbertConfig, theta: float, ion: int) -> OperatorMatrix:
    """Spin rotation by theta about the y axis on one ion."""
    if not -np.pi / 2 <= theta <= np.pi / 2:
        raise ValueError("theta must lie in [-pi/2, pi/2]")
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    rot = np.array([[c, -s], [s, c]], dtype=complex)
    return OperatorMatrix(config, embed_factors(config, spin_ops={ion: rot}), unitary=True)


def conditional_displacement(
    config: HilbertConfig, alpha_row: Sequence[complex], ion: int
) -> OperatorMatrix:
    """Block-diagonal spin-conditioned displacement diag(D({alpha}), D({alpha})^dag)."""
    d = displacement_product(config, np.asarray(alpha_row, dtype=complex))
    t3 = d @ embed_factors(config, spin_ops={ion: _E_EE}) + d.conj().T @ embed_factors(
        config, spin_ops={ion: _E_GG}
    )
    return OperatorMatrix(config, t3, unitary=True)


def balanced_transform(config: HilbertConfig, params: Sequence[BalancedParams]) -> OperatorMatrix:
    """Product form of the balanced transform, one factor per driven ion.

    Each factor is the composition conditional_displacement * mixing_rotation
    * linearizing_transform for that ion; factors of different ions commute,
    so the product order is immaterial.
    """
    if len(params) != config.n_spins:
        raise ValueError("need balanced parameters for every spin factor")
    out = np.eye(config.dim, dtype=complex)
    for ion, par in enumerate(params, start=1):
        t1 = linearizing_transform(config, par.eta, ion)
        t2 = mixing_rotation(config, par.theta, ion)
        t3 = conditional_displacement(config, par.alpha, ion)
        out = t3.entries @ t2.entries @ t1.entries @ out
    return OperatorMatrix(config, out, unitary=True)


def balanced_transform_closed(
    config: HilbertConfig, params: Sequence[BalancedParams]
) -> OperatorMatrix:
    """Closed block form of the balanced transform.

    Per ion: [[k+ D(i eps- eta), k- D(i eps+ eta)], [-k- D(i eps+ eta)^dag,
    k+ D(i eps- eta)^dag]].  Used as a cross-check against the product form.
    """
    if len(params) != config.n_spins:
        raise ValueError("need balanced parameters for every spin factor")
    out = np.eye(config.dim, dtype=complex)
    for ion, par in enumerate(params, start=1):
        d_minus = displacement_product(config, 1j * par.eps_minus * par.eta)
        d_plus = displacement_product(config, 1j * par.eps_plus * par.eta)
        factor = (
            par.kappa_plus * d_minus @ embed_factors(config, spin_ops={ion: _E_EE})
            + par.kappa_minus * d_plus @ embed_factors(config, spin_ops={ion: _E_EG})
            - par.kappa_minus * d_plus.conj().T @ embed_factors(config, spin_ops={ion: _E_GE})
            + par.kappa_plus * d_minus.conj().T @ embed_factors(config, spin_ops={ion: _E_GG})
        )
        out = factor @ out
    return OperatorMatrix(config, out, unitary=True)
