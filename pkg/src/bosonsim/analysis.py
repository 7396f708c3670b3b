"""Visibility, predictability and l1 complementarity quantifiers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
SLACK_TOL = 1e-8
MIN_SWEEP_POINTS = 8

# effective qutrit basis for two photons in two modes
TWO_PHOTON_BASIS = ("20", "02", "11")


class UndefinedVisibilityError(ValueError):
    """All sampled probabilities are zero."""


@dataclass(frozen=True)
class PhaseSweep:
    phase: str
    points: tuple[float, ...]
    probabilities: tuple[float, ...]
    event: str = "D0"
    fixed: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(float(x) for x in self.points))
        object.__setattr__(self, "probabilities", tuple(float(p) for p in self.probabilities))
        if len(self.points) != len(self.probabilities):
            raise ValueError("points and probabilities differ in length")
        if len(self.points) < MIN_SWEEP_POINTS:
            raise ValueError(f"a sweep needs at least {MIN_SWEEP_POINTS} points, got {len(self.points)}")
        if any(p < -1e-12 or p > 1 + 1e-12 for p in self.probabilities):
            raise ValueError("probabilities must lie in [0, 1]")


def _extrema_visibility(probs: Sequence[float]) -> float:
    p = np.asarray(probs, dtype=float)
    hi, lo = float(p.max()), float(p.min())
    if hi + lo <= 0:
        raise UndefinedVisibilityError("visibility is undefined when every probability is zero")
    return (hi - lo) / (hi + lo)


def visibility(sweep: PhaseSweep | Sequence[float]) -> float:
    """(max - min) / (max + min) over the sampled probabilities."""
    probs = sweep.probabilities if isinstance(sweep, PhaseSweep) else sweep
    return _extrema_visibility(probs)


def bunching_visibility(sweep: PhaseSweep | Sequence[float]) -> float:
    """Visibility of the probability that both photons reach one detector."""
    return visibility(sweep)


def predictability_TR(T: float, R: float) -> float:
    if abs(T * T + R * R - 1) > 1e-10:
        raise ValueError(f"T^2 + R^2 = {T * T + R * R}, expected 1")
    return abs(T * T - R * R)


class DensityMatrixView:
    """Validated density matrix over a declared effective basis."""

    def __init__(self, rho: np.ndarray, basis: Sequence[str] | None = None):
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {rho.shape}")
        if abs(np.trace(rho) - 1) > TRACE_TOL:
            raise ValueError(f"trace is {np.trace(rho).real:.12g}, expected 1")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -PSD_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        self.rho = rho
        self.basis = tuple(basis) if basis is not None else tuple(str(j) for j in range(rho.shape[0]))
        if len(self.basis) != rho.shape[0]:
            raise ValueError("basis labels do not match the matrix dimension")

    @property
    def d(self) -> int:
        return self.rho.shape[0]

    @property
    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(self.purity - 1) <= tol

    @classmethod
    def from_state(cls, psi: Sequence[complex], basis: Sequence[str] | None = None, normalize: bool = False):
        psi = np.asarray(psi, dtype=complex)
        if normalize:
            psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), basis)

    @classmethod
    def from_mixture(cls, weights: Sequence[float], states: Sequence[Sequence[complex]], basis=None):
        """Mixture of pure states, e.g. branches conditioned on blocker records."""
        w = np.asarray(weights, dtype=float)
        rho = sum(wk * np.outer(s, np.conj(s)) for wk, s in zip(w / w.sum(), np.asarray(states, dtype=complex)))
        return cls(rho, basis)


def _off_diagonal(rho: np.ndarray) -> np.ndarray:
    return ~np.eye(rho.shape[0], dtype=bool)


def l1_coherence(rho: DensityMatrixView) -> float:
    return float(np.abs(rho.rho[_off_diagonal(rho.rho)]).sum())


def l1_predictability(rho: DensityMatrixView) -> float:
    diag = np.clip(np.diag(rho.rho).real, 0, None)
    cross = np.sqrt(np.outer(diag, diag))[_off_diagonal(rho.rho)].sum()
    return float(rho.d - 1 - cross)


@dataclass(frozen=True)
class ComplementarityReport:
    C_l1: float
    P_l1: float
    d: int
    pure: bool

    @property
    def slack(self) -> float:
        return (self.d - 1) - self.C_l1 - self.P_l1

    def as_dict(self) -> dict:
        return {"C_l1": self.C_l1, "P_l1": self.P_l1, "d": self.d, "slack": self.slack, "pure": self.pure}


def complementarity(rho: DensityMatrixView) -> ComplementarityReport:
    rep = ComplementarityReport(l1_coherence(rho), l1_predictability(rho), rho.d, rho.is_pure())
    if rep.slack < -SLACK_TOL:
        raise ValueError(f"complementarity slack {rep.slack:.3e} is negative")
    return rep


def two_photon_cr_after_bs2(phi_e: float) -> tuple[float, float]:
    """Closed-form (C, P) of the two-photon state between the second and third splitters."""
    s = math.sqrt(2) * abs(math.sin(phi_e))
    c = math.cos(phi_e) / 2
    return s - c + 0.5, -s + c + 1.5


def two_photon_cr_after_bs3(phi_e: float, phi_h: float) -> tuple[float, float]:
    """Closed-form (C, P) of the two-photon output state."""
    ce, ch = math.cos(phi_e), math.cos(phi_h)
    s1 = math.sqrt(max(0.0, 2 * ce + 2 * ch - 3 * math.cos(phi_e - phi_h) + math.cos(phi_e + phi_h) + 6))
    s2 = math.sqrt(max(0.0, 2 * ce + 2 * ch + math.cos(phi_e - phi_h) - 3 * math.cos(phi_e + phi_h) + 6))
    root = math.sqrt(max(0.0, 1 - ce)) * math.sqrt(max(0.0, 1 - ch))
    C = (s1 + s2) * root / 4 + s1 * s2 / 8
    return C, 2 - C


def two_photon_density(state: np.ndarray) -> DensityMatrixView:
    """Project a two-photon register state onto the (|20>, |02>, |11>) basis."""
    from .experiments import effective_two_photon_amplitudes

    amps = effective_two_photon_amplitudes(np.asarray(state))
    leak = 1 - float(np.vdot(amps, amps).real)
    if leak > 1e-9:
        raise ValueError(f"state has weight {leak:.3e} outside the two-photon subspace")
    return DensityMatrixView.from_state(amps, TWO_PHOTON_BASIS, normalize=True)
