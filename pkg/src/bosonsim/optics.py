"""Optical elements as circuit instructions over the Gray-code encoding."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .bosonic import ModeLayout, hopping_hamiltonian
from .graycode import from_gray
from .pauli import PauliSum, exponential_exact, exponential_trotter
from .simulator import Measure, Reset, Unitary

PHASE_CONVENTIONS = ("per_photon", "occupied")


@dataclass(frozen=True)
class BeamSplitterSpec:
    """Real transmission/reflection amplitudes with T**2 + R**2 = 1."""

    T: float
    R: float

    def __post_init__(self):
        if not (0 <= self.T <= 1 and 0 <= self.R <= 1):
            raise ValueError(f"T and R must lie in [0, 1], got T={self.T}, R={self.R}")
        if abs(self.T**2 + self.R**2 - 1) > 1e-12:
            raise ValueError(f"T^2 + R^2 = {self.T**2 + self.R**2}, expected 1")

    @classmethod
    def balanced(cls) -> BeamSplitterSpec:
        return cls(math.sqrt(0.5), math.sqrt(0.5))

    @classmethod
    def mirror(cls) -> BeamSplitterSpec:
        return cls(0.0, 1.0)

    @classmethod
    def from_transmissivity(cls, t2: float) -> BeamSplitterSpec:
        """From the transmitted intensity fraction T**2."""
        if not 0 <= t2 <= 1:
            raise ValueError(f"transmissivity must lie in [0, 1], got {t2}")
        return cls(math.sqrt(t2), math.sqrt(1 - t2))

    @property
    def theta(self) -> float:
        return math.atan2(self.R, self.T)

    @property
    def lam(self) -> float:
        return self.theta / 2


@dataclass(frozen=True)
class Synthesis:
    """How beam-splitter unitaries are synthesized: exact, decomposed or trotter."""

    kind: str = "exact"
    steps: int = 1

    def __post_init__(self):
        if self.kind not in ("exact", "decomposed", "trotter"):
            raise ValueError(f"unknown synthesis mode {self.kind!r}")
        if self.steps < 1:
            raise ValueError(f"trotter steps must be >= 1, got {self.steps}")

    @classmethod
    def parse(cls, text: str | Synthesis) -> Synthesis:
        if isinstance(text, Synthesis):
            return text
        if text.startswith("trotter"):
            _, _, steps = text.partition(":")
            try:
                return cls("trotter", int(steps) if steps else 100)
            except ValueError:
                raise ValueError(f"bad trotter step count in {text!r}") from None
        return cls(text)

    def __str__(self) -> str:
        return f"trotter:{self.steps}" if self.kind == "trotter" else self.kind


# two-qubit gate set for the decompositions
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.diag([1, 1j])
_SDG = np.diag([1, -1j])
_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


class Gate(NamedTuple):
    name: str
    matrix: np.ndarray
    qubits: tuple[int, ...]


def decompose_two_qubit_rotation(axis: str, lam: float) -> list[Gate]:
    """Gate sequence (in application order) realizing exp(i*lam*P⊗P), P in {Z, X, Y}.

    ZZ is CX, RZ(-2*lam) on the target, CX; XX conjugates that by H⊗H and
    YY conjugates the XX circuit by S⊗S.
    """
    zz = [Gate("cx", _CX, (0, 1)), Gate("rz", rz(-2 * lam), (1,)), Gate("cx", _CX, (0, 1))]
    both = lambda name, m: [Gate(name, m, (0,)), Gate(name, m, (1,))]  # noqa: E731
    if axis == "ZZ":
        return zz
    if axis == "XX":
        return both("h", _H) + zz + both("h", _H)
    if axis == "YY":
        return both("sdg", _SDG) + both("h", _H) + zz + both("h", _H) + both("s", _S)
    raise ValueError(f"axis must be ZZ, XX or YY, got {axis!r}")


def gate_matrix(gate: Gate, num_qubits: int = 2) -> np.ndarray:
    if gate.qubits == tuple(range(num_qubits)):
        return gate.matrix
    (q,) = gate.qubits
    mats = [gate.matrix if k == q else np.eye(2) for k in range(num_qubits)]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def sequence_matrix(gates: Sequence[Gate], num_qubits: int = 2) -> np.ndarray:
    out = np.eye(1 << num_qubits, dtype=complex)
    for g in gates:
        out = gate_matrix(g, num_qubits) @ out
    return out


@lru_cache(maxsize=None)
def _pair_hopping(N: int) -> PauliSum:
    return hopping_hamiltonian(0, 1, ModeLayout.uniform(2, N))


@lru_cache(maxsize=256)
def _bs_matrix(theta: float, N: int, synthesis: Synthesis) -> np.ndarray:
    H = _pair_hopping(N)
    if synthesis.kind == "trotter":
        return exponential_trotter(H, theta, synthesis.steps)
    if N == 1:
        lam = theta / 2
        xx = exponential_exact(PauliSum.from_label("XX"), lam)
        yy = exponential_exact(PauliSum.from_label("YY"), lam)
        return xx @ yy
    return exponential_exact(H, theta)


def _bs_targets(modes: Sequence[int | str], layout: ModeLayout) -> tuple[int, ...]:
    if len(modes) != 2:
        raise ValueError("a beam splitter acts on exactly two modes")
    a, b = (layout.index(m) for m in modes)
    if a == b:
        raise ValueError("beam splitter modes must be distinct")
    return tuple(layout.block(a) + layout.block(b))


def beam_splitter_gate(
    spec: BeamSplitterSpec,
    modes: Sequence[int | str],
    layout: ModeLayout,
    N: int | None = None,
    synthesis: Synthesis | str = "exact",
    label: str = "bs",
) -> list[Unitary]:
    """Instructions for exp(i*theta*(b†a + a†b)) on two modes."""
    N = layout.capacity if N is None else N
    synthesis = Synthesis.parse(synthesis)
    targets = _bs_targets(modes, layout)
    if synthesis.kind == "decomposed":
        if layout.qubits_per_mode != 1:
            raise ValueError("decomposed synthesis is only available for one qubit per mode")
        gates = decompose_two_qubit_rotation("XX", spec.lam) + decompose_two_qubit_rotation("YY", spec.lam)
        return [Unitary(g.matrix, tuple(targets[q] for q in g.qubits), f"{label}:{g.name}") for g in gates]
    return [Unitary(_bs_matrix(spec.theta, N, synthesis), targets, label)]


def mirror_gate(
    modes: Sequence[int | str],
    layout: ModeLayout,
    N: int | None = None,
    synthesis: Synthesis | str = "exact",
) -> list[Unitary]:
    """Mirror pair: a beam splitter with lambda = pi/4 (full reflection, phase i per photon)."""
    return beam_splitter_gate(BeamSplitterSpec.mirror(), modes, layout, N, synthesis, label="mirror")


def phase_shifter_gate(
    mode: int | str,
    phi: float,
    layout: ModeLayout,
    N: int | None = None,
    convention: str = "per_photon",
) -> Unitary:
    """Diagonal phase on one mode block.

    ``per_photon`` applies exp(i*phi*n); ``occupied`` applies exp(i*phi)
    once whenever the mode holds any photon. Both agree for N = 1.
    """
    if convention not in PHASE_CONVENTIONS:
        raise ValueError(f"unknown phase convention {convention!r}")
    block = layout.block(mode)
    nq = len(block)
    phases = []
    for code in range(1 << nq):
        n = from_gray([(code >> (nq - 1 - k)) & 1 for k in range(nq)])
        phases.append(np.exp(1j * phi * n) if convention == "per_photon" else (np.exp(1j * phi) if n else 1.0))
    return Unitary(np.diag(phases).astype(complex), tuple(block), "phase")


def _clbit_list(clbits: int | Sequence[int], width: int) -> tuple[int, ...]:
    bits = (clbits,) if isinstance(clbits, int) else tuple(clbits)
    if len(bits) != width:
        raise ValueError(f"need {width} classical bits for this mode, got {len(bits)}")
    return bits


def blocker(mode: int | str, clbits: int | Sequence[int], layout: ModeLayout) -> list[Measure | Reset]:
    """Absorber: measure the mode block into ``clbits``, then reset it to vacuum.

    ``clbits`` pairs with the block's qubits, most significant first.
    """
    block = tuple(layout.block(mode))
    return [Measure(block, _clbit_list(clbits, len(block))), Reset(block)]


def detector(mode: int | str, clbits: int | Sequence[int], layout: ModeLayout) -> list[Measure]:
    block = tuple(layout.block(mode))
    return [Measure(block, _clbit_list(clbits, len(block)))]
