"""Gray-code encoding of multi-mode Fock states and bosonic operators.

Each optical mode owns a contiguous block of ``qubits_per_mode`` qubits; a
mode holding ``n`` photons is written as the Gray code of ``n`` in its block.
Ladder operators follow the truncated sum over ``n = 0..N-1``: on the bit
where G(n) and G(n+1) differ a spin ladder acts, every other bit of the
block gets the projector onto its current value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .graycode import bits_to_int, from_gray, to_gray
from .pauli import PauliSum, embed, ladder, tensor


def qubits_for_capacity(N: int) -> int:
    if N < 1:
        raise ValueError(f"capacity must be positive, got {N}")
    return max(1, math.ceil(math.log2(N + 1)))


@dataclass(frozen=True)
class FockState:
    occupations: tuple[int, ...]
    capacity: int

    def __post_init__(self):
        object.__setattr__(self, "occupations", tuple(int(n) for n in self.occupations))
        if any(n < 0 for n in self.occupations):
            raise ValueError(f"negative occupation in {self.occupations}")
        if any(n > self.capacity for n in self.occupations):
            raise ValueError(f"occupation exceeds capacity {self.capacity}: {self.occupations}")
        if sum(self.occupations) > self.capacity:
            raise ValueError(f"total photon number exceeds capacity {self.capacity}: {self.occupations}")

    @property
    def total(self) -> int:
        return sum(self.occupations)


@dataclass(frozen=True)
class ModeLayout:
    """Assignment of named modes to contiguous qubit blocks, in declared order."""

    mode_names: tuple[str, ...]
    capacity: int

    def __post_init__(self):
        object.__setattr__(self, "mode_names", tuple(self.mode_names))
        if not self.mode_names:
            raise ValueError("layout needs at least one mode")
        if len(set(self.mode_names)) != len(self.mode_names):
            raise ValueError(f"duplicate mode names in {self.mode_names}")
        qubits_for_capacity(self.capacity)

    @classmethod
    def uniform(cls, mode_count: int, capacity: int) -> ModeLayout:
        return cls(tuple(str(j) for j in range(mode_count)), capacity)

    @property
    def mode_count(self) -> int:
        return len(self.mode_names)

    @property
    def qubits_per_mode(self) -> int:
        return qubits_for_capacity(self.capacity)

    @property
    def num_qubits(self) -> int:
        return self.mode_count * self.qubits_per_mode

    def index(self, mode: int | str) -> int:
        if isinstance(mode, str) and mode in self.mode_names:
            return self.mode_names.index(mode)
        if isinstance(mode, int) and 0 <= mode < self.mode_count:
            return mode
        raise ValueError(f"unknown mode {mode!r} in layout {self.mode_names}")

    def block(self, mode: int | str) -> list[int]:
        j = self.index(mode)
        q = self.qubits_per_mode
        return list(range(j * q, (j + 1) * q))


def encode_fock(f: FockState | Sequence[int], layout: ModeLayout) -> int:
    """Basis index of the register state encoding Fock state ``f``."""
    occ = f.occupations if isinstance(f, FockState) else tuple(f)
    if len(occ) != layout.mode_count:
        raise ValueError(f"{len(occ)} occupations for {layout.mode_count} modes")
    if any(n < 0 or n > layout.capacity for n in occ):
        raise ValueError(f"occupation outside [0, {layout.capacity}]: {occ}")
    bits: list[int] = []
    for n in occ:
        bits.extend(to_gray(n, layout.qubits_per_mode))
    return bits_to_int(bits)


def decode_basis(index: int, layout: ModeLayout) -> tuple[int, ...]:
    """Occupations read back from a register basis index.

    Codes above the capacity decode to their Gray value; callers decide
    whether such states are physical.
    """
    q = layout.qubits_per_mode
    n = layout.num_qubits
    bits = [(index >> (n - 1 - k)) & 1 for k in range(n)]
    return tuple(from_gray(bits[j * q:(j + 1) * q]) for j in range(layout.mode_count))


@lru_cache(maxsize=None)
def _single_mode_ladder(N: int, create: bool) -> PauliSum:
    nq = qubits_for_capacity(N)
    total = PauliSum.identity(nq, 0)
    for n in range(N):
        g0, g1 = to_gray(n, nq), to_gray(n + 1, nq)
        factors = []
        for j in range(nq):
            if g0[j] == g1[j]:
                factors.append(ladder(f"P{g0[j]}"))
            else:
                factors.append(ladder(f"S{g0[j]}†" if create else f"S{g0[j]}"))
        total = total + tensor(*factors) * math.sqrt(n + 1)
    return total


def _resolve_capacity(layout: ModeLayout, N: int | None) -> int:
    if N is None:
        return layout.capacity
    if qubits_for_capacity(N) != layout.qubits_per_mode:
        raise ValueError(f"capacity {N} needs {qubits_for_capacity(N)} qubits per mode, layout has {layout.qubits_per_mode}")
    return N


def creation_op(mode: int | str, layout: ModeLayout, N: int | None = None) -> PauliSum:
    N = _resolve_capacity(layout, N)
    start = layout.block(mode)[0]
    return embed(_single_mode_ladder(N, True), start, layout.num_qubits)


def annihilation_op(mode: int | str, layout: ModeLayout, N: int | None = None) -> PauliSum:
    N = _resolve_capacity(layout, N)
    start = layout.block(mode)[0]
    return embed(_single_mode_ladder(N, False), start, layout.num_qubits)


def number_op(mode: int | str, layout: ModeLayout, N: int | None = None) -> PauliSum:
    return creation_op(mode, layout, N) @ annihilation_op(mode, layout, N)


def hopping_hamiltonian(mode_a: int | str, mode_b: int | str, layout: ModeLayout, N: int | None = None) -> PauliSum:
    """Mapped ``b†a + a†b`` for two distinct modes."""
    if layout.index(mode_a) == layout.index(mode_b):
        raise ValueError("hopping needs two distinct modes")
    a, b = annihilation_op(mode_a, layout, N), annihilation_op(mode_b, layout, N)
    ad, bd = creation_op(mode_a, layout, N), creation_op(mode_b, layout, N)
    return bd @ a + ad @ b


def physical_indices(layout: ModeLayout, max_photons: int | None = None) -> list[int]:
    """Basis indices of encoded Fock states holding at most ``max_photons`` in total."""
    cap = layout.capacity if max_photons is None else max_photons
    out = []
    for idx in range(1 << layout.num_qubits):
        occ = decode_basis(idx, layout)
        if all(n <= layout.capacity for n in occ) and sum(occ) <= cap:
            out.append(idx)
    return out
