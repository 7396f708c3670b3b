"""Complex-weighted Pauli strings, their dense matrices and exponentials.

Letter ``k`` of a string acts on qubit ``k``; qubit 0 is the most
significant bit of a basis index (leftmost Kronecker factor).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Mapping

import numpy as np

MERGE_TOL = 1e-12
HERMITIAN_TOL = 1e-10
MAX_QUBITS = 14

# single-letter products: (a, b) -> (phase, letter) with a*b = phase*letter
_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


@dataclass(frozen=True)
class PauliString:
    coefficient: complex
    letters: str

    def __post_init__(self):
        if not self.letters or set(self.letters) - set("IXYZ"):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")

    @property
    def num_qubits(self) -> int:
        return len(self.letters)

    def masks(self) -> tuple[int, int]:
        """Bit masks of flipped qubits (X or Y) and sign qubits (Y or Z)."""
        n = len(self.letters)
        x = z = 0
        for k, ch in enumerate(self.letters):
            bit = 1 << (n - 1 - k)
            if ch in "XY":
                x |= bit
            if ch in "YZ":
                z |= bit
        return x, z

    def to_matrix(self) -> np.ndarray:
        n = self.num_qubits
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
        x, z = self.masks()
        cols = np.arange(1 << n)
        # Y|b> = i(-1)^b |1-b>, Z|b> = (-1)^b |b>
        masked = cols & z
        parity = np.zeros_like(cols)
        for k in range(n):
            parity ^= (masked >> k) & 1
        phase = (1j) ** self.letters.count("Y") * (1 - 2 * parity)
        out = np.zeros((1 << n, 1 << n), dtype=complex)
        out[cols ^ x, cols] = self.coefficient * phase
        return out


class PauliSum:
    """Immutable sum of Pauli strings of equal length.

    Identical letter sequences are merged and coefficients below
    ``MERGE_TOL`` are dropped. Term order is first-insertion order.
    """

    __slots__ = ("_terms", "_n")

    def __init__(self, terms: Mapping[str, complex] | Iterable[tuple[str, complex]] = (), num_qubits: int | None = None):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[str, complex] = {}
        n = num_qubits
        for letters, coeff in items:
            if n is None:
                n = len(letters)
            if len(letters) != n:
                raise ValueError(f"term {letters!r} does not act on {n} qubits")
            if set(letters) - set("IXYZ"):
                raise ValueError(f"invalid Pauli letters {letters!r}")
            merged[letters] = merged.get(letters, 0) + complex(coeff)
        if n is None:
            raise ValueError("empty PauliSum needs num_qubits")
        self._terms = {k: v for k, v in merged.items() if abs(v) >= MERGE_TOL}
        self._n = n

    @classmethod
    def from_label(cls, letters: str, coeff: complex = 1.0) -> PauliSum:
        return cls([(letters, coeff)])

    @classmethod
    def identity(cls, num_qubits: int, coeff: complex = 1.0) -> PauliSum:
        return cls([("I" * num_qubits, coeff)])

    @property
    def num_qubits(self) -> int:
        return self._n

    @property
    def terms(self) -> list[PauliString]:
        return [PauliString(c, s) for s, c in self._terms.items()]

    def __iter__(self) -> Iterator[PauliString]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, letters: str) -> complex:
        return self._terms.get(letters, 0j)

    def as_dict(self) -> dict[str, complex]:
        return dict(self._terms)

    def _check_same(self, other: PauliSum) -> None:
        if other.num_qubits != self._n:
            raise ValueError(f"qubit count mismatch: {self._n} vs {other.num_qubits}")

    def __add__(self, other: PauliSum) -> PauliSum:
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check_same(other)
        return PauliSum([*self._terms.items(), *other._terms.items()], self._n)

    def __neg__(self) -> PauliSum:
        return self * -1

    def __sub__(self, other: PauliSum) -> PauliSum:
        return self + (-other)

    def __mul__(self, scalar: complex) -> PauliSum:
        if isinstance(scalar, PauliSum):
            return NotImplemented
        return PauliSum([(s, c * scalar) for s, c in self._terms.items()], self._n)

    __rmul__ = __mul__

    def __matmul__(self, other: PauliSum) -> PauliSum:
        """Operator product ``self @ other``."""
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check_same(other)
        out = []
        for sa, ca in self._terms.items():
            for sb, cb in other._terms.items():
                phase = 1
                letters = []
                for a, b in zip(sa, sb):
                    p, ch = _PRODUCT[a, b]
                    phase *= p
                    letters.append(ch)
                out.append(("".join(letters), ca * cb * phase))
        return PauliSum(out, self._n)

    def dagger(self) -> PauliSum:
        return PauliSum([(s, np.conj(c)) for s, c in self._terms.items()], self._n)

    def to_matrix(self) -> np.ndarray:
        if self._n > MAX_QUBITS:
            raise ValueError(f"{self._n} qubits exceeds the dense limit of {MAX_QUBITS}")
        dim = 1 << self._n
        out = np.zeros((dim, dim), dtype=complex)
        for term in self.terms:
            out += term.to_matrix()
        return out

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum) or other.num_qubits != self._n:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coefficient(k) - other.coefficient(k)) < MERGE_TOL for k in keys)

    def __repr__(self) -> str:
        if not self._terms:
            return f"PauliSum(0, num_qubits={self._n})"
        body = " + ".join(f"({c:.6g})*{s}" for s, c in self._terms.items())
        return f"PauliSum({body})"


_LADDER = {
    # projectors |0><0|, |1><1| and ladders |0><1|, |1><0|
    "P0": [("I", 0.5), ("Z", 0.5)],
    "P1": [("I", 0.5), ("Z", -0.5)],
    "S0": [("X", 0.5), ("Y", 0.5j)],
    "S1": [("X", 0.5), ("Y", -0.5j)],
    "S0†": [("X", 0.5), ("Y", -0.5j)],
    "S1†": [("X", 0.5), ("Y", 0.5j)],
}


def ladder(kind: str) -> PauliSum:
    """Single-qubit projector or ladder operator as a PauliSum.

    ``kind`` is one of P0, P1, S0, S1, S0†, S1† (``S0dag`` is accepted for
    ``S0†``).
    """
    kind = kind.replace("dag", "†")
    try:
        return PauliSum(_LADDER[kind])
    except KeyError:
        raise ValueError(f"unknown ladder kind {kind!r}") from None


def tensor(*factors: PauliSum) -> PauliSum:
    """Tensor product; the first factor acts on the most significant qubits."""

    def pair(a: PauliSum, b: PauliSum) -> PauliSum:
        return PauliSum(
            [(sa + sb, ca * cb) for sa, ca in a.as_dict().items() for sb, cb in b.as_dict().items()],
            a.num_qubits + b.num_qubits,
        )

    return reduce(pair, factors)


def embed(op: PauliSum, start: int, num_qubits: int) -> PauliSum:
    """Pad ``op`` with identities so it acts on qubits ``start..`` of a wider register."""
    after = num_qubits - start - op.num_qubits
    if start < 0 or after < 0:
        raise ValueError("operator does not fit in the register")
    return PauliSum([("I" * start + s + "I" * after, c) for s, c in op.as_dict().items()], num_qubits)


def _require_hermitian(H: PauliSum) -> None:
    if not H.is_hermitian():
        raise ValueError("Hamiltonian is not Hermitian")


def exponential_exact(H: PauliSum | np.ndarray, lam: float) -> np.ndarray:
    """Dense ``exp(i*lam*H)`` from the eigendecomposition of Hermitian ``H``."""
    M = H.to_matrix() if isinstance(H, PauliSum) else np.asarray(H, dtype=complex)
    if np.max(np.abs(M - M.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValueError("Hamiltonian is not Hermitian")
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    return (V * np.exp(1j * lam * w)) @ V.conj().T


def pauli_rotation(term: PauliString, angle: float) -> np.ndarray:
    """``exp(i*angle*c*P)`` for a real-weighted Pauli string, using P^2 = I."""
    if abs(term.coefficient.imag) > HERMITIAN_TOL:
        raise ValueError(f"term {term.letters} has a non-real coefficient")
    a = angle * term.coefficient.real
    P = PauliString(1.0, term.letters).to_matrix()
    return np.cos(a) * np.eye(P.shape[0]) + 1j * np.sin(a) * P


def exponential_trotter(H: PauliSum, lam: float, steps: int) -> np.ndarray:
    """First-order product formula ``(prod_k exp(i*lam*h_k/steps))**steps``.

    The product runs over the terms of ``H`` in their stored order.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    _require_hermitian(H)
    step = np.eye(1 << H.num_qubits, dtype=complex)
    for term in H:
        step = pauli_rotation(term, lam / steps) @ step
    return np.linalg.matrix_power(step, steps)
