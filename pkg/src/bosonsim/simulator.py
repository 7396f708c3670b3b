"""Exact statevector simulation with mid-circuit measurement and reset.

States are plain complex numpy vectors of length 2**n, qubit 0 being the
most significant bit. ``run_exact`` enumerates every measurement branch
depth first; ``run_sampled`` walks the same tree but splits the shot budget
multinomially at every branch point, which gives the same statistics as
independent trajectories.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

UNITARY_TOL = 1e-10
NORM_TOL = 1e-10
PRUNE_TOL = 1e-12

# RNG contract: NumPy Generator over PCG64 seeded through SeedSequence(seed).
RNG_ALGORITHM = "PCG64"


class NumericalError(RuntimeError):
    """Raised when a state drifts away from unit norm."""


@dataclass(frozen=True)
class Unitary:
    matrix: np.ndarray
    targets: tuple[int, ...]
    label: str = ""


@dataclass(frozen=True)
class Measure:
    targets: tuple[int, ...]
    clbits: tuple[int, ...]


@dataclass(frozen=True)
class Reset:
    targets: tuple[int, ...]


Instruction = Unitary | Measure | Reset


def zero_state(num_qubits: int) -> np.ndarray:
    psi = np.zeros(1 << num_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def _check_unitary(U: np.ndarray, k: int) -> None:
    if U.shape != (1 << k, 1 << k):
        raise ValueError(f"matrix of shape {U.shape} does not act on {k} qubits")
    if np.max(np.abs(U.conj().T @ U - np.eye(1 << k))) > UNITARY_TOL:
        raise ValueError("matrix is not unitary")


def _check_targets(targets: Sequence[int], num_qubits: int) -> tuple[int, ...]:
    targets = tuple(int(q) for q in targets)
    if not targets:
        raise ValueError("instruction needs at least one target")
    if len(set(targets)) != len(targets):
        raise ValueError(f"repeated target qubit in {targets}")
    if any(q < 0 or q >= num_qubits for q in targets):
        raise ValueError(f"target out of range in {targets} for {num_qubits} qubits")
    return targets


@dataclass
class Circuit:
    """Ordered instruction list over ``num_qubits`` qubits.

    Classical bits are integers ``j`` (named ``c{j}``); each may be written
    by exactly one measurement.
    """

    num_qubits: int
    instructions: list[Instruction] = field(default_factory=list)
    clbits: list[int] = field(default_factory=list)

    def append(self, instr: Instruction) -> Circuit:
        if isinstance(instr, Unitary):
            targets = _check_targets(instr.targets, self.num_qubits)
            _check_unitary(instr.matrix, len(targets))
        elif isinstance(instr, Measure):
            targets = _check_targets(instr.targets, self.num_qubits)
            if len(instr.clbits) != len(targets):
                raise ValueError("one classical bit per measured qubit is required")
            for b in instr.clbits:
                if b < 0:
                    raise ValueError(f"invalid classical bit {b}")
                if b in self.clbits:
                    raise ValueError(f"classical bit c{b} is already written")
            self.clbits.extend(instr.clbits)
        elif isinstance(instr, Reset):
            _check_targets(instr.targets, self.num_qubits)
        else:
            raise TypeError(f"unsupported instruction {instr!r}")
        self.instructions.append(instr)
        return self

    def extend(self, instrs) -> Circuit:
        for instr in instrs:
            self.append(instr)
        return self

    def unitary(self, matrix: np.ndarray, targets: Sequence[int], label: str = "") -> Circuit:
        return self.append(Unitary(np.asarray(matrix, dtype=complex), tuple(targets), label))

    def x(self, qubit: int) -> Circuit:
        return self.unitary(np.array([[0, 1], [1, 0]]), [qubit], "x")

    def measure(self, targets: Sequence[int], clbits: Sequence[int]) -> Circuit:
        return self.append(Measure(tuple(targets), tuple(clbits)))

    def reset(self, targets: Sequence[int]) -> Circuit:
        return self.append(Reset(tuple(targets)))

    @property
    def record_bits(self) -> tuple[int, ...]:
        """Classical bits in print order (descending index)."""
        return tuple(sorted(self.clbits, reverse=True))

    def record_label(self) -> str:
        return "".join(f"c{b}" for b in self.record_bits)


def apply_unitary(state: np.ndarray, U: np.ndarray, targets: Sequence[int], check: bool = True) -> np.ndarray:
    """Apply ``U`` to ``targets``; the first target is the most significant bit of ``U``."""
    n = int(np.log2(state.size))
    targets = _check_targets(targets, n) if check else tuple(targets)
    k = len(targets)
    if check:
        _check_unitary(U, k)
    psi = state.reshape([2] * n)
    psi = np.moveaxis(psi, targets, range(k)).reshape(1 << k, -1)
    psi = (U @ psi).reshape([2] * n)
    return np.moveaxis(psi, range(k), targets).reshape(-1)


def _outcome_probabilities(state: np.ndarray, targets: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    n = int(np.log2(state.size))
    k = len(targets)
    grouped = np.moveaxis(state.reshape([2] * n), targets, range(k)).reshape(1 << k, -1)
    return np.sum(np.abs(grouped) ** 2, axis=1), grouped


def _rebuild(grouped: np.ndarray, targets: tuple[int, ...], n: int) -> np.ndarray:
    k = len(targets)
    psi = grouped.reshape([2] * n)
    return np.moveaxis(psi, range(k), targets).reshape(-1)


class Branch(NamedTuple):
    outcome: tuple[int, ...]
    probability: float
    state: np.ndarray


def _bits(value: int, k: int) -> tuple[int, ...]:
    return tuple((value >> (k - 1 - j)) & 1 for j in range(k))


def measure(state: np.ndarray, targets: Sequence[int], reset: bool = False) -> list[Branch]:
    """Projective measurement of ``targets`` in the computational basis.

    Returns one branch per outcome with probability above ``PRUNE_TOL``;
    post-states are renormalized and, with ``reset``, returned to |0...0>
    on the targets.
    """
    targets = tuple(targets)
    n = int(np.log2(state.size))
    k = len(targets)
    probs, grouped = _outcome_probabilities(state, targets)
    out = []
    for o in range(1 << k):
        p = float(probs[o])
        if p <= PRUNE_TOL:
            continue
        post = np.zeros_like(grouped)
        post[0 if reset else o] = grouped[o] / np.sqrt(p)
        out.append(Branch(_bits(o, k), p, _rebuild(post, targets, n)))
    return out


def measure_and_reset(state: np.ndarray, targets: Sequence[int]) -> list[Branch]:
    """Blocker primitive: record the targets, then send them to |0>."""
    return measure(state, targets, reset=True)


class Trajectory(NamedTuple):
    record: dict[int, int]
    probability: float
    state: np.ndarray


def _check_norm(state: np.ndarray) -> None:
    drift = abs(np.vdot(state, state).real - 1.0)
    if drift > NORM_TOL:
        raise NumericalError(f"state norm drifted by {drift:.3e}")


def _initial(circuit: Circuit, initial: np.ndarray | None) -> np.ndarray:
    if initial is None:
        return zero_state(circuit.num_qubits)
    psi = np.asarray(initial, dtype=complex)
    if psi.size != 1 << circuit.num_qubits:
        raise ValueError("initial state does not match the register size")
    _check_norm(psi)
    return psi


def enumerate_branches(circuit: Circuit, initial: np.ndarray | None = None) -> list[Trajectory]:
    """Every measurement branch of ``circuit`` with its record, probability and final state."""
    out: list[Trajectory] = []

    def walk(pos: int, state: np.ndarray, record: dict[int, int], prob: float) -> None:
        instrs = circuit.instructions
        while pos < len(instrs):
            instr = instrs[pos]
            pos += 1
            if isinstance(instr, Unitary):
                state = apply_unitary(state, instr.matrix, instr.targets, check=False)
                _check_norm(state)
                continue
            reset = isinstance(instr, Reset)
            for outcome, p, post in measure(state, instr.targets, reset=reset):
                if prob * p <= PRUNE_TOL:
                    continue
                rec = record if reset else {**record, **dict(zip(instr.clbits, outcome))}
                walk(pos, post, rec, prob * p)
            return
        out.append(Trajectory(record, prob, state))

    walk(0, _initial(circuit, initial), {}, 1.0)
    return out


def final_state(circuit: Circuit, initial: np.ndarray | None = None) -> np.ndarray:
    """Statevector of a circuit without measurements or resets."""
    if any(not isinstance(i, Unitary) for i in circuit.instructions):
        raise ValueError("circuit contains non-unitary instructions; use enumerate_branches")
    (traj,) = enumerate_branches(circuit, initial)
    return traj.state


@dataclass
class OutcomeDistribution:
    """Probabilities keyed by record strings printed as c_max ... c_0."""

    bits: tuple[int, ...]
    probabilities: dict[str, float]
    counts: dict[str, int] | None = None
    shots: int | None = None

    def __getitem__(self, key: str) -> float:
        return self.probabilities.get(key, 0.0)

    def items(self) -> Iterator[tuple[str, float]]:
        return iter(sorted(self.probabilities.items()))

    def bit(self, record: str, clbit: int) -> int:
        return int(record[self.bits.index(clbit)])

    def marginal(self, keep: Sequence[int]) -> OutcomeDistribution:
        keep = tuple(sorted(keep, reverse=True))
        probs: dict[str, float] = {}
        counts: dict[str, int] | None = {} if self.counts is not None else None
        for rec, p in self.probabilities.items():
            key = "".join(rec[self.bits.index(b)] for b in keep)
            probs[key] = probs.get(key, 0.0) + p
            if counts is not None:
                counts[key] = counts.get(key, 0) + self.counts.get(rec, 0)
        return OutcomeDistribution(keep, probs, counts, self.shots)

    def total_variation(self, other: OutcomeDistribution) -> float:
        keys = set(self.probabilities) | set(other.probabilities)
        return 0.5 * sum(abs(self[k] - other[k]) for k in keys)


def _record_string(record: dict[int, int], bits: tuple[int, ...]) -> str:
    return "".join(str(record[b]) for b in bits)


def run_exact(circuit: Circuit, initial: np.ndarray | None = None) -> OutcomeDistribution:
    bits = circuit.record_bits
    probs: dict[str, float] = {}
    for traj in enumerate_branches(circuit, initial):
        key = _record_string(traj.record, bits)
        probs[key] = probs.get(key, 0.0) + traj.probability
    return OutcomeDistribution(bits, probs)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def run_sampled(circuit: Circuit, shots: int, seed: int, initial: np.ndarray | None = None) -> OutcomeDistribution:
    """Sample ``shots`` trajectories reproducibly from ``seed``."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    rng = make_rng(seed)
    bits = circuit.record_bits
    counts: dict[str, int] = {}

    def walk(pos: int, state: np.ndarray, record: dict[int, int], budget: int) -> None:
        instrs = circuit.instructions
        while pos < len(instrs):
            instr = instrs[pos]
            pos += 1
            if isinstance(instr, Unitary):
                state = apply_unitary(state, instr.matrix, instr.targets, check=False)
                _check_norm(state)
                continue
            reset = isinstance(instr, Reset)
            branches = measure(state, instr.targets, reset=reset)
            p = np.array([b.probability for b in branches])
            split = rng.multinomial(budget, p / p.sum())
            for (outcome, _, post), m in zip(branches, split):
                if m:
                    rec = record if reset else {**record, **dict(zip(instr.clbits, outcome))}
                    walk(pos, post, rec, int(m))
            return
        key = _record_string(record, bits)
        counts[key] = counts.get(key, 0) + budget

    walk(0, _initial(circuit, initial), {}, shots)
    counts = dict(sorted(counts.items()))
    return OutcomeDistribution(bits, {k: v / shots for k, v in counts.items()}, counts, shots)
