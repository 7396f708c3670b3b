"""The three interferometry experiments: circuits, analytic oracles and presets.

Register layouts
----------------
unruh            q0 = horizontal modes (A C F G J K), q1 = vertical (B D E H I L)
pessoa           q0..q3 = E A B F at input; see ``PESSOA_STAGE_QUBITS``
two_photon_unruh q0q1 = horizontal block, q2q3 = vertical block (two qubits per mode)

Classical bits
--------------
unruh       c0 = B0, c1 = B1, c2 = D0 (K), c3 = D1 (L)
pessoa      c0 = B0, c1 = B1, c2 c3 = D1 (R, P), c4 c5 = D0 (M, Q)
two photon  c1 c0 = D0 block, c3 c2 = D1 block, c5 c4 = B0, c7 c6 = B1
            (each block's most significant qubit lands on the higher bit,
            so a printed pair reads as the mode's Gray code)
"""
from __future__ import annotations

import cmath
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from typing import Sequence

import jsonschema
import numpy as np

from .bosonic import ModeLayout, encode_fock
from .graycode import from_gray
from .optics import (
    BeamSplitterSpec,
    Synthesis,
    beam_splitter_gate,
    blocker,
    detector,
    mirror_gate,
    phase_shifter_gate,
)
from .simulator import (
    Circuit,
    OutcomeDistribution,
    Trajectory,
    Unitary,
    enumerate_branches,
    run_exact,
    run_sampled,
)

KINDS = ("unruh", "pessoa", "two_photon_unruh")
PRESET_VERSION = 1

# (phi_e, phi_h) used when a config leaves them unset
DEFAULT_PHASES = {
    "unruh": (math.pi / 2, 0.0),
    "pessoa": (math.pi / 2, math.pi / 2),
    "two_photon_unruh": (math.pi, 0.0),
}


def load_schema(name: str) -> dict:
    return json.loads(resources.files("bosonsim.schemas").joinpath(name).read_text())


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    phi_e: float | None = None
    phi_h: float | None = None
    phi_n: float = math.pi
    b0: str = "off"
    b1: bool = False
    t_squared: float = 0.96
    shots: int = 8192
    seed: int = 0
    synthesis: str = "exact"
    phase_convention: str = "occupied"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        pe, ph = DEFAULT_PHASES[self.kind]
        if self.phi_e is None:
            object.__setattr__(self, "phi_e", pe)
        if self.phi_h is None:
            object.__setattr__(self, "phi_h", ph)
        if self.b0 not in ("off", "C", "D"):
            raise ValueError(f"b0 must be off, C or D, got {self.b0!r}")
        if not 0 < self.t_squared <= 1:
            raise ValueError(f"t_squared must lie in (0, 1], got {self.t_squared}")
        if self.shots < 0:
            raise ValueError(f"shots must be >= 0, got {self.shots}")
        Synthesis.parse(self.synthesis)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        jsonschema.validate(data, load_schema("config.schema.json"))
        return cls(**data)

    def with_phases(self, **phases: float) -> ExperimentConfig:
        return replace(self, **phases)


# presets ---------------------------------------------------------------

PRESET_FILES = {"unruh": "unruh.json", "pessoa": "pessoa.json", "hom": "hom.json"}


def _preset_tables() -> dict[str, dict]:
    schema = load_schema("presets.schema.json")
    schema["properties"]["presets"]["additionalProperties"] = load_schema("config.schema.json")
    out = {}
    for prefix, fname in PRESET_FILES.items():
        doc = json.loads(resources.files("bosonsim.presets").joinpath(fname).read_text())
        jsonschema.validate(doc, schema)
        if doc["version"] != PRESET_VERSION:
            raise ValueError(f"preset file {fname} has version {doc['version']}, expected {PRESET_VERSION}")
        out[prefix] = doc
    return out


def list_presets() -> list[str]:
    names = []
    for prefix, doc in _preset_tables().items():
        names.extend(f"{prefix}/{k}" for k in doc["presets"])
    return sorted(names)


def load_preset(name: str) -> ExperimentConfig:
    prefix, _, key = name.partition("/")
    tables = _preset_tables()
    if prefix not in tables:
        raise KeyError(f"unknown preset {name!r}")
    doc = tables[prefix]
    key = doc.get("aliases", {}).get(key, key)
    if key not in doc["presets"]:
        raise KeyError(f"unknown preset {name!r}")
    return ExperimentConfig.from_dict(doc["presets"][key])


# circuits --------------------------------------------------------------

@dataclass
class Experiment:
    """A built circuit plus the bookkeeping needed to read its records."""

    config: ExperimentConfig
    layout: ModeLayout
    circuit: Circuit
    # event name -> clbit tuples, one tuple per mode block (msb first)
    detectors: dict[str, list[tuple[int, ...]]]
    blockers: dict[str, list[tuple[int, ...]]]
    stages: list[str]
    # qubit (or mode block) labels after each stage
    stage_modes: dict[str, tuple[str, ...]] = field(default_factory=dict)

    @property
    def two_photon(self) -> bool:
        return self.layout.capacity == 2


class _Builder:
    def __init__(self, layout: ModeLayout, stop_after: str | None):
        self.layout = layout
        self.circuit = Circuit(layout.num_qubits)
        self.stop_after = stop_after
        self.stages: list[str] = []
        self.done = False

    def stage(self, name: str, instrs) -> None:
        if self.done:
            return
        self.circuit.extend(instrs)
        self.stages.append(name)
        if name == self.stop_after:
            self.done = True

    def finish(self) -> None:
        if self.stop_after is not None and not self.done:
            raise ValueError(f"unknown stage {self.stop_after!r}; stages are {self.stages}")


def _prepare(layout: ModeLayout, occupations: Sequence[int]) -> list:
    idx = encode_fock(occupations, layout)
    n = layout.num_qubits
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    return [Unitary(X, (q,), "x") for q in range(n) if (idx >> (n - 1 - q)) & 1]


def _check_kind(config: ExperimentConfig, kind: str) -> None:
    if config.kind != kind:
        raise ValueError(f"config kind {config.kind!r} does not match {kind!r}")


UNRUH_STAGES = ("prep", "bs1", "b0", "mirror1", "phi_e", "bs2", "b1", "phi_h", "mirror2", "bs3")
UNRUH_STAGE_MODES = {
    "prep": ("A", "B"), "bs1": ("C", "D"), "b0": ("C", "D"), "mirror1": ("F", "E"),
    "phi_e": ("F", "E"), "bs2": ("G", "H"), "b1": ("G", "H"), "phi_h": ("G", "H"),
    "mirror2": ("J", "I"), "bs3": ("K", "L"),
}


def _unruh_like(config: ExperimentConfig, capacity: int, measure: bool, stop_after: str | None) -> Experiment:
    layout = ModeLayout(("h", "v"), capacity)
    syn = Synthesis.parse(config.synthesis)
    bs = BeamSplitterSpec.balanced()
    b = _Builder(layout, stop_after)
    one = capacity == 1
    b0_bits = (0,) if one else (5, 4)
    b1_bits = (1,) if one else (7, 6)
    d0_bits = (2,) if one else (1, 0)
    d1_bits = (3,) if one else (3, 2)
    conv = config.phase_convention

    b.stage("prep", _prepare(layout, (1, 0) if one else (1, 1)))
    b.stage("bs1", beam_splitter_gate(bs, ("h", "v"), layout, synthesis=syn, label="bs1"))
    b.stage("b0", [] if config.b0 == "off" else blocker("h" if config.b0 == "C" else "v", b0_bits, layout))
    b.stage("mirror1", mirror_gate(("h", "v"), layout, synthesis=syn))
    b.stage("phi_e", [phase_shifter_gate("v", config.phi_e, layout, convention=conv)])
    b.stage("bs2", beam_splitter_gate(bs, ("h", "v"), layout, synthesis=syn, label="bs2"))
    b.stage("b1", blocker("v", b1_bits, layout) if config.b1 else [])
    b.stage("phi_h", [phase_shifter_gate("v", config.phi_h, layout, convention=conv)])
    b.stage("mirror2", mirror_gate(("h", "v"), layout, synthesis=syn))
    b.stage("bs3", beam_splitter_gate(bs, ("h", "v"), layout, synthesis=syn, label="bs3"))
    b.finish()
    if measure and not b.done:
        b.circuit.extend(detector("h", d0_bits, layout) + detector("v", d1_bits, layout))
    blockers = {}
    if config.b0 != "off":
        blockers["B0"] = [b0_bits]
    if config.b1:
        blockers["B1"] = [b1_bits]
    return Experiment(
        config, layout, b.circuit, {"D0": [d0_bits], "D1": [d1_bits]}, blockers, b.stages, dict(UNRUH_STAGE_MODES)
    )


def build_unruh(config: ExperimentConfig, measure: bool = True, stop_after: str | None = None) -> Experiment:
    """Single-photon Unruh interferometer with optional blockers B0 (C or D) and B1 (H)."""
    _check_kind(config, "unruh")
    return _unruh_like(config, 1, measure, stop_after)


def build_two_photon_unruh(config: ExperimentConfig, measure: bool = True, stop_after: str | None = None) -> Experiment:
    """Two-photon variant fed with |1,1>; each mode uses a two-qubit block."""
    _check_kind(config, "two_photon_unruh")
    return _unruh_like(config, 2, measure, stop_after)


PESSOA_STAGES = ("prep", "bs1", "b0", "bbs", "phi_h", "bs2", "b1", "mirrors", "phi_n", "bs3")
PESSOA_STAGE_QUBITS = {
    "prep": ("E", "A", "B", "F"), "bs1": ("E", "C", "D", "F"), "b0": ("E", "C", "D", "F"),
    "bbs": ("H", "G", "J", "I"), "phi_h": ("H", "G", "J", "I"), "bs2": ("L", "G", "J", "K"),
    "b1": ("L", "G", "J", "K"), "mirrors": ("N", "P", "M", "O"), "phi_n": ("N", "P", "M", "O"),
    "bs3": ("R", "P", "M", "Q"),
}


def build_pessoa(config: ExperimentConfig, measure: bool = True, stop_after: str | None = None) -> Experiment:
    """Nested interferometer with biased splitters BBS4/BBS5 in the first stage."""
    _check_kind(config, "pessoa")
    layout = ModeLayout(("q0", "q1", "q2", "q3"), 1)
    syn = Synthesis.parse(config.synthesis)
    bal = BeamSplitterSpec.balanced()
    bbs = BeamSplitterSpec.from_transmissivity(config.t_squared)
    b = _Builder(layout, stop_after)
    conv = config.phase_convention

    b.stage("prep", _prepare(layout, (0, 1, 0, 0)))
    b.stage("bs1", beam_splitter_gate(bal, (1, 2), layout, synthesis=syn, label="bs1"))
    b.stage("b0", [] if config.b0 == "off" else blocker(1 if config.b0 == "C" else 2, 0, layout))
    b.stage(
        "bbs",
        beam_splitter_gate(bbs, (1, 0), layout, synthesis=syn, label="bbs4")
        + beam_splitter_gate(bbs, (2, 3), layout, synthesis=syn, label="bbs5"),
    )
    b.stage("phi_h", [phase_shifter_gate(0, config.phi_h, layout, convention=conv)])
    b.stage("bs2", beam_splitter_gate(bal, (0, 3), layout, synthesis=syn, label="bs2"))
    b.stage("b1", blocker(0, 1, layout) if config.b1 else [])
    b.stage("mirrors", mirror_gate((1, 2), layout, synthesis=syn) + mirror_gate((3, 0), layout, synthesis=syn))
    b.stage("phi_n", [phase_shifter_gate(0, config.phi_n, layout, convention=conv)])
    b.stage("bs3", beam_splitter_gate(bal, (0, 3), layout, synthesis=syn, label="bs3"))
    b.finish()
    if measure and not b.done:
        b.circuit.extend(detector(0, 2, layout) + detector(1, 3, layout) + detector(2, 4, layout) + detector(3, 5, layout))
    blockers = {}
    if config.b0 != "off":
        blockers["B0"] = [(0,)]
    if config.b1:
        blockers["B1"] = [(1,)]
    return Experiment(
        config, layout, b.circuit, {"D0": [(4,), (5,)], "D1": [(2,), (3,)]}, blockers, b.stages, dict(PESSOA_STAGE_QUBITS)
    )


BUILDERS = {"unruh": build_unruh, "pessoa": build_pessoa, "two_photon_unruh": build_two_photon_unruh}


def build(config: ExperimentConfig, measure: bool = True, stop_after: str | None = None) -> Experiment:
    return BUILDERS[config.kind](config, measure=measure, stop_after=stop_after)


# reading records -------------------------------------------------------

def _photons(record: str, bits: tuple[int, ...], groups: list[tuple[int, ...]]) -> int:
    total = 0
    for block in groups:
        total += from_gray([int(record[bits.index(c)]) for c in block])
    return total


def record_photons(experiment: Experiment, dist: OutcomeDistribution, record: str) -> dict[str, int]:
    """Photon count per detector/blocker group for one record string."""
    groups = {**experiment.detectors, **experiment.blockers}
    return {name: _photons(record, dist.bits, g) for name, g in groups.items() if all(c in dist.bits for b in g for c in b)}


def event_probabilities(experiment: Experiment, dist: OutcomeDistribution) -> dict[str, float]:
    """Named event probabilities from a record distribution.

    Every experiment reports D0, D1 (and B0, B1 when present) as the
    probability that the group registers any photon. The two-photon
    experiment adds both_D0, both_D1 and coincidence.
    """
    names = list(experiment.detectors) + list(experiment.blockers)
    out = {n: 0.0 for n in names}
    if experiment.two_photon:
        out.update(both_D0=0.0, both_D1=0.0, coincidence=0.0)
    for rec, p in dist.probabilities.items():
        counts = record_photons(experiment, dist, rec)
        for n in names:
            if counts.get(n, 0) > 0:
                out[n] += p
        if experiment.two_photon:
            d0, d1 = counts.get("D0", 0), counts.get("D1", 0)
            if d0 == 2:
                out["both_D0"] += p
            if d1 == 2:
                out["both_D1"] += p
            if d0 == 1 and d1 == 1:
                out["coincidence"] += p
    return out


def run_config(config: ExperimentConfig, sampled: bool = False) -> tuple[Experiment, OutcomeDistribution]:
    exp = build(config)
    if sampled:
        return exp, run_sampled(exp.circuit, config.shots, config.seed)
    return exp, run_exact(exp.circuit)


def branch_states(config: ExperimentConfig, stop_after: str | None = None) -> tuple[Experiment, list[Trajectory]]:
    """Pre-detection states, one per blocker record."""
    exp = build(config, measure=False, stop_after=stop_after)
    return exp, enumerate_branches(exp.circuit)


def _sweep_point(args: tuple[ExperimentConfig, str, float]) -> dict[str, float]:
    config, phase, value = args
    exp, dist = run_config(replace(config, **{phase: value}))
    return event_probabilities(exp, dist)


SWEEPABLE = ("phi_e", "phi_h", "phi_n")


def sweep(config: ExperimentConfig, phase: str, values: Sequence[float], jobs: int = 1) -> list[dict[str, float]]:
    """Exact event probabilities at each phase value, in input order."""
    if phase not in SWEEPABLE:
        raise ValueError(f"phase must be one of {SWEEPABLE}, got {phase!r}")
    tasks = [(config, phase, float(v)) for v in values]
    if jobs <= 1:
        return [_sweep_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_point, tasks))


# analytic oracles ------------------------------------------------------

def analytic_unruh(phi_e: float, phi_h: float) -> dict[str, complex]:
    """Closed-form output amplitudes over modes K, L (keys "10" and "01")."""
    e, h = cmath.exp(1j * phi_e), cmath.exp(1j * phi_h)
    k = -(e * h - h - e - 1) / (2 * math.sqrt(2))
    l_ = -1j * (e * h + e - h + 1) / (2 * math.sqrt(2))
    return {"10": k, "01": l_}


def _bs_pair(a: complex, b: complex, T: float, R: float) -> tuple[complex, complex]:
    # photon keeps its qubit with T, hops with iR
    return T * a + 1j * R * b, T * b + 1j * R * a


_S = 1 / math.sqrt(2)


def unruh_chain(phi_e: float, phi_h: float, b0: str = "off", b1: bool = False) -> list[tuple[str, dict[str, complex]]]:
    """Stagewise single-photon amplitudes per mode name, blocked weight under B0/B1."""
    stages = []
    C, D = _bs_pair(1, 0, _S, _S)
    stages.append(("bs1", {"C": C, "D": D}))
    blocked: dict[str, complex] = {}
    if b0 == "C":
        blocked["B0"], C = C, 0
    elif b0 == "D":
        blocked["B0"], D = D, 0
    F, E = 1j * D, 1j * C
    E *= cmath.exp(1j * phi_e)
    stages.append(("phi_e", {"F": F, "E": E, **blocked}))
    G, H = _bs_pair(F, E, _S, _S)
    stages.append(("bs2", {"G": G, "H": H, **blocked}))
    if b1:
        blocked["B1"], H = H, 0
    H *= cmath.exp(1j * phi_h)
    J, I = 1j * H, 1j * G
    stages.append(("mirror2", {"J": J, "I": I, **blocked}))
    K, L = _bs_pair(J, I, _S, _S)
    stages.append(("bs3", {"K": K, "L": L, **blocked}))
    return stages


def analytic_pessoa(
    t_squared: float = 0.96, phi_h: float = math.pi / 2, phi_n: float = math.pi, b0: str = "off", b1: bool = False
) -> list[tuple[str, dict[str, complex]]]:
    """Stagewise single-photon amplitudes of the nested interferometer.

    Blocked weight is carried under keys B0 and B1; the final stage holds
    modes M, Q (detector D0) and R, P (detector D1).
    """
    T, R = math.sqrt(t_squared), math.sqrt(1 - t_squared)
    stages = []
    C, D = _bs_pair(1, 0, _S, _S)
    stages.append(("bs1", {"C": C, "D": D}))
    blocked: dict[str, complex] = {}
    if b0 == "C":
        blocked["B0"], C = C, 0
    elif b0 == "D":
        blocked["B0"], D = D, 0
    G, H = _bs_pair(C, 0, T, R)
    J, I = _bs_pair(D, 0, T, R)
    stages.append(("bbs", {"G": G, "H": H, "I": I, "J": J, **blocked}))
    H *= cmath.exp(1j * phi_h)
    stages.append(("phi_h", {"G": G, "H": H, "I": I, "J": J, **blocked}))
    L, K = _bs_pair(H, I, _S, _S)
    stages.append(("bs2", {"G": G, "K": K, "L": L, "J": J, **blocked}))
    if b1:
        blocked["B1"], L = L, 0
    P, M = _bs_pair(G, J, 0, 1)
    N, O = _bs_pair(L, K, 0, 1)
    stages.append(("mirrors", {"M": M, "N": N, "O": O, "P": P, **blocked}))
    N *= cmath.exp(1j * phi_n)
    stages.append(("phi_n", {"M": M, "N": N, "O": O, "P": P, **blocked}))
    Rm, Q = _bs_pair(N, O, _S, _S)
    stages.append(("bs3", {"M": M, "Q": Q, "R": Rm, "P": P, **blocked}))
    return stages


def single_photon_events(amps: dict[str, complex], groups: dict[str, Sequence[str]]) -> dict[str, float]:
    return {name: float(sum(abs(amps.get(m, 0)) ** 2 for m in modes)) for name, modes in groups.items()}


PESSOA_GROUPS = {"D0": ("M", "Q"), "D1": ("R", "P"), "B0": ("B0",), "B1": ("B1",)}
UNRUH_GROUPS = {"D0": ("K",), "D1": ("L",), "B0": ("B0",), "B1": ("B1",)}


def single_photon_vector(amps: dict[str, complex], qubit_modes: Sequence[str]) -> np.ndarray:
    """Register vector for one photon spread over named modes, one qubit each.

    Mode names absent from ``qubit_modes`` (blocked weight) are ignored; the
    result is renormalized, giving the state of the unblocked branch.
    """
    n = len(qubit_modes)
    psi = np.zeros(1 << n, dtype=complex)
    for q, mode in enumerate(qubit_modes):
        psi[1 << (n - 1 - q)] = amps.get(mode, 0)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("no amplitude left on the register")
    return psi / norm


# two-photon states in the (|20>, |02>, |11>) basis; "hv" means the ket lists
# the horizontal block first, "vh" the vertical block first
TWO_PHOTON_KET_ORDER = {"bs1": "hv", "phi_e": "vh", "bs2": "hv", "mirror2": "vh", "bs3": "hv"}


def analytic_two_photon(phi_e: float, phi_h: float, block: str = "none") -> dict[str, dict[str, complex]]:
    """Stage states of the two-photon experiment keyed by stage, then ket label.

    ``block`` selects the unblocked evolution (``none``) or the surviving
    branch after absorbing mode C or D; blocked branches start at ``phi_e``.
    """
    e, h = cmath.exp(1j * phi_e), cmath.exp(1j * phi_h)
    r2 = math.sqrt(2)
    if block == "none":
        return {
            "bs1": {"20": 1j / r2, "02": 1j / r2, "11": 0},
            "phi_e": {"20": -1j * e / r2, "02": -1j / r2, "11": 0},
            "bs2": {"20": 1j * (e - 1) / (2 * r2), "02": -1j * (e - 1) / (2 * r2), "11": (1 + e) / 2},
            "mirror2": {
                "20": 1j * (1 - e) / (2 * r2),
                "02": -1j * (1 - e) * h / (2 * r2),
                "11": -(1 + e) * h / 2,
            },
            "bs3": {
                "20": -1j * r2 / 8 * (1 - e + 3 * h + h * e),
                "02": 1j * r2 / 8 * (1 - e - h - 3 * h * e),
                "11": -(1 - e) * (1 - h) / 4,
            },
        }
    if block == "C":
        return {
            "phi_e": {"20": 0, "02": -1j, "11": 0},
            "bs2": {"20": -0.5j, "02": 0.5j, "11": 1 / r2},
            "mirror2": {"20": 0.5j, "02": -0.5j * h, "11": -h / r2},
            "bs3": {"20": -0.25j * (1 + 3 * h), "02": 0.25j * (1 - h), "11": -(1 - h) * r2 / 4},
        }
    if block == "D":
        return {
            "phi_e": {"20": -1j * e, "02": 0, "11": 0},
            "bs2": {"20": 0.5j * e, "02": -0.5j * e, "11": e / r2},
            "mirror2": {"20": -0.5j * e, "02": 0.5j * e * h, "11": -e * h / r2},
            "bs3": {"20": 0.25j * e * (1 - h), "02": -0.25j * e * (1 + 3 * h), "11": r2 * e * (1 - h) / 4},
        }
    raise ValueError(f"block must be none, C or D, got {block!r}")


def two_photon_vector(amps: dict[str, complex], order: str = "hv") -> np.ndarray:
    """Embed a (|20>, |02>, |11>) state into the four-qubit register."""
    layout = ModeLayout(("h", "v"), 2)
    psi = np.zeros(1 << layout.num_qubits, dtype=complex)
    for label, amp in amps.items():
        a, b = int(label[0]), int(label[1])
        occ = (a, b) if order == "hv" else (b, a)
        psi[encode_fock(occ, layout)] += amp
    return psi


def effective_two_photon_amplitudes(state: np.ndarray) -> np.ndarray:
    """Register amplitudes of (|20>, |02>, |11>) over the (h, v) blocks."""
    layout = ModeLayout(("h", "v"), 2)
    return np.array([state[encode_fock(occ, layout)] for occ in ((2, 0), (0, 2), (1, 1))])


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for normalized vectors; insensitive to global phase."""
    return float(abs(np.vdot(a, b)) ** 2)
