import itertools
import math

import numpy as np
import pytest

from bosonsim.analysis import visibility
from bosonsim.experiments import (
    PESSOA_GROUPS,
    PESSOA_STAGE_QUBITS,
    TWO_PHOTON_KET_ORDER,
    UNRUH_GROUPS,
    ExperimentConfig,
    analytic_pessoa,
    analytic_two_photon,
    analytic_unruh,
    branch_states,
    build,
    build_pessoa,
    build_two_photon_unruh,
    build_unruh,
    event_probabilities,
    fidelity,
    list_presets,
    load_preset,
    record_photons,
    run_config,
    single_photon_events,
    single_photon_vector,
    sweep,
    two_photon_vector,
    unruh_chain,
)

GRID = np.linspace(0, 2 * math.pi, 16, endpoint=False)
PI = math.pi


def probs(name):
    exp, dist = run_config(load_preset(name))
    return dist.probabilities, event_probabilities(exp, dist)


def close(d, ref, tol=1e-10):
    keys = set(d) | set(ref)
    return all(abs(d.get(k, 0) - ref.get(k, 0)) <= tol for k in keys)


# presets and config ------------------------------------------------------

def test_preset_catalogue():
    names = list_presets()
    for n in ("unruh/no-blockers", "unruh/B0-D", "unruh/B1", "unruh/both", "pessoa/both-blockers", "hom/no-blockers"):
        assert n in names
    assert load_preset("unruh/both-blockers") == load_preset("unruh/both")
    assert load_preset("pessoa/both") == load_preset("pessoa/both-blockers")
    with pytest.raises(KeyError):
        load_preset("unknown/x")
    with pytest.raises(KeyError):
        load_preset("unruh/nothing")


def test_config_defaults_and_validation():
    p = ExperimentConfig("pessoa")
    assert p.t_squared == 0.96 and p.phi_n == PI and p.phi_h == pytest.approx(PI / 2)
    for bad in (dict(kind="laser"), dict(kind="unruh", b0="E"), dict(kind="pessoa", t_squared=0.0),
                dict(kind="unruh", synthesis="magic"), dict(kind="unruh", shots=-1)):
        with pytest.raises(ValueError):
            ExperimentConfig(**bad)
    with pytest.raises(Exception):
        ExperimentConfig.from_dict({"kind": "unruh", "colour": "red"})
    assert ExperimentConfig.from_dict(p.to_dict()) == p


def test_builder_kind_mismatch():
    with pytest.raises(ValueError):
        build_unruh(ExperimentConfig("pessoa"))
    with pytest.raises(ValueError):
        build_pessoa(ExperimentConfig("unruh"))
    with pytest.raises(ValueError):
        build_two_photon_unruh(ExperimentConfig("unruh"))
    with pytest.raises(ValueError):
        build(ExperimentConfig("unruh"), stop_after="nowhere")


def test_register_shapes():
    assert build(ExperimentConfig("unruh")).circuit.num_qubits == 2
    assert build(ExperimentConfig("pessoa")).circuit.num_qubits == 4
    exp = build(ExperimentConfig("two_photon_unruh"))
    assert exp.circuit.num_qubits == 4 and exp.circuit.record_bits == (3, 2, 1, 0)


# Unruh -------------------------------------------------------------------

def test_unruh_histograms():
    assert close(probs("unruh/no-blockers")[0], {"01": 0.5, "10": 0.5})
    assert close(probs("unruh/B0-D")[0], {"001": 0.5, "100": 0.5})
    assert close(probs("unruh/B1")[0], {"001": 0.5, "010": 0.25, "100": 0.25})
    assert close(probs("unruh/both")[0], {"0001": 0.5, "0010": 0.25, "0100": 0.125, "1000": 0.125})


def test_unruh_chain_reproduces_closed_form():
    for pe, ph in itertools.product(GRID, GRID):
        a = analytic_unruh(pe, ph)
        fin = dict(unruh_chain(pe, ph))["bs3"]
        assert fin["K"] == pytest.approx(a["10"], abs=1e-12)
        assert fin["L"] == pytest.approx(a["01"], abs=1e-12)


def test_unruh_closed_form_facts():
    for pe in GRID:
        assert abs(analytic_unruh(pe, 0.0)["10"]) ** 2 == pytest.approx(0.5)
    for ph in GRID:
        assert abs(analytic_unruh(PI / 2, ph)["10"]) ** 2 == pytest.approx((1 + math.sin(ph)) / 2)
    # zero phases split evenly between the detectors
    assert abs(analytic_unruh(0.0, 0.0)["10"]) ** 2 == pytest.approx(0.5)


@pytest.mark.parametrize("b0,b1", [("off", False), ("C", False), ("D", False), ("off", True), ("D", True), ("C", True)])
def test_unruh_circuit_matches_oracle(b0, b1):
    for pe, ph in itertools.product(GRID[::3], GRID[::3]):
        _, trajs = branch_states(ExperimentConfig("unruh", pe, ph, b0=b0, b1=b1))
        amps = dict(unruh_chain(pe, ph, b0, b1))["bs3"]
        for t in trajs:
            if any(t.record.values()):
                ref = np.eye(4)[0]
            else:
                ref = single_photon_vector(amps, ("K", "L"))
                assert t.probability == pytest.approx(abs(amps["K"]) ** 2 + abs(amps["L"]) ** 2, abs=1e-12)
            assert fidelity(ref, t.state) >= 1 - 1e-9


def test_unruh_events_match_chain():
    for b0, b1 in itertools.product(("off", "C", "D"), (False, True)):
        cfg = ExperimentConfig("unruh", 0.8, 2.1, b0=b0, b1=b1)
        exp, dist = run_config(cfg)
        ev = event_probabilities(exp, dist)
        ref = single_photon_events(dict(unruh_chain(0.8, 2.1, b0, b1))["bs3"], UNRUH_GROUPS)
        for k, v in ev.items():
            assert v == pytest.approx(ref[k], abs=1e-12)


def test_unruh_flat_when_phi_h_zero():
    rows = sweep(ExperimentConfig("unruh", phi_h=0.0), "phi_e", np.linspace(0, 2 * PI, 33))
    assert max(r["D0"] for r in rows) - min(r["D0"] for r in rows) < 1e-10


def test_delayed_choice_pair_phase_sensitive():
    phis = np.linspace(0, 2 * PI, 65)
    for name in ("unruh/delayed-choice-a", "unruh/delayed-choice-b"):
        cfg = load_preset(name)
        assert cfg.phi_e == pytest.approx(PI / 2)
        rows = sweep(cfg, "phi_h", phis)
        assert visibility([r["D0"] for r in rows]) > 0.99
    assert load_preset("unruh/delayed-choice-b").phi_h == pytest.approx(PI / 2)


def test_sweep_parallel_matches_serial():
    cfg = load_preset("hom/no-blockers")
    phis = np.linspace(0, 2 * PI, 9)
    assert sweep(cfg, "phi_h", phis, jobs=2) == sweep(cfg, "phi_h", phis, jobs=1)
    with pytest.raises(ValueError):
        sweep(cfg, "phi_q", phis)


# Pessoa ------------------------------------------------------------------

def test_pessoa_scenarios():
    tol = 1e-9
    ev = probs("pessoa/no-blockers")[1]
    assert abs(ev["D0"] - 0.5) < tol and abs(ev["D1"] - 0.5) < tol
    ev = probs("pessoa/B0-D")[1]
    assert abs(ev["B0"] - 0.5) < tol and abs(ev["D0"] - 0.5) < tol and ev["D1"] < tol
    ev = probs("pessoa/B1")[1]
    assert abs(ev["B1"] - 0.02) < tol and abs(ev["D0"] - 0.49) < tol and abs(ev["D1"] - 0.49) < tol
    raw, ev = probs("pessoa/both-blockers")
    assert close(ev, {"B0": 0.5, "B1": 0.01, "D0": 0.485, "D1": 0.005}, tol)
    assert raw["000001"] == pytest.approx(0.5) and raw["000010"] == pytest.approx(0.01)
    assert raw["000100"] == pytest.approx(0.005)


def test_pessoa_c_blocker_mirrors_d_blocker():
    ev = probs("pessoa/B0-C")[1]
    assert ev["B0"] == pytest.approx(0.5) and ev["D1"] == pytest.approx(0.5) and ev["D0"] == pytest.approx(0)


def test_pessoa_no_b1_hits_at_full_transmission():
    cfg = ExperimentConfig("pessoa", t_squared=1.0, b1=True)
    exp, dist = run_config(cfg)
    assert event_probabilities(exp, dist)["B1"] == pytest.approx(0, abs=1e-12)


def _reference_pessoa_output(T4, T5, phi_h):
    # closed-form output for phi_N = pi
    R4, R5 = math.sqrt(1 - T4 ** 2), math.sqrt(1 - T5 ** 2)
    h = np.exp(1j * phi_h)
    s = math.sqrt(2)
    return {
        "M": s * 1j / 2 * T4,
        "P": s * 1j / 2 * 1j * T5,
        "Q": s / 4 * (-(R5 + R4 * h) + (R5 - R4 * h)),
        "R": -s * 1j / 4 * (-(R5 + R4 * h) - (R5 - R4 * h)),
    }


def test_pessoa_chain_matches_closed_form_output():
    for t2 in (0.96, 0.5, 0.8):
        for ph in GRID:
            fin = dict(analytic_pessoa(t2, ph))["bs3"]
            ref = _reference_pessoa_output(math.sqrt(t2), math.sqrt(t2), ph)
            for m in "MPQR":
                assert fin[m] == pytest.approx(ref[m], abs=1e-12)


def _vec(amps, keys):
    return np.array([amps.get(k, 0) for k in keys], dtype=complex)


def test_pessoa_closed_form_blocker_states():
    T, R = math.sqrt(0.96), 0.2
    s = math.sqrt(2)
    keys = ("B0", "B1", "M", "Q", "R", "P")
    cases = {
        ("off", False): {"M": 1j / s * T, "Q": -1j / s * R, "P": 1j / s * 1j * T, "R": 1j / s * R},
        ("D", False): {"B0": 1j / s, "M": 1j / s * T, "Q": -1j / s * R},
        # with the phases of Q and R swapped the blocked path would have to
        # feed more weight into Q and R than it carries
        ("off", True): {"B1": 1j * R / 2 * (1j - 1), "M": 1j * T / s, "Q": -R * (1 + 1j) / (2 * s),
                        "P": -T / s, "R": -R * (1 - 1j) / (2 * s)},
        ("D", True): {"B0": 1j / s, "B1": -R / 2, "M": 1j / s * T, "Q": -1j * R / (2 * s), "R": -R / (2 * s)},
    }
    for (b0, b1), reference in cases.items():
        fin = dict(analytic_pessoa(0.96, PI / 2, PI, b0, b1))["bs3"]
        a, b = _vec(fin, keys), _vec(reference, keys)
        assert np.linalg.norm(a) == pytest.approx(1)
        assert np.linalg.norm(b) == pytest.approx(1)
        assert fidelity(a, b) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("b0,b1", [("off", False), ("C", False), ("D", False), ("off", True), ("D", True)])
def test_pessoa_circuit_matches_oracle(b0, b1):
    for ph, pn in itertools.product(GRID[::3], GRID[::3]):
        cfg = ExperimentConfig("pessoa", phi_h=ph, phi_n=pn, b0=b0, b1=b1)
        exp, dist = run_config(cfg)
        amps = dict(analytic_pessoa(0.96, ph, pn, b0, b1))["bs3"]
        ref_ev = single_photon_events(amps, PESSOA_GROUPS)
        for k, v in event_probabilities(exp, dist).items():
            assert v == pytest.approx(ref_ev[k], abs=1e-12)
        _, trajs = branch_states(cfg)
        for t in trajs:
            ref = np.eye(16)[0] if any(t.record.values()) else single_photon_vector(amps, PESSOA_STAGE_QUBITS["bs3"])
            assert fidelity(ref, t.state) >= 1 - 1e-9


def test_pessoa_intermediate_stages():
    cfg = ExperimentConfig("pessoa", phi_h=0.9)
    for stage, amps in analytic_pessoa(0.96, 0.9):
        _, (t,) = branch_states(cfg, stop_after=stage)
        assert fidelity(single_photon_vector(amps, PESSOA_STAGE_QUBITS[stage]), t.state) >= 1 - 1e-12


# two photons -------------------------------------------------------------

def test_two_photon_after_first_splitter():
    _, (t,) = branch_states(ExperimentConfig("two_photon_unruh"), stop_after="bs1")
    ref = two_photon_vector({"20": 1j / math.sqrt(2), "02": 1j / math.sqrt(2)})
    assert np.max(np.abs(t.state - ref)) < 1e-10


@pytest.mark.parametrize("block", ["none", "C", "D"])
def test_two_photon_stages_match(block):
    for pe, ph in itertools.product(GRID[::3], GRID[::3]):
        cfg = ExperimentConfig("two_photon_unruh", pe, ph, b0="off" if block == "none" else block)
        for stage, amps in analytic_two_photon(pe, ph, block).items():
            ref = two_photon_vector(amps, TWO_PHOTON_KET_ORDER[stage])
            assert np.linalg.norm(ref) == pytest.approx(1, abs=1e-12)
            _, trajs = branch_states(cfg, stop_after=stage)
            kept = [t for t in trajs if not any(t.record.values())]
            assert len(kept) == 1
            assert fidelity(ref, kept[0].state) >= 1 - 1e-9


def test_two_photon_reduced_forms():
    r2 = math.sqrt(2)
    for pe in GRID:
        s = analytic_two_photon(pe, 0.0)["bs3"]
        ref = {"20": -1j / r2, "02": -1j / r2 * np.exp(1j * pe), "11": 0}
        assert all(abs(s[k] - ref[k]) < 1e-12 for k in ref)
    for ph in GRID:
        h = np.exp(1j * ph)
        s = analytic_two_photon(PI, ph)["bs3"]
        # the |02> sign follows the general output state below
        ref = {"20": -1j * (1 + h) / (2 * r2), "02": 1j * (1 + h) / (2 * r2), "11": -(1 - h) / 2}
        assert all(abs(s[k] - ref[k]) < 1e-12 for k in ref)


def test_two_photon_general_output_state():
    c = math.sqrt(2) / 8
    for pe, ph in itertools.product(GRID, GRID):
        e, h = np.exp(1j * pe), np.exp(1j * ph)
        ref = {
            "20": -1j * c * (1 - e + 3 * h + h * e),
            "02": 1j * c * (1 - e - h - 3 * h * e),
            "11": -(1 - e) * (1 - h) / 4,
        }
        s = analytic_two_photon(pe, ph)["bs3"]
        assert all(abs(s[k] - ref[k]) < 1e-12 for k in ref)


def test_two_photon_blocked_branches_pick_one_detector():
    for ph in (0.0,):
        _, dist = run_config(ExperimentConfig("two_photon_unruh", 0.7, ph, b0="C"))
        assert close(dist.probabilities, {"000011": 0.5, "110000": 0.5}, 1e-12)
        _, dist = run_config(ExperimentConfig("two_photon_unruh", 0.7, ph, b0="D"))
        assert close(dist.probabilities, {"001100": 0.5, "110000": 0.5}, 1e-12)


def test_two_photon_labels():
    exp, dist = run_config(ExperimentConfig("two_photon_unruh", PI, PI / 2))
    assert close(dist.probabilities, {"0011": 0.25, "1100": 0.25, "0101": 0.5})
    assert record_photons(exp, dist, "0011") == {"D0": 2, "D1": 0}
    assert record_photons(exp, dist, "0101") == {"D0": 1, "D1": 1}
    ev = event_probabilities(exp, dist)
    assert ev["both_D0"] == pytest.approx(0.25) and ev["coincidence"] == pytest.approx(0.5)


def test_per_photon_convention_differs():
    occ = run_config(ExperimentConfig("two_photon_unruh", PI, PI / 2))[1]
    per = run_config(ExperimentConfig("two_photon_unruh", PI, PI / 2, phase_convention="per_photon"))[1]
    # two photons pick up 2*pi in the shifter, so per-photon phases look like phi_e = 0
    ref0 = run_config(ExperimentConfig("two_photon_unruh", 0.0, PI / 2, phase_convention="per_photon"))[1]
    assert close(per.probabilities, ref0.probabilities)
    assert not close(occ.probabilities, per.probabilities, 1e-3)


@pytest.mark.parametrize("name", ["unruh/both", "unruh/B0-C", "pessoa/both-blockers", "pessoa/B1", "hom/phi-e-pi",
                                  "hom/block-C", "hom/block-D"])
def test_photon_number_conserved(name):
    exp, dist = run_config(load_preset(name))
    total = 2 if exp.two_photon else 1
    for rec in dist.probabilities:
        assert sum(record_photons(exp, dist, rec).values()) == total


def _closed_form_blocked_outputs(pe, ph):
    h = np.exp(1j * ph)
    r2 = math.sqrt(2)
    c_block = {"20": -1j / 4 * (1 + 3 * h), "02": 1j / 4 * (1 - h), "11": 1j / 4 * (1 - h) * 1j * r2}
    e = np.exp(1j * pe) * 1j / 4
    d_block = {"20": e * (1 - h), "02": -e * (1 + 3 * h), "11": -e * 1j * r2 * (1 - h)}
    return {"C": c_block, "D": d_block}


def test_two_photon_blocked_outputs_match_closed_forms():
    for pe, ph in itertools.product(GRID, GRID):
        reference = _closed_form_blocked_outputs(pe, ph)
        for block in ("C", "D"):
            ref = two_photon_vector(reference[block])
            _, trajs = branch_states(ExperimentConfig("two_photon_unruh", pe, ph, b0=block))
            (kept,) = [t for t in trajs if not any(t.record.values())]
            assert kept.probability == pytest.approx(0.5, abs=1e-12)
            assert fidelity(ref, kept.state) >= 1 - 1e-9
