import json

import numpy as np
import pytest

from aci.errors import InvalidProtocol, ParamOutOfRange, StateCapExceeded
from aci.probdist import JointPMF, builtin
from aci.protosim import (
    PROPERTIES, ProtocolSpec, Round, check_additivity, check_containment,
    communication_pair, example_protocols, load_protocol, local_computation_pair, monotonicity_suite,
    protocol_to_dict, run_protocol, secure_derivation_pair, security_check, suite_options,
)

BIT = {"0": "0", "1": "1"}
OPTS = suite_options()


@pytest.mark.parametrize("name", sorted(example_protocols()))
def test_examples(name):
    spec, target, expected = example_protocols()[name]
    res = run_protocol(spec)
    assert res.total_mass == pytest.approx(1.0, abs=1e-12)
    assert res.output_pmf == target
    assert security_check(res, target, 1e-9).secure is expected


def test_two_private_bits_leak_is_one_bit():
    spec, target, _ = example_protocols()["two_private_bits"]
    v = security_check(run_protocol(spec), target, 1e-9)
    assert v.leak_alice == pytest.approx(1.0, abs=1e-12)
    assert v.leak_bob == pytest.approx(0.0, abs=1e-12)


def test_wrong_target_is_insecure():
    spec, _, _ = example_protocols()["public_coin"]
    v = security_check(run_protocol(spec), builtin("independent_uniform", [2, 2]), 1e-9)
    assert not v.secure and v.output_distance == pytest.approx(0.25)
    with pytest.raises(ParamOutOfRange):
        security_check(run_protocol(spec), builtin("identical_uniform", [2]), -1.0)


def test_outputting_the_setup_is_secure():
    rng = np.random.default_rng(0)
    for _ in range(5):
        setup = JointPMF(rng.dirichlet(np.ones(6)).reshape(2, 3), ["a", "b"], ["c", "d", "e"])
        ident = {"alice": {s: s for s in "ab"}, "bob": {s: s for s in "cde"}}
        res = run_protocol(ProtocolSpec(setup, (), ident))
        assert res.output_pmf == setup
        assert security_check(res, setup, 1e-9).secure


def test_lossy_local_output_leaks():
    # Alice's view keeps a, which still predicts Bob's output after she forgets it
    setup = JointPMF(np.array([[0.4, 0.1], [0.1, 0.4]]), ["a", "b"], ["c", "d"])
    res = run_protocol(ProtocolSpec(setup, (), {"alice": {"*": "0"}, "bob": {"c": "0", "d": "1"}}))
    v = security_check(res, res.output_pmf, 1e-9)
    assert not v.secure and v.leak_alice > 0.2


def test_view_keys_and_wildcards():
    # Bob replies with the xor of his setup bit and Alice's message
    setup = builtin("independent_uniform", [2, 2])
    spec = ProtocolSpec(setup, (
        Round("alice", ("0", "1"), {"*": (1.0, 0.0), "1": (0.0, 1.0)}),
        Round("bob", ("0", "1"), {"0,0": (1, 0), "1,1": (1, 0), "*,*": (0, 1)}),
    ), {"alice": {"*": "x"}, "bob": {"*": "y"}})
    res = run_protocol(spec)
    for (va, vb), p in res.view_pmf.items():
        x, m, r = va.split(",")
        y = vb.split(",")[0]
        assert m == x and r == str(int(x) ^ int(y))
    assert res.output_pmf.shape == (1, 1)


def test_missing_and_conflicting_rules():
    bad = ProtocolSpec(None, (Round("alice", ("0", "1"), {"x": (0.5, 0.5)}),), {"alice": BIT, "bob": BIT})
    with pytest.raises(InvalidProtocol):
        run_protocol(bad)
    with pytest.raises(InvalidProtocol):
        Round("alice", ("0", "1"), {"": (0.5, 0.6)})
    with pytest.raises(InvalidProtocol):
        Round("carol", ("0",), {"": (1.0,)})
    with pytest.raises(InvalidProtocol):
        ProtocolSpec(None, (), {"alice": BIT})


def test_state_cap():
    rounds = tuple(Round("alice", ("0", "1"), {"*": (0.5, 0.5)} if k else {"": (0.5, 0.5)}) for k in range(12))
    spec = ProtocolSpec(None, rounds, {"alice": {"*": "0"}, "bob": {"*": "0"}})
    with pytest.raises(StateCapExceeded):
        run_protocol(spec, cap=1000)


def test_protocol_json_round_trip():
    for spec, _, _ in example_protocols().values():
        doc = json.dumps(protocol_to_dict(spec))
        back = load_protocol(doc)
        assert run_protocol(back).view_pmf == run_protocol(spec).view_pmf


def test_protocol_json_setup_string():
    doc = {"setup": "zsource:p=0.25", "rounds": [], "outputs": {"alice": BIT, "bob": BIT}}
    assert run_protocol(load_protocol(doc)).output_pmf == builtin("zsource", [0.25])
    with pytest.raises(InvalidProtocol):
        load_protocol({"rounds": [{"sender": "alice"}], "outputs": {"alice": BIT, "bob": BIT}})


def test_instance_builders_are_markov():
    rng = np.random.default_rng(1)
    big, small = local_computation_pair(rng)
    assert big.probs.sum() == pytest.approx(1) and small.shape[1] == big.shape[1] == 2
    big, base = communication_pair(rng)
    assert big.shape[0] == base.shape[0]
    uv, xuyv = secure_derivation_pair(rng)
    assert uv.shape == (2, 2) and xuyv.n_cells <= 16


def test_property1_independent_z_passes():
    # Z independent of (X, Y): both regions are the whole octant
    xy = builtin("zsource", [1 / 3])
    table = np.kron(xy.probs.reshape(-1, 1), np.array([[0.5, 0.5]]))
    big = JointPMF(table)
    small = JointPMF(np.outer(xy.probs.sum(axis=0), [0.5, 0.5]))
    assert check_containment(big, small, 4, OPTS) <= 5e-3


def test_property2_constant_f_passes():
    p = builtin("zsource", [1 / 3])
    assert check_containment(p, p, 4, OPTS) <= 5e-3


def test_property3_identity_passes():
    # X = U and Y = V: K(U, V) equals K(XU, YV)
    uv = builtin("zsource", [1 / 3])
    copy = JointPMF(uv.probs, [f"{s}.{s}" for s in uv.x_labels], [f"{s}.{s}" for s in uv.y_labels])
    assert check_containment(uv, copy, 4, OPTS) <= 5e-3


def test_property4_tensor_passes():
    z = builtin("zsource", [1 / 3])
    assert check_additivity(z, builtin("identical_uniform", [2]), 4, OPTS) <= 5e-3


def test_suite_small_run_is_deterministic():
    a = monotonicity_suite(1, seed=3, g=4, properties=("communication", "tensorization"))
    b = monotonicity_suite(1, seed=3, g=4, properties=("communication", "tensorization"))
    assert [c.prop for c in a.checks] == ["communication", "tensorization"]
    assert a.to_dict() == b.to_dict()
    assert a.all_passed


def test_suite_failures_go_through_the_recheck_path():
    # a negative slack makes every check fail, so each one must be rechecked and flagged
    rep = monotonicity_suite(1, seed=0, g=4, slack=-1.0, properties=("secure_derivation",))
    (c,) = rep.checks
    assert c.rechecked and c.first_excess is not None and c.flagged
    assert rep.flagged == [c] and not rep.all_passed


def test_suite_rejects_bad_arguments():
    with pytest.raises(ParamOutOfRange):
        monotonicity_suite(0)
    with pytest.raises(ParamOutOfRange):
        monotonicity_suite(1, properties=("nope",))
    assert set(PROPERTIES) == {"local_computation", "communication", "secure_derivation", "tensorization"}
