import json
import math
import pickle

import numpy as np
import pytest

from aci.errors import (
    NegativeMass, ParamOutOfRange, RowNotNormalized, ShapeMismatch, SizeLimit, SumNotOne, UnknownName,
)
from aci.probdist import (
    AuxChannel, JointPMF, binary_entropy, builtin, dump_pmf, entropy, extend, info_summary, k_triple,
    load_pmf, mutual_information, parse_dist_spec, random_pmf, tensor, tensor_channel, triple_of,
)


def test_load_uniform():
    p = load_pmf('{"pmf": [[0.25, 0.25], [0.25, 0.25]]}')
    assert p.shape == (2, 2)
    assert np.allclose(p.probs, 0.25)


def test_load_strips_zero_row():
    p = load_pmf({"pmf": [[0.5, 0.5], [0.0, 0.0]], "x_labels": ["a", "b"]})
    assert p.shape == (1, 2)
    assert p.x_labels == ("a",)


@pytest.mark.parametrize("doc, err", [
    ({"pmf": [[0.6, 0.6]]}, SumNotOne),
    ({"pmf": [[1.5, -0.5]]}, NegativeMass),
    ({"pmf": [[0.5], [0.25, 0.25]]}, ShapeMismatch),
    ({"table": [[1.0]]}, ShapeMismatch),
    ("not json", ShapeMismatch),
])
def test_load_errors(doc, err):
    with pytest.raises(err):
        load_pmf(doc)


def test_dump_round_trip_is_exact():
    rng = np.random.default_rng(0)
    p = random_pmf(rng, 3, 4)
    q = load_pmf(dump_pmf(p))
    assert np.array_equal(p.probs, q.probs)
    assert p == q


def test_pickle_round_trip():
    p = builtin("connected", [0.05])
    assert pickle.loads(pickle.dumps(p)) == p


def test_immutable():
    p = builtin("zsource", [0.25])
    with pytest.raises(AttributeError):
        p.probs = None


def test_builtins():
    z = builtin("zsource", [1 / 3])
    assert np.allclose(z.probs, [[1 / 3, 0], [1 / 3, 1 / 3]])
    c0 = builtin("connected", [0.0])
    assert c0.n_cells == 8 and np.allclose(c0.probs[c0.probs > 0], 1 / 8)
    assert builtin("connected", [0.05]).probs[0, 2] == pytest.approx(0.00625)
    assert builtin("independent_uniform", [2, 3]).shape == (2, 3)
    assert np.allclose(builtin("identical_uniform", [3]).probs, np.eye(3) / 3)


@pytest.mark.parametrize("name, params, err", [
    ("nope", [], UnknownName),
    ("zsource", [0.7], ParamOutOfRange),
    ("zsource", [], ParamOutOfRange),
    ("connected", [1.5], ParamOutOfRange),
    ("identical_uniform", [1.5], ParamOutOfRange),
])
def test_builtin_errors(name, params, err):
    with pytest.raises(err):
        builtin(name, params)


def test_parse_dist_spec(tmp_path):
    assert parse_dist_spec("zsource:p=0.25") == builtin("zsource", [0.25])
    assert parse_dist_spec("independent_uniform:m=3,n=2") == builtin("independent_uniform", [2, 3])
    f = tmp_path / "p.json"
    f.write_text(dump_pmf(builtin("connected", [0.05])))
    assert parse_dist_spec(f"file:{f}") == builtin("connected", [0.05])
    for bad in ("zsource", "zsource:q=1", "zsource:p=abc", "nope:x=1", f"file:{tmp_path}/missing.json"):
        with pytest.raises((UnknownName, ParamOutOfRange)):
            parse_dist_spec(bad)


def test_info_summary_values():
    s = info_summary(builtin("zsource", [1 / 3]))
    assert s.I_XY == pytest.approx(2 * binary_entropy(1 / 3) - math.log2(3), abs=1e-12)
    assert s.I_XY == pytest.approx(s.H_X + s.H_Y - s.H_XY, abs=1e-12)
    assert info_summary(builtin("independent_uniform", [2, 2])).I_XY == pytest.approx(0, abs=1e-12)
    c = info_summary(builtin("connected", [0.05]))
    assert c.H_XY == pytest.approx(3.286397, abs=1e-6)
    assert c.I_XY == pytest.approx(0.713603, abs=1e-6)


def test_entropy_conventions():
    assert entropy([1.0, 0.0]) == 0.0
    assert entropy([0.5, 0.5]) == pytest.approx(1.0)
    assert binary_entropy(0.0) == 0.0


def test_extend_examples():
    u = builtin("independent_uniform", [2, 2])
    three = extend(u, AuxChannel.constant(u))
    assert np.allclose(three.probs.sum(axis=(0, 1)), [1.0])
    z = builtin("zsource", [1 / 3])
    three = extend(z, AuxChannel.deterministic([0, 1, 2]))
    assert np.allclose(three.probs.sum(axis=(0, 1)), [1 / 3] * 3)


def test_channel_validation():
    with pytest.raises(RowNotNormalized):
        AuxChannel(2, np.array([[0.5, 0.4], [0.5, 0.5], [1.0, 0.0]]))
    with pytest.raises(ShapeMismatch):
        extend(builtin("zsource", [1 / 3]), AuxChannel(2, np.full((4, 2), 0.5)))


def test_k_triple_examples():
    z = builtin("zsource", [1 / 3])
    t, i = k_triple(extend(z, AuxChannel.constant(z)))
    assert t == pytest.approx((0, 0, mutual_information(z)), abs=1e-12) and i == pytest.approx(0, abs=1e-12)
    t = triple_of(z, AuxChannel.from_function(z, lambda x, y: x))
    assert t == pytest.approx((0, 2 / 3, 0), abs=1e-12)
    d = builtin("identical_uniform", [2])
    t, i = k_triple(extend(d, AuxChannel.from_function(d, lambda x, y: x)))
    assert t == pytest.approx((0, 0, 0), abs=1e-12) and i == pytest.approx(1.0)


def test_chain_rule_random():
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = random_pmf(rng, 3, 3, zero_frac=0.3)
        ch = AuxChannel(4, rng.dirichlet(np.ones(4), size=p.n_cells))
        t, i = k_triple(extend(p, ch))
        assert i == pytest.approx(mutual_information(p) + t.r1 + t.r2 - t.z, abs=1e-9)


def test_tensor():
    u = builtin("independent_uniform", [2, 2])
    assert np.allclose(tensor(u, u).probs, builtin("independent_uniform", [4, 4]).probs)
    z = builtin("zsource", [1 / 3])
    assert mutual_information(tensor(z, z)) == pytest.approx(2 * mutual_information(z), abs=1e-12)
    big = builtin("independent_uniform", [64, 64])
    with pytest.raises(SizeLimit):
        tensor(big, big)


def test_tensor_channel_adds_triples():
    rng = np.random.default_rng(2)
    a, b = random_pmf(rng, 2, 2), random_pmf(rng, 2, 3)
    ca = AuxChannel(3, rng.dirichlet(np.ones(3), size=a.n_cells))
    cb = AuxChannel(2, rng.dirichlet(np.ones(2), size=b.n_cells))
    t = triple_of(tensor(a, b), tensor_channel(a, ca, b, cb))
    assert np.allclose(t, np.add(triple_of(a, ca), triple_of(b, cb)), atol=1e-12)


def test_pmf_json_is_valid_json():
    json.loads(dump_pmf(builtin("zsource", [0.2])))
