import numpy as np
import pytest

from aci.gkops import UnionFind, axis_witnesses, dependent_part, gk_decompose, ww_monotones
from aci.probdist import builtin, info_summary, mutual_information, random_pmf, triple_of


def test_union_find():
    uf = UnionFind(5)
    uf.union(0, 1)
    uf.union(3, 4)
    uf.union(1, 4)
    lab = uf.labels()
    assert lab[0] == lab[1] == lab[3] == lab[4] != lab[2]


def test_gk_examples():
    d = gk_decompose(builtin("connected", [0.0]))
    assert d.common_entropy == pytest.approx(1.0, abs=1e-12) and d.residual_mi == pytest.approx(0, abs=1e-12)
    d = gk_decompose(builtin("connected", [0.05]))
    assert d.n_components == 1 and d.common_entropy == 0
    d = gk_decompose(builtin("identical_uniform", [2]))
    assert d.n_components == 2 and d.common_entropy == pytest.approx(1.0) and d.residual_mi == pytest.approx(0)


def test_dependent_part_examples():
    assert dependent_part(builtin("zsource", [1 / 3]), "Y") == ((0,), (1,))
    assert dependent_part(builtin("connected", [0.05]), "Y") == ((0, 1), (2, 3))
    assert dependent_part(builtin("independent_uniform", [2, 2]), "Y") == ((0, 1),)


def test_ww_examples():
    z = ww_monotones(builtin("zsource", [1 / 3])).as_tuple()
    assert z == pytest.approx((2 / 3, 2 / 3, 0.251629), abs=1e-6)
    assert ww_monotones(builtin("identical_uniform", [2])).as_tuple() == pytest.approx((0, 0, 0), abs=1e-12)
    c = ww_monotones(builtin("connected", [0.05])).as_tuple()
    assert c == pytest.approx((0.286397, 0.286397, 0.713603), abs=1e-6)


def test_ww_invariants_random():
    rng = np.random.default_rng(3)
    for _ in range(30):
        p = random_pmf(rng, 3, 3, zero_frac=0.4)
        m = ww_monotones(p)
        s = info_summary(p)
        assert min(m.as_tuple()) >= 0
        assert m.h_y_down_x <= s.H_Y_given_X + 1e-9
        assert m.h_x_down_y <= s.H_X_given_Y + 1e-9
        assert m.i_given_meet <= s.I_XY + 1e-9


def test_axis_witnesses_hit_the_monotones():
    for p in (builtin("zsource", [1 / 3]), builtin("connected", [0.05]), builtin("connected", [0.0])):
        m = ww_monotones(p).as_tuple()
        wy, wx, wc = (triple_of(p, ch) for ch in axis_witnesses(p))
        assert wy == pytest.approx((m[0], 0, 0), abs=1e-12)
        assert wx == pytest.approx((0, m[1], 0), abs=1e-12)
        assert wc == pytest.approx((0, 0, m[2]), abs=1e-12)
        assert m[2] <= mutual_information(p) + 1e-12
