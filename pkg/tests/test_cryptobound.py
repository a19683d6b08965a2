import json
import math

import pytest

from aci.cryptobound import RECONSTRUCTION_NOTE, is_trivial, k_bound, triviality_witness, ww_bound
from aci.errors import NoPositiveDirection
from aci.probdist import KTriple, builtin
from aci.region import CERTIFIED, HEURISTIC, KRegionApprox, SupportEntry, certify_region


def _region(points, support):
    return KRegionApprox(tuple((KTriple(*p), None) for p in points),
                         tuple(SupportEntry(w, v, c) for w, v, c in support))


def test_ww_bound_stand_in_value(conn, zs):
    r = ww_bound(conn, zs)
    assert r.bound == pytest.approx(2.3277, abs=1e-3)
    assert r.method == "ww" and "n2/n1" in r.notes


def test_ww_bound_zero_over_zero_and_infinity():
    ind = builtin("independent_uniform", [2, 2])
    same = builtin("identical_uniform", [2])
    assert ww_bound(ind, ind).bound == 0.0  # all monotones vanish
    assert math.isinf(ww_bound(same, builtin("zsource", [1 / 3])).bound)
    assert json.loads(json.dumps(ww_bound(same, builtin("zsource", [1 / 3])).to_dict()))["bound"] == "inf"


def test_k_bound_from_support():
    setup = _region([(1, 1, 0.5)], [])
    target = _region([(0.5, 0.5, 0.2)], [((0.5, 0.5, 0.0), 0.4, CERTIFIED), ((0, 0, 1), 0.1, HEURISTIC)])
    r = k_bound(setup, target)
    assert r.bound == pytest.approx(0.4 / 1.0)
    assert r.certainty == CERTIFIED
    only = k_bound(setup, target, certified_only=True)
    assert only.bound == pytest.approx(0.4)


def test_k_bound_skips_zero_pairs_and_strict_mode():
    setup = _region([(0, 0, 0)], [])
    target = _region([(1, 1, 1)], [((1 / 3, 1 / 3, 1 / 3), 0.5, CERTIFIED)])
    r = k_bound(setup, target)
    assert r.bound == 0.0
    with pytest.raises(NoPositiveDirection):
        k_bound(setup, target, strict=True)


def test_k_bound_at_least_ww(conn_region, zs_region, conn, zs):
    assert k_bound(conn_region, zs_region).bound >= ww_bound(conn, zs).bound - 1e-6


def test_triviality(zs, zs_region_small):
    cert = certify_region(zs_region_small, zs, directions=[(0.3, 0.25, 0.45), (1 / 3, 1 / 3, 1 / 3)])
    assert is_trivial(cert) == "no"
    assert triviality_witness(cert) is not None
    assert is_trivial(zs_region_small) == "unknown"
    octant = _region([(0, 0, 0)], [])
    assert is_trivial(octant) == "yes"


def test_reconstruction_note_names_reference_values():
    assert "0.5182" in RECONSTRUCTION_NOTE and "1.8161" in RECONSTRUCTION_NOTE
