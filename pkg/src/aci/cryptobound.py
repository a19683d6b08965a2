"""Lower bounds on n2/n1 for securely realising n1 copies of a target pair
from n2 copies of a set up.

Regions only grow under local computation, communication and secure
derivation, so a realisation forces n2 K(setup) to lie inside n1
K(target).  For a setup point a and a target support constraint
w . t >= c this gives n2 (w . a) >= n1 c, i.e. n2/n1 >= c / (w . a).
The three monotones are the axis special case of the same argument.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import NoPositiveDirection
from .gkops import ww_monotones
from .probdist import JointPMF, KTriple
from .region import CERTIFIED, HEURISTIC, INSIDE, OUTSIDE, KRegionApprox, certifying_direction, contains

DIRECTION_NOTE = (
    "direction convention: n2 copies of the set up realise n1 copies of the target, "
    "so n2 * K(setup) must fit inside n1 * K(target); the bound is on n2/n1"
)
RECONSTRUCTION_NOTE = (
    "the builtin 'connected' pmf is a stand-in whose exact reference layout is not "
    "recoverable; reference values for the original example (monotone bound 0.5182, "
    "region bound 1.8161) depend on that layout and are not expected to be reproduced"
)


@dataclass(frozen=True)
class RateBoundResult:
    bound: float
    method: str  # "ww" or "kregion"
    witness_point: KTriple | None = None
    witness_direction: tuple | None = None  # (weights, value, certainty)
    certainty: str = CERTIFIED
    notes: str = ""

    def to_dict(self) -> dict:
        wd = None
        if self.witness_direction is not None:
            w, v, c = self.witness_direction
            wd = {"w": list(map(float, w)), "value": float(v), "certainty": c}
        return {
            "bound": _json_float(self.bound),
            "method": self.method,
            "witness_point": None if self.witness_point is None else list(map(float, self.witness_point)),
            "witness_direction": wd,
            "certainty": self.certainty,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _json_float(x: float):
    # JSON has no infinity; emit the string so the document stays valid
    return "inf" if math.isinf(x) else float(x)


def _ratio(num: float, den: float, eps: float = 1e-12) -> float:
    if num <= eps:
        return 0.0
    if den <= eps:
        return math.inf
    return num / den


def ww_bound(setup: JointPMF, target: JointPMF) -> RateBoundResult:
    """max over the three monotones of target / setup (0/0 = 0, x/0 = inf)."""
    s = ww_monotones(setup).as_tuple()
    t = ww_monotones(target).as_tuple()
    ratios = [_ratio(a, b) for a, b in zip(t, s)]
    k = int(np.argmax(ratios))
    names = ("H(Y\\X|X)", "H(X\\Y|Y)", "I(X;Y|X^Y)")
    notes = f"{DIRECTION_NOTE}; decided by the monotone {names[k]}: target {t[k]:.6g} / setup {s[k]:.6g}"
    return RateBoundResult(ratios[k], "ww", None, None, CERTIFIED, notes)


def k_bound(setup_region: KRegionApprox, target_region: KRegionApprox,
            certified_only: bool = False, strict: bool = False) -> RateBoundResult:
    """max of c / (w . a) over setup inner points a and target support pairs (w, c).

    Only pairs with w . a > 0 and c > 0 count.  With ``certified_only`` the
    heuristic support values of the target are ignored, so the bound is
    sound.  When no pair counts the bound is 0 (the target region reaches
    the origin as far as these data show); ``strict`` raises instead.
    """
    A = setup_region.points
    best = (0.0, None, None)
    skipped = 0
    for s in target_region.support:
        if certified_only and s.certainty != CERTIFIED:
            continue
        if s.value <= 1e-12:
            continue
        wa = A @ np.asarray(s.weights, dtype=float)
        ok = wa > 1e-12
        skipped += int((~ok).sum())
        if not ok.any():
            continue
        j = int(np.argmin(np.where(ok, wa, np.inf)))
        r = s.value / wa[j]
        if r > best[0]:
            best = (float(r), j, s)
    r, j, s = best
    if s is None:
        if strict:
            raise NoPositiveDirection("no target support value is positive")
        return RateBoundResult(0.0, "kregion", None, None, HEURISTIC,
                               DIRECTION_NOTE + "; no positive target direction, bound 0")
    notes = DIRECTION_NOTE
    if skipped:
        notes += f"; {skipped} (point, direction) pairs with w.a = 0 were skipped"
    if s.certainty != CERTIFIED:
        notes += "; the deciding target support value is an optimizer minimum, not a certified lower bound"
    return RateBoundResult(r, "kregion", KTriple(*map(float, A[j])), (s.weights, s.value, s.certainty), s.certainty, notes)


def is_trivial(region: KRegionApprox, tol: float = 5e-3) -> str:
    """'yes' if the origin is inside, 'no' if a certified direction excludes it, else 'unknown'."""
    verdict = contains(region, (0.0, 0.0, 0.0), tol)
    return {INSIDE: "yes", OUTSIDE: "no"}.get(verdict, "unknown")


def triviality_witness(region: KRegionApprox, tol: float = 5e-3):
    """The certified support entry excluding the origin, or None."""
    return certifying_direction(region, (0.0, 0.0, 0.0), tol)
