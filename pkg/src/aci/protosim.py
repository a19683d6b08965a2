"""Exact evaluation of finite two-party protocols, the perfect-security test
for their outputs, and an empirical suite for the monotone-region properties.

A party's view is its own setup symbol followed, in round order, by every
public message and its own private coins.  View keys are these tokens
joined by commas (the empty view is the empty string).  Rules and output
maps are keyed by view keys; a key token ``*`` matches any token and a
lone ``*`` matches any view.  The most specific match (fewest wildcards)
wins.
"""
from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linprog

from .auxopt import OptOptions, sweep_weights, weight_grid
from .errors import InvalidProtocol, ParamOutOfRange, StateCapExceeded
from .probdist import JointPMF, builtin, load_pmf, parse_dist_spec, pmf_to_dict, random_pmf, tensor
from .region import KRegionApprox, build_region

log = logging.getLogger(__name__)

STATE_CAP = 100_000
ROW_TOL = 1e-9
PARTIES = ("alice", "bob")


# --- protocol description -----------------------------------------------------

@dataclass(frozen=True)
class Round:
    sender: str
    alphabet: tuple
    rule: dict  # view key -> message probabilities
    private: bool = False

    def __post_init__(self):
        if self.sender not in PARTIES:
            raise InvalidProtocol(f"sender must be one of {PARTIES}, got {self.sender!r}")
        if not self.alphabet:
            raise InvalidProtocol("message alphabet is empty")
        _check_symbols(self.alphabet, "message symbol")
        if not self.rule:
            raise InvalidProtocol("message rule is empty")
        for key, row in self.rule.items():
            row = np.asarray(row, dtype=float)
            if row.shape != (len(self.alphabet),):
                raise InvalidProtocol(f"rule row {key!r} has {row.size} entries, alphabet has {len(self.alphabet)}")
            if np.any(row < 0) or not np.all(np.isfinite(row)):
                raise InvalidProtocol(f"rule row {key!r} has negative or non-finite entries")
            if abs(row.sum() - 1.0) > ROW_TOL:
                raise InvalidProtocol(f"rule row {key!r} sums to {row.sum()!r}")


@dataclass(frozen=True)
class ProtocolSpec:
    setup: JointPMF | None
    rounds: tuple = ()
    outputs: dict = field(default_factory=dict)  # party -> {view key: symbol}

    def __post_init__(self):
        if self.setup is not None:
            _check_symbols(self.setup.x_labels, "setup label")
            _check_symbols(self.setup.y_labels, "setup label")
        for party in PARTIES:
            if not self.outputs.get(party):
                raise InvalidProtocol(f"no output rule for {party}")
        extra = set(self.outputs) - set(PARTIES)
        if extra:
            raise InvalidProtocol(f"unknown parties in outputs: {sorted(extra)}")


def _check_symbols(symbols, what):
    if len(set(symbols)) != len(symbols):
        raise InvalidProtocol(f"{what}s must be distinct")
    for s in symbols:
        if "," in s or s == "*":
            raise InvalidProtocol(f"{what} {s!r} may not contain ',' or be '*'")


def _lookup(table: dict, key: str, what: str):
    if key in table:
        return table[key]
    toks = key.split(",") if key else []
    best, hits = None, []
    for pat, val in table.items():
        if pat == "*":
            rank = len(toks) + 1
        else:
            ptoks = pat.split(",") if pat else []
            if len(ptoks) != len(toks) or any(p != "*" and p != t for p, t in zip(ptoks, toks)):
                continue
            rank = ptoks.count("*")
        if best is None or rank < best:
            best, hits = rank, [val]
        elif rank == best:
            hits.append(val)
    if not hits:
        raise InvalidProtocol(f"no {what} entry matches view {key!r}")
    if any(list(np.atleast_1d(h)) != list(np.atleast_1d(hits[0])) for h in hits[1:]):
        raise InvalidProtocol(f"{what} entries matching view {key!r} conflict")
    return hits[0]


# --- JSON ---------------------------------------------------------------------

def load_protocol(document) -> ProtocolSpec:
    """Parse ``{setup, rounds, outputs}``; setup is null, a pmf document or a distribution spec string."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise InvalidProtocol(f"not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise InvalidProtocol("protocol document must be an object")
    setup = document.get("setup")
    if isinstance(setup, str):
        setup = parse_dist_spec(setup)
    elif setup is not None:
        setup = load_pmf(setup)
    rounds = []
    rounds_doc = document.get("rounds", [])
    if not isinstance(rounds_doc, list):
        raise InvalidProtocol('"rounds" must be a list')
    for i, r in enumerate(rounds_doc):
        try:
            alpha = r["alphabet"]
            alphabet = tuple(str(k) for k in range(alpha)) if isinstance(alpha, int) else tuple(map(str, alpha))
            rounds.append(Round(str(r["sender"]).lower(), alphabet,
                                {str(k): tuple(map(float, v)) for k, v in r["rule"].items()},
                                bool(r.get("private", False))))
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidProtocol(f"round {i} is malformed ({exc!r}); need sender, alphabet, rule") from None
    outputs = document.get("outputs")
    if not isinstance(outputs, dict):
        raise InvalidProtocol('"outputs" must map alice and bob to {view key: symbol}')
    outputs = {str(p).lower(): {str(k): str(v) for k, v in m.items()} for p, m in outputs.items()}
    return ProtocolSpec(setup, tuple(rounds), outputs)


def protocol_to_dict(spec: ProtocolSpec) -> dict:
    rounds = []
    for r in spec.rounds:
        default = r.alphabet == tuple(str(k) for k in range(len(r.alphabet)))
        d = {"sender": r.sender, "alphabet": len(r.alphabet) if default else list(r.alphabet),
             "rule": {k: [float(v) for v in row] for k, row in r.rule.items()}}
        if r.private:
            d["private"] = True
        rounds.append(d)
    return {
        "setup": None if spec.setup is None else pmf_to_dict(spec.setup),
        "rounds": rounds,
        "outputs": {p: dict(spec.outputs[p]) for p in PARTIES},
    }


# --- execution ------------------------------------------------------------------

@dataclass(frozen=True)
class ExecutionResult:
    view_pmf: dict  # (alice view key, bob view key) -> probability
    output_pmf: JointPMF
    output_maps: dict  # party -> {view key: output symbol}

    @property
    def total_mass(self) -> float:
        return math.fsum(self.view_pmf.values())


def run_protocol(spec: ProtocolSpec, cap: int = STATE_CAP) -> ExecutionResult:
    """Enumerate every run exactly; identical (view, view) states are merged."""
    states: dict = defaultdict(float)
    if spec.setup is None:
        states[((), ())] = 1.0
    else:
        xi, yi = spec.setup.support()
        for i, j in zip(xi, yi):
            states[((spec.setup.x_labels[i],), (spec.setup.y_labels[j],))] += float(spec.setup.probs[i, j])
    if len(states) > cap:
        raise StateCapExceeded(f"{len(states)} setup states exceed the cap of {cap}")
    for n, rnd in enumerate(spec.rounds):
        nxt: dict = defaultdict(float)
        s_idx = PARTIES.index(rnd.sender)
        for views, p in states.items():
            row = _lookup(rnd.rule, ",".join(views[s_idx]), f"round {n} rule")
            for m, q in zip(rnd.alphabet, row):
                if q <= 0:
                    continue
                a, b = views
                if rnd.private:
                    a, b = (a + (m,), b) if s_idx == 0 else (a, b + (m,))
                else:
                    a, b = a + (m,), b + (m,)
                nxt[(a, b)] += p * q
            if len(nxt) > cap:
                raise StateCapExceeded(f"round {n} exceeds the cap of {cap} joint view states")
        states = nxt
    view_pmf = {(",".join(a), ",".join(b)): p for (a, b), p in states.items()}
    maps = {party: {} for party in PARTIES}
    out: dict = defaultdict(float)
    for (va, vb), p in view_pmf.items():
        ua = maps["alice"].setdefault(va, str(_lookup(spec.outputs["alice"], va, "alice output")))
        ub = maps["bob"].setdefault(vb, str(_lookup(spec.outputs["bob"], vb, "bob output")))
        out[(ua, ub)] += p
    us = sorted({u for u, _ in out})
    vs = sorted({v for _, v in out})
    tab = np.zeros((len(us), len(vs)))
    for (u, v), p in out.items():
        tab[us.index(u), vs.index(v)] = p
    return ExecutionResult(view_pmf, JointPMF(tab, us, vs), maps)


# --- security -------------------------------------------------------------------

@dataclass(frozen=True)
class SecurityVerdict:
    secure: bool
    reasons: tuple
    output_distance: float  # max |P_out(u, v) - target(u, v)| over labels
    leak_alice: float  # I(view_A; out_B | out_A)
    leak_bob: float  # I(out_A; view_B | out_B)

    def to_dict(self) -> dict:
        return asdict(self) | {"reasons": list(self.reasons)}


def _h(masses) -> float:
    m = np.array([v for v in masses if v > 0])
    return float(-(m * np.log2(m)).sum())


def _marginal(records, idx) -> list:
    acc: dict = defaultdict(float)
    for r in records:
        acc[tuple(r[i] for i in idx)] += r[-1]
    return list(acc.values())


def _cond_mi(records, a, b, c) -> float:
    """I(A; B | C) over records (..., p) with column indices a, b, c."""
    v = _h(_marginal(records, (a, c))) + _h(_marginal(records, (b, c))) \
        - _h(_marginal(records, (c,))) - _h(_marginal(records, (a, b, c)))
    return max(v, 0.0)


def security_check(res: ExecutionResult, target: JointPMF, tol: float = 1e-9) -> SecurityVerdict:
    """Perfect security up to ``tol``: the outputs have the target law and each
    party's view is independent of the other output given its own output."""
    if tol < 0:
        raise ParamOutOfRange("tol must be non-negative")
    got = {(res.output_pmf.x_labels[i], res.output_pmf.y_labels[j]): float(res.output_pmf.probs[i, j])
           for i in range(res.output_pmf.shape[0]) for j in range(res.output_pmf.shape[1])}
    want = {(target.x_labels[i], target.y_labels[j]): float(target.probs[i, j])
            for i in range(target.shape[0]) for j in range(target.shape[1])}
    dist = max(abs(got.get(k, 0.0) - want.get(k, 0.0)) for k in set(got) | set(want))
    fa, fb = res.output_maps["alice"], res.output_maps["bob"]
    recs = [(va, vb, fa[va], fb[vb], p) for (va, vb), p in res.view_pmf.items()]
    leak_a = _cond_mi(recs, 0, 3, 2)
    leak_b = _cond_mi(recs, 2, 1, 3)
    reasons = []
    if dist > tol:
        reasons.append(f"output distribution differs from the target by {dist:.6g}")
    if leak_a > tol:
        reasons.append(f"I(view_A; out_B | out_A) = {leak_a:.6g}")
    if leak_b > tol:
        reasons.append(f"I(out_A; view_B | out_B) = {leak_b:.6g}")
    return SecurityVerdict(not reasons, tuple(reasons), dist, leak_a, leak_b)


def example_protocols() -> dict:
    """name -> (spec, target, expected verdict) for three textbook cases."""
    bit = {"0": "0", "1": "1"}
    public_coin = ProtocolSpec(
        None,
        (Round("alice", ("0", "1"), {"": (0.5, 0.5)}),),
        {"alice": bit, "bob": bit},
    )
    two_bits = ProtocolSpec(
        None,
        (
            Round("alice", ("0", "1"), {"": (0.5, 0.5)}, private=True),
            Round("alice", ("0", "1"), {"*": (0.5, 0.5)}, private=True),
            Round("alice", ("0", "1"), {"*,0": (1.0, 0.0), "*,1": (0.0, 1.0)}),
        ),
        {"alice": {"0,*,*": "0", "1,*,*": "1"}, "bob": bit},
    )
    zs = builtin("zsource", [1 / 3])
    zero_round = ProtocolSpec(zs, (), {"alice": bit, "bob": bit})
    return {
        "public_coin": (public_coin, builtin("identical_uniform", [2]), True),
        "two_private_bits": (two_bits, builtin("independent_uniform", [2, 2]), False),
        "zero_round_zsource": (zero_round, zs, True),
    }


# --- monotone-region properties ---------------------------------------------------

PROPERTIES = ("local_computation", "communication", "secure_derivation", "tensorization")


@dataclass(frozen=True)
class PropertyCheck:
    instance: int
    prop: str
    passed: bool
    excess: float  # worst violation; <= slack passes
    rechecked: bool = False
    first_excess: float | None = None  # excess before the recheck, if one ran

    @property
    def flagged(self) -> bool:
        return not self.passed


@dataclass(frozen=True)
class SuiteReport:
    checks: tuple
    slack: float
    g: int

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def flagged(self) -> list:
        return [c for c in self.checks if c.flagged]

    def to_dict(self) -> dict:
        return {"slack": self.slack, "g": self.g, "all_passed": self.all_passed,
                "checks": [asdict(c) for c in self.checks]}


def suite_options(restarts: int = 8, max_iters: int = 2000, seed: int = 0) -> OptOptions:
    return OptOptions(restarts=restarts, max_iters=max_iters, seed=seed)


def _region(pmf: JointPMF, g: int, opts: OptOptions) -> KRegionApprox:
    from .gkops import axis_witnesses
    from .probdist import triple_of

    o = OptOptions(**{**asdict(opts), "q_size": opts.q_size or pmf.n_cells + 2})
    res = sweep_weights(pmf, weight_grid(g), o)
    anchors = [(triple_of(pmf, ch), ch) for ch in axis_witnesses(pmf)]
    return build_region(res, anchors=anchors, source=f"suite g={g}")


def _excess(P: np.ndarray, p: np.ndarray) -> float:
    """Smallest t with p + t(1,1,1) dominating a mixture of the rows of P."""
    n = len(P)
    c = np.r_[np.zeros(n), 1.0]
    A = np.c_[P.T, -np.ones(3)]
    res = linprog(c, A_ub=A, b_ub=p, A_eq=np.r_[np.ones(n), 0.0][None, :], b_eq=[1.0],
                  bounds=[(0, None)] * n + [(None, None)], method="highs")
    return float(res.x[-1])


def containment_excess(big: KRegionApprox, small: KRegionApprox) -> float:
    """Worst excess of the inner points of ``small`` over the inner hull of ``big``."""
    P = big.points
    return max(_excess(P, q) for q in small.points)


def additivity_excess(a: KRegionApprox, b: KRegionApprox, ab: KRegionApprox) -> float:
    """Worst per-direction |h_ab(w) - h_a(w) - h_b(w)|."""
    ha = {tuple(s.weights): s.value for s in a.support}
    hb = {tuple(s.weights): s.value for s in b.support}
    return max(abs(s.value - ha[tuple(s.weights)] - hb[tuple(s.weights)]) for s in ab.support)


def check_containment(big: JointPMF, small: JointPMF, g: int, opts: OptOptions) -> float:
    return containment_excess(_region(big, g, opts), _region(small, g, opts))


def check_additivity(a: JointPMF, b: JointPMF, g: int, opts: OptOptions) -> float:
    return additivity_excess(_region(a, g, opts), _region(b, g, opts), _region(tensor(a, b), g, opts))


def _cond(rng, n_in: int, n_out: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n_out), size=n_in)


def _table(entries: dict) -> JointPMF:
    rows = sorted({r for r, _ in entries})
    cols = sorted({c for _, c in entries})
    t = np.zeros((len(rows), len(cols)))
    for (r, c), p in entries.items():
        t[rows.index(r), cols.index(c)] += p
    return JointPMF(t / t.sum(), rows, cols)


def local_computation_pair(rng) -> tuple[JointPMF, JointPMF]:
    """(K(XY, Z), K(Y, Z)) pmfs for a Markov chain X - Y - Z."""
    ny = int(rng.integers(2, 4))
    py = rng.dirichlet(np.ones(ny))
    px_y, pz_y = _cond(rng, ny, 2), _cond(rng, ny, 2)
    big, small = {}, defaultdict(float)
    for y in range(ny):
        for x in range(2):
            for z in range(2):
                p = py[y] * px_y[y, x] * pz_y[y, z]
                big[(f"{x}.{y}", str(z))] = p
                small[(str(y), str(z))] += p
    return _table(big), _table(small)


def communication_pair(rng) -> tuple[JointPMF, JointPMF]:
    """(K(X, Y f(X)), K(X, Y)) pmfs for a random pmf and a random binary f."""
    nx, ny = (int(v) for v in rng.integers(2, 4, size=2))
    base = random_pmf(rng, nx, ny)
    f = rng.integers(0, 2, size=nx)
    big = {(str(i), f"{j}.{f[i]}"): float(base.probs[i, j]) for i in range(nx) for j in range(ny)}
    return _table(big), base


def secure_derivation_pair(rng) -> tuple[JointPMF, JointPMF]:
    """(K(U, V), K(XU, YV)) pmfs for X - U - V - Y."""
    puv = rng.dirichlet(np.ones(4)).reshape(2, 2)
    px_u, py_v = _cond(rng, 2, 2), _cond(rng, 2, 2)
    small = {}
    for u in range(2):
        for v in range(2):
            for x in range(2):
                for y in range(2):
                    small[(f"{x}.{u}", f"{y}.{v}")] = puv[u, v] * px_u[u, x] * py_v[v, y]
    return JointPMF(puv, ["0", "1"], ["0", "1"]), _table(small)


def tensor_pair(rng) -> tuple[JointPMF, JointPMF]:
    return random_pmf(rng, 2, 2), random_pmf(rng, 2, 2)


def _run_property(prop: str, pair, g: int, opts: OptOptions) -> float:
    if prop == "tensorization":
        return check_additivity(*pair, g, opts)
    return check_containment(*pair, g, opts)


def _instance(args) -> list:
    i, seed, g, slack, opts, props = args
    builders = {
        "local_computation": local_computation_pair,
        "communication": communication_pair,
        "secure_derivation": secure_derivation_pair,
        "tensorization": tensor_pair,
    }
    out = []
    for k, prop in enumerate(PROPERTIES):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i, k]))
        pair = builders[prop](rng)
        if prop not in props:
            continue
        o = OptOptions(**{**asdict(opts), "seed": int(rng.integers(2**31))})
        ex = _run_property(prop, pair, g, o)
        if ex <= slack:
            out.append(PropertyCheck(i, prop, True, ex))
            continue
        log.info("instance %d %s: excess %.3g at g=%d, rechecking at g=%d", i, prop, ex, g, 2 * g)
        ex2 = _run_property(prop, pair, 2 * g, o)
        out.append(PropertyCheck(i, prop, ex2 <= slack, ex2, True, ex))
    return out


def monotonicity_suite(instances: int = 20, seed: int = 0, g: int = 6, slack: float = 5e-3,
                       opts: OptOptions | None = None, properties=PROPERTIES,
                       workers: int | None = None) -> SuiteReport:
    """Check the four properties on seeded random instances.

    Each instance draws one pmf configuration per property.  Any check
    whose excess is above ``slack`` is repeated with a doubled sweep
    resolution, and only the repeated result is reported.
    """
    if instances < 1:
        raise ParamOutOfRange("instances must be at least 1")
    unknown = set(properties) - set(PROPERTIES)
    if unknown:
        raise ParamOutOfRange(f"unknown properties {sorted(unknown)}")
    opts = opts or suite_options()
    jobs = [(i, seed, g, slack, opts, tuple(properties)) for i in range(instances)]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_instance, jobs))
    else:
        parts = [_instance(j) for j in jobs]
    return SuiteReport(tuple(c for part in parts for c in part), slack, g)
