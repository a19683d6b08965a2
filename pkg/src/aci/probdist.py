"""Finite joint distributions and Shannon measures (all in bits).

A :class:`JointPMF` is the input object of every computation in the
package.  Zero-mass symbols are stripped at construction, so every
conditional distribution used downstream is well defined.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    NegativeMass,
    ParamOutOfRange,
    RowNotNormalized,
    ShapeMismatch,
    SizeLimit,
    SumNotOne,
    UnknownName,
)

TOL = 1e-9
TENSOR_CELL_CAP = 4096


def entropy(p) -> float:
    """Entropy in bits of a (possibly multi-dimensional) pmf array."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def binary_entropy(p: float) -> float:
    return entropy([p, 1.0 - p])


class JointPMF:
    """Joint pmf of a pair (X, Y) on finite labelled alphabets.

    Rows index X, columns index Y.  Rows or columns of zero mass are
    removed together with their labels.
    """

    __slots__ = ("x_labels", "y_labels", "probs")

    def __init__(self, probs, x_labels=None, y_labels=None, strip=True):
        arr = np.array(probs, dtype=float)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ShapeMismatch(f"pmf must be a non-empty 2-D table, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ShapeMismatch("pmf contains non-finite entries")
        if np.any(arr < 0):
            raise NegativeMass("pmf has negative entries")
        total = arr.sum()
        if abs(total - 1.0) > TOL:
            raise SumNotOne(f"pmf sums to {total!r}, not 1")
        nx, ny = arr.shape
        xl = [f"x{i}" for i in range(nx)] if x_labels is None else [str(s) for s in x_labels]
        yl = [f"y{j}" for j in range(ny)] if y_labels is None else [str(s) for s in y_labels]
        if len(xl) != nx or len(yl) != ny:
            raise ShapeMismatch("label count does not match pmf shape")
        if len(set(xl)) != nx or len(set(yl)) != ny:
            raise ShapeMismatch("labels must be unique")
        if strip:
            keep_x = arr.sum(axis=1) > 0
            keep_y = arr.sum(axis=0) > 0
            arr = arr[keep_x][:, keep_y]
            xl = [s for s, k in zip(xl, keep_x) if k]
            yl = [s for s, k in zip(yl, keep_y) if k]
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)
        object.__setattr__(self, "x_labels", tuple(xl))
        object.__setattr__(self, "y_labels", tuple(yl))

    def __setattr__(self, name, value):
        raise AttributeError("JointPMF is immutable")

    def __repr__(self):
        return f"JointPMF(shape={self.shape})"

    def __reduce__(self):
        return (JointPMF, (np.array(self.probs), self.x_labels, self.y_labels, False))

    def __eq__(self, other):
        if not isinstance(other, JointPMF):
            return NotImplemented
        return (
            self.x_labels == other.x_labels
            and self.y_labels == other.y_labels
            and np.array_equal(self.probs, other.probs)
        )

    __hash__ = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape

    @property
    def px(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    @property
    def py(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Row and column indices of the positive cells, in row-major order."""
        xi, yi = np.nonzero(self.probs > 0)
        return xi, yi

    @property
    def n_cells(self) -> int:
        return int(np.count_nonzero(self.probs > 0))

    def cell_probs(self) -> np.ndarray:
        xi, yi = self.support()
        return self.probs[xi, yi]

    def swap(self) -> "JointPMF":
        """The pair (Y, X)."""
        return JointPMF(self.probs.T, self.y_labels, self.x_labels)

    def default_q_size(self) -> int:
        nx, ny = self.shape
        return nx * ny + 2


@dataclass(frozen=True)
class AuxChannel:
    """Conditional pmf p(q|x,y), one row per support cell of a JointPMF.

    ``rows[k]`` belongs to the k-th support cell in row-major order
    (see :meth:`JointPMF.support`).
    """

    q_size: int
    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != self.q_size:
            raise ShapeMismatch(f"channel rows must have shape (cells, {self.q_size})")
        if np.any(rows < -1e-15):
            raise NegativeMass("channel has negative entries")
        if np.any(np.abs(rows.sum(axis=1) - 1.0) > TOL):
            raise RowNotNormalized("every channel row must sum to 1")
        rows = np.clip(rows, 0.0, None)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def constant(cls, pmf: JointPMF, q_size: int = 1) -> "AuxChannel":
        rows = np.zeros((pmf.n_cells, q_size))
        rows[:, 0] = 1.0
        return cls(q_size, rows)

    @classmethod
    def deterministic(cls, labels: Sequence[int], q_size: int | None = None) -> "AuxChannel":
        """Channel Q = f(x, y) given the class index of every support cell."""
        labels = np.asarray(labels, dtype=int)
        q = int(labels.max()) + 1 if q_size is None else q_size
        rows = np.zeros((len(labels), q))
        rows[np.arange(len(labels)), labels] = 1.0
        return cls(q, rows)

    @classmethod
    def from_function(cls, pmf: JointPMF, f, q_size: int | None = None) -> "AuxChannel":
        """Deterministic channel from ``f(x_index, y_index) -> int``."""
        xi, yi = pmf.support()
        return cls.deterministic([f(int(x), int(y)) for x, y in zip(xi, yi)], q_size)


@dataclass(frozen=True)
class ThreeWayPMF:
    base: JointPMF
    q_size: int
    probs: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.probs, dtype=float)
        if t.shape != self.base.shape + (self.q_size,):
            raise ShapeMismatch("three-way table does not match base pmf")
        if np.any(t < 0):
            raise NegativeMass("negative mass in three-way pmf")
        if np.max(np.abs(t.sum(axis=2) - self.base.probs)) > TOL:
            raise ShapeMismatch("q-marginalisation does not reproduce the base pmf")


class KTriple(NamedTuple):
    """(I(Q;Y|X), I(Q;X|Y), I(X;Y|Q)) in bits."""

    r1: float
    r2: float
    z: float


@dataclass(frozen=True)
class InfoSummary:
    H_X: float
    H_Y: float
    H_XY: float
    H_X_given_Y: float
    H_Y_given_X: float
    I_XY: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def info_summary(pmf: JointPMF) -> InfoSummary:
    hx = entropy(pmf.px)
    hy = entropy(pmf.py)
    hxy = entropy(pmf.probs)
    return InfoSummary(
        H_X=hx,
        H_Y=hy,
        H_XY=hxy,
        H_X_given_Y=max(hxy - hy, 0.0),
        H_Y_given_X=max(hxy - hx, 0.0),
        I_XY=max(hx + hy - hxy, 0.0),
    )


def mutual_information(pmf: JointPMF) -> float:
    return info_summary(pmf).I_XY


def extend(pmf: JointPMF, ch: AuxChannel) -> ThreeWayPMF:
    """Joint pmf of (X, Y, Q) with Q drawn through ``ch``."""
    if ch.rows.shape[0] != pmf.n_cells:
        raise ShapeMismatch(
            f"channel has {ch.rows.shape[0]} rows but pmf has {pmf.n_cells} support cells"
        )
    xi, yi = pmf.support()
    t = np.zeros(pmf.shape + (ch.q_size,))
    t[xi, yi, :] = pmf.probs[xi, yi][:, None] * ch.rows
    return ThreeWayPMF(pmf, ch.q_size, t)


def k_triple(three: ThreeWayPMF) -> tuple[KTriple, float]:
    """The triple of ``three`` and the scalar I(XY;Q)."""
    t = three.probs
    h_xyq = entropy(t)
    h_xq = entropy(t.sum(axis=1))
    h_yq = entropy(t.sum(axis=0))
    h_q = entropy(t.sum(axis=(0, 1)))
    pxy = three.base.probs
    h_xy = entropy(pxy)
    h_x = entropy(pxy.sum(axis=1))
    h_y = entropy(pxy.sum(axis=0))
    r1 = h_xq - h_x - h_xyq + h_xy
    r2 = h_yq - h_y - h_xyq + h_xy
    z = h_xq + h_yq - h_xyq - h_q
    i_xyq = h_xy + h_q - h_xyq
    return KTriple(max(r1, 0.0), max(r2, 0.0), max(z, 0.0)), max(i_xyq, 0.0)


def triple_of(pmf: JointPMF, ch: AuxChannel) -> KTriple:
    return k_triple(extend(pmf, ch))[0]


def tensor(a: JointPMF, b: JointPMF, cap: int = TENSOR_CELL_CAP) -> JointPMF:
    """Product distribution of two independent pairs.

    Symbol (xa, xb) sits at index ``xa * |Xb| + xb``; labels are joined
    with ``"|"``.
    """
    nx = a.shape[0] * b.shape[0]
    ny = a.shape[1] * b.shape[1]
    if nx * ny > cap:
        raise SizeLimit(f"tensor product has {nx * ny} cells, cap is {cap}")
    probs = np.einsum("ij,kl->ikjl", a.probs, b.probs).reshape(nx, ny)
    xl = [f"{s}|{t}" for s in a.x_labels for t in b.x_labels]
    yl = [f"{s}|{t}" for s in a.y_labels for t in b.y_labels]
    return JointPMF(probs, xl, yl)


def tensor_channel(pa: JointPMF, ca: AuxChannel, pb: JointPMF, cb: AuxChannel) -> AuxChannel:
    """Channel Q = (Qa, Qb) on ``tensor(pa, pb)`` built from channels of the factors."""
    prod = tensor(pa, pb, cap=10**9)
    xa, ya = pa.support()
    xb, yb = pb.support()
    index_a = {(int(x), int(y)): k for k, (x, y) in enumerate(zip(xa, ya))}
    index_b = {(int(x), int(y)): k for k, (x, y) in enumerate(zip(xb, yb))}
    nxb, nyb = pb.shape
    rows = []
    for x, y in zip(*prod.support()):
        ka = index_a[(int(x) // nxb, int(y) // nyb)]
        kb = index_b[(int(x) % nxb, int(y) % nyb)]
        rows.append(np.outer(ca.rows[ka], cb.rows[kb]).ravel())
    return AuxChannel(ca.q_size * cb.q_size, np.array(rows))


# --- builtin distributions ------------------------------------------------

BUILTIN_PARAMS = {
    "zsource": ("p",),
    "connected": ("delta",),
    "independent_uniform": ("n", "m"),
    "identical_uniform": ("n",),
}


def _as_count(v, name) -> int:
    if float(v) != int(v) or int(v) < 1:
        raise ParamOutOfRange(f"{name} must be a positive integer, got {v}")
    return int(v)


def builtin(name: str, params: Sequence[float] = ()) -> JointPMF:
    """Named test distributions.

    ``zsource(p)``: p(0,0)=p(1,1)=p, p(1,0)=1-2p, p(0,1)=0.
    ``connected(delta)``: 4x4 two-block pmf, (1-delta)/8 on the eight
    within-block cells and delta/8 on the eight cross cells.
    """
    params = list(params)
    if name not in BUILTIN_PARAMS:
        raise UnknownName(f"unknown builtin {name!r}; choose from {sorted(BUILTIN_PARAMS)}")
    want = BUILTIN_PARAMS[name]
    if len(params) != len(want):
        raise ParamOutOfRange(f"{name} takes parameters {want}, got {params}")
    if name == "zsource":
        p = float(params[0])
        if not 0.0 <= p <= 0.5:
            raise ParamOutOfRange("zsource requires 0 <= p <= 1/2")
        return JointPMF([[p, 0.0], [1.0 - 2.0 * p, p]], ["0", "1"], ["0", "1"])
    if name == "connected":
        d = float(params[0])
        if not 0.0 <= d <= 1.0:
            raise ParamOutOfRange("connected requires 0 <= delta <= 1")
        blk = np.arange(4) // 2
        same = blk[:, None] == blk[None, :]
        probs = np.where(same, (1.0 - d) / 8.0, d / 8.0)
        lab = [str(i) for i in range(4)]
        return JointPMF(probs, lab, lab)
    if name == "independent_uniform":
        n, m = _as_count(params[0], "n"), _as_count(params[1], "m")
        return JointPMF(np.full((n, m), 1.0 / (n * m)),
                        [str(i) for i in range(n)], [str(j) for j in range(m)])
    n = _as_count(params[0], "n")
    lab = [str(i) for i in range(n)]
    return JointPMF(np.eye(n) / n, lab, lab)


def parse_dist_spec(text: str) -> JointPMF:
    """``name:key=value,...`` for a builtin, or ``file:path`` for a JSON pmf document."""
    name, _, rest = text.strip().partition(":")
    if name == "file":
        if not rest:
            raise ParamOutOfRange("file: needs a path")
        try:
            with open(rest, encoding="utf-8") as fh:
                return load_pmf(fh.read())
        except OSError as exc:
            raise ParamOutOfRange(f"cannot read {rest!r}: {exc.strerror}") from None
    if name not in BUILTIN_PARAMS:
        raise UnknownName(f"unknown distribution {name!r}; choose from {sorted(BUILTIN_PARAMS)} or file:path")
    given = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ParamOutOfRange(f"expected key=value, got {item!r}")
        try:
            given[key.strip()] = float(val)
        except ValueError:
            raise ParamOutOfRange(f"parameter {key!r} is not a number: {val!r}") from None
    want = BUILTIN_PARAMS[name]
    if set(given) != set(want):
        raise ParamOutOfRange(f"{name} takes parameters {', '.join(want)}; got {', '.join(sorted(given)) or 'none'}")
    return builtin(name, [given[k] for k in want])


def random_pmf(rng: np.random.Generator, nx: int, ny: int, zero_frac: float = 0.0) -> JointPMF:
    """Dirichlet(1) pmf, optionally with some cells forced to zero."""
    w = rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny)
    if zero_frac > 0:
        mask = rng.random((nx, ny)) < zero_frac
        mask.flat[rng.integers(nx * ny)] = False
        w = np.where(mask, 0.0, w)
        w /= w.sum()
    return JointPMF(w)


# --- JSON -----------------------------------------------------------------

def load_pmf(document) -> JointPMF:
    """Parse the JSON pmf schema (a string, bytes or an already-decoded dict)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ShapeMismatch(f"not valid JSON: {exc}") from None
    if not isinstance(document, dict) or "pmf" not in document:
        raise ShapeMismatch('pmf document must be an object with a "pmf" key')
    table = document["pmf"]
    if not isinstance(table, list) or not table or not all(isinstance(r, list) for r in table):
        raise ShapeMismatch('"pmf" must be a non-empty list of rows')
    if len({len(r) for r in table}) != 1:
        raise ShapeMismatch("pmf rows have different lengths")
    try:
        arr = np.array(table, dtype=float)
    except (TypeError, ValueError):
        raise ShapeMismatch("pmf entries must be numbers") from None
    return JointPMF(arr, document.get("x_labels"), document.get("y_labels"))


def pmf_to_dict(pmf: JointPMF) -> dict:
    return {
        "x_labels": list(pmf.x_labels),
        "y_labels": list(pmf.y_labels),
        "pmf": [[float(f"{v:.17g}") for v in row] for row in pmf.probs],
    }


def dump_pmf(pmf: JointPMF) -> str:
    """Serialise with 17 significant digits, so that ``load_pmf`` round-trips exactly."""
    rows = ", ".join("[" + ", ".join(f"{v:.17g}" for v in row) + "]" for row in pmf.probs)
    return (
        "{"
        f'"x_labels": {json.dumps(list(pmf.x_labels))}, '
        f'"y_labels": {json.dumps(list(pmf.y_labels))}, '
        f'"pmf": [{rows}]'
        "}"
    )
