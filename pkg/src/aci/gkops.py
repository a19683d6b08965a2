"""Exact combinatorics of the common part and the three Wolf-Wullschleger monotones.

The common part X^Y is the connected component of the bipartite support
graph (x -- y iff p(x,y) > 0).  The dependent part of Y with respect to X
groups together the y symbols whose conditionals p(.|y) coincide.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probdist import AuxChannel, JointPMF, entropy

COLUMN_TOL = 1e-9


class UnionFind:
    """Disjoint sets over 0..n-1 with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def labels(self) -> list[int]:
        """Component index per element, numbered by first occurrence."""
        ids: dict[int, int] = {}
        out = []
        for i in range(len(self.parent)):
            r = self.find(i)
            if r not in ids:
                ids[r] = len(ids)
            out.append(ids[r])
        return out


@dataclass(frozen=True)
class GKDecomposition:
    x_component: dict
    y_component: dict
    component_probs: tuple
    common_entropy: float
    residual_mi: float

    @property
    def n_components(self) -> int:
        return len(self.component_probs)

    def as_dict(self) -> dict:
        return {
            "x_component": dict(self.x_component),
            "y_component": dict(self.y_component),
            "component_probs": list(self.component_probs),
            "common_entropy": self.common_entropy,
            "residual_mi": self.residual_mi,
        }


@dataclass(frozen=True)
class WWMonotones:
    h_y_down_x: float
    h_x_down_y: float
    i_given_meet: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.h_y_down_x, self.h_x_down_y, self.i_given_meet)


def _component_indices(pmf: JointPMF) -> tuple[np.ndarray, np.ndarray]:
    nx, ny = pmf.shape
    uf = UnionFind(nx + ny)
    for x, y in zip(*pmf.support()):
        uf.union(int(x), nx + int(y))
    lab = np.array(uf.labels())
    return lab[:nx], lab[nx:]


def _conditional_mi(pmf: JointPMF, xc: np.ndarray) -> float:
    """I(X;Y|C) for C a function of X given as the class of each x."""
    p = pmf.probs
    total = 0.0
    for c in np.unique(xc):
        block = p[xc == c]
        pc = block.sum()
        cond = block / pc
        total += pc * (entropy(cond.sum(axis=1)) + entropy(cond.sum(axis=0)) - entropy(cond))
    return max(float(total), 0.0)


def gk_decompose(pmf: JointPMF) -> GKDecomposition:
    xc, yc = _component_indices(pmf)
    probs = np.array([pmf.px[xc == c].sum() for c in range(int(xc.max()) + 1)])
    return GKDecomposition(
        x_component={lab: int(c) for lab, c in zip(pmf.x_labels, xc)},
        y_component={lab: int(c) for lab, c in zip(pmf.y_labels, yc)},
        component_probs=tuple(float(v) for v in probs),
        common_entropy=entropy(probs),
        residual_mi=_conditional_mi(pmf, xc),
    )


def dependent_part(pmf: JointPMF, side: str = "Y", tol: float = COLUMN_TOL) -> tuple[tuple[int, ...], ...]:
    """Coarsest partition of one alphabet by equality of conditionals.

    For ``side="Y"`` two y symbols share a class iff p(.|y) agree within
    ``tol`` in the sup norm.  Classes are listed in order of their
    smallest member.
    """
    if side.upper() == "Y":
        cond = (pmf.probs / pmf.py[None, :]).T
    elif side.upper() == "X":
        cond = pmf.probs / pmf.px[:, None]
    else:
        raise ValueError("side must be 'X' or 'Y'")
    classes: list[list[int]] = []
    reps: list[np.ndarray] = []
    for s in range(cond.shape[0]):
        for cls, rep in zip(classes, reps):
            if np.max(np.abs(cond[s] - rep)) <= tol:
                cls.append(s)
                break
        else:
            classes.append([s])
            reps.append(cond[s])
    return tuple(tuple(c) for c in classes)


def _class_index(partition, n: int) -> np.ndarray:
    idx = np.empty(n, dtype=int)
    for k, cls in enumerate(partition):
        idx[list(cls)] = k
    return idx


def ww_monotones(pmf: JointPMF) -> WWMonotones:
    p = pmf.probs
    nx, ny = pmf.shape
    py_class = _class_index(dependent_part(pmf, "Y"), ny)
    px_class = _class_index(dependent_part(pmf, "X"), nx)
    # H(P|X) with P the class of y
    joint_xp = np.zeros((nx, py_class.max() + 1))
    np.add.at(joint_xp.T, py_class, p.T)
    joint_py = np.zeros((px_class.max() + 1, ny))
    np.add.at(joint_py, px_class, p)
    return WWMonotones(
        h_y_down_x=max(entropy(joint_xp) - entropy(pmf.px), 0.0),
        h_x_down_y=max(entropy(joint_py) - entropy(pmf.py), 0.0),
        i_given_meet=gk_decompose(pmf).residual_mi,
    )


def axis_witnesses(pmf: JointPMF) -> tuple[AuxChannel, AuxChannel, AuxChannel]:
    """Deterministic channels realising the three axis intercepts.

    Returns Q = class of y, Q = class of x, and Q = common component,
    whose triples are (H(Y\\X|X), 0, 0), (0, H(X\\Y|Y), 0) and
    (0, 0, I(X;Y|X^Y)).
    """
    nx, ny = pmf.shape
    yc = _class_index(dependent_part(pmf, "Y"), ny)
    xc = _class_index(dependent_part(pmf, "X"), nx)
    comp, _ = _component_indices(pmf)
    return (
        AuxChannel.from_function(pmf, lambda x, y: int(yc[y])),
        AuxChannel.from_function(pmf, lambda x, y: int(xc[x])),
        AuxChannel.from_function(pmf, lambda x, y: int(comp[x])),
    )
