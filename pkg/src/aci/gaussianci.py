"""Jointly Gaussian pairs with Gaussian auxiliaries Q = aX + bY + N.

X and Y have unit variance and correlation rho; N ~ N(0, sigma2) is
independent of them.  Every quantity is a ratio of (conditional)
variances, so differential-entropy conventions cancel and all outputs are
mutual informations in bits.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .errors import DegenerateCovariance, NoSolution, ParamOutOfRange
from .probdist import AuxChannel, JointPMF, KTriple, extend, k_triple

VAR_TOL = 1e-12
# log-variance search interval for the curve: the lower end stays clear of
# the degeneracy tolerance, which caps the reachable rate
LOG_S2_MIN, LOG_S2_MAX = math.log(1e-11), math.log(1e200)


@dataclass(frozen=True)
class GaussianPair:
    rho: float

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise ParamOutOfRange(f"correlation must lie in (-1, 1), got {self.rho}")

    @property
    def cov(self) -> np.ndarray:
        return np.array([[1.0, self.rho], [self.rho, 1.0]])

    @property
    def mutual_information(self) -> float:
        return -0.5 * math.log2(1.0 - self.rho**2)


@dataclass(frozen=True)
class GaussianAux:
    a: float
    b: float
    sigma2: float

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ParamOutOfRange("noise variance must be non-negative")
        if self.a == 0 and self.b == 0 and self.sigma2 == 0:
            raise ParamOutOfRange("auxiliary (0, 0, 0) is not a random variable")


def _half_log_ratio(num: float, den: float, what: str) -> float:
    if num <= VAR_TOL or den <= VAR_TOL:
        raise DegenerateCovariance(f"conditional variance for {what} is not positive")
    return max(0.5 * math.log2(num / den), 0.0)


def gaussian_triple(pair: GaussianPair, aux: GaussianAux) -> tuple[KTriple, float]:
    """(I(Q;Y|X), I(Q;X|Y), I(X;Y|Q)) and I(XY;Q) via Schur complements."""
    rho, a, b, s2 = pair.rho, aux.a, aux.b, aux.sigma2
    var_q = a * a + b * b + 2 * a * b * rho + s2
    cx = a + b * rho  # Cov(Q, X)
    cy = a * rho + b  # Cov(Q, Y)
    var_q_x = var_q - cx * cx
    var_q_y = var_q - cy * cy
    if s2 <= VAR_TOL:
        raise DegenerateCovariance("noise variance 0 makes Q a function of (X, Y)")
    r1 = _half_log_ratio(var_q_x, s2, "Q given X")
    r2 = _half_log_ratio(var_q_y, s2, "Q given Y")
    # conditional covariance of (X, Y) given Q
    c = np.array([cx, cy])
    S = pair.cov - np.outer(c, c) / var_q
    det = float(np.linalg.det(S))
    if S[0, 0] <= VAR_TOL or S[1, 1] <= VAR_TOL or det <= VAR_TOL**2:
        raise DegenerateCovariance("(X, Y) given Q is degenerate")
    z = max(0.5 * math.log2(S[0, 0] * S[1, 1] / det), 0.0)
    i_xyq = max(0.5 * math.log2(var_q / s2), 0.0)
    return KTriple(r1, r2, z), i_xyq


def _sign(rho: float) -> float:
    return -1.0 if rho < 0 else 1.0


def symmetric_aux(pair: GaussianPair, sigma2: float) -> GaussianAux:
    """Q = X + sign(rho) Y + N, the symmetric member with noise sigma2."""
    return GaussianAux(1.0, _sign(pair.rho), sigma2)


def _r_symmetric(pair: GaussianPair, log_s2: float) -> float:
    return gaussian_triple(pair, symmetric_aux(pair, math.exp(log_s2)))[0].r1


def sigma2_for_rate(pair: GaussianPair, R: float) -> float:
    """Noise variance at which the symmetric auxiliary has I(Q;Y|X) = R.

    Root-finding by bracketing bisection (Brent) in log sigma2, where the
    rate is strictly decreasing.
    """
    if R <= 0:
        return math.inf
    f = lambda ls: _r_symmetric(pair, ls) - R  # noqa: E731
    if f(LOG_S2_MIN) < 0:
        raise NoSolution(f"rate {R} exceeds what the symmetric family reaches")
    if f(LOG_S2_MAX) > 0:
        raise NoSolution(f"rate {R} is below the numerical floor of the search")
    ls = brentq(f, LOG_S2_MIN, LOG_S2_MAX, xtol=1e-14, rtol=1e-15, maxiter=500)
    return math.exp(ls)


def zero_dependency_sigma2(pair: GaussianPair) -> float:
    """Noise variance at which the symmetric auxiliary makes X, Y conditionally independent."""
    if pair.rho == 0:
        return math.inf
    r = abs(pair.rho)
    return (1 + r) * (1 - r) / r


def gaussian_curve(pair: GaussianPair, R_values) -> list[tuple[float, float, float]]:
    """Rows (R, R_CI, R_RD) of the symmetric trade-off.

    R_CI is I(XY;Q) of the member with I(Q;Y|X) = I(Q;X|Y) = R.  Rate
    pairs are upward closed, so R_RD is the smallest I(X;Y|Q) over members
    with rates at most R: below the conditional-independence point that is
    the member itself, beyond it the residual dependency stays 0.
    """
    s2_zero = zero_dependency_sigma2(pair)
    rows = []
    prev = -math.inf
    for R in R_values:
        R = float(R)
        if R < 0:
            raise ValueError("rates must be non-negative")
        if R < prev:
            raise ValueError("rates must be sorted")
        prev = R
        if R == 0:
            # Q constant: the limit sigma2 -> infinity
            rows.append((0.0, 0.0, pair.mutual_information))
            continue
        s2 = sigma2_for_rate(pair, R)
        _, i_xyq = gaussian_triple(pair, symmetric_aux(pair, s2))
        if s2 >= s2_zero:
            rd = gaussian_triple(pair, symmetric_aux(pair, s2))[0].z
        else:
            rd = gaussian_triple(pair, symmetric_aux(pair, s2_zero))[0].z
        rows.append((R, i_xyq, rd))
    return rows


def curve_csv(rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["R", "R_CI", "R_RD"])
    for r in rows:
        wr.writerow([repr(float(v)) for v in r])
    return buf.getvalue()


def discretized_triple(pair: GaussianPair, aux: GaussianAux, bins: int = 64,
                       span: float = 4.5) -> tuple[KTriple, float]:
    """Triple of a quantised version of (X, Y, Q) computed by the discrete code.

    X and Y are cut into ``bins`` equal cells on [-span, span] (tails folded
    into the end cells) with masses from the density at cell centres; Q
    given the centres is quantised into ``bins`` cells over its own +-span
    standard deviations using the exact normal CDF.
    """
    edges = np.linspace(-span, span, bins + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    X, Y = np.meshgrid(mid, mid, indexing="ij")
    rho = pair.rho
    dens = np.exp(-(X * X - 2 * rho * X * Y + Y * Y) / (2 * (1 - rho * rho)))
    pxy = dens / dens.sum()
    pmf = JointPMF(pxy)
    sd_q = math.sqrt(aux.a**2 + aux.b**2 + 2 * aux.a * aux.b * rho + aux.sigma2)
    qe = np.linspace(-span * sd_q, span * sd_q, bins + 1)
    qe[0], qe[-1] = -np.inf, np.inf
    xi, yi = pmf.support()  # no cell has zero mass, so indices are grid indices
    mean = aux.a * mid[xi] + aux.b * mid[yi]
    sd = math.sqrt(aux.sigma2)
    cdf = ndtr((qe[None, :] - mean[:, None]) / sd)
    rows = np.diff(cdf, axis=1)
    rows /= rows.sum(axis=1, keepdims=True)
    return k_triple(extend(pmf, AuxChannel(bins, rows)))
