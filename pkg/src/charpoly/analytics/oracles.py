"""Exact log-scale moment oracles, cumulants and Lyapunov ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import integrate

from ..specfun import lngamma_balanced, polygamma


class Group(str, Enum):
    UNITARY = "unitary"
    SO2N = "so2n"


@dataclass(frozen=True)
class MomentQuery:
    """Exponents (t, s) of E[|Z|^t e^{i s arg Z}] for size n of a group."""

    t: float
    s: float = 0.0
    group: Group = Group.UNITARY
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "group", Group(self.group))
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        self.validate()

    def validate(self) -> None:
        t, s = self.t, self.s
        if self.group is Group.UNITARY:
            if not (t + s > -1 and t - s > -1):
                raise ValueError(f"moment domain violated: need Re(t±s) > -1, got t={t}, s={s}")
        else:
            if s != 0:
                raise ValueError("SO(2n) moments take s = 0 (Z is real and non-negative)")
            if not t > -0.5:
                raise ValueError(f"SO(2n) moment domain violated: need t > -1/2, got t={t}")


def moment_factor(j, t: float, s: float = 0.0):
    """log E[|X|^t e^{is arg X}] for X = 1 + e^{i theta} sqrt(beta_{1,j-1}).

    Equals lnG(j) + lnG(j+t) - lnG(j+(t+s)/2) - lnG(j+(t-s)/2).
    """
    if not (t + s > -1 and t - s > -1):
        raise ValueError(f"moment domain violated: need Re(t±s) > -1, got t={t}, s={s}")
    return lngamma_balanced(j, (0.0, t), ((t + s) / 2, (t - s) / 2))


def moment_unitary(q: MomentQuery | int, t: float | None = None, s: float = 0.0) -> float:
    """log of the U(n) Mellin-Fourier transform E[|Z_n|^t e^{i s arg Z_n}].

    Accepts a MomentQuery or ``(n, t, s)``.
    """
    if not isinstance(q, MomentQuery):
        q = MomentQuery(t, s, Group.UNITARY, q)
    elif q.group is not Group.UNITARY:
        raise ValueError("moment_unitary needs a unitary query")
    j = np.arange(1, q.n + 1, dtype=float)
    return math.fsum(moment_factor(j, q.t, q.s))


def fourier_w(j: int, s: float) -> float:
    """log E[e^{i s W_j}] = 2 lnG(j) - lnG(j+s/2) - lnG(j-s/2), |s| < 2j."""
    if not abs(s) < 2 * j:
        raise ValueError(f"need |s| < 2j, got j={j}, s={s}")
    return lngamma_balanced(j, (0.0, 0.0), (s / 2, -s / 2))


def mellin_t(j: int, t: float) -> float:
    """log E[e^{t T_j}] = lnG(j) + lnG(j+t) - 2 lnG(j+t/2), t > -j."""
    if not t > -j:
        raise ValueError(f"need t > -j, got j={j}, t={t}")
    return lngamma_balanced(j, (0.0, t), (t / 2, t / 2))


def moment_so2n(q: MomentQuery | int, t: float | None = None) -> float:
    """log E[Z^t] for Z = det(I - O), O Haar on SO(2n)."""
    if not isinstance(q, MomentQuery):
        q = MomentQuery(t, 0.0, Group.SO2N, q)
    elif q.group is not Group.SO2N:
        raise ValueError("moment_so2n needs an SO(2n) query")
    n, t = q.n, q.t
    k = np.arange(1, n + 1, dtype=float)
    terms = lngamma_balanced(k, (n - 1.0, t - 0.5), (-0.5, t + n - 1.0))
    return 2 * n * t * math.log(2.0) + math.fsum(terms)


def log_moment(q: MomentQuery) -> float:
    return moment_unitary(q) if q.group is Group.UNITARY else moment_so2n(q)


# ---- cumulants -----------------------------------------------------------


def cumulant(j, k: int, which: str):
    """k-th cumulant of T_j (``which='Q'``) or W_j (``which='R'``)."""
    if not 1 <= k <= 6:
        raise ValueError(f"cumulant order must be in 1..6, got {k}")
    which = which.upper()
    psi = polygamma(k - 1, np.asarray(j, dtype=float))
    if which == "Q":
        return (2 ** (k - 1) - 1) / 2 ** (k - 1) * psi
    if which == "R":
        if k % 2:
            return 0.0 * psi
        return (-1) ** (k // 2 + 1) / 2 ** (k - 1) * psi
    raise ValueError("which must be 'Q' (radial) or 'R' (angular)")


@dataclass(frozen=True)
class CumulantTable:
    n: int
    max_order: int
    q: np.ndarray  # q[j-1, k-1] = Q_{j,k}
    r: np.ndarray

    @classmethod
    def build(cls, n: int, max_order: int = 4) -> "CumulantTable":
        j = np.arange(1, n + 1, dtype=float)
        q = np.column_stack([cumulant(j, k, "Q") for k in range(1, max_order + 1)])
        r = np.column_stack([cumulant(j, k, "R") for k in range(1, max_order + 1)])
        return cls(n, max_order, q, r)

    @property
    def q_sums(self) -> np.ndarray:
        """Cumulants of sum_j T_j, i.e. of log|Z_n|, by order."""
        return self.q.sum(axis=0)

    @property
    def r_sums(self) -> np.ndarray:
        """Cumulants of sum_j W_j, i.e. of Im log Z_n, by order."""
        return self.r.sum(axis=0)


def variance_sum(n: int) -> float:
    """(1/2) sum_{j<=n} psi'(j): the variance of both Re and Im log Z_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 0.5 * math.fsum(polygamma(1, np.arange(1, n + 1, dtype=float)))


# ---- third absolute moments and Lyapunov ratios -----------------------------


@lru_cache(maxsize=None)
def abs_third_moment_w(j: int) -> float:
    """E|W_j|^3 by adaptive quadrature against the density of W_j."""
    from ..distributions import WjParams

    log_k = WjParams(j).log_norm_const

    def f(v):
        return v ** 3 * math.exp(log_k + 2 * (j - 1) * math.log(math.cos(v)))

    # the mass sits within a few multiples of 1/sqrt(j) of 0
    edge = min(math.pi / 2, 12.0 / math.sqrt(j))
    total = 0.0
    for lo, hi in ((0.0, edge), (edge, math.pi / 2)):
        if hi <= lo:
            continue
        val, err = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
        if not err < 1e-8:
            raise ArithmeticError(f"quadrature for E|W_{j}|^3 did not converge (err {err:.2g})")
        total += val
    return 2.0 * total


# from this j on, E|T_j|^3 uses the tensor Gauss-Legendre rule
GL_FROM_J = 20
GL_NODES = (24, 32)
GL_TOL = 1e-8


@lru_cache(maxsize=None)
def _leggauss(nodes: int):
    return np.polynomial.legendre.leggauss(nodes)


def _abs_third_t_gl(js, nodes: int) -> np.ndarray:
    """Tensor Gauss-Legendre for E|T_j|^3 on the bulk of the (v, beta) square.

    Vectorised over an array of j >= 2.  |T|^3 has a kink on the curve
    beta = 1/(2 cos v); the inner beta rule is split there so every panel
    integrates a smooth function.
    """
    from scipy.special import gammaln

    j = np.asarray(js, dtype=float).reshape(-1, 1)
    x, w = _leggauss(nodes)
    log_k = (2 * (j - 1) * math.log(2.0) + 2 * gammaln(j) - math.log(math.pi)
             - gammaln(2 * j - 1))
    log_b = gammaln(j) + gammaln(j - 1) - gammaln(2 * j - 1)
    # sd of beta is ~0.35/sqrt(j) and of W_j ~0.71/sqrt(j); wider windows starve the peak of nodes
    half = 4.0 / np.sqrt(j)
    b_lo, b_hi = np.maximum(0.0, 0.5 - half), np.minimum(1.0, 0.5 + half)
    edge = np.minimum(math.pi / 2, 7.0 / np.sqrt(j))
    total = np.zeros(j.shape[0])
    for v_lo, v_hi in ((0.0 * edge, edge), (edge, 0.0 * edge + math.pi / 2)):
        span = v_hi - v_lo
        v = 0.5 * span * x + 0.5 * (v_hi + v_lo)  # (J, nodes)
        wv = 0.5 * span * w
        cos_v = np.cos(v)
        with np.errstate(divide="ignore"):
            log_wv = log_k - log_b + 2 * (j - 1) * np.log(cos_v)
            log_2c = np.log(2 * cos_v)[:, :, None]
        kink = np.clip(0.5 / cos_v, b_lo, b_hi)
        lo_all = np.broadcast_to(b_lo, kink.shape)
        hi_all = np.broadcast_to(b_hi, kink.shape)
        for lo, hi in ((lo_all, kink), (kink, hi_all)):
            width = hi - lo
            bb = 0.5 * width[:, :, None] * x + 0.5 * (hi + lo)[:, :, None]
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                lb = np.log(bb)
                lw = (j[:, :, None] - 1) * lb + (j[:, :, None] - 2) * np.log1p(-bb) + log_wv[:, :, None]
                t = np.abs(lb + log_2c)
                f = t * t * t * np.exp(lw)
            f[~np.isfinite(f)] = 0.0
            f[np.broadcast_to(width[:, :, None] <= 0, f.shape)] = 0.0
            total += np.einsum("jv,jvb,b->j", wv * 0.5 * width, f, w)
    return 2.0 * total


def _abs_third_t_table(js) -> np.ndarray:
    """E|T_j|^3 for an array of j >= GL_FROM_J, in chunks."""
    js = np.asarray(js, dtype=int)
    out = np.empty(js.size)
    for a in range(0, js.size, 256):
        part = js[a:a + 256]
        coarse, fine = (_abs_third_t_gl(part, k) for k in GL_NODES)
        # terms are below 1 here, so this is also a relative test
        bad = ~(np.abs(fine - coarse) < GL_TOL * np.minimum(1.0, np.abs(fine)))
        if np.any(bad):
            jb = int(part[np.argmax(bad)])
            raise ArithmeticError(f"quadrature for E|T_{jb}|^3 did not converge")
        out[a:a + 256] = fine
    return out


@lru_cache(maxsize=None)
def abs_third_moment_t(j: int) -> float:
    """E|T_j|^3 with T_j = log(beta_{j,j-1} 2 cos W_j), by 2-D quadrature.

    For j >= 2 the beta weight beta^(j-1) already tames |log beta|^3 at 0, so
    the beta axis is integrated directly with breakpoints around its mode.
    Large j use a fixed tensor Gauss-Legendre rule checked against a coarser one.
    """
    from ..distributions import WjParams

    if j >= GL_FROM_J:
        return float(_abs_third_t_table([j])[0])

    log_k = WjParams(j).log_norm_const
    v_edge = min(math.pi / 2, 12.0 / math.sqrt(j))
    v_pieces = [(0.0, v_edge), (v_edge, math.pi / 2)] if v_edge < math.pi / 2 else [(0.0, math.pi / 2)]

    def log_w_weight(v):
        return log_k + 2 * (j - 1) * math.log(math.cos(v))

    if j == 1:
        def f1(v):
            return abs(math.log(2 * math.cos(v))) ** 3 * math.exp(log_k)
        val, err = integrate.quad(f1, 0.0, math.pi / 2, epsabs=1e-12, epsrel=1e-10, limit=200)
        if not err < 1e-8:
            raise ArithmeticError(f"quadrature for E|T_{j}|^3 did not converge")
        return 2.0 * val

    log_b = math.lgamma(j) + math.lgamma(j - 1) - math.lgamma(2 * j - 1)
    half = 12.0 / math.sqrt(j)
    b_pts = sorted({0.0, max(0.0, 0.5 - half), min(1.0, 0.5 + half), 1.0})
    b_pieces = [(lo, hi) for lo, hi in zip(b_pts, b_pts[1:]) if hi > lo]

    def f2(b, v):
        c = math.cos(v)
        if b <= 0.0 or b >= 1.0 or c <= 0.0:
            return 0.0
        lw = (j - 1) * math.log(b) + (j - 2) * math.log1p(-b) - log_b
        tval = math.log(b) + math.log(2 * c)
        return abs(tval) ** 3 * math.exp(lw + log_w_weight(v))

    total = 0.0
    for vlo, vhi in v_pieces:
        for blo, bhi in b_pieces:
            val, err = integrate.dblquad(f2, vlo, vhi, blo, bhi, epsabs=1e-11, epsrel=1e-9)
            if not err < 1e-8:
                raise ArithmeticError(f"quadrature for E|T_{j}|^3 did not converge (err {err:.2g})")
            total += val
    return 2.0 * total


@lru_cache(maxsize=None)
def lyapunov(n: int, which: str = "W") -> float:
    """Lyapunov ratio sum_{j<=n} E|X_j|^3 / B_n^(3/2), B_n = variance_sum(n).

    ``which='T'`` uses the radial summands, ``'W'`` the angular ones.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    which = which.upper()
    if which == "W":
        third = math.fsum(abs_third_moment_w(j) for j in range(1, n + 1))
    elif which == "T":
        small = [abs_third_moment_t(j) for j in range(1, min(n, GL_FROM_J - 1) + 1)]
        big = _abs_third_t_table(np.arange(GL_FROM_J, n + 1)) if n >= GL_FROM_J else []
        third = math.fsum(small) + math.fsum(big)
    else:
        raise ValueError("which must be 'T' or 'W'")
    return third / variance_sum(n) ** 1.5
