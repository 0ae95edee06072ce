"""Real-argument special functions used by the exact moment oracles.

Everything here works in log space and accepts numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import special

MAX_POLYGAMMA_ORDER = 6
# recurrence shifts x above this before the asymptotic series is used
POLYGAMMA_SHIFT = 10.0


@dataclass(frozen=True)
class BernoulliTable:
    """Even-index Bernoulli numbers ``values[n - 1] == B_{2n}``, exact."""

    values: tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.values)

    def b2n(self, n: int) -> Fraction:
        if n < 1 or n > len(self.values):
            raise IndexError(f"B_{2 * n} not tabulated (have n = 1..{len(self.values)})")
        return self.values[n - 1]

    def as_floats(self) -> np.ndarray:
        return np.array([float(b) for b in self.values])


@lru_cache(maxsize=None)
def bernoulli_numbers(m: int) -> tuple[Fraction, ...]:
    """B_0..B_m as fractions, with the B_1 = -1/2 convention."""
    b = [Fraction(1)]
    for k in range(1, m + 1):
        acc = sum(math.comb(k + 1, i) * b[i] for i in range(k))
        b.append(-acc / (k + 1))
    return tuple(b)


@lru_cache(maxsize=None)
def bernoulli_table(n_terms: int = 30) -> BernoulliTable:
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    b = bernoulli_numbers(2 * n_terms)
    return BernoulliTable(tuple(b[2 * n] for n in range(1, n_terms + 1)))


def _check_positive(x: np.ndarray, name: str = "x") -> None:
    if np.any(~(x > 0)):
        raise ValueError(f"{name} must be > 0 (got min {np.nanmin(x) if x.size else x})")


def ln_gamma(x):
    """log Gamma(x) for x > 0."""
    arr = np.asarray(x, dtype=float)
    _check_positive(arr)
    out = special.gammaln(arr)
    return float(out) if out.ndim == 0 else out


def polygamma(k: int, x):
    """psi^(k)(x) for 0 <= k <= 6 and x > 0.

    Shifts x upward with psi^(k)(x) = psi^(k)(x+1) - (-1)^k k!/x^(k+1) until
    x >= 10, then sums the Bernoulli asymptotic series.
    """
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= MAX_POLYGAMMA_ORDER:
        raise ValueError(f"polygamma order must be an integer in [0, {MAX_POLYGAMMA_ORDER}], got {k!r}")
    k = int(k)
    z = np.array(x, dtype=float)
    _check_positive(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).copy()

    fact_k = math.factorial(k)
    sign = -1.0 if k % 2 else 1.0
    shift = np.zeros_like(z)
    low = z < POLYGAMMA_SHIFT
    while np.any(low):
        shift[low] -= sign * fact_k / z[low] ** (k + 1)
        z[low] += 1.0
        low = z < POLYGAMMA_SHIFT

    bern = bernoulli_table(20).as_floats()
    series = np.zeros_like(z)
    inv2 = 1.0 / (z * z)
    if k == 0:
        # psi(z) ~ log z - 1/(2z) - sum B_2n / (2n z^2n)
        for n in range(len(bern), 0, -1):
            series = (series + bern[n - 1] / (2 * n)) * inv2
        val = np.log(z) - 0.5 / z - series
    else:
        # psi^(k)(z) = (-1)^(k-1) [(k-1)!/z^k + k!/(2 z^(k+1)) + sum_{n>=1} B_2n (2n+k-1)!/((2n)! z^(2n+k))]
        for n in range(len(bern), 0, -1):
            coef = bern[n - 1] * math.factorial(2 * n + k - 1) / math.factorial(2 * n)
            series = (series + coef) * inv2
        lead = math.factorial(k - 1) + fact_k / (2 * z) + series
        val = (-1.0 if k % 2 == 0 else 1.0) * lead / z**k
    out = val + shift
    return float(out[0]) if scalar else out


def normal_cdf(x):
    """Standard normal distribution function."""
    out = special.ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=None)
def _bernoulli_poly_coeffs(n: int) -> tuple[float, ...]:
    # B_n(c) = sum_i C(n, i) B_i c^(n-i), returned highest power first
    b = bernoulli_numbers(n)
    return tuple(float(math.comb(n, i) * b[i]) for i in range(n + 1))


def bernoulli_poly(n: int, c: float) -> float:
    return float(np.polyval(_bernoulli_poly_coeffs(n), c))


_LNG_TERMS = 24


def lngamma_balanced(z, plus: Sequence[float], minus: Sequence[float]):
    """sum_{c in plus} lnGamma(z + c) - sum_{c in minus} lnGamma(z + c).

    ``plus`` and ``minus`` must have equal length and equal sums; the
    log-linear Stirling parts then cancel exactly and for large z the
    difference is summed from the Bernoulli-polynomial expansion
    sum_{n>=2} (-1)^n [sum B_n(c+) - sum B_n(c-)] / (n (n-1) z^(n-1)),
    which avoids the catastrophic cancellation of subtracting raw lnGamma
    values of size z log z.
    """
    plus = [float(c) for c in plus]
    minus = [float(c) for c in minus]
    if len(plus) != len(minus) or not math.isclose(sum(plus), sum(minus), rel_tol=0, abs_tol=1e-12):
        raise ValueError("shift sets must be balanced (same count and same sum)")
    zz = np.asarray(z, dtype=float)
    scalar = zz.ndim == 0
    zz = np.atleast_1d(zz)
    lo = min(plus + minus)
    if np.any(zz + lo <= 0):
        raise ValueError("lnGamma argument z + c must be > 0 for every shift")

    cmax = max(abs(c) for c in plus + minus)
    z_switch = max(30.0, 4.0 * cmax + 10.0)
    out = np.empty_like(zz)

    small = zz < z_switch
    if np.any(small):
        zs = zz[small]
        acc = np.zeros_like(zs)
        for c in plus:
            acc += special.gammaln(zs + c)
        for c in minus:
            acc -= special.gammaln(zs + c)
        out[small] = acc

    big = ~small
    if np.any(big):
        coeffs = []
        for n in range(2, _LNG_TERMS + 1):
            d = sum(bernoulli_poly(n, c) for c in plus) - sum(bernoulli_poly(n, c) for c in minus)
            coeffs.append((-1) ** n * d / (n * (n - 1)))
        w = 1.0 / zz[big]
        acc = np.zeros_like(w)
        for c in reversed(coeffs):
            acc = (acc + c) * w
        out[big] = acc
    return float(out[0]) if scalar else out
