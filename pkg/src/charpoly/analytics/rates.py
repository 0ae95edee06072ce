"""CLT and Berry-Esseen rate diagnostics for log Z_n.

The empirical side normalises by sqrt(log(n)/2).  The exact side inverts
the closed-form characteristic functions (Gil-Pelaez), which separates
Monte Carlo noise from the true distance to the normal law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import loggamma

from ..specfun import normal_cdf
from .oracles import lyapunov, variance_sum
from .stats import CheckResult, correlation_check, ks_check, ks_statistic

CLT_DISTANCE = 0.02
RATE_EXPONENT = 1.5


def half_log_scale(n: int) -> float:
    if n < 2:
        raise ValueError("the sqrt(log(n)/2) normalisation needs n >= 2")
    return math.sqrt(0.5 * math.log(n))


def normalized(batch, part: str = "re", scale: str = "halflog") -> np.ndarray:
    """Re or Im log Z_n divided by sqrt(log(n)/2), or by the exact sd."""
    x = batch.re_log if part == "re" else batch.im_log
    sd = half_log_scale(batch.n) if scale == "halflog" else math.sqrt(variance_sum(batch.n))
    return np.asarray(x) / sd


def sup_normal_deviation(x) -> float:
    return ks_statistic(x, normal_cdf).statistic


# ---- exact distribution functions -------------------------------------------


def log_charfn(n: int, u, part: str = "re") -> complex:
    """log E[exp(i u X)] for X = Re log Z_n (``part='re'``) or Im log Z_n."""
    j = np.arange(1, n + 1, dtype=float)
    if part == "re":
        terms = loggamma(j) + loggamma(j + 1j * u) - 2 * loggamma(j + 0.5j * u)
    elif part == "im":
        a = j - 0.5 * u
        if np.any((a <= 0) & (a == np.round(a))):
            # 1/Gamma vanishes at its poles, so the characteristic function is 0 there
            return complex(-math.inf, 0.0)
        terms = 2 * loggamma(j) - loggamma(j + 0.5 * u + 0j) - loggamma(a + 0j)
    else:
        raise ValueError("part must be 're' or 'im'")
    return complex(np.sum(terms))


def exact_cdf(n: int, x: float, part: str = "re", scale: float = 1.0,
              u_max: float = 60.0) -> float:
    """P(X / scale <= x) by Gil-Pelaez inversion of the exact characteristic function."""

    def g(u):
        return (np.exp(log_charfn(n, u / scale, part) - 1j * u * x)).imag / u

    val, _ = integrate.quad(g, 0.0, u_max, limit=400)
    return 0.5 - val / math.pi


def exact_normal_deviation(n: int, part: str = "re", scale: str = "halflog",
                           grid=None) -> float:
    """max over ``grid`` of |P(X/scale <= x) - Phi(x)|, from the exact law."""
    xs = np.linspace(-3.0, 3.0, 61) if grid is None else np.asarray(grid, float)
    sd = half_log_scale(n) if scale == "halflog" else math.sqrt(variance_sum(n))
    return max(abs(exact_cdf(n, float(x), part, sd) - normal_cdf(float(x))) for x in xs)


# ---- reports -----------------------------------------------------------------


@dataclass
class RateReport:
    """Lyapunov ratios, measured sup-CDF deviations and the fitted c/(log n)^1.5 curve."""

    n_values: list[int]
    lyapunov: dict[str, list[float]]
    ks_distances: list[float]
    bound_curve: list[float]
    c: float
    n_samples: int
    part: str = "re"
    exact_distances: list[float] | None = None
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def nonincreasing(self) -> bool:
        d = self.ks_distances
        return all(b <= a for a, b in zip(d, d[1:]))

    @property
    def dominated(self) -> bool:
        return all(d <= b for d, b in zip(self.ks_distances, self.bound_curve))

    @property
    def passed(self) -> bool:
        return self.nonincreasing and self.dominated

    def to_dict(self) -> dict:
        return {
            "n_values": self.n_values, "lyapunov": self.lyapunov,
            "ks_distances": self.ks_distances, "bound_curve": self.bound_curve,
            "c": self.c, "n_samples": self.n_samples, "part": self.part,
            "exact_distances": self.exact_distances,
            "nonincreasing": self.nonincreasing, "dominated": self.dominated,
        }


def fitted_bound(n_values, d0: float) -> tuple[float, list[float]]:
    """c = d0 (log n_0)^1.5 at the first n, and the curve c/(log n)^1.5."""
    c = d0 * math.log(n_values[0]) ** RATE_EXPONENT
    return c, [c / math.log(n) ** RATE_EXPONENT for n in n_values]


def rate_report(n_values=(10, 100, 1000, 10_000), m_samples: int = 1_000_000, rng=None,
                part: str = "re", batches=None, exact: bool = False,
                with_lyapunov: bool = True) -> RateReport:
    """Measure sup|F_n - Phi| of the normalised part at each n.

    ``batches`` maps n to a ready SampleBatch, which lets a caller reuse draws.
    """
    from ..rng import as_generator
    from ..samplers import sample_unitary_log_charpoly

    n_values = [int(n) for n in n_values]
    gen = None
    dists, sizes = [], []
    for n in n_values:
        b = (batches or {}).get(n)
        if b is None:
            gen = gen or as_generator(rng)
            b = sample_unitary_log_charpoly(n, m_samples, gen)
        sizes.append(len(b))
        dists.append(sup_normal_deviation(normalized(b, part)))
    c, curve = fitted_bound(n_values, dists[0])
    lyap = {}
    if with_lyapunov:
        lyap = {"T": [lyapunov(n, "T") for n in n_values], "W": [lyapunov(n, "W") for n in n_values]}
    ex = [exact_normal_deviation(n, part) for n in n_values] if exact else None
    return RateReport(n_values, lyap, dists, curve, c, min(sizes), part, ex)


def clt_checks(batch, distance: float = CLT_DISTANCE) -> list[CheckResult]:
    """Both normalised marginals against Phi, plus their correlation."""
    xr = normalized(batch, "re")
    xi = normalized(batch, "im")
    n = batch.n
    return [
        ks_check(f"CLT n={n}: Re log Z / sqrt(log(n)/2) vs Phi", xr, cdf=normal_cdf,
                 max_distance=distance),
        ks_check(f"CLT n={n}: Im log Z / sqrt(log(n)/2) vs Phi", xi, cdf=normal_cdf,
                 max_distance=distance),
        correlation_check(f"CLT n={n}: corr(Re, Im)", xr, xi),
    ]
