"""Statistical test kit shared by every validation check."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import special

DEFAULT_ALPHA = 1e-3
DEFAULT_Z = 5.0
# |log moment| above this is compared in log space only
EXP_SAFE = 700.0


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float
    n: int


@dataclass
class CheckResult:
    """One pass/fail line of a validation report."""

    quantity: str
    exact_value: float | None
    estimate: float | None
    std_error: float | None
    n_samples: int
    passed: bool
    threshold: float
    kind: str = "zscore"
    p_value: float | None = None
    detail: dict = field(default_factory=dict)

    @property
    def z_score(self) -> float | None:
        if self.kind != "zscore" or self.std_error in (None, 0.0) or self.exact_value is None:
            return None
        return (self.estimate - self.exact_value) / self.std_error

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        d["z_score"] = self.z_score
        return d

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        if self.kind == "ks":
            body = f"D={self.estimate:.5g} p={self.p_value:.3g} (alpha={self.threshold:g})"
        elif self.kind == "ks_distance":
            body = f"D={self.estimate:.5g} (max {self.threshold:g})"
        elif self.kind == "shape":
            body = "holds" if self.passed else "violated"
        elif self.kind == "zscore":
            z = self.z_score
            zs = "exact" if z is None else f"z={z:+.2f}"
            body = f"exact={self.exact_value:.10g} est={self.estimate:.10g} {zs} (|z|<={self.threshold:g})"
        else:
            body = f"exact={self.exact_value!r} est={self.estimate!r} (tol={self.threshold:g})"
        return f"[{tag}] {self.quantity}: {body}"


def kolmogorov_sf(y: float) -> float:
    """Asymptotic Kolmogorov survival function P(sup|B| > y)."""
    return float(special.kolmogorov(y))


def ks_statistic(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> KSResult:
    """One-sample KS distance to ``cdf`` with its asymptotic p-value.

    ``samples`` need not be pre-sorted.  At each distinct value the deviation
    is taken on both sides of the jump, against cdf there and its left limit,
    which keeps ties and atoms of ``cdf`` correct.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("ks_statistic needs at least one sample")
    u, counts = np.unique(x, return_counts=True)
    right = np.cumsum(counts) / n
    left = right - counts / n
    f = np.asarray(cdf(u), dtype=float)
    f_left = np.asarray(cdf(np.nextafter(u, -np.inf)), dtype=float)
    d = float(max(np.max(np.abs(right - f)), np.max(np.abs(left - f_left))))
    return KSResult(d, kolmogorov_sf(math.sqrt(n) * d), n)


def ks_2samp(x, y) -> KSResult:
    """Two-sample KS distance with the asymptotic p-value."""
    a = np.sort(np.asarray(x, dtype=float).ravel())
    b = np.sort(np.asarray(y, dtype=float).ravel())
    n, m = a.size, b.size
    if n == 0 or m == 0:
        raise ValueError("ks_2samp needs two non-empty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / n
    fb = np.searchsorted(b, grid, side="right") / m
    d = float(np.max(np.abs(fa - fb)))
    en = math.sqrt(n * m / (n + m))
    return KSResult(d, kolmogorov_sf(en * d), min(n, m))


@dataclass(frozen=True)
class MomentEstimate:
    real: float
    imag: float
    se_real: float
    se_imag: float
    n: int


def _mean_se(v: np.ndarray) -> tuple[float, float]:
    n = v.size
    mean = float(np.mean(v))
    se = float(np.std(v, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def empirical_moment(batch, t: float, s: float) -> MomentEstimate:
    """Monte Carlo estimate of E[|Z|^t e^{i s arg Z}] with standard errors.

    ``batch`` is anything with ``re_log`` and ``im_log`` arrays.
    """
    re = np.asarray(batch.re_log, dtype=float)
    im = np.asarray(batch.im_log, dtype=float)
    if re.size == 0:
        raise ValueError("empty batch")
    if t == 0:
        radial = np.ones_like(re)
    else:
        expo = t * re
        if np.max(expo) > EXP_SAFE:
            raise OverflowError(
                f"|Z|^{t} overflows for this batch (max log {np.max(expo):.1f}); "
                "compare log moments instead"
            )
        radial = np.exp(expo)
    if s == 0:
        cr, sr = radial, np.zeros_like(radial)
    else:
        cr, sr = radial * np.cos(s * im), radial * np.sin(s * im)
    mr, er = _mean_se(cr)
    mi, ei = _mean_se(sr)
    return MomentEstimate(mr, mi, er, ei, re.size)


def zscore_check(quantity: str, exact: float, estimate: float, se: float, n: int,
                 threshold: float = DEFAULT_Z, **detail) -> CheckResult:
    if se > 0:
        ok = abs(estimate - exact) <= threshold * se
    else:
        ok = math.isclose(estimate, exact, rel_tol=1e-12, abs_tol=1e-12)
    return CheckResult(quantity, float(exact), float(estimate), float(se), int(n), bool(ok),
                       threshold, "zscore", detail=detail)


def tolerance_check(quantity: str, exact: float, estimate: float, tol: float, **detail) -> CheckResult:
    ok = abs(estimate - exact) <= tol
    return CheckResult(quantity, float(exact), float(estimate), None, 0, bool(ok), tol,
                       "tolerance", detail=detail)


def ks_check(quantity: str, x, y=None, *, cdf=None, alpha: float = DEFAULT_ALPHA,
             max_distance: float | None = None, **detail) -> CheckResult:
    """KS check against a second sample or a reference cdf.

    Passes when p >= alpha, or when ``max_distance`` is given, when the
    distance itself is at most that.
    """
    if cdf is not None:
        res = ks_statistic(x, cdf)
    else:
        res = ks_2samp(x, y)
    if max_distance is None:
        ok, thr = res.pvalue >= alpha, alpha
    else:
        ok, thr = res.statistic <= max_distance, max_distance
    kind = "ks" if max_distance is None else "ks_distance"
    return CheckResult(quantity, 0.0, res.statistic, None, res.n, bool(ok), thr, kind,
                       p_value=res.pvalue, detail=detail)


def two_sample_moment_check(quantity: str, x, y, power: int = 1,
                            threshold: float = DEFAULT_Z) -> CheckResult:
    """Equal-mean check for x**power vs y**power from independent samples."""
    a = np.asarray(x, dtype=float) ** power
    b = np.asarray(y, dtype=float) ** power
    ma, sa = _mean_se(a)
    mb, sb = _mean_se(b)
    se = math.hypot(sa, sb)
    return zscore_check(quantity, mb, ma, se, min(a.size, b.size), threshold, power=power)


def correlation_check(quantity: str, x, y, threshold: float = DEFAULT_Z) -> CheckResult:
    """Sample correlation vs 0, with standard error 1/sqrt(n) under independence."""
    a = np.asarray(x, dtype=float)
    b = np.asarray(y, dtype=float)
    r = float(np.corrcoef(a, b)[0, 1])
    se = 1.0 / math.sqrt(a.size)
    return zscore_check(quantity, 0.0, r, se, a.size, threshold)
