"""Validation suites: every equality-in-law and moment identity as pass/fail checks.

Each suite takes a :class:`SuiteConfig` and returns a :class:`SuiteResult`.
Suites draw from their own substream ``(seed, suite index)``, so running one
suite alone or as part of ``all`` gives the same numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import distributions as dist
from . import matrix_oracle as mo
from .analytics.barnes import barnes_identity_check
from .analytics.oracles import moment_so2n, moment_unitary, variance_sum
from .analytics.rates import clt_checks, rate_report
from .analytics.stats import (DEFAULT_ALPHA, DEFAULT_Z, EXP_SAFE, CheckResult,
                              empirical_moment, ks_check, two_sample_moment_check,
                              zscore_check)
from .rng import RngStream
from .samplers import sample_joint, sample_so2n_log_charpoly, sample_unitary_log_charpoly

# below this many draws a suite still runs but flags itself as low power
LOW_POWER_SAMPLES = 1000

MELLIN_N = (1, 2, 5, 10, 50)
MELLIN_TS = ((0, 0), (1, 0), (2, 0), (3, 0), (1, 1), (2, 2), (2, 1))


@dataclass
class SuiteConfig:
    samples: int | None = None  # None: each suite's own default
    seed: int = 0
    alpha: float = DEFAULT_ALPHA
    z: float = DEFAULT_Z
    n: tuple[int, ...] | None = None  # overrides the suite's size grid

    def m(self, default: int) -> int:
        return int(default if self.samples is None else self.samples)

    def sizes(self, default) -> tuple[int, ...]:
        return tuple(default if self.n is None else self.n)


@dataclass
class SuiteResult:
    name: str
    checks: list[CheckResult] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"suite": self.name, "pass": self.passed, "warnings": self.warnings,
                "checks": [c.to_dict() for c in self.checks]}


def _low_power(res: SuiteResult, m: int) -> None:
    if m < LOW_POWER_SAMPLES:
        res.warnings.append(f"low power: {m} samples per check (< {LOW_POWER_SAMPLES})")


def moment_checks(batch, t: float, s: float, exact_log: float, z: float,
                  label: str) -> list[CheckResult]:
    """Empirical E[|Z|^t e^{is arg Z}] against exp(exact_log) + 0i."""
    if abs(exact_log) > EXP_SAFE:
        raise OverflowError(f"{label}: exact log moment {exact_log:.1f} too large to compare directly")
    est = empirical_moment(batch, t, s)
    out = [zscore_check(f"{label}: Re E[|Z|^{t:g} e^(i{s:g} arg Z)]", math.exp(exact_log),
                        est.real, est.se_real, est.n, z, log_moment=exact_log)]
    if s != 0:
        out.append(zscore_check(f"{label}: Im E[|Z|^{t:g} e^(i{s:g} arg Z)]", 0.0,
                                est.imag, est.se_imag, est.n, z))
    return out


# ---- suites --------------------------------------------------------------------


def suite_mellin(cfg: SuiteConfig, rng) -> SuiteResult:
    res = SuiteResult("mellin")
    m = cfg.m(1_000_000)
    _low_power(res, m)
    for n in cfg.sizes(MELLIN_N):
        batch = sample_unitary_log_charpoly(n, m, rng)
        for t, s in MELLIN_TS:
            res.checks += moment_checks(batch, t, s, moment_unitary(n, t, s), cfg.z,
                                        f"unitary n={n}")
    return res


def suite_joint(cfg: SuiteConfig, rng) -> SuiteResult:
    res = SuiteResult("joint")
    m = cfg.m(100_000)
    _low_power(res, m)
    for n in cfg.sizes((2, 5, 10)):
        a = sample_joint(n, m, rng)
        b = sample_unitary_log_charpoly(n, m, rng)
        for label, x, y in (("re_log", a.re_log, b.re_log), ("im_log", a.im_log, b.im_log),
                            ("re_log+im_log", a.re_log + a.im_log, b.re_log + b.im_log)):
            res.checks.append(ks_check(f"joint vs product n={n}: KS {label}", x, y, alpha=cfg.alpha))
        res.checks.append(zscore_check(f"joint n={n}: mean im_log", 0.0, float(np.mean(a.im_log)),
                                       float(np.std(a.im_log, ddof=1) / math.sqrt(m)), m, cfg.z))
        res.checks.append(_variance_check(f"joint n={n}: var im_log", a.im_log, variance_sum(n), cfg.z))
    return res


def _variance_check(label: str, x, exact: float, z: float) -> CheckResult:
    x = np.asarray(x, dtype=float)
    d2 = (x - x.mean()) ** 2
    est = float(d2.sum() / (x.size - 1))
    se = float(np.std(d2, ddof=1) / math.sqrt(x.size))
    return zscore_check(label, exact, est, se, x.size, z)


def remark_identity_checks(k: int, m: int, rng, alpha: float) -> list[CheckResult]:
    """1 + eps sqrt(beta_{1/2,(k-1)/2}) against 2 beta_{(k-1)/2,(k-1)/2}."""
    eps = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    lhs = 1.0 + eps * np.sqrt(dist.sample_beta(0.5, (k - 1) / 2, m, rng))
    rhs = 2.0 * dist.sample_beta((k - 1) / 2, (k - 1) / 2, m, rng)
    name = f"1+eps*sqrt(beta(1/2,{(k - 1) / 2:g})) ~ 2 beta({(k - 1) / 2:g},{(k - 1) / 2:g})"
    return [ks_check(f"{name}: KS", lhs, rhs, alpha=alpha),
            two_sample_moment_check(f"{name}: moment 1", lhs, rhs, 1)]


def suite_so2n(cfg: SuiteConfig, rng) -> SuiteResult:
    res = SuiteResult("so2n")
    m = cfg.m(1_000_000)
    _low_power(res, m)
    for n in cfg.sizes((1, 2, 5, 20)):
        batch = sample_so2n_log_charpoly(n, m, rng)
        for t in (1, 2, 3):
            res.checks += moment_checks(batch, t, 0, moment_so2n(n, t), cfg.z, f"so2n n={n}")
    mk = min(m, 100_000)
    fast = sample_so2n_log_charpoly(2, mk, rng)
    slow = mo.matrix_log_charpoly(2, mk, rng, method="so2n")
    res.checks.append(ks_check("so2n n=2: product sampler vs SO(4) matrices, KS log det",
                               fast.re_log, slow.re_log, alpha=cfg.alpha))
    for k in (2, 3, 5):
        res.checks += remark_identity_checks(k, mk, rng, cfg.alpha)
    return res


def suite_offcircle(cfg: SuiteConfig, rng) -> SuiteResult:
    res = SuiteResult("offcircle")
    m = cfg.m(100_000)
    _low_power(res, m)
    for n in cfg.sizes((3,)):
        for x in (0.0, 0.5, 1.0):
            res.checks += mo.verify_offcircle_identity(n, x, m, rng, cfg.alpha).checks
    return res


def matrix_groundtruth_checks(n: int, m: int, rng, alpha: float, z: float) -> list[CheckResult]:
    """Product sampler, QR-Haar and recursive Haar matrices, pairwise in law."""
    fast = sample_unitary_log_charpoly(n, m, rng)
    qr = mo.matrix_log_charpoly(n, m, rng, method="qr")
    rec = mo.matrix_log_charpoly(n, m, rng, method="recursive")
    out = []
    for label, a, b in (("product vs QR", fast, qr), ("recursive vs QR", rec, qr)):
        out.append(ks_check(f"n={n} {label}: KS re_log", a.re_log, b.re_log, alpha=alpha))
        out.append(ks_check(f"n={n} {label}: KS im_log", a.im_log, b.im_log, alpha=alpha))
    for t, s in ((1, 0), (2, 0), (1, 1), (2, 2)):
        out += moment_checks(qr, t, s, moment_unitary(n, t, s), z, f"QR matrices n={n}")
    return out


def suite_eigenrec(cfg: SuiteConfig, rng) -> SuiteResult:
    """Matrix-level recursions: recursive Haar construction, matrix ground truth, eigenangle form."""
    res = SuiteResult("eigenrec")
    m = cfg.m(100_000)
    _low_power(res, m)
    for n in cfg.sizes(range(2, 9)):
        res.checks += matrix_groundtruth_checks(n, m, rng, cfg.alpha, cfg.z)
    for x in (0.0, 0.5):
        res.checks += mo.verify_eigenangle_identity(3, x, m, rng, cfg.alpha).checks
    return res


def suite_barnes(cfg: SuiteConfig, rng) -> SuiteResult:
    res = SuiteResult("barnes")
    m = cfg.m(100_000)
    _low_power(res, m)
    for n in cfg.sizes((1, 3, 5)):
        for i, t in enumerate((0.5, 1.0, 2.0)):
            # the Monte Carlo side does not depend on t, so run it once per n
            rep = barnes_identity_check(n, t, m if i == 0 else 0, rng, cfg.alpha)
            res.checks += rep.checks
    return res


def suite_betagamma(cfg: SuiteConfig, rng) -> SuiteResult:
    res = SuiteResult("betagamma")
    m = cfg.m(100_000)
    _low_power(res, m)
    for a, b in ((1, 2), (2, 3), (0.5, 0.5)):
        res.checks += dist.algebra_identity(a, b, m, rng, cfg.alpha)
    for j in (1, 2, 5):
        res.checks += dist.duplication_identity(j, m, rng, cfg.alpha)
    for j in (1, 2, 5):
        res.checks += dist.cos_w_identity(j, m, rng, cfg.alpha)
    return res


def suite_clt(cfg: SuiteConfig, rng) -> SuiteResult:
    res = SuiteResult("clt")
    m = cfg.m(100_000)
    _low_power(res, m)
    for n in cfg.sizes((10_000,)):
        res.checks += clt_checks(sample_unitary_log_charpoly(n, m, rng))
    return res


def suite_rates(cfg: SuiteConfig, rng) -> SuiteResult:
    res = SuiteResult("rates")
    m = cfg.m(1_000_000)
    _low_power(res, m)
    rep = rate_report(cfg.sizes((10, 100, 1000, 10_000)), m, rng)
    detail = rep.to_dict()
    res.checks.append(CheckResult("rates: sup|F_n - Phi| nonincreasing in n", None,
                                  None, None, m, rep.nonincreasing, 0.0, "shape", detail=detail))
    res.checks.append(CheckResult("rates: sup|F_n - Phi| <= c/(log n)^1.5 with c fitted at the first n",
                                  rep.c, None, None, m, rep.dominated, 0.0, "shape", detail=detail))
    w = rep.lyapunov.get("W", [])
    res.checks.append(CheckResult("rates: angular Lyapunov ratio strictly decreasing", None, None, None,
                                  0, all(b < a for a, b in zip(w, w[1:])), 0.0, "shape",
                                  detail={"lyapunov": rep.lyapunov}))
    return res


SUITES: dict[str, Callable[[SuiteConfig, RngStream], SuiteResult]] = {
    "mellin": suite_mellin,
    "joint": suite_joint,
    "so2n": suite_so2n,
    "offcircle": suite_offcircle,
    "eigenrec": suite_eigenrec,
    "barnes": suite_barnes,
    "betagamma": suite_betagamma,
    "clt": suite_clt,
    "rates": suite_rates,
}
SUITE_NAMES = tuple(SUITES) + ("all",)


def run_suite(name: str, cfg: SuiteConfig | None = None) -> list[SuiteResult]:
    """Run one suite, or every suite for ``'all'``."""
    cfg = cfg or SuiteConfig()
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    order = list(SUITES)
    return [SUITES[s](cfg, RngStream(cfg.seed, order.index(s))) for s in names]

