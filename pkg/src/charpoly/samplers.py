"""O(n)-per-draw samplers of log det(I - V) for Haar V in U(n) and SO(2n).

Each sampler returns a :class:`SampleBatch` of ``size`` draws, or a single
:class:`LogCharPoly` when ``size`` is None.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytics.oracles import Group
from .distributions import _beta_parts, _w_parts
from .rng import as_generator, provenance

# draws are generated in chunks of at most this many factors
CHUNK_ELEMENTS = 1 << 20
LOG2 = math.log(2.0)


@dataclass(frozen=True)
class LogCharPoly:
    """One value of log Z_n: re_log = log|Z_n|, im_log = its argument."""

    re_log: float
    im_log: float
    n: int
    group: Group = Group.UNITARY

    @property
    def value(self) -> complex:
        return complex(math.exp(self.re_log) * math.cos(self.im_log),
                       math.exp(self.re_log) * math.sin(self.im_log))


@dataclass
class SampleBatch:
    re_log: np.ndarray
    im_log: np.ndarray
    n: int
    group: Group
    sampler: str
    seed: int | None = None
    stream_id: int | None = None
    resampled: int = 0

    def __len__(self) -> int:
        return self.re_log.size

    def __getitem__(self, i: int) -> LogCharPoly:
        return LogCharPoly(float(self.re_log[i]), float(self.im_log[i]), self.n, self.group)

    @property
    def z(self) -> np.ndarray:
        return np.exp(self.re_log + 1j * self.im_log)


def _validate_n(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    return int(n)


def _chunks(size: int, n_factors: int):
    per = max(1, CHUNK_ELEMENTS // max(1, n_factors))
    for start in range(0, size, per):
        yield start, min(size, start + per)


def _unitary_factors(k: np.ndarray, m: int, gen) -> tuple[np.ndarray, np.ndarray, int]:
    """Principal logs of 1 + e^{i theta} sqrt(beta_{1,k-1}) for an (m, len(k)) block.

    beta_{1,k-1} = 1 - U^(1/(k-1)); k = 1 is the point mass at 1.  The half
    angle h = theta/2 enters only through cos^2 h and sin h cos h, which are
    rational in tan h, so no sine or cosine is evaluated.
    """
    shape = (m, k.size)
    # h uniform on [-pi/2, pi/2): a shift of theta by pi, harmless in law
    sc = gen.random(shape)
    sc *= math.pi
    sc -= math.pi / 2
    np.tan(sc, out=sc)
    c2 = sc * sc
    c2 += 1.0
    np.reciprocal(c2, out=c2)  # cos^2 h
    sc *= c2  # sin h cos h
    r = gen.random(shape)
    km1 = np.maximum(k - 1, 1).astype(float)
    with np.errstate(divide="ignore"):
        np.log(r, out=r)
    r /= km1
    one_minus_r = np.exp(r)  # 1 - beta for now
    np.expm1(r, out=r)
    np.negative(r, out=r)  # beta
    point = k == 1
    r[:, point] = 1.0
    one_minus_r[:, point] = 0.0
    np.sqrt(r, out=r)
    one_minus_r /= 1.0 + r  # 1 - sqrt(beta) without cancellation
    # |1 + r e^{i theta}|^2 = (1 - r)^2 + 4 r cos^2 h, a sum of non-negatives
    c2 *= r
    re = np.square(one_minus_r, out=one_minus_r)
    re += 4.0 * c2
    with np.errstate(divide="ignore"):
        np.log(re, out=re)
    re *= 0.5
    sc *= r
    sc *= 2.0  # Im = 2 r sin h cos h
    c2 *= 2.0
    c2 += 1.0
    c2 -= r  # Re = 1 + r (2 cos^2 h - 1)
    im = np.arctan2(sc, c2, out=sc)
    bad = ~np.isfinite(re)
    redrawn = 0
    while np.any(bad):
        # factor hit 0 (r = 1, theta = pi); redraw just those entries
        rows, cols = np.nonzero(bad)
        redrawn += rows.size
        sub_re, sub_im, _ = _unitary_factors(k[cols], 1, gen)
        re[rows, cols] = sub_re[0]
        im[rows, cols] = sub_im[0]
        bad = ~np.isfinite(re)
    return re, im, redrawn


def sample_unitary_log_charpoly(n: int, size: int | None = None, rng=None):
    """log Z_n for Haar U(n) as sum_k Log(1 + e^{i theta_k} sqrt(beta_{1,k-1})).

    Each factor has non-negative real part, so the principal log per factor
    lies in [-pi/2, pi/2] and the sum is the continuous branch of log Z_n.
    """
    n = _validate_n(n)
    gen = as_generator(rng)
    m = 1 if size is None else int(size)
    re = np.empty(m)
    im = np.empty(m)
    k = np.arange(1, n + 1)
    redrawn = 0
    for a, b in _chunks(m, n):
        fr, fi, r = _unitary_factors(k, b - a, gen)
        re[a:b] = fr.sum(axis=1)
        im[a:b] = fi.sum(axis=1)
        redrawn += r
    batch = SampleBatch(re, im, n, Group.UNITARY, "product", *provenance(rng), redrawn)
    return batch[0] if size is None else batch


def sample_joint(n: int, size: int | None = None, rng=None):
    """(Im, Re) log Z_n as (sum_j W_j, sum_j T_j) with T_j = log(beta_{j,j-1} 2 cos W_j)."""
    n = _validate_n(n)
    gen = as_generator(rng)
    m = 1 if size is None else int(size)
    re = np.empty(m)
    im = np.empty(m)
    j = np.arange(1, n + 1, dtype=float)
    for a, b in _chunks(m, n):
        jj = np.broadcast_to(j, (b - a, n)).ravel()
        w, log_cos = _w_parts(jj, gen)
        log_beta = np.zeros_like(jj)
        live = jj > 1
        if np.any(live):
            beta, _ = _beta_parts(jj[live], jj[live] - 1.0, gen)
            log_beta[live] = np.log(beta)
        t = log_beta + LOG2 + log_cos
        re[a:b] = t.reshape(b - a, n).sum(axis=1)
        im[a:b] = w.reshape(b - a, n).sum(axis=1)
    batch = SampleBatch(re, im, n, Group.UNITARY, "joint", *provenance(rng))
    return batch[0] if size is None else batch


def _so_factors(k: np.ndarray, gen) -> tuple[np.ndarray, int]:
    """log(1 + eps_k sqrt(beta_{1/2,(k-1)/2})) for a flat array of k."""
    beta, comp = _beta_parts(np.full(k.shape, 0.5), (k - 1.0) / 2.0, gen)
    eps = gen.random(k.size) < 0.5
    rb = np.sqrt(beta)
    with np.errstate(divide="ignore"):
        # 1 - sqrt(beta) = (1 - beta) / (1 + sqrt(beta)) keeps precision near beta = 1
        out = np.where(eps, np.log1p(rb), np.log(comp) - np.log1p(rb))
    bad = ~np.isfinite(out)
    redrawn = 0
    while np.any(bad):
        idx = np.flatnonzero(bad)
        redrawn += idx.size
        sub, _ = _so_factors(k[idx], gen)
        out[idx] = sub
        bad = ~np.isfinite(out)
    return out, redrawn


def sample_so2n_log_charpoly(n: int, size: int | None = None, rng=None):
    """log det(I - O) for Haar O in SO(2n): log 2 + sum_{k=2}^{2n} log(1 + eps_k sqrt(beta_{1/2,(k-1)/2}))."""
    n = _validate_n(n)
    gen = as_generator(rng)
    m = 1 if size is None else int(size)
    re = np.empty(m)
    k = np.arange(2, 2 * n + 1, dtype=float)
    redrawn = 0
    for a, b in _chunks(m, k.size):
        kk = np.broadcast_to(k, (b - a, k.size)).ravel()
        f, r = _so_factors(kk, gen)
        re[a:b] = LOG2 + f.reshape(b - a, k.size).sum(axis=1)
        redrawn += r
    batch = SampleBatch(re, np.zeros(m), n, Group.SO2N, "so2n-product", *provenance(rng), redrawn)
    return batch[0] if size is None else batch


@dataclass
class Trajectory:
    """Coupled realisations of log Z_N along increasing checkpoints.

    ``re_log`` and ``im_log`` have shape (paths, len(checkpoints)).
    """

    checkpoints: tuple[int, ...]
    re_log: np.ndarray
    im_log: np.ndarray
    seed: int | None = None
    stream_id: int | None = None
    resampled: int = field(default=0)

    def values(self, path: int = 0) -> list[LogCharPoly]:
        return [LogCharPoly(float(r), float(i), n)
                for n, r, i in zip(self.checkpoints, self.re_log[path], self.im_log[path])]

    def marginal(self, checkpoint: int) -> SampleBatch:
        c = self.checkpoints.index(checkpoint)
        return SampleBatch(self.re_log[:, c].copy(), self.im_log[:, c].copy(), checkpoint,
                           Group.UNITARY, "trajectory", self.seed, self.stream_id)


def sample_trajectory(checkpoints, size: int = 1, rng=None) -> Trajectory:
    """Extend the factor product in k, recording running sums at checkpoints.

    Only running sums are kept, so memory does not grow with the largest
    checkpoint.
    """
    cps = tuple(int(c) for c in checkpoints)
    if not cps or cps[0] < 1 or any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be a non-empty strictly increasing list of integers >= 1")
    gen = as_generator(rng)
    m = int(size)
    re_out = np.empty((m, len(cps)))
    im_out = np.empty((m, len(cps)))
    run_re = np.zeros(m)
    run_im = np.zeros(m)
    block = max(1, CHUNK_ELEMENTS // m)
    k0 = 1
    redrawn = 0
    for c_idx, target in enumerate(cps):
        while k0 <= target:
            k1 = min(target, k0 + block - 1)
            fr, fi, r = _unitary_factors(np.arange(k0, k1 + 1), m, gen)
            run_re += fr.sum(axis=1)
            run_im += fi.sum(axis=1)
            redrawn += r
            k0 = k1 + 1
        re_out[:, c_idx] = run_re
        im_out[:, c_idx] = run_im
    return Trajectory(cps, re_out, im_out, *provenance(rng), redrawn)
