"""Explicit Haar matrices at desk scale and the matrix-level decompositions.

Everything here is O(n^3) per draw and exists to provide ground truth for
the fast samplers.  Samplers accept ``size`` and return a stacked array of
shape (size, n, n), or a single (n, n) matrix when ``size`` is None.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytics.oracles import Group
from .analytics.stats import DEFAULT_ALPHA, CheckResult, ks_check, two_sample_moment_check, tolerance_check
from .rng import as_generator, provenance
from .samplers import LogCharPoly, SampleBatch

MAX_UNITARY_N = 64
MAX_SO_N = 32
UNITARY_TOL = 1e-12
PIVOT_TOL = 1e-8


def _check_n(n, hi: int, what: str) -> int:
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= hi:
        raise ValueError(f"{what} needs 1 <= n <= {hi}, got {n!r}")
    return int(n)


def _complex_ginibre(shape, gen) -> np.ndarray:
    g = gen.standard_normal((2,) + tuple(shape))
    return (g[0] + 1j * g[1]) / math.sqrt(2.0)


def unitarity_error(v: np.ndarray) -> float:
    """max |V* V - I| over a matrix or a stack of matrices."""
    v = np.asarray(v)
    eye = np.eye(v.shape[-1])
    return float(np.max(np.abs(np.conj(np.swapaxes(v, -1, -2)) @ v - eye)))


def is_unitary(v: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return unitarity_error(v) <= tol


def is_special_orthogonal(o: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    o = np.asarray(o)
    if np.iscomplexobj(o) or unitarity_error(o) > tol:
        return False
    return bool(np.all(np.abs(np.linalg.det(o) - 1.0) <= 1e-10))


def _phase_fixed_qr(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    mag = np.abs(d)
    ok = np.all(mag > PIVOT_TOL, axis=-1)
    phase = d / np.where(mag > 0, mag, 1.0)
    return q * phase[..., None, :], ok


def sample_haar_unitary_qr(n: int, rng=None, size: int | None = None) -> np.ndarray:
    """Haar U(n) from complex Ginibre QR with the diagonal phases of R removed."""
    n = _check_n(n, MAX_UNITARY_N, "sample_haar_unitary_qr")
    gen = as_generator(rng)
    m = 1 if size is None else int(size)
    q, ok = _phase_fixed_qr(_complex_ginibre((m, n, n), gen))
    while not np.all(ok):
        # numerically singular Ginibre draw: replace it
        idx = np.flatnonzero(~ok)
        q[idx], ok[idx] = _phase_fixed_qr(_complex_ginibre((idx.size, n, n), gen))
    return q[0] if size is None else q


def _complete_first_column(v: np.ndarray) -> np.ndarray:
    """Unitary matrices whose first column is exactly v, for a stack (m, d).

    Modified Gram-Schmidt over v, e_2, ..., e_d (orthogonalised twice).  When
    a candidate's residual norm drops below PIVOT_TOL, e_1 is used instead;
    that can happen at most once per matrix.
    """
    m, d = v.shape
    out = np.zeros((m, d, d), dtype=complex)
    out[:, :, 0] = v
    spare = np.ones(m, dtype=bool)  # e_1 still unused

    def residual(col: int, basis_index):
        w = np.zeros((m, d), dtype=complex)
        w[np.arange(m), basis_index] = 1.0
        for _ in range(2):
            for c in range(col):
                q = out[:, :, c]
                w -= np.sum(np.conj(q) * w, axis=1)[:, None] * q
        return w, np.linalg.norm(w, axis=1)

    for col in range(1, d):
        w, nrm = residual(col, np.full(m, col))
        weak = (nrm < PIVOT_TOL) & spare
        if np.any(weak):
            w1, n1 = residual(col, np.zeros(m, dtype=int))
            w[weak], nrm[weak] = w1[weak], n1[weak]
            spare &= ~weak
        out[:, :, col] = w / nrm[:, None]
    return out


def sample_sphere(n: int, rng=None, size: int | None = None) -> np.ndarray:
    """Uniform points on the complex unit sphere in C^n."""
    gen = as_generator(rng)
    m = 1 if size is None else int(size)
    z = _complex_ginibre((m, n), gen)
    nrm = np.linalg.norm(z, axis=1)
    while np.any(nrm == 0):
        idx = np.flatnonzero(nrm == 0)
        z[idx] = _complex_ginibre((idx.size, n), gen)
        nrm[idx] = np.linalg.norm(z[idx], axis=1)
    z /= nrm[:, None]
    return z[0] if size is None else z


def sample_haar_unitary_recursive(n: int, rng=None, size: int | None = None) -> np.ndarray:
    """Haar U(n) built as V_{m+1} = M diag(1, V_m) from a uniform first column.

    Starts from a uniform phase in U(1); M is any unitary whose first column
    is uniform on the sphere, here the Gram-Schmidt completion.
    """
    n = _check_n(n, MAX_UNITARY_N, "sample_haar_unitary_recursive")
    gen = as_generator(rng)
    m = 1 if size is None else int(size)
    v = np.exp(2j * math.pi * gen.random(m)).reshape(m, 1, 1)
    for d in range(2, n + 1):
        big = _complete_first_column(sample_sphere(d, gen, m))
        nxt = np.zeros((m, d, d), dtype=complex)
        nxt[:, 0, 0] = 1.0
        nxt[:, 1:, 1:] = v
        v = big @ nxt
    return v[0] if size is None else v


def sample_haar_so2n(n: int, rng=None, size: int | None = None, *, return_swaps: bool = False):
    """Haar SO(2n) from real Ginibre QR with sign fix.

    QR gives Haar O(2n); draws with det -1 get their first two columns
    swapped, an involution that maps the other coset onto SO(2n) while
    preserving Haar measure.  ``return_swaps`` also returns that mask.
    """
    n = _check_n(n, MAX_SO_N, "sample_haar_so2n")
    gen = as_generator(rng)
    m = 1 if size is None else int(size)
    d = 2 * n

    def draw(k):
        q, r = np.linalg.qr(gen.standard_normal((k, d, d)))
        diag = np.diagonal(r, axis1=-2, axis2=-1)
        ok = np.all(np.abs(diag) > PIVOT_TOL, axis=-1)
        return q * np.where(diag < 0, -1.0, 1.0)[..., None, :], ok

    q, ok = draw(m)
    while not np.all(ok):
        idx = np.flatnonzero(~ok)
        q[idx], ok[idx] = draw(idx.size)
    swapped = np.linalg.det(q) < 0
    q[swapped] = q[swapped][:, :, [1, 0] + list(range(2, d))]
    out = q[0] if size is None else q
    if return_swaps:
        return out, (bool(swapped[0]) if size is None else swapped)
    return out


def _principal_log_sum(factors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(divide="ignore"):
        lg = np.log(factors)
    return lg.real.sum(axis=-1), lg.imag.sum(axis=-1)


def log_charpoly_direct(v: np.ndarray, x: float = 1.0, group: Group = Group.UNITARY):
    """log det(I - xV) on the branch continuous in x from 0, via eigenvalues.

    Each 1 - x e^{i theta} has non-negative real part for x in [0, 1], so the
    sum of principal logs is that branch.  A single matrix gives a
    LogCharPoly; a stack gives a SampleBatch.
    """
    v = np.asarray(v)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    try:
        lam = np.linalg.eigvals(v)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigen-decomposition failed: {exc}") from exc
    re, im = _principal_log_sum(1.0 - x * lam)
    if group is Group.SO2N:
        # conjugate pairs cancel; keep the exact zero of a real determinant
        im = np.zeros_like(re)
    n = v.shape[-1] if group is Group.UNITARY else v.shape[-1] // 2
    if v.ndim == 2:
        return LogCharPoly(float(re), float(im), n, Group(group))
    return SampleBatch(np.asarray(re, float), np.asarray(im, float), n, Group(group), "matrix")


def matrix_log_charpoly(n: int, size: int, rng=None, method: str = "qr") -> SampleBatch:
    """log det(I - V) for ``size`` Haar matrices, built by ``method``."""
    gen = as_generator(rng)
    if method == "qr":
        v = sample_haar_unitary_qr(n, gen, size)
    elif method == "recursive":
        v = sample_haar_unitary_recursive(n, gen, size)
    elif method == "so2n":
        batch = log_charpoly_direct(sample_haar_so2n(n, gen, size), 1.0, Group.SO2N)
        batch.sampler = "matrix-so2n"
        batch.seed, batch.stream_id = provenance(rng)
        return batch
    else:
        raise ValueError(f"unknown method {method!r}")
    batch = log_charpoly_direct(v, 1.0)
    batch.sampler = f"matrix-{method}"
    batch.seed, batch.stream_id = provenance(rng)
    return batch


# ---- equality-in-law experiments ------------------------------------------


@dataclass
class IdentityReport:
    """Both sides of a distributional identity plus the comparison checks."""

    name: str
    n: int
    x: float
    lhs: np.ndarray
    rhs: np.ndarray
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        return "\n".join(c.line() for c in self.checks)


def _compare_complex(name: str, lhs: np.ndarray, rhs: np.ndarray, alpha: float) -> list[CheckResult]:
    if np.array_equal(lhs, rhs):
        return [tolerance_check(f"{name}: sides identical", 0.0,
                                float(np.max(np.abs(lhs - rhs), initial=0.0)), 0.0)]
    out = []
    for part, f in (("Re", np.real), ("Im", np.imag)):
        a, b = f(lhs), f(rhs)
        for p in (1, 2):
            out.append(two_sample_moment_check(f"{name}: E[{part}^{p}]", a, b, power=p))
        out.append(ks_check(f"{name}: KS {part}", a, b, alpha=alpha))
    return out


def _offcircle_parts(n: int, m: int, gen):
    """M_1 on the sphere and an independent Haar V_{n-1}."""
    m1 = sample_sphere(n, gen, m)
    v = sample_haar_unitary_qr(n - 1, gen, m)
    return m1, v


def offcircle_rhs(m1: np.ndarray, v: np.ndarray, x: float) -> np.ndarray:
    """(1 - x M11) det(I - xV) + x(1-x)/(1 - conj M11) conj(m)^T (V* - x)^{-1} m det(I - xV)."""
    m11, mt = m1[:, 0], m1[:, 1:]
    d = v.shape[-1]
    eye = np.eye(d)
    det_v = np.linalg.det(eye - x * v)
    out = (1.0 - x * m11) * det_v
    if x * (1.0 - x) != 0.0:
        b = np.conj(np.swapaxes(v, -1, -2)) - x * eye
        y = np.linalg.solve(b, mt[..., None])[..., 0]
        quad = np.sum(np.conj(mt) * y, axis=1)
        out = out + x * (1.0 - x) / (1.0 - np.conj(m11)) * quad * det_v
    return out


def verify_offcircle_identity(n: int, x: float, m_samples: int, rng=None,
                              alpha: float = DEFAULT_ALPHA) -> IdentityReport:
    """det(I - xV_n) against its one-step recursion through V_{n-1}, in law."""
    if not 2 <= n <= 8:
        raise ValueError("off-circle identity is checked for 2 <= n <= 8")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    gen = as_generator(rng)
    vn = sample_haar_unitary_qr(n, gen, m_samples)
    lhs = np.linalg.det(np.eye(n) - x * vn)
    m1, v = _offcircle_parts(n, m_samples, gen)
    with np.errstate(all="ignore"):
        rhs = offcircle_rhs(m1, v, x)
    bad = ~np.isfinite(rhs)
    while np.any(bad):
        # singular solve (x on the spectrum) or M11 = 1: redraw those
        idx = np.flatnonzero(bad)
        m1b, vb = _offcircle_parts(n, idx.size, gen)
        with np.errstate(all="ignore"):
            rhs[idx] = offcircle_rhs(m1b, vb, x)
        bad = ~np.isfinite(rhs)
    rep = IdentityReport("off-circle", n, x, lhs, rhs)
    rep.checks = _compare_complex(f"off-circle n={n} x={x}", lhs, rhs, alpha)
    return rep


def eigenangle_rhs(m1: np.ndarray, angles: np.ndarray, x: float) -> np.ndarray:
    """Right side of the eigenangle form, from M_1 and eigenangles of V_{n-1}."""
    m11 = m1[:, 0]
    w = np.abs(m1[:, 1:]) ** 2
    e = np.exp(1j * angles)
    f = 1.0 - x * e
    prod_all = np.prod(f, axis=1)
    out = (1.0 - x * m11) * prod_all
    if x * (1.0 - x) != 0.0:
        d = angles.shape[1]
        others = np.empty_like(f)
        for j in range(d):
            others[:, j] = np.prod(np.delete(f, j, axis=1), axis=1)
        out = out + x * (1.0 - x) / (1.0 - np.conj(m11)) * np.sum(e * w * others, axis=1)
    return out


def verify_eigenangle_identity(n: int, x: float, m_samples: int, rng=None,
                               alpha: float = DEFAULT_ALPHA) -> IdentityReport:
    """prod_j (1 - x e^{i theta_j}) against its eigenangle recursion, in law."""
    if not 2 <= n <= 6:
        raise ValueError("eigenangle identity is checked for 2 <= n <= 6")
    if not 0.0 <= x < 1.0:
        raise ValueError("x must lie in [0, 1)")
    gen = as_generator(rng)
    lam = np.linalg.eigvals(sample_haar_unitary_qr(n, gen, m_samples))
    lhs = np.prod(1.0 - x * lam, axis=1)
    m1 = sample_sphere(n, gen, m_samples)
    angles = np.angle(np.linalg.eigvals(sample_haar_unitary_qr(n - 1, gen, m_samples)))
    with np.errstate(all="ignore"):
        rhs = eigenangle_rhs(m1, angles, x)
    bad = ~np.isfinite(rhs)
    while np.any(bad):
        idx = np.flatnonzero(bad)
        m1b = sample_sphere(n, gen, idx.size)
        ab = np.angle(np.linalg.eigvals(sample_haar_unitary_qr(n - 1, gen, idx.size)))
        with np.errstate(all="ignore"):
            rhs[idx] = eigenangle_rhs(m1b, ab, x)
        bad = ~np.isfinite(rhs)
    rep = IdentityReport("eigenangle", n, x, lhs, rhs)
    rep.checks = _compare_complex(f"eigenangle n={n} x={x}", lhs, rhs, alpha)
    return rep
