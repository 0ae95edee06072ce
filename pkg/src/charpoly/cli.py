"""Command line front end: ``charpoly sample|moments|validate|lil|bench``.

Every output record carries ``schema_version``, ``seed`` and ``stream_id``.
Floats are written with 17 significant digits so doubles round-trip.  A
timestamped header line is written first unless ``--no-header`` is given;
everything after it is a deterministic function of the flags.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .analytics.oracles import Group, MomentQuery, log_moment, variance_sum
from .analytics.stats import DEFAULT_ALPHA, DEFAULT_Z, EXP_SAFE, empirical_moment
from .rng import RngStream
from .samplers import SampleBatch

SCHEMA_VERSION = 1
WORKERS_ENV = "CHARPOLY_WORKERS"
MATRIX_BENCH_MAX_N = 64
LIL_MIN_N = 16

SAMPLE_FIELDS = ["schema_version", "seed", "stream_id", "index", "n", "group", "sampler",
                 "re_log", "im_log"]


class UsageError(Exception):
    pass


# ---- output ---------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return "null"
        return "%.17g" % v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ",".join(json.dumps(str(k)) + ":" + _fmt(x) for k, x in v.items()) + "}"
    return json.dumps(str(v))


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (list, tuple, dict)):
        return _fmt(v)
    s = _fmt(v)
    return s[1:-1] if s.startswith('"') else s


class RecordWriter:
    """Single-writer sink for JSONL or CSV records, append-only."""

    def __init__(self, path: str, fmt: str, header: dict | None, fields: list[str] | None = None):
        self.fmt = fmt
        self.fields = fields
        self._own = path not in (None, "-")
        try:
            self.fh = open(path, "w", newline="") if self._own else sys.stdout
        except OSError as exc:
            raise OSError(f"cannot write to {path}: {exc}") from exc
        self._csv = csv.writer(self.fh, lineterminator="\n") if fmt == "csv" else None
        if header is not None:
            if fmt == "csv":
                self.fh.write("# " + _fmt(header) + "\n")
            else:
                self.fh.write(_fmt({"header": header}) + "\n")
        self._wrote_columns = False

    def write(self, rec: dict) -> None:
        if self._csv is None:
            self.fh.write(_fmt(rec) + "\n")
            return
        if not self._wrote_columns:
            self.fields = self.fields or list(rec)
            self._csv.writerow(self.fields)
            self._wrote_columns = True
        self._csv.writerow([_csv_cell(rec.get(k)) for k in self.fields])

    def close(self) -> None:
        if self._own:
            self.fh.close()
        else:
            self.fh.flush()


def _header(args, command: str) -> dict | None:
    if args.no_header:
        return None
    return {"schema_version": SCHEMA_VERSION, "command": command, "version": __version__,
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "seed": args.seed, "workers": args.workers}


# ---- parallel plumbing ---------------------------------------------------------------


def _split(total: int, workers: int) -> list[int]:
    """Contiguous shares of ``total`` for ``workers`` substreams."""
    workers = max(1, min(workers, total)) if total else 1
    base, extra = divmod(total, workers)
    return [base + (i < extra) for i in range(workers)]


def _run_tasks(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*tasks)))


def _sample_task(group: str, sampler: str, n: int, m: int, seed: int, stream_id: int):
    from .samplers import sample_joint, sample_so2n_log_charpoly, sample_unitary_log_charpoly

    rng = RngStream(seed, stream_id)
    if m == 0:
        return np.empty(0), np.empty(0), sampler
    if group == "so2n":
        b = sample_so2n_log_charpoly(n, m, rng)
    elif sampler == "joint":
        b = sample_joint(n, m, rng)
    else:
        b = sample_unitary_log_charpoly(n, m, rng)
    return b.re_log, b.im_log, b.sampler


def _trajectory_task(checkpoints: tuple, m: int, seed: int, stream_id: int):
    from .samplers import sample_trajectory

    if m == 0:
        k = len(checkpoints)
        return np.empty((0, k)), np.empty((0, k))
    tr = sample_trajectory(checkpoints, m, RngStream(seed, stream_id))
    return tr.re_log, tr.im_log


# ---- commands ---------------------------------------------------------------------------


def _need(args, *names) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.command} needs {', '.join(missing)} (flag or config key)")


def cmd_sample(args) -> int:
    _need(args, "n")
    if args.group == "so2n" and args.sampler == "joint":
        raise UsageError("--sampler joint applies to the unitary group only")
    shares = _split(args.samples, args.workers)
    w = RecordWriter(args.out, args.format, _header(args, "sample"), SAMPLE_FIELDS)
    try:
        for pos, n in enumerate(args.n):
            # stream ids are distinct per (n, worker) so sizes do not share draws
            base = pos * len(shares)
            tasks = [(args.group, args.sampler, n, m, args.seed, base + i) for i, m in enumerate(shares)]
            for sid, (re, im, name) in enumerate(_run_tasks(_sample_task, tasks, args.workers)):
                for idx in range(re.size):
                    w.write({"schema_version": SCHEMA_VERSION, "seed": args.seed,
                             "stream_id": base + sid, "index": idx, "n": n, "group": args.group,
                             "sampler": name, "re_log": float(re[idx]), "im_log": float(im[idx])})
    finally:
        w.close()
    return 0


def cmd_moments(args) -> int:
    _need(args, "n", "t")
    group = Group(args.group)
    try:
        queries = [MomentQuery(args.t, args.s, group, n) for n in args.n]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    w = RecordWriter(args.out, args.format, _header(args, "moments"))
    try:
        for q in queries:
            n = q.n
            lm = log_moment(q)
            rec = {"schema_version": SCHEMA_VERSION, "seed": args.seed, "stream_id": 0,
                   "n": n, "group": group.value, "t": args.t, "s": args.s, "log_moment": lm,
                   "moment": math.exp(lm) if abs(lm) < EXP_SAFE else None}
            if args.empirical:
                re, im, name = _sample_task(group.value, "product", n, args.empirical, args.seed, 0)
                est = empirical_moment(SampleBatch(re, im, n, group, name), args.t, args.s)
                rec.update({"samples": est.n, "estimate": est.real, "estimate_imag": est.imag,
                            "std_error": est.se_real, "std_error_imag": est.se_imag})
                if rec["moment"] is not None and est.se_real > 0:
                    rec["z_score"] = (est.real - rec["moment"]) / est.se_real
                else:
                    rec["z_score"] = None
            w.write(rec)
    finally:
        w.close()
    return 0


def cmd_validate(args) -> int:
    from .validation import SuiteConfig, run_suite

    cfg = SuiteConfig(samples=args.samples, seed=args.seed, alpha=args.alpha, z=args.z,
                      n=tuple(args.n) if args.n else None)
    results = run_suite(args.suite, cfg)
    w = RecordWriter(args.out, args.format, _header(args, f"validate {args.suite}"))
    ok = True
    try:
        for res in results:
            for msg in res.warnings:
                print(f"warning [{res.name}]: {msg}", file=sys.stderr)
            for c in res.checks:
                d = c.to_dict()
                rec = {"schema_version": SCHEMA_VERSION, "seed": args.seed, "stream_id":
                       list(_suite_order()).index(res.name), "suite": res.name}
                rec.update({k: d[k] for k in ("quantity", "exact_value", "estimate", "std_error",
                                              "n_samples", "pass", "threshold", "kind", "p_value",
                                              "z_score")})
                rec["low_power"] = bool(res.warnings)
                w.write(rec)
                print(c.line(), file=sys.stderr)
            ok &= res.passed
    finally:
        w.close()
    print("validation " + ("passed" if ok else "FAILED"), file=sys.stderr)
    return 0 if ok else 1


def _suite_order():
    from .validation import SUITES

    return SUITES


def default_checkpoints(n_max: int) -> list[int]:
    pts = np.unique(np.round(np.geomspace(10, n_max, 25)).astype(int))
    return [int(p) for p in pts]


def lil_statistics(n: int, re: float, im: float) -> dict:
    """Iterated-log normalisations; null where the logs are not positive."""
    out = {"lil_re": None, "lil_im": None, "petrov_re": None, "petrov_im": None, "note": None}
    notes = []
    if n >= LIL_MIN_N:
        d = math.sqrt(math.log(n) * math.log(math.log(math.log(n))))
        out["lil_re"], out["lil_im"] = re / d, im / d
    else:
        notes.append(f"log log log n <= 0 for n < {LIL_MIN_N}")
    b = variance_sum(n)
    if math.log(b) > 0 and math.log(math.log(b)) > 0:
        d = math.sqrt(2 * b * math.log(math.log(b)))
        out["petrov_re"], out["petrov_im"] = re / d, im / d
    else:
        notes.append("log log B_n <= 0")
    out["note"] = "; ".join(notes) or None
    return out


def cmd_lil(args) -> int:
    _need(args, "n_max")
    if args.n_max < 100:
        raise UsageError("--n-max must be at least 100")
    cps = sorted(set(args.checkpoints)) if args.checkpoints else default_checkpoints(args.n_max)
    if cps[-1] != args.n_max:
        cps = [c for c in cps if c < args.n_max] + [args.n_max]
    if cps[0] < 1:
        raise UsageError("checkpoints must be >= 1")
    shares = _split(args.trajectories, args.workers)
    tasks = [(tuple(cps), m, args.seed, i) for i, m in enumerate(shares)]
    w = RecordWriter(args.out, args.format, _header(args, "lil"))
    try:
        for sid, (re, im) in enumerate(_run_tasks(_trajectory_task, tasks, args.workers)):
            for p in range(re.shape[0]):
                for c, n in enumerate(cps):
                    rec = {"schema_version": SCHEMA_VERSION, "seed": args.seed, "stream_id": sid,
                           "index": p, "n": n, "re_log": float(re[p, c]), "im_log": float(im[p, c])}
                    rec.update(lil_statistics(n, rec["re_log"], rec["im_log"]))
                    w.write(rec)
    finally:
        w.close()
    return 0


def bench_sizes(n: int, samples: int, seed: int = 0, repeats: int = 1) -> dict:
    """Per-draw wall time of the product sampler and, for small n, the matrix oracle."""
    from .matrix_oracle import log_charpoly_direct, sample_haar_unitary_qr
    from .samplers import sample_unitary_log_charpoly

    rng = RngStream(seed, 0)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        sample_unitary_log_charpoly(n, samples, rng)
        best = min(best, time.perf_counter() - t0)
    rec = {"n": n, "samples": samples, "product_seconds_per_draw": best / samples}
    if n <= MATRIX_BENCH_MAX_N:
        mbest = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            log_charpoly_direct(sample_haar_unitary_qr(n, rng, samples))
            mbest = min(mbest, time.perf_counter() - t0)
        rec["matrix_seconds_per_draw"] = mbest / samples
        rec["speedup"] = rec["matrix_seconds_per_draw"] / rec["product_seconds_per_draw"]
    return rec


def cmd_bench(args) -> int:
    w = RecordWriter(args.out, args.format, _header(args, "bench"),
                     ["schema_version", "seed", "stream_id", "n", "samples",
                      "product_seconds_per_draw", "matrix_seconds_per_draw", "speedup"])
    try:
        for n in args.n:
            rec = {"schema_version": SCHEMA_VERSION, "seed": args.seed, "stream_id": 0}
            rec.update(bench_sizes(n, args.samples, args.seed, args.repeats))
            w.write(rec)
    finally:
        w.close()
    return 0


# ---- argument parsing ------------------------------------------------------------------


def _positive_int(s: str) -> int:
    try:
        v = int(float(s)) if "e" in s.lower() else int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s!r}")
    return v


def _size(s: str) -> int:
    v = _positive_int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("sizes must be >= 1")
    return v


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


GLOBAL_FLAGS = ("seed", "workers", "out", "format", "no_header", "config")


def _common_flags(suppress: bool) -> argparse.ArgumentParser:
    """Global flags; the per-command copies default to SUPPRESS so a flag given
    before the command name is not reset by the subparser."""

    def d(value):
        return argparse.SUPPRESS if suppress else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_positive_int, default=d(0), help="64-bit master seed")
    common.add_argument("--workers", type=_size, default=d(_default_workers()),
                        help=f"worker processes (default from ${WORKERS_ENV}, else 1)")
    common.add_argument("--out", default=d("-"), help="output file, '-' for stdout")
    common.add_argument("--format", choices=("jsonl", "csv"), default=d("jsonl"))
    common.add_argument("--no-header", action="store_true", default=d(False),
                        help="omit the timestamped header line")
    common.add_argument("--config", default=d(None), help="JSON file whose keys mirror the long flags")
    return common


def build_parser() -> argparse.ArgumentParser:
    top = _common_flags(suppress=False)
    common = _common_flags(suppress=True)

    p = argparse.ArgumentParser(prog="charpoly", parents=[top],
                                description="Sample and validate characteristic polynomials of Haar matrices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common], help="write draws of log det(I - V)")
    s.add_argument("--group", choices=("unitary", "so2n"), default="unitary")
    s.add_argument("--n", type=_size, nargs="+", default=None)
    s.add_argument("--samples", type=_positive_int, default=1000)
    s.add_argument("--sampler", choices=("product", "joint"), default="product")
    s.set_defaults(func=cmd_sample)

    m = sub.add_parser("moments", parents=[common], help="exact log-moments, optionally with a Monte Carlo estimate")
    m.add_argument("--group", choices=("unitary", "so2n"), default="unitary")
    m.add_argument("--n", type=_size, nargs="+", default=None)
    m.add_argument("--t", type=float, default=None)
    m.add_argument("--s", type=float, default=0.0)
    m.add_argument("--empirical", type=_positive_int, default=0, metavar="M")
    m.set_defaults(func=cmd_moments)

    from .validation import SUITE_NAMES

    v = sub.add_parser("validate", parents=[common], help="run a validation suite")
    v.add_argument("suite", choices=SUITE_NAMES)
    v.add_argument("--samples", type=_positive_int, default=None)
    v.add_argument("--n", type=_size, nargs="+", default=None)
    v.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    v.add_argument("--z", type=float, default=DEFAULT_Z)
    v.set_defaults(func=cmd_validate)

    lil = sub.add_parser("lil", parents=[common], help="coupled trajectories with iterated-log normalisations")
    lil.add_argument("--n-max", type=_size, default=None)
    lil.add_argument("--checkpoints", type=_size, nargs="+", default=None)
    lil.add_argument("--trajectories", type=_size, default=1)
    lil.set_defaults(func=cmd_lil)

    b = sub.add_parser("bench", parents=[common], help="per-draw timings")
    b.add_argument("--n", type=_size, nargs="+", default=[1000, 10_000, 100_000])
    b.add_argument("--samples", type=_size, default=1000)
    b.add_argument("--repeats", type=_size, default=1)
    b.set_defaults(func=cmd_bench)
    return p


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Config values become parser defaults, so explicit flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = _load_config(known.config)
    cfg.pop("config", None)
    cfg.pop("command", None)
    parsers = [parser]
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            parsers += list(action.choices.values())
    dests = {a.dest for p in parsers for a in p._actions}
    unknown = sorted(set(cfg) - dests)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    parser.set_defaults(**{k: v for k, v in cfg.items() if k in GLOBAL_FLAGS})
    for p in parsers[1:]:
        own = {a.dest for a in p._actions} - set(GLOBAL_FLAGS)
        p.set_defaults(**{k: v for k, v in cfg.items() if k in own})


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"charpoly: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"charpoly: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
