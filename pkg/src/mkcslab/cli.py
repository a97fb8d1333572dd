"""Command-line entry point.

    mkcslab kd --n 4 --lmax 12 --vector "1 1 1 1"
    mkcslab recover --matrix A.txt --y "0 0" --lmax 10
    mkcslab kstar --matrix A.txt --lmax 12
    mkcslab census {nullspace,recovery,table,lemma2} [--d --n --level ...]
    mkcslab walsh gen --k 2
    mkcslab walsh census --n 8 --d 3 --level 6 --lmax 6
    mkcslab selftest

Environment: ``MKCSLAB_WORKERS`` (worker threads), ``MKCSLAB_OUTDIR``
(directory for reports when ``--out`` is omitted), ``MKCSLAB_DISABLE_NUMBA``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import census as census_mod
from . import language, linalg, walsh
from .reports import CensusReport, atomic_write
from .solver import kstar, mkcs

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

SUBCOMMANDS = (
    "kd", "recover", "kstar",
    "census nullspace", "census recovery", "census table", "census lemma2",
    "walsh gen", "walsh census", "selftest",
)


class ConfigError(ValueError):
    """A parameter combination violates a guard."""


@dataclass
class RunConfig:
    subcommand: str
    n: int | None = None
    d: int | None = None
    k: int | None = None
    level: int | None = None
    samples: int = 1000
    seed: int = 0
    lmax: int | None = None
    alpha: float = 0.5
    B: int | None = None
    grid_bound: int = linalg.DEFAULT_GRID_BOUND
    bound: int | None = None
    vector: str | None = None
    y: str | None = None
    matrix: str | None = None
    mode: str = "sampled"
    format: str = "json"
    out: str | None = None
    workers: int | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("out", "workers"):
            d.pop(key)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})

    def validate(self) -> None:
        def need(*names):
            missing = [f"--{nm}" for nm in names if getattr(self, nm) is None]
            if missing:
                raise ConfigError(f"{self.subcommand}: missing {', '.join(missing)}")

        def budget(value, name="lmax"):
            if not 3 <= value <= language.MAX_BUDGET:
                raise ConfigError(f"--{name} must be in 3..{language.MAX_BUDGET}, got {value}")

        sub = self.subcommand
        if sub not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {sub!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"--format must be json or csv, got {self.format!r}")
        if self.mode not in ("sampled", "exhaustive"):
            raise ConfigError(f"--mode must be sampled or exhaustive, got {self.mode!r}")
        if self.grid_bound < 0:
            raise ConfigError("--grid-bound must be nonnegative")
        if sub == "kd":
            need("n", "lmax", "vector")
            budget(self.lmax)
            if self.n < 2:
                raise ConfigError("--n must be >= 2")
        elif sub in ("recover", "kstar"):
            need("matrix", "lmax")
            budget(self.lmax)
            if sub == "recover":
                need("y")
        elif sub in ("census nullspace", "census recovery"):
            need("d", "n", "level")
            if not 1 <= self.d < self.n:
                raise ConfigError(f"need 1 <= d < n, got d={self.d}, n={self.n}")
            if self.samples < 1:
                raise ConfigError("--samples must be >= 1")
            if self.mode == "exhaustive" and self.d * self.n > census_mod.MAX_EXHAUSTIVE_BITS:
                raise ConfigError(
                    f"exhaustive mode needs d*n <= {census_mod.MAX_EXHAUSTIVE_BITS}")
            if sub == "census nullspace":
                if not 0 <= self.level <= language.MAX_BUDGET:
                    raise ConfigError(f"--level must be in 0..{language.MAX_BUDGET}")
            else:
                lmax = self.lmax if self.lmax is not None else census_mod.lemma1_level(self.level) - 1
                budget(lmax)
                if not 3 <= self.level <= lmax:
                    raise ConfigError(f"need 3 <= level <= lmax, got {self.level} > {lmax}")
        elif sub == "census table":
            need("d", "n")
            if self.d < 1 or self.n < 1:
                raise ConfigError("--d and --n must be positive")
            if self.d * self.n + self.n > census_mod.MAX_TABLE_BITS:
                raise ConfigError(f"table guard: d*n + n must be <= {census_mod.MAX_TABLE_BITS}")
            if not 0 < self.alpha < 1:
                raise ConfigError("--alpha must lie in (0, 1)")
        elif sub == "census lemma2":
            need("n", "B")
            if not 2 <= self.n <= census_mod.MAX_LEMMA2_N:
                raise ConfigError(f"lemma2 guard: n must be in 2..{census_mod.MAX_LEMMA2_N}")
            if self.B > census_mod.MAX_LEMMA2_B:
                raise ConfigError(f"lemma2 guard: B must be <= {census_mod.MAX_LEMMA2_B}")
            if self.B < 1:
                raise ConfigError("lemma2: B must be >= 1 (no nonzero vectors otherwise)")
        elif sub == "walsh gen":
            need("k")
            if not 0 <= self.k <= walsh.MAX_HADAMARD_K:
                raise ConfigError(f"--k must be in 0..{walsh.MAX_HADAMARD_K}")
        elif sub == "walsh census":
            need("n", "d", "level")
            if not walsh.is_power_of_two(self.n) or self.n > walsh.MAX_CENSUS_N:
                raise ConfigError(f"--n must be a power of two <= {walsh.MAX_CENSUS_N}")
            if not 1 <= self.d < self.n:
                raise ConfigError("need 1 <= d < n")
            lmax = self.lmax if self.lmax is not None else self.level
            budget(lmax)
            if self.level > lmax:
                raise ConfigError("--level exceeds --lmax")


# --- subcommand bodies --------------------------------------------------------

def _read_matrix(path: str) -> linalg.SmallMatrix:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file {path}: {exc}") from None
    return linalg.parse_matrix(text)


def _cmd_kd(cfg: RunConfig) -> tuple[int, str]:
    x = linalg.parse_vector(cfg.vector, bound=cfg.grid_bound)
    if x.shape[0] != cfg.n:
        raise ConfigError(f"vector has {x.shape[0]} entries, --n is {cfg.n}")
    res = language.kd(x, cfg.lmax)
    if not res.found:
        return EXIT_OK, f"kd_bits: > {cfg.lmax} (budget exhausted)\n"
    return EXIT_OK, (
        f"kd_bits: {res.kd_bits}\n"
        f"witness: {language.to_sexpr(res.witness)}\n"
        f"bits: {language.encode(res.witness, cfg.n)}\n"
    )


def _cmd_recover(cfg: RunConfig) -> tuple[int, str]:
    A = _read_matrix(cfg.matrix)
    y = linalg.parse_vector(cfg.y, bound=None)
    res = mkcs(A, y, cfg.lmax, bound=cfg.bound)
    return EXIT_OK, json.dumps(res.to_dict()) + "\n"


def _cmd_kstar(cfg: RunConfig) -> tuple[int, str]:
    A = _read_matrix(cfg.matrix)
    res = kstar(A, cfg.lmax, bound=cfg.bound)
    return EXIT_OK, json.dumps(res.to_dict()) + "\n"


def build_report(cfg: RunConfig) -> CensusReport:
    sub = cfg.subcommand
    if sub == "census lemma2":
        report = census_mod.lemma2_sweep(cfg.n, cfg.B)
    elif sub == "census nullspace":
        report = census_mod.theorem1_nullspace_census(
            cfg.d, cfg.n, cfg.level, cfg.samples, cfg.seed, cfg.mode, cfg.workers)
    elif sub == "census recovery":
        report = census_mod.theorem1_recovery_census(
            cfg.d, cfg.n, cfg.level, cfg.samples, cfg.seed, cfg.lmax, cfg.mode,
            cfg.bound, cfg.workers)
    elif sub == "census table":
        _, report = census_mod.theorem2_table(cfg.d, cfg.n, cfg.alpha)
    elif sub == "walsh census":
        lmax = cfg.lmax if cfg.lmax is not None else cfg.level
        tri = walsh.theorem3_census(cfg.n, cfg.d, cfg.level, lmax, cfg.bound)
        results = dataclasses.asdict(tri)
        checks = results.pop("checks")
        report = CensusReport(kind="walsh-census",
                              params={"n": cfg.n, "d": cfg.d, "level": cfg.level, "lmax": lmax,
                                      "bound": cfg.bound},
                              results=results, checks=checks, rows=tri.level_rows())
    else:
        raise ConfigError(f"{sub} does not produce a census report")
    report.config = cfg.to_dict()
    return report


def _cmd_report(cfg: RunConfig) -> tuple[int, str]:
    report = build_report(cfg)
    return (EXIT_OK if report.passed else EXIT_CHECK_FAILED), report.render(cfg.format)


def _cmd_walsh_gen(cfg: RunConfig) -> tuple[int, str]:
    system = walsh.sequency_order(walsh.hadamard(cfg.k))
    return EXIT_OK, linalg.format_matrix(system.as_matrix())


# --- selftest -----------------------------------------------------------------

def _random_program(rng: random.Random, n: int, depth: int = 0) -> language.Program:
    ops = ["zero", "const", "unit", "lit", "sum", "scale"]
    if walsh.is_power_of_two(n):
        ops.append("walsh")
    if depth >= 4:
        ops = [o for o in ops if o not in ("sum", "scale")]
    op = rng.choice(ops)
    c = lambda: rng.randint(-40, 40)  # noqa: E731
    if op == "zero":
        return language.Zero()
    if op == "const":
        return language.Const(c())
    if op == "unit":
        return language.Unit(rng.randrange(n), c())
    if op == "lit":
        return language.Lit(tuple(c() for _ in range(n)))
    if op == "sum":
        return language.Sum(_random_program(rng, n, depth + 1), _random_program(rng, n, depth + 1))
    if op == "scale":
        return language.Scale(c(), _random_program(rng, n, depth + 1))
    return language.Walsh(rng.randrange(n))


def _check_golden() -> bool:
    return (
        language.encode(language.Zero(), 4) == "000"
        and language.encode(language.Const(1), 4) == "001011"
        and language.encode(language.Walsh(2), 4) == "11010"
        and language.decode("001011", 4) == (language.Const(1), 6)
    )


def _check_round_trip() -> bool:
    rng = random.Random(20240601)
    for _ in range(500):
        n = rng.choice([2, 3, 4, 5, 8])
        p = _random_program(rng, n)
        bits = language.encode(p, n)
        if language.decode(bits, n) != (p, len(bits)):
            return False
    return True


def _check_prefix_free(n: int = 4, max_len: int = 10) -> bool:
    valid = []
    for L in range(1, max_len + 1):
        for k in range(1 << L):
            bits = format(k, f"0{L}b")
            try:
                if language.decode(bits, n)[1] == L:
                    valid.append(bits)
            except language.DecodeError:
                pass
    valid.sort()
    # in sorted order a proper prefix sits immediately before some extension
    return all(not b.startswith(a) for a, b in zip(valid, valid[1:]))


def _check_lemma2() -> bool:
    return all(census_mod.lemma2_sweep(n, B).passed for n in (2, 3) for B in (1, 2))


def _check_hadamard() -> bool:
    for k in range(0, 5):
        H = walsh.hadamard(k)
        n = H.shape[0]
        if not np.array_equal(H @ H.T, n * np.eye(n, dtype=np.int64)):
            return False
        system = walsh.sequency_order(H)
        if [walsh.sign_changes(r) for r in system.rows] != list(range(n)):
            return False
    return True


SELFTEST_CHECKS: dict[str, Callable[[], bool]] = {
    "codec golden vectors": _check_golden,
    "codec round trip (500 random programs)": _check_round_trip,
    "prefix-free encodings (n=4, <= 10 bits)": _check_prefix_free,
    "lemma2 sweep (n <= 3, B <= 2)": _check_lemma2,
    "hadamard orthogonality and sequency (order <= 16)": _check_hadamard,
}


def selftest(out=None) -> int:
    out = sys.stdout if out is None else out
    failed = []
    for name, check in SELFTEST_CHECKS.items():
        try:
            ok = bool(check())
        except Exception as exc:  # a crash is a failed invariant here
            ok = False
            name = f"{name} [{type(exc).__name__}: {exc}]"
        print(f"{'PASS' if ok else 'FAIL'}  {name}", file=out)
        if not ok:
            failed.append(name)
    print(f"{len(SELFTEST_CHECKS) - len(failed)}/{len(SELFTEST_CHECKS)} checks passed", file=out)
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


# --- dispatch -------------------------------------------------------------------

_HANDLERS = {
    "kd": _cmd_kd,
    "recover": _cmd_recover,
    "kstar": _cmd_kstar,
    "walsh gen": _cmd_walsh_gen,
}


def _default_name(cfg: RunConfig) -> str:
    ext = "txt" if cfg.subcommand == "walsh gen" else cfg.format
    return cfg.subcommand.replace(" ", "-") + f".{ext}"


def run(cfg: RunConfig) -> tuple[int, str]:
    """Validate and execute ``cfg``; return (exit status, rendered output)."""
    cfg.validate()
    handler = _HANDLERS.get(cfg.subcommand, _cmd_report)
    return handler(cfg)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mkcslab", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *names):
        flags = {
            "n": dict(type=int), "d": dict(type=int), "k": dict(type=int),
            "level": dict(type=int), "samples": dict(type=int, default=1000),
            "seed": dict(type=int, default=0), "lmax": dict(type=int),
            "alpha": dict(type=float, default=0.5), "B": dict(type=int),
            "bound": dict(type=int, help="restrict candidates to |z_j| <= bound"),
            "grid-bound": dict(type=int, default=linalg.DEFAULT_GRID_BOUND,
                               help="grid bound for input vectors"),
            "vector": dict(), "y": dict(), "matrix": dict(),
            "mode": dict(choices=("sampled", "exhaustive"), default="sampled"),
            "format": dict(choices=("json", "csv"), default="json"),
            "out": dict(), "workers": dict(type=int),
        }
        for nm in names:
            sp.add_argument(f"--{nm}", **flags[nm])

    common(sub.add_parser("kd", help="shortest program for a vector"),
           "n", "lmax", "vector", "grid-bound")
    common(sub.add_parser("recover", help="minimum-complexity solution of A z = y"),
           "matrix", "y", "lmax", "bound")
    common(sub.add_parser("kstar", help="recovery threshold of one matrix"),
           "matrix", "lmax", "bound")

    cen = sub.add_parser("census", help="matrix-family experiments").add_subparsers(
        dest="experiment", required=True)
    report_flags = ("format", "out", "workers")
    common(cen.add_parser("nullspace"), "d", "n", "level", "samples", "seed", "mode",
           *report_flags)
    common(cen.add_parser("recovery"), "d", "n", "level", "samples", "seed", "lmax", "mode",
           "bound", *report_flags)
    common(cen.add_parser("table"), "d", "n", "alpha", *report_flags)
    common(cen.add_parser("lemma2"), "n", "B", *report_flags)

    wal = sub.add_parser("walsh", help="Walsh functions").add_subparsers(
        dest="experiment", required=True)
    common(wal.add_parser("gen"), "k", "out")
    common(wal.add_parser("census"), "n", "d", "level", "lmax", "bound", *report_flags)

    sub.add_parser("selftest", help="fast invariant checks")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    sub = ns.command if not getattr(ns, "experiment", None) else f"{ns.command} {ns.experiment}"
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    values = {k: v for k, v in vars(ns).items() if k in fields and v is not None}
    return RunConfig(subcommand=sub, **values)


def main(argv: list[str] | None = None) -> int:
    ns = _parser().parse_args(argv)
    if ns.command == "selftest":
        return selftest()
    cfg = config_from_args(ns)
    try:
        status, text = run(cfg)
    except (ConfigError, ValueError, OverflowError) as exc:
        print(f"mkcslab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = cfg.out
    writes_artifact = cfg.subcommand not in ("kd", "recover", "kstar")
    if out is None and writes_artifact and os.environ.get("MKCSLAB_OUTDIR"):
        out = str(Path(os.environ["MKCSLAB_OUTDIR"]) / _default_name(cfg))
    if out is not None:
        try:
            atomic_write(out, text)
        except OSError as exc:
            print(f"mkcslab: error: cannot write {out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
