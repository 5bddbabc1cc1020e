"""``mctl run | ablate | compare-s``: experiment driver writing CSV/SVG/JSON artifacts."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import subprocess
import sys
import warnings
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np
from threadpoolctl import threadpool_info

import mctl
from mctl.data import SYNTHETIC_KINDS, SyntheticSpec
from mctl.errors import ConfigError, ConvergenceWarning, MctlError
from mctl.experiment import (
    MODES,
    PREPROCESSING,
    SOURCE_ONLY,
    csv_task,
    preprocess,
    run_baseline,
    run_mctl,
    synthetic_task,
    thread_count,
    thread_limits,
)
from mctl.kernel_graph import KernelSpec
from mctl.losses import LossBreakdown
from mctl.state import ABLATIONS, MCTL, MCTL_S, VARIANTS, MctlConfig
from mctl.svg import convergence_svg

log = logging.getLogger("mctl")

RESULT_COLUMNS = ("task", "variant", "seed", "accuracy", "iterations", "wall_ms")


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's results (wall time aside)."""

    synthetic: Optional[str] = None
    source: Optional[str] = None
    target_train: Optional[str] = None
    target_test: Optional[str] = None
    label_col: Optional[str] = None
    rotation: Optional[float] = None
    noise: float = 0.3
    n_per_class: int = 20
    classes: Optional[int] = None
    n_target: int = 80
    mode: str = SOURCE_ONLY
    preprocess: str = "zscore"
    ridge: float = 1e-3
    seed: int = 0
    seeds: int = 1
    solver: MctlConfig = field(default_factory=MctlConfig)

    def validate(self) -> None:
        files = (self.source, self.target_train, self.target_test)
        if self.synthetic is not None:
            if any(f is not None for f in files):
                raise ConfigError("use either --synthetic or the three CSV inputs, not both")
            if self.synthetic not in SYNTHETIC_KINDS:
                raise ConfigError(f"unknown synthetic task {self.synthetic!r}; choose from {SYNTHETIC_KINDS}")
        elif not all(f is not None for f in files):
            raise ConfigError("need --synthetic KIND or all of --source, --target-train, --target-test")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.preprocess not in PREPROCESSING:
            raise ConfigError(f"preprocess must be one of {PREPROCESSING}")
        if self.seeds < 1:
            raise ConfigError("--seeds must be >= 1")
        if not self.ridge >= 0:
            raise ConfigError("--ridge must be >= 0")
        self.solver.validate()

    def seed_list(self) -> list[int]:
        return [self.seed + i for i in range(self.seeds)]

    def task_name(self) -> str:
        return self.synthetic if self.synthetic else Path(self.source).stem

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "solver"}
        d["solver"] = self.solver.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "solver" in d:
            d["solver"] = MctlConfig.from_dict(d["solver"])
        return cls(**d)


def build_task(rc: RunConfig, seed: int):
    if rc.synthetic:
        classes = rc.classes or (2 if rc.synthetic == "two-moons-shift" else 3)
        spec = SyntheticSpec(
            kind=rc.synthetic,
            n_per_class=rc.n_per_class,
            classes=classes,
            rotation_deg=rc.rotation,
            noise_sigma=rc.noise,
            seed=seed,
            n_target=rc.n_target,
        )
        task = synthetic_task(spec)
    else:
        task = csv_task(rc.source, rc.target_train, rc.target_test, rc.label_col)
    return preprocess(task, rc.preprocess)


# ------------------------------------------------------------------- arguments


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("data")
    g.add_argument("--config", help="JSON config or a previous run's manifest.json")
    g.add_argument("--source", help="labeled source CSV")
    g.add_argument("--target-train", help="target CSV used for adaptation")
    g.add_argument("--target-test", help="labeled target CSV used for scoring")
    g.add_argument("--synthetic", choices=SYNTHETIC_KINDS, help="generate a synthetic task instead")
    g.add_argument("--label-col", help="name of the integer label column")
    g.add_argument("--rotation", type=float, help="synthetic shift angle in degrees")
    g.add_argument("--noise", type=float, help="synthetic noise sigma")
    g.add_argument("--n-per-class", type=int, help="synthetic source samples per class")
    g.add_argument("--n-target", type=int, help="synthetic target samples (split train/test in half)")
    g.add_argument("--classes", type=int, help="synthetic class count")
    g.add_argument("--preprocess", choices=PREPROCESSING)

    s = common.add_argument_group("model")
    s.add_argument("--mode", choices=MODES)
    s.add_argument("--kernel", choices=("linear", "gaussian"))
    s.add_argument("--sigma", type=float)
    s.add_argument("--tau", type=float)
    s.add_argument("--lambda1", type=float)
    s.add_argument("--k", type=int, help="neighbors in the target kNN graph")
    s.add_argument("--dim", type=int, help="subspace dimension (default: n)")
    s.add_argument("--alpha", type=float, help="initial Z step size")
    s.add_argument("--iters", type=int, help="max outer iterations")
    s.add_argument("--variant", choices=VARIANTS)
    s.add_argument("--drop", action="append", choices=ABLATIONS, help="remove a loss term (repeatable)")
    s.add_argument("--recompute-affinity", action="store_true", default=None)
    s.add_argument("--ridge", type=float, help="classifier ridge")

    r = common.add_argument_group("run")
    r.add_argument("--seed", type=int)
    r.add_argument("--seeds", type=int, help="number of consecutive seeds")
    r.add_argument("--out", default="mctl_out", help="output directory (default: %(default)s)")
    r.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mctl", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {mctl.__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="fit, classify and log convergence")
    sub.add_parser("ablate", parents=[common], help="full model vs each dropped loss term")
    sub.add_parser("compare-s", parents=[common], help="paired MCTL vs MCTL-S runs")
    return p


_TOP_FLAGS = (
    "synthetic",
    "source",
    "target_train",
    "target_test",
    "label_col",
    "rotation",
    "noise",
    "n_per_class",
    "n_target",
    "classes",
    "preprocess",
    "mode",
    "ridge",
    "seed",
    "seeds",
)
_SOLVER_FLAGS = {
    "tau": "tau",
    "lambda1": "lambda1",
    "k": "k_neighbors",
    "dim": "dim",
    "alpha": "step_alpha",
    "iters": "max_outer_iters",
    "variant": "variant",
    "recompute_affinity": "recompute_affinity",
}


def load_config_file(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    if "config" in raw:  # a manifest
        raw = raw["config"]
    try:
        return RunConfig.from_dict(raw)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def resolve_config(args) -> RunConfig:
    """File values first, then any flag given on the command line."""
    if args.synthetic is not None and any(
        getattr(args, f) is not None for f in ("source", "target_train", "target_test")
    ):
        raise ConfigError("use either --synthetic or the three CSV inputs, not both")
    rc = load_config_file(args.config) if args.config else RunConfig()
    top = {name: getattr(args, name) for name in _TOP_FLAGS if getattr(args, name) is not None}
    if top.get("synthetic") is not None:
        top.update(source=None, target_train=None, target_test=None)
    elif top.get("source") is not None:
        top["synthetic"] = None
    solver = {dst: getattr(args, src) for src, dst in _SOLVER_FLAGS.items() if getattr(args, src) is not None}
    if args.drop is not None:
        solver["ablation"] = frozenset(args.drop)
    if args.kernel is not None or args.sigma is not None:
        k = rc.solver.kernel
        solver["kernel"] = KernelSpec(
            args.kernel if args.kernel is not None else k.kind,
            args.sigma if args.sigma is not None else k.sigma,
        )
    rc = replace(rc, solver=replace(rc.solver, **solver), **top)
    if rc.synthetic is None and rc.source is None and not args.config:
        rc = replace(rc, synthetic="rotated-gaussians")
    rc.validate()
    return rc


# -------------------------------------------------------------------- outputs


def _version() -> str:
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if desc.returncode == 0 and desc.stdout.strip():
            return f"{mctl.__version__}+g{desc.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return mctl.__version__


def _threads_in_use(limit: Optional[int]) -> int:
    if limit is not None:
        return limit
    counts = [info.get("num_threads", 1) for info in threadpool_info()]
    return max(counts) if counts else 1


def write_manifest(out: Path, command: str, rc: RunConfig, threads: int) -> None:
    manifest = {
        "command": command,
        "config": rc.to_dict(),
        "seed": rc.seed,
        "seeds": rc.seed_list(),
        "version": _version(),
        "threads": threads,
        "backend": mctl.BACKEND,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_rows(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _result_row(task, variant, seed, outcome):
    return [task, variant, seed, repr(outcome.accuracy), outcome.iterations, f"{outcome.wall_ms:.1f}"]


# ------------------------------------------------------------------- commands


def _fit_variant(rc: RunConfig, cfg: MctlConfig, seed: int, sink=None):
    task = build_task(rc, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        return run_mctl(task, cfg, rc.mode, rc.ridge, sink=sink)


def cmd_run(rc: RunConfig, out: Path) -> int:
    rows, history = [], []
    name = rc.task_name()
    for i, seed in enumerate(rc.seed_list()):
        sink = (lambda it, lb: history.append((it, lb))) if i == 0 else None
        task = build_task(rc, seed)
        base = run_baseline(task, rc.mode, rc.ridge)
        res = _fit_variant(rc, rc.solver, seed, sink)
        for w in res.model.warnings:
            log.info("seed %d: %s", seed, w)
        rows.append(_result_row(name, "baseline", seed, base))
        rows.append(_result_row(name, rc.solver.variant, seed, res))
        print(f"{name} seed={seed} baseline accuracy={base.accuracy:.4f}")
        print(f"{name} seed={seed} {rc.solver.variant} accuracy={res.accuracy:.4f}")
    write_rows(out / "results.csv", RESULT_COLUMNS, rows)
    write_rows(
        out / "convergence.csv",
        ("iter",) + LossBreakdown.columns(),
        [[it] + [repr(v) for v in lb.as_tuple()] for it, lb in history],
    )
    convergence_svg([lb for _, lb in history], out / "convergence.svg", f"{name} seed={rc.seed}")
    return 0


ABLATION_VARIANTS = (("full", frozenset()),) + tuple((f"drop-{a}", frozenset({a})) for a in ABLATIONS)


def cmd_ablate(rc: RunConfig, out: Path) -> int:
    name = rc.task_name()
    acc = {v: [] for v, _ in ABLATION_VARIANTS}
    rows = []
    for seed in rc.seed_list():
        for label, drop in ABLATION_VARIANTS:
            cfg = replace(rc.solver, ablation=rc.solver.ablation | drop)
            res = _fit_variant(rc, cfg, seed)
            acc[label].append(res.accuracy)
            rows.append(_result_row(name, label, seed, res))
    write_rows(out / "results.csv", RESULT_COLUMNS, rows)
    summary = []
    for label, _ in ABLATION_VARIANTS:
        a = np.asarray(acc[label])
        summary.append([label, repr(float(a.mean())), repr(float(a.std())), a.size])
        print(f"{name} {label}: {a.mean():.4f} +/- {a.std():.4f} over {a.size} seed(s)")
    write_rows(out / "ablation.csv", ("variant", "mean_accuracy", "std_accuracy", "n_seeds"), summary)
    return 0


def cmd_compare_s(rc: RunConfig, out: Path) -> int:
    name = rc.task_name()
    rows, pairs = [], []
    for seed in rc.seed_list():
        res = {}
        for variant in (MCTL, MCTL_S):
            res[variant] = _fit_variant(rc, replace(rc.solver, variant=variant), seed)
            rows.append(_result_row(name, variant, seed, res[variant]))
        a, b = res[MCTL].accuracy, res[MCTL_S].accuracy
        pairs.append([seed, repr(a), repr(b), repr(a - b)])
        print(f"{name} seed={seed} mctl={a:.4f} mctl-s={b:.4f} gap={a - b:+.4f}")
    gaps = np.array([float(p[3]) for p in pairs])
    pairs.append(
        ["mean", repr(float(np.mean([float(p[1]) for p in pairs]))),
         repr(float(np.mean([float(p[2]) for p in pairs]))), repr(float(gaps.mean()))]
    )
    print(f"{name} mean gap (mctl - mctl-s) = {gaps.mean():+.4f}")
    write_rows(out / "results.csv", RESULT_COLUMNS, rows)
    write_rows(out / "compare_s.csv", ("seed", "mctl", "mctl_s", "gap"), pairs)
    return 0


COMMANDS = {"run": cmd_run, "ablate": cmd_ablate, "compare-s": cmd_compare_s}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        rc = resolve_config(args)
        limit = thread_count()
    except ConfigError as exc:
        print(f"mctl: error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with thread_limits(limit):
            write_manifest(out, args.command, rc, _threads_in_use(limit))
            return COMMANDS[args.command](rc, out)
    except ConfigError as exc:
        print(f"mctl: error: {exc}", file=sys.stderr)
        return 2
    except (MctlError, OSError) as exc:
        print(f"mctl: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
