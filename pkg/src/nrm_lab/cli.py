"""Command-line entry point: ``nrm-lab <command> ...``.

Exit status is 0 on success, 2 on input errors (unreadable or invalid
files, unknown names) and 3 on runtime failures.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .arrivals import dump_path_jsonl, load_path_jsonl, sample_path
from .errors import NrmError, ValidationError
from .harness import default_workers, export_csv, load_spec, run_experiment, summarize
from .lp import dlp_value, solve_dlp
from .model import is_nondegenerate, load_instance
from .oracle import hindsight_optimum
from .policies import PolicyKind, PolicySpec, run_policy

EXIT_INPUT = 2
EXIT_RUNTIME = 3


class InputError(Exception):
    pass


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{x:g}" for x in np.asarray(v).tolist()) + ")"


def _instance(path):
    if not Path(path).exists():
        raise InputError(f"instance file not found: {path}")
    return load_instance(path)


def bundled_fixtures() -> list:
    root = resources.files("nrm_lab") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_spec_path(name: str) -> Path:
    path = Path(name)
    if path.is_file():
        return path
    stem = name[:-5] if name.endswith(".json") else name
    if "/" not in name and stem in bundled_fixtures():
        return Path(str(resources.files("nrm_lab") / "fixtures" / f"{stem}.json"))
    raise InputError(f"experiment spec not found: {name} (bundled: {', '.join(bundled_fixtures())})")


def cmd_validate(args):
    inst = _instance(args.instance)
    print(f"valid: {inst!r}")


def cmd_solve_dlp(args):
    inst = _instance(args.instance)
    sol = solve_dlp(inst)
    report = is_nondegenerate(inst, sol, args.tol)
    print(f"v_dlp = {dlp_value(inst, sol):.10g}")
    print(f"x* = {_fmt_vec(sol.x_star)}")
    print(f"binding resources = {sorted(sol.binding_rows)}")
    print(f"verdict: {report.describe()}")


def cmd_run(args):
    spec = load_spec(resolve_spec_path(args.spec))
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.paths is not None:
        overrides["num_paths"] = args.paths
    if overrides:
        spec = spec.with_overrides(**overrides)
    workers = args.workers if args.workers is not None else default_workers()
    table = run_experiment(spec, workers=workers)
    if args.out:
        export_csv(table, args.out)
    else:
        export_csv(table, sys.stdout)
    n_items = len(spec.values) * spec.num_paths
    print(f"{spec.name or 'experiment'}: {len(spec.values)} sweep values x {spec.num_paths} paths "
          f"= {n_items} work items, {len(spec.policies)} policies", file=sys.stderr)
    print(summarize(table), file=sys.stderr)


def _policy(name) -> PolicySpec:
    try:
        return PolicySpec(PolicyKind.parse(name))
    except ValidationError as exc:
        raise InputError(str(exc)) from None


def cmd_simulate(args):
    inst = _instance(args.instance)
    spec = _policy(args.policy)
    path = sample_path(inst, args.seed)
    result = run_policy(spec, inst, path, trace=bool(args.trace))
    ho = hindsight_optimum(inst, path).value
    print(f"{spec.name}: revenue {result.revenue:g}, hindsight {ho:g}, regret {ho - result.revenue:g}")
    print(f"accepted {_fmt_vec(result.accepted)} of arrivals {_fmt_vec(path.counts)}")
    if args.trace:
        Path(args.trace).write_text(result.trace.to_csv())


def cmd_sample_path(args):
    inst = _instance(args.instance)
    path = sample_path(inst, args.seed)
    if args.out:
        with open(args.out, "w") as fh:
            dump_path_jsonl(path, fh)
    else:
        dump_path_jsonl(path, sys.stdout)


def cmd_replay(args):
    inst = _instance(args.instance)
    spec = _policy(args.policy)
    if not Path(args.path).exists():
        raise InputError(f"path dump not found: {args.path}")
    with open(args.path) as fh:
        path = load_path_jsonl(fh, inst.n_classes, inst.horizon, path_seed=args.seed)
    result = run_policy(spec, inst, path, trace=True)
    text = result.trace.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"{spec.name}: revenue {result.revenue:g}", file=sys.stderr)


def cmd_fixtures(args):
    for name in bundled_fixtures():
        raw = json.loads((resources.files("nrm_lab") / "fixtures" / f"{name}.json").read_text())
        print(f"{name:8} {raw.get('description', '')}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nrm-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate an instance JSON file")
    p.add_argument("instance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve-dlp", help="solve the deterministic LP and classify degeneracy")
    p.add_argument("instance")
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_solve_dlp)

    p = sub.add_parser("run", help="run an experiment spec (file or bundled fixture name) and write CSV")
    p.add_argument("spec")
    p.add_argument("--out", help="CSV destination (default: stdout)")
    p.add_argument("--workers", type=int, help="worker processes (default: $NRM_LAB_WORKERS or 1)")
    p.add_argument("--seed", type=int, help="override the spec's base seed")
    p.add_argument("--paths", type=int, help="override the number of sample paths")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="run one policy on one sampled path")
    p.add_argument("instance")
    p.add_argument("policy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write the per-event trace CSV here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sample-path", help="dump a sampled arrival path as JSON lines")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample_path)

    p = sub.add_parser("replay", help="replay a policy on a dumped path and emit its event trace")
    p.add_argument("instance")
    p.add_argument("path")
    p.add_argument("policy")
    p.add_argument("--seed", type=int, default=0, help="path seed keying the thinning stream")
    p.add_argument("--out")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("fixtures", help="list bundled experiment specs")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (InputError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NrmError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
