"""Command-line front door: generate worlds, run conditions, print reports, sweep.

Exit codes: 0 success, 1 usage or config error, 2 data error.
"""

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from .. import __version__
from ..core.records import RecordFormatError, dump_jsonl
from ..metrics.tables import METRICS, build_tables, read_tables, write_tables
from ..pipeline.recommender import Condition, UnknownConditionError
from ..sim.runner import run_experiment
from ..sim.scenario import DEFAULT_SCENARIO, ScenarioConfig, ScenarioConfigError, scenario_from
from ..sim.world import file_digest, generate_world, load_world, save_world
from .param_utils import sweep

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class RunDataError(Exception):
    pass


@dataclass
class RunManifest:
    run_id: str
    config_hash: str
    seed: int
    version: str = __version__
    started: str = ""
    finished: str = ""
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)

    def write(self, path: Path) -> None:
        path.write_text(
            json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _run_id(*parts: str) -> str:
    return hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()[:12]


def _parse_ks(text: str) -> tuple[int, ...]:
    try:
        ks = tuple(int(k) for k in text.split(",") if k.strip())
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"--k expects integers like 1,3,5: {err}")
    if not ks or min(ks) < 1:
        raise argparse.ArgumentTypeError("--k values must be >= 1")
    return ks


def _parse_conditions(text: str) -> tuple[Condition, ...]:
    try:
        return tuple(Condition.parse(c.strip()) for c in text.split(",") if c.strip())
    except UnknownConditionError as err:
        raise argparse.ArgumentTypeError(str(err))


def _load_world(path: str):
    if not Path(path).is_file():
        raise RunDataError(f"world snapshot {path} not found")
    try:
        return load_world(path)
    except (RecordFormatError, ValueError) as err:
        raise RunDataError(f"world snapshot {path} is corrupt: {err}") from err


def cmd_generate(args: argparse.Namespace) -> int:
    started = _now()
    cfg = scenario_from(args.config, seed=args.seed)
    world = generate_world(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    digest = save_world(world, out)
    manifest = RunManifest(
        run_id=_run_id(cfg.digest(), digest),
        config_hash=cfg.digest(),
        seed=cfg.world.seed,
        started=started,
        finished=_now(),
        inputs={"config": str(args.config)},
        outputs=[str(out)],
    )
    manifest.write(out.with_name(out.name + ".manifest.json"))
    print(f"{out} sha256={digest} users={len(world.observed.profiles)}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    started = _now()
    world = _load_world(args.world)
    cfg = world.config
    if args.config:
        # the world section stays with the snapshot; everything else may change
        loaded = ScenarioConfig.load(args.config)
        cfg = dataclasses.replace(loaded, world=cfg.world, categories=cfg.categories)
    if args.click_model:
        cfg = cfg.with_override("clicks.model", args.click_model)
    if args.k:
        cfg = cfg.with_override("experiment.top_n", max(cfg.experiment.top_n, *args.k))
        cfg = cfg.with_override("experiment.ks", list(args.k))
    if args.workers:
        cfg = cfg.with_override("experiment.workers", args.workers)
    world = dataclasses.replace(world, config=cfg)
    conditions = args.conditions or cfg.conditions
    ks = cfg.experiment.ks

    runs = run_experiment(world, conditions, cfg.experiment.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []

    interactions = [e for run in runs.values() for e in run.interactions]
    dump_jsonl(interactions, out / "interactions.jsonl")
    ranked = [slate.ranked for run in runs.values() for slate in run.slates]
    dump_jsonl(ranked, out / "ranked_lists.jsonl")
    outputs += ["interactions.jsonl", "ranked_lists.jsonl"]

    # every condition gets a column; those not run render as gaps
    tables = build_tables(runs, world, list(Condition), ks)
    written = write_tables(tables, out, text=args.format == "text")
    outputs += [p.name for p in written]

    summary = {
        "conditions": [c.value for c in runs],
        "ks": list(ks),
        "click_model": cfg.clicks.model,
        "exploration_share": {c.value: round(r.exploration_share(), 6) for c, r in runs.items()},
        "exploration_weight": {c.value: round(r.mean_explore_weight(), 6) for c, r in runs.items()},
        "slates": {c.value: len(r.slates) for c, r in runs.items()},
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    outputs.append("summary.json")

    world_hash = file_digest(args.world)
    RunManifest(
        run_id=_run_id(cfg.digest(), world_hash, ",".join(summary["conditions"])),
        config_hash=cfg.digest(),
        seed=cfg.world.seed,
        started=started,
        finished=_now(),
        inputs={"world": str(args.world), "world_sha256": world_hash},
        outputs=sorted(outputs),
    ).write(out / "manifest.json")

    if args.format == "text":
        for name in sorted(tables):
            print(tables[name].render())
    log.info("Run written to %s", out)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    expected = [f"{m}@<k>.csv" for m in METRICS]
    if not run_dir.is_dir():
        raise RunDataError(f"run directory {run_dir} not found; expected {', '.join(expected)}")
    try:
        tables = read_tables(run_dir)
    except (ValueError, KeyError) as err:
        raise RunDataError(f"corrupt metric file in {run_dir}: {err}") from err
    if not tables:
        raise RunDataError(f"no metric tables in {run_dir}; expected {', '.join(expected)}")
    order = sorted(tables, key=lambda n: (METRICS.index(tables[n].metric), tables[n].k))
    for name in order:
        print(tables[name].render())
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    world = _load_world(args.world)
    frame = sweep(world, args.condition, args.param, args.final, args.steps)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    frame.to_csv(path, index=False, float_format="%.6f", na_rep="--", lineterminator="\n")
    print(f"{path} rows={len(frame)}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kycrec", description="KYC-tiered recommendation experiment harness")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="generate a world snapshot")
    gen.add_argument("--config", default=DEFAULT_SCENARIO, help="scenario YAML path or package:resource")
    gen.add_argument("--seed", type=int, default=None, help="override world.seed")
    gen.add_argument("--out", required=True, help="world snapshot (JSONL) to write")
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", help="run conditions on a world and write metric tables")
    run.add_argument("--world", required=True, help="world snapshot to read")
    run.add_argument("--config", default=None, help="scenario overriding the pipeline sections")
    run.add_argument("--conditions", type=_parse_conditions, default=None, help="comma separated, e.g. Baseline,NoKyc")
    run.add_argument("--k", type=_parse_ks, default=None, help="cutoffs, e.g. 1,3,5")
    run.add_argument("--click-model", choices=["deterministic", "bernoulli"], default=None)
    run.add_argument("--workers", type=int, default=None, help="conditions run concurrently")
    run.add_argument("--out", required=True, help="run directory")
    run.add_argument("--format", choices=["csv", "text"], default="csv")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="print the metric tables of a run")
    rep.add_argument("--run", required=True, help="run directory")
    rep.set_defaults(func=cmd_report)

    swp = sub.add_parser("sweep", help="ramp one parameter and rerun a condition")
    swp.add_argument("--world", required=True)
    swp.add_argument("--condition", required=True)
    swp.add_argument("--param", required=True, help="dotted config field, e.g. ranking.w_explore")
    swp.add_argument("--final", type=float, required=True)
    swp.add_argument("--steps", type=int, default=5)
    swp.add_argument("--out", required=True)
    swp.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ScenarioConfigError, UnknownConditionError) as err:
        log.error("%s", err)
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (RunDataError, RecordFormatError, FileNotFoundError) as err:
        log.error("%s", err)
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA


def start_harness_cli():
    sys.exit(main())
