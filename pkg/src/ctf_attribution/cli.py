"""Command-line entry point: ``ctf-attrib {ingest,analyze,experiment,synth}``.

Every command writes its data files plus a ``manifest.json`` into
``--out-dir``.  Diagnostics go to stderr.  Exit status is 0 on success, 2
on a usage or input error and 1 when an experiment produced no usable cell.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .classifiers import METHODS
from .deception import annotate, summarize, write_fig1_csv, write_fig2_csv, write_summary_csv
from .events import AttackEvent, load_events, read_events, save_events
from .evaluation import (
    SplitSpec, run_experiment_matrix, write_confusion_json, write_fig3_csv, write_fig4_csv,
    write_prune_report_csv, write_report_csv, write_summary_json, write_team_table_csv,
)
from .exceptions import AttributionError, EventFormatError
from .ingest import ingest_pcaps
from .pruning import parse_strategies
from .synth import SynthConfig, generate, write_truth
from .teammap import TeamMap

log = logging.getLogger("ctf_attribution")

THREADS_ENV = "CTF_ATTRIB_THREADS"


class UsageError(Exception):
    """Bad flags or unusable input; maps to exit status 2."""


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_text(path: Path, writer, *args) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        writer(*args, f)


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def write_manifest(out_dir: Path, command: str, flags: dict, inputs: list, outputs: list,
                   seed=None) -> None:
    """Record what produced ``out_dir``.  Deliberately free of wall-clock data."""
    _write_json(out_dir / "manifest.json", {
        "tool": "ctf-attribution",
        "version": __version__,
        "command": command,
        "flags": flags,
        "seed": seed,
        "inputs": [{"path": str(p), "sha256": sha256_file(p)} for p in inputs],
        "outputs": sorted(outputs),
    })


def _read_events_strict(path) -> list[AttackEvent]:
    try:
        result = load_events(path)
    except OSError as exc:
        raise UsageError(f"cannot read events file {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise UsageError(f"{path} is not UTF-8 text") from exc
    if result.errors:
        for err in result.errors[:10]:
            log.error("%s: %s", path, err)
        raise UsageError(f"{path}: {len(result.errors)} malformed event record(s)")
    return result.events


def _read_json_document(path) -> list[AttackEvent]:
    """Events from a JSON array or JSON-lines file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if text.lstrip().startswith("["):
        try:
            records = json.loads(text)
            return [AttackEvent.from_dict(r) for r in records]
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON: {exc.msg}") from exc
        except EventFormatError as exc:
            raise UsageError(f"{path}: {exc}") from exc
    result = read_events(text.split("\n"))
    if result.errors:
        for err in result.errors[:10]:
            log.error("%s: %s", path, err)
        raise UsageError(f"{path}: {len(result.errors)} malformed event record(s)")
    return result.events


def default_threads() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n == 0:
        raise UsageError(f"{THREADS_ENV} must be non-zero")
    return n


# -- commands ---------------------------------------------------------------

def cmd_ingest(args) -> int:
    out_dir = Path(args.out_dir)
    inputs = []
    if args.pcap:
        if not args.teammap:
            raise UsageError("--teammap is required with --pcap")
        try:
            teammap = TeamMap.load(args.teammap)
        except OSError as exc:
            raise UsageError(f"cannot read team map {args.teammap}: {exc}") from exc
        for p in args.pcap:
            if not Path(p).is_file():
                raise UsageError(f"no such capture: {p}")
        events, stats = ingest_pcaps(args.pcap, teammap)
        counters = stats.as_dict()
        inputs = [args.teammap, *args.pcap]
    else:
        events = sorted(_read_json_document(args.json), key=lambda e: e.time)
        counters = {"events": len(events)}
        inputs = [args.json]
        if args.teammap:
            try:
                known = set(TeamMap.load(args.teammap).teams)
            except OSError as exc:
                raise UsageError(f"cannot read team map {args.teammap}: {exc}") from exc
            unknown = {t for e in events for t in (e.from_team, e.to_team)} - known
            if unknown:
                raise UsageError(f"teams missing from the team map: {sorted(unknown)}")
            inputs.insert(0, args.teammap)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_events(events, out_dir / "events.jsonl")
    _write_json(out_dir / "ingest_stats.json", counters)
    write_manifest(out_dir, "ingest", {"pcap": args.pcap, "json": args.json,
                                       "teammap": args.teammap},
                   inputs, ["events.jsonl", "ingest_stats.json"])
    print(f"{len(events)} events written to {out_dir / 'events.jsonl'}", file=sys.stderr)
    return 0


def cmd_analyze(args) -> int:
    events = _read_events_strict(args.events)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = summarize(annotate(events))
    _write_text(out_dir / "fig1.csv", write_fig1_csv, summary)
    _write_text(out_dir / "fig2.csv", write_fig2_csv, summary)
    _write_text(out_dir / "deception_summary.csv", write_summary_csv, summary)
    tot = summary.totals()
    _write_json(out_dir / "analysis.json", {
        "events": tot.total_attacks,
        "targets": len(summary.targets),
        "unique_payloads": tot.unique_payloads,
        "unique_deceptive_payloads": tot.unique_deceptive_payloads,
        "deceptive_unique_share": tot.deceptive_unique_share,
        "deceptive_duplicate_share": tot.deceptive_duplicate_share,
    })
    write_manifest(out_dir, "analyze", {"events": args.events}, [args.events],
                   ["fig1.csv", "fig2.csv", "deception_summary.csv", "analysis.json"])
    print(f"deceptive share of unique attacks: {tot.deceptive_unique_share:.4f}", file=sys.stderr)
    print(f"deceptive duplicate share of all attacks: {tot.deceptive_duplicate_share:.4f}", file=sys.stderr)
    return 0


def _parse_methods(text: str) -> list[str]:
    methods = [m.strip().lower() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise UsageError(f"--methods must list some of {sorted(METHODS)}, got {text!r}")
    return list(dict.fromkeys(methods))


def cmd_experiment(args) -> int:
    methods = _parse_methods(args.methods)
    try:
        strategies = parse_strategies(args.prune)
    except ValueError as exc:
        raise UsageError(f"--prune: {exc}") from exc
    if not strategies:
        raise UsageError("--prune lists no strategy")
    if not 0.0 < args.train_frac < 1.0:
        raise UsageError("--train-frac must lie strictly between 0 and 1")
    if args.n_trees < 1:
        raise UsageError("--n-trees must be positive")
    if args.mtry is not None and args.mtry < 1:
        raise UsageError("--mtry must be positive")
    n_jobs = args.threads if args.threads is not None else default_threads()

    events = _read_events_strict(args.events)
    params = {"n_trees": args.n_trees, "mtry": args.mtry}
    report = run_experiment_matrix(events, methods, strategies, SplitSpec(args.train_frac),
                                   seed=args.seed, classifier_params=params, n_jobs=n_jobs)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {
        "report.csv": write_report_csv,
        "team_table.csv": write_team_table_csv,
        "fig3.csv": write_fig3_csv,
        "fig4.csv": write_fig4_csv,
        "prune_report.csv": write_prune_report_csv,
        "summary.json": write_summary_json,
        "confusion.json": write_confusion_json,
    }
    for name, writer in outputs.items():
        _write_text(out_dir / name, writer, report)
    flags = {"methods": methods, "prune": [s.label for s in strategies],
             "train_frac": args.train_frac, "n_trees": args.n_trees, "mtry": args.mtry}
    write_manifest(out_dir, "experiment", flags, [args.events], list(outputs), seed=args.seed)

    for cell in report.failed():
        log.warning("cell %s/%s/%s failed: %s", cell.target, cell.method, cell.strategy, cell.error)
    avgs = report.averages()
    for m in methods:
        row = "  ".join(f"{s}={'n/a' if v is None else f'{v:.4f}'}" for s, v in avgs[m].items())
        print(f"{m:7s} {row}", file=sys.stderr)
    if all(not c.ok for c in report.cells):
        log.error("no experiment cell succeeded")
        return 1
    return 0


def _synth_config(args) -> SynthConfig:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot load config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("synth config must be a JSON object")
    for key in ("n_teams", "events_target", "seed", "style_strength", "p_deceive"):
        value = getattr(args, key)
        if value is not None:
            cfg[key] = value
    try:
        config = SynthConfig.from_dict(cfg)
        config.validate()
    except (AttributionError, TypeError) as exc:
        raise UsageError(f"invalid synth config: {exc}") from exc
    return config


def cmd_synth(args) -> int:
    cfg = _synth_config(args)
    corpus = generate(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_events(corpus.events, out_dir / "events.jsonl")
    _write_text(out_dir / "truth.jsonl", write_truth, corpus.truth)
    _write_json(out_dir / "config.json", cfg.to_dict())
    inputs = [args.config] if args.config else []
    write_manifest(out_dir, "synth", cfg.to_dict(), inputs,
                   ["events.jsonl", "truth.jsonl", "config.json"], seed=cfg.seed)
    print(f"{len(corpus.events)} events written to {out_dir / 'events.jsonl'}", file=sys.stderr)
    return 0


# -- parser -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ctf-attrib", description="Attack attribution on capture-the-flag traffic.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="turn captures (or a JSON event dump) into an events file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--pcap", nargs="+", metavar="FILE", help="libpcap capture files")
    src.add_argument("--json", metavar="FILE", help="JSON array or JSON-lines event records")
    p.add_argument("--teammap", metavar="FILE", help="address-prefix to team map (required with --pcap)")
    p.add_argument("--out-dir", default=".", help="output directory (default: .)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="deception statistics per target team")
    p.add_argument("events", help="events file (JSON lines)")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("experiment", help="train and evaluate the method x pruning matrix")
    p.add_argument("events", help="events file (JSON lines)")
    p.add_argument("--methods", default="dt,rf,logreg,svm", help="comma list from dt,rf,logreg,svm")
    p.add_argument("--prune", default="none", help="comma list from none,p1,p2:<k>,p3,p4")
    p.add_argument("--train-frac", type=float, default=0.9, help="leading fraction used for training")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-trees", type=int, default=100, help="random forest size")
    p.add_argument("--mtry", type=int, default=None, help="features tried per split (default: sqrt)")
    p.add_argument("--threads", type=int, default=None,
                   help=f"parallel jobs across target teams (default: ${THREADS_ENV} or 1)")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground-truth roles")
    p.add_argument("--config", metavar="FILE", help="JSON object of SynthConfig fields")
    p.add_argument("--n-teams", dest="n_teams", type=int)
    p.add_argument("--events", dest="events_target", type=int, help="target number of events")
    p.add_argument("--seed", type=int)
    p.add_argument("--style-strength", dest="style_strength", type=float)
    p.add_argument("--p-deceive", dest="p_deceive", type=float)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        return args.func(args)
    except UsageError as exc:
        print(f"ctf-attrib: error: {exc}", file=sys.stderr)
        return 2
    except (AttributionError, ValueError) as exc:
        print(f"ctf-attrib: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
