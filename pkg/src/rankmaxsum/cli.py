"""Command-line entry point: ``rankmaxsum test`` and ``rankmaxsum simulate``.

Exit codes: 0 success, 1 operational error, 64 usage error. Rejection of
the null is reported in the output, never in the exit status.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import Campaign, ConfigError, load_campaign
from .io import ParseError, load_dataset
from .mc import (
    RejectionTable,
    default_workers,
    evaluate_methods,
    replicate_streams,
    run_independence_diag,
    run_power,
    run_size,
)
from .model import ALL_METHODS, Method, RankMaxSumError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 64

log = logging.getLogger("rankmaxsum")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _methods(text: str) -> tuple[Method, ...]:
    try:
        return tuple(Method(m.strip().upper()) for m in text.split(",") if m.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _alpha(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rankmaxsum", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="run global tests on a dataset")
    t.add_argument("design", help="delimited text file, one observation per row")
    g = t.add_mutually_exclusive_group(required=True)
    g.add_argument("--response", help="single-column response file")
    g.add_argument("--response-column", help="response column of the design file (name or 0-based index)")
    t.add_argument("--header", action="store_true", help="input files start with a header row")
    t.add_argument("--delimiter", choices=[",", "tab"], default=None,
                   help="field delimiter (default: sniffed from the first line)")
    t.add_argument("--methods", type=_methods, default=ALL_METHODS,
                   help="comma-separated subset of MAX,EB,COM,RS,RM1,RM2,RC1,RC2 (default: all)")
    t.add_argument("--alpha", type=_alpha, default=0.05)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--bootstrap-B", type=int, default=2000)
    t.add_argument("--perm-B", type=int, default=2000)
    t.add_argument("--max-calibration", choices=["multiplier", "gumbel"], default="multiplier")
    t.add_argument("--out", help="write JSON lines here instead of stdout")

    s = sub.add_parser("simulate", help="run a Monte Carlo campaign from a config file")
    s.add_argument("config", help="flat key = value config (see rankmaxsum.config)")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--seed", type=int, default=None, help="overrides experiment.seed")
    s.add_argument("--workers", type=int, default=None, help="worker processes (default: logical cores)")
    return parser


def _with_combinations(methods: tuple[Method, ...]) -> tuple[Method, ...]:
    out = list(methods)
    if Method.RS in out and Method.RM1 in out and Method.RC1 not in out:
        out.append(Method.RC1)
    if Method.RS in out and Method.RM2 in out and Method.RC2 not in out:
        out.append(Method.RC2)
    return tuple(out)


def cmd_test(args) -> int:
    delimiter = "\t" if args.delimiter == "tab" else args.delimiter
    dataset = load_dataset(args.design, response_path=args.response,
                           response_column=args.response_column,
                           header=args.header, delimiter=delimiter)
    methods = _with_combinations(tuple(args.methods))
    streams = replicate_streams(args.seed, (0,))
    reports = evaluate_methods(dataset, methods, streams, bootstrap_B=args.bootstrap_B,
                               perm_B=args.perm_B, max_calibration=args.max_calibration)
    lines = []
    for m in methods:
        rec = reports[m].to_record()
        rec["alpha"] = args.alpha
        rec["reject"] = reports[m].pvalue < args.alpha
        lines.append(json.dumps(rec, sort_keys=True))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    width = max(len(m.value) for m in methods)
    for m in methods:
        r = reports[m]
        flag = "reject" if r.pvalue < args.alpha else "-"
        print(f"{m.value:<{width}}  stat={r.statistic:>12.6g}  p={r.pvalue:.6g}  "
              f"[{r.calibration.value}]  {flag}", file=sys.stderr)
    return EXIT_OK


def _write_jsonl(path: Path, records) -> None:
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in records))


def run_campaign(campaign: Campaign, workers: int | None) -> tuple[list[dict], str]:
    records: list[dict] = []
    texts: list[str] = []
    if campaign.kind == "independence":
        for i, cfg in enumerate(campaign.cells):
            diag = run_independence_diag(cfg, workers=workers, cell=i)
            cell = {"n": cfg.n, "p": cfg.p, "rho": cfg.covariance.rho, "error": cfg.error.kind.value}
            for rec in diag.to_records():
                records.append({**cell, **rec})
            texts.append(
                f"n={cfg.n} p={cfg.p} error={cfg.error.kind.value}: RS rejection "
                f"{100 * diag.rs_rejection:.1f}%"
                + "".join(f"; {k}: corr={v.correlation:+.3f} joint10%={100 * v.joint_frequency:.2f}%"
                          for k, v in sorted(diag.pairs.items()))
            )
        return records, "\n".join(texts) + "\n"
    table = RejectionTable(campaign.kind)
    for i, cfg in enumerate(campaign.cells):
        if campaign.kind == "size":
            part = run_size(cfg, workers=workers, cell=i)
        else:
            part = run_power(cfg, grid=campaign.grid, workers=workers, cell=i)
        table.rows.extend(part.rows)
    return table.to_records(), table.format_text()


def cmd_simulate(args) -> int:
    campaign = load_campaign(args.config, seed=args.seed)
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise UsageError("--workers must be >= 1")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    records, text = run_campaign(campaign, workers)
    jsonl = out_dir / f"{campaign.kind}.jsonl"
    txt = out_dir / f"{campaign.kind}.txt"
    _write_jsonl(jsonl, records)
    txt.write_text(text)
    manifest = {
        "command": "simulate",
        "config": campaign.settings,
        "seed": int(campaign.settings["experiment.seed"]),
        "version": __version__,
        "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "duration_seconds": round(time.time() - started, 3),
        "outputs": [jsonl.name, txt.name],
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "test":
            return cmd_test(args)
        return cmd_simulate(args)
    except UsageError as exc:
        print(f"rankmaxsum: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ConfigError, RankMaxSumError) as exc:
        print(f"rankmaxsum: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
