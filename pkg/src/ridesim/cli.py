"""Batch command-line entry point: run experiments, size fleets, report.

Subcommands:
  run        --config F --seeds N --out DIR --jobs K
  base-fleet --data F --region R --from T --to T [--date D]
  report     --dir DIR

Config files are INI-style with [workload], [fleet], [algorithms], [params]
and [hst] sections; every simulation constant has its default baked in.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import statistics
import sys
from dataclasses import dataclass
from datetime import date, datetime
from multiprocessing import Pool
from pathlib import Path

from . import engine, hst, ingest
from .metrics import MetricsReport
from .model import GeoPoint, SimParams


class ConfigError(Exception):
    pass


@dataclass
class RunManifest:
    config_path: Path
    seeds: list[int]
    out_dir: Path
    jobs: int = 1

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("at least one seed required")


_KNOWN_KEYS = {
    "workload": {"kind", "duration_min", "rate_per_min", "region", "centers",
                 "sigma_m", "shift_every_min", "dest_centers", "warmup_min",
                 "history_days", "path", "date", "from", "to"},
    "fleet": {"multiplier", "count"},
    "algorithms": {"pair", "dispatch", "relocate", "alma_max_rounds",
                   "wfa_window"},
    "params": {"w_min", "w_max", "q", "speed_mps", "beta_usd",
               "pi_single_usd_per_km", "pi_shared_usd_per_km",
               "cost_usd_per_km", "commission", "batch_minutes",
               "reloc_days", "reloc_minutes", "rng_seed"},
    "hst": {"sigma", "street_graph", "grid_nx", "grid_ny"},
}


def read_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown config key [{section}] {key}")
    return parser


def _parse_region(text: str) -> ingest.Region:
    text = text.strip()
    if "," in text:
        vals = [float(x) for x in text.split(",")]
        if len(vals) != 4:
            raise ConfigError("region box needs min_lat,max_lat,min_lon,max_lon")
        return ingest.Region([ingest.BoundingBox(*vals)])
    return ingest.Region.named(text)


def _parse_points(text: str) -> list[GeoPoint]:
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            lat, lon = chunk.split(",")
            pts.append(GeoPoint(float(lat), float(lon)))
    return pts


def build_scenario(parser: configparser.ConfigParser, seed: int) -> engine.ScenarioConfig:
    """Realize workload, history and algorithm choices for one seed."""
    params_kwargs = {}
    if parser.has_section("params"):
        for key, value in parser["params"].items():
            if key == "batch_minutes":
                params_kwargs[key] = value if value == "jit" else int(value)
            elif key in ("w_min", "w_max", "reloc_days", "reloc_minutes",
                         "rng_seed"):
                params_kwargs[key] = int(value)
            else:
                params_kwargs[key] = float(value)
    params_kwargs["rng_seed"] = seed
    params = SimParams(**params_kwargs)

    wl = parser["workload"] if parser.has_section("workload") else {}
    kind = wl.get("kind", "synthetic")
    history = None
    if kind == "synthetic":
        region = _parse_region(wl.get("region", "manhattan"))
        box = region.envelope()
        centers = _parse_points(wl.get("centers", "")) or [box.center()]
        spec = ingest.WorkloadSpec(
            duration_min=int(wl.get("duration_min", 60)),
            rate_per_min=float(wl.get("rate_per_min", 2.0)),
            region=box,
            centers=centers,
            sigma_m=float(wl.get("sigma_m", 250.0)),
            shift_every_min=int(wl.get("shift_every_min", 0)),
            dest_centers=_parse_points(wl.get("dest_centers", "")),
        )
        requests = ingest.synth_generate(spec, seed=seed)
        warmup_min = int(wl.get("warmup_min", 120))
        warm_spec = ingest.WorkloadSpec(
            duration_min=warmup_min, rate_per_min=spec.rate_per_min,
            region=box, centers=centers, sigma_m=spec.sigma_m,
            shift_every_min=spec.shift_every_min,
            dest_centers=spec.dest_centers,
            start_minute=-warmup_min)
        warmup = ingest.synth_generate(warm_spec, seed=seed + 7_001)
        history_days = int(wl.get("history_days", params.reloc_days))
        if history_days > 0:
            history = ingest.HistoryStore(sim_day=0)
            day_spec = ingest.WorkloadSpec(
                duration_min=spec.duration_min, rate_per_min=spec.rate_per_min,
                region=box, centers=centers, sigma_m=spec.sigma_m,
                shift_every_min=spec.shift_every_min,
                dest_centers=spec.dest_centers)
            for day in range(-history_days, 0):
                history.add_day(day, ingest.synth_generate(
                    day_spec, seed=seed + 13_001 + day))
        span_end = spec.duration_min
    elif kind == "tlc":
        region = _parse_region(wl.get("region", "manhattan"))
        day = date.fromisoformat(wl["date"])
        trips, _ = ingest.load_trips(wl["path"], region=None,
                                     day_range=(day, day))
        epoch = datetime(day.year, day.month, day.day)
        cleaned = ingest.clean(trips, region, params, epoch=epoch)
        t_from = _parse_minute(wl.get("from", "00:00"))
        t_to = _parse_minute(wl.get("to", "24:00"))
        requests = [r for r in cleaned if t_from <= r.t_open < t_to]
        warmup = [r for r in cleaned if r.t_open < t_from]
        span_end = t_to
    else:
        raise ConfigError(f"unknown workload kind {kind!r}")

    fleet = parser["fleet"] if parser.has_section("fleet") else {}
    algos = parser["algorithms"] if parser.has_section("algorithms") else {}
    hst_sec = parser["hst"] if parser.has_section("hst") else {}
    street = None
    if "street_graph" in hst_sec:
        street = hst.load_street_graph(hst_sec["street_graph"])
    reloc = algos.get("relocate", "none")
    return engine.ScenarioConfig(
        requests=requests,
        algo_pair=algos.get("pair", "mwm"),
        algo_dispatch=algos.get("dispatch", "mwm"),
        algo_reloc=None if reloc in ("none", "") else reloc,
        params=params,
        fleet_multiplier=float(fleet.get("multiplier", 1.0)),
        fleet_count=int(fleet["count"]) if "count" in fleet else None,
        warmup=warmup,
        history=history,
        street_graph=street,
        hst_sigma=float(hst_sec.get("sigma", 4.0)),
        wfa_window=int(algos.get("wfa_window", 8)),
        alma_max_rounds=int(algos.get("alma_max_rounds", 50)),
        span_end=span_end,
    )


def _parse_minute(text: str) -> int:
    hours, minutes = text.strip().split(":")
    return int(hours) * 60 + int(minutes)


def _run_one(arg: tuple) -> tuple[int, list]:
    config_path, seed, out_dir = arg
    parser = read_config(config_path)
    scenario = build_scenario(parser, seed)
    log, report = engine.run(scenario)
    run_dir = Path(out_dir) / f"run_{seed:04d}"
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "report.json").write_text(report.to_json())
    with open(run_dir / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("seed",) + MetricsReport.CSV_COLUMNS)
        writer.writerow([seed] + report.csv_row())
    log.write(run_dir / "events.log")
    return seed, report.csv_row()


def cmd_run(manifest: RunManifest) -> int:
    read_config(manifest.config_path)  # validate before spawning workers
    manifest.out_dir.mkdir(parents=True, exist_ok=True)
    args = [(str(manifest.config_path), seed, str(manifest.out_dir))
            for seed in manifest.seeds]
    if manifest.jobs > 1:
        with Pool(manifest.jobs) as pool:
            results = pool.map(_run_one, args)
    else:
        results = [_run_one(a) for a in args]
    results.sort()
    rows = [row for _, row in results]
    _write_summary(manifest.out_dir, [s for s, _ in results], rows)
    return 0


def _write_summary(out_dir: Path, seeds: list[int], rows: list[list]) -> None:
    cols = MetricsReport.CSV_COLUMNS
    means, sds = [], []
    for k in range(len(cols)):
        values = [float(r[k]) for r in rows]
        mean = statistics.fmean(values)
        sd = statistics.pstdev(values) if len(values) > 1 else 0.0
        means.append(mean)
        sds.append(sd)
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("stat",) + cols)
        writer.writerow(["mean"] + means)
        writer.writerow(["sd"] + sds)
    payload = {"seeds": seeds,
               "mean": dict(zip(cols, means)),
               "sd": dict(zip(cols, sds))}
    (out_dir / "summary.json").write_text(json.dumps(payload, indent=2))


def cmd_base_fleet(data: Path, region_name: str, t_from: str, t_to: str,
                   day: str | None) -> int:
    region = _parse_region(region_name)
    day_range = None
    epoch = None
    if day:
        d = date.fromisoformat(day)
        day_range = (d, d)
        epoch = datetime(d.year, d.month, d.day)
    trips, skipped = ingest.load_trips(data, region=None, day_range=day_range)
    params = SimParams()
    requests = ingest.clean(trips, region, params, epoch=epoch)
    lo, hi = _parse_minute(t_from), _parse_minute(t_to)
    window = [r for r in requests if lo <= r.t_open < hi]
    base = engine.compute_base_fleet(window, params)
    print(f"requests={len(window)} skipped_rows={skipped}")
    print(f"base_fleet={base}")
    for mult in (0.5, 0.75, 1.0, 2.0, 3.0):
        print(f"x{mult:<4} {round(base * mult)}")
    return 0


def cmd_report(run_dir: Path) -> int:
    entries = []
    for child in sorted(run_dir.iterdir()):
        summary = child / "summary.json"
        if child.is_dir() and summary.exists():
            entries.append((child.name, json.loads(summary.read_text())))
    if not entries and (run_dir / "summary.json").exists():
        entries.append((run_dir.name, json.loads((run_dir / "summary.json").read_text())))
    if not entries:
        print(f"no run summaries found under {run_dir}", file=sys.stderr)
        return 1
    cols = [c for c in MetricsReport.CSV_COLUMNS if c != "n_requests"]
    base_name, base = entries[0]
    with open(run_dir / "comparison.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["experiment"] + cols)
        for name, data in entries:
            row = [name]
            for col in cols:
                value = data["mean"][col]
                ref = base["mean"][col]
                rel = 0.0 if ref == 0 else (value - ref) / ref * 100.0
                row.append(f"{rel:+.2f}%")
            writer.writerow(row)
    _plot_report(run_dir, entries, cols)
    print(f"wrote {run_dir / 'comparison.csv'}")
    return 0


def _plot_report(run_dir: Path, entries, cols) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plot_cols = ["distance_driven_m", "time_to_pickup_s", "delay_s",
                 "cumulative_delay_s", "frictions_s", "driver_profit_mean_usd"]
    names = [name for name, _ in entries]
    fig, axes = plt.subplots(2, 3, figsize=(15, 8))
    for ax, col in zip(axes.flat, plot_cols):
        values = [data["mean"].get(col, 0.0) for _, data in entries]
        errors = [data["sd"].get(col, 0.0) for _, data in entries]
        ax.bar(range(len(names)), values, yerr=errors, capsize=3)
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
        ax.set_title(col)
    fig.tight_layout()
    fig.savefig(run_dir / "metrics.png", dpi=120)
    plt.close(fig)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ridesim",
                                     description="ridesharing fleet simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute seeded simulation runs")
    p_run.add_argument("--config", required=True, type=Path)
    p_run.add_argument("--seeds", required=True, type=int,
                       help="number of seeded runs (seeds 0..N-1 offset by rng_seed)")
    p_run.add_argument("--out", required=True, type=Path)
    p_run.add_argument("--jobs", type=int, default=1)

    p_base = sub.add_parser("base-fleet", help="minimum fleet for a workload")
    p_base.add_argument("--data", required=True, type=Path)
    p_base.add_argument("--region", default="manhattan")
    p_base.add_argument("--from", dest="t_from", default="00:00")
    p_base.add_argument("--to", dest="t_to", default="24:00")
    p_base.add_argument("--date", default=None)

    p_rep = sub.add_parser("report", help="comparison tables and plots")
    p_rep.add_argument("--dir", required=True, type=Path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            parser = read_config(args.config)
            base_seed = 0
            if parser.has_section("params") and "rng_seed" in parser["params"]:
                base_seed = int(parser["params"]["rng_seed"])
            manifest = RunManifest(args.config,
                                   [base_seed + k for k in range(args.seeds)],
                                   args.out, args.jobs)
            return cmd_run(manifest)
        if args.command == "base-fleet":
            return cmd_base_fleet(args.data, args.region, args.t_from,
                                  args.t_to, args.date)
        if args.command == "report":
            return cmd_report(args.dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # any failed run must exit nonzero
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
