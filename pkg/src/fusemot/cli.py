"""Command-line surface: simulate / track / evaluate / compare / plot.

All file outputs are deterministic for a given scenario and seed (sorted
JSON keys, no timestamps), so re-running a command reproduces its output
byte for byte.

Exit codes: 0 success, 1 bad input, 2 internal numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import metrics, sim
from .core import ObjectClass, TrackerConfig

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_NUMERIC = 2


class BadInput(Exception):
    pass


def _dump_json(obj, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dump_jsonl(records, path: Path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True))
            fh.write("\n")


def _load_jsonl(path: Path) -> list[dict]:
    records = []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInput(f"cannot read JSONL file {path}: {exc}") from exc
    return records


def config_to_dict(cfg: TrackerConfig) -> dict:
    return {
        "Ts": cfg.Ts,
        "tau_G_lidar": cfg.tau_G_lidar,
        "tau_G_cam": {k.value: v for k, v in cfg.tau_G_cam.items()},
        "tau_G_fuse": {k.value: v for k, v in cfg.tau_G_fuse.items()},
        "Q": cfg.Q.tolist(),
        "R_lidar": cfg.R_lidar.tolist(),
        "R_cam": cfg.R_cam.tolist(),
        "R_group": cfg.R_group.tolist(),
        "Mc": cfg.Mc,
        "Nc": cfg.Nc,
        "Me": cfg.Me,
        "Ne": cfg.Ne,
        "P0": cfg.P0.tolist(),
    }


def config_from_dict(d: dict) -> TrackerConfig:
    kwargs = dict(d)
    for key in ("tau_G_cam", "tau_G_fuse"):
        if key in kwargs:
            kwargs[key] = {ObjectClass.from_string(k): v for k, v in kwargs[key].items()}
    for key in ("Q", "R_lidar", "R_cam", "R_group", "P0"):
        if key in kwargs:
            kwargs[key] = np.array(kwargs[key], dtype=float)
    try:
        return TrackerConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise BadInput(f"invalid tracker config: {exc}") from exc


def _load_config(path: str | None) -> TrackerConfig:
    if path is None:
        return TrackerConfig()
    try:
        with open(path) as fh:
            return config_from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInput(f"cannot read config file {path}: {exc}") from exc


def _load_scenario(path: str) -> sim.Scenario:
    try:
        return sim.load_scenario(path)
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        raise BadInput(f"cannot read scenario file {path}: {exc}") from exc


def cmd_simulate(args) -> int:
    scenario = _load_scenario(args.scenario)
    _dump_jsonl(sim.simulate(scenario), Path(args.out))
    return EXIT_OK


def cmd_track(args) -> int:
    records = _load_jsonl(Path(args.input))
    config = _load_config(args.config)
    log = metrics.run_tracker(records, config, modality=args.modality)
    _dump_jsonl(log, Path(args.out))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    tracks = _load_jsonl(Path(args.tracks))
    truth = _load_jsonl(Path(args.truth))
    report = metrics.compute_errors(tracks, truth)
    _dump_json(
        {"report": report.to_dict(), "by_class": report.by_class(), "overall": report.overall()},
        Path(args.out),
    )
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = _load_scenario(args.scenario)
    config = _load_config(args.config)
    per_seed = []
    for k in range(args.seeds):
        sc = sim.Scenario(**{**scenario.__dict__, "seed": scenario.seed + k})
        per_seed.append(metrics.run_modality_comparison(sc, config).to_dict())
    means = {
        m: {
            series: {
                stat: float(
                    np.mean([s["overall"][m][series][stat] for s in per_seed])
                )
                for stat in ("rmse", "mae", "maae")
            }
            for series in ("pos", "psi_deg", "v", "omega_degs")
        }
        for m in metrics.MODALITIES
    }
    _dump_json(
        {
            "n_seeds": args.seeds,
            "base_seed": scenario.seed,
            "metadata": {"single_modality_init_fallback": True},
            "mean_overall": means,
            "per_seed": per_seed,
        },
        Path(args.out),
    )
    return EXIT_OK


def cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    try:
        with open(args.report) as fh:
            report = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInput(f"cannot read report file {args.report}: {exc}") from exc
    if "tracks" not in report or "truth" not in report:
        raise BadInput("plot expects a report with 'tracks' and 'truth' JSONL paths")
    tracks = _load_jsonl(Path(report["tracks"]))
    truth = _load_jsonl(Path(report["truth"]))
    series = metrics.error_time_series(tracks, truth)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    labels = [("pos", "position error [m]"), ("psi_deg", "heading error [deg]"),
              ("v", "speed error [m/s]"), ("omega_degs", "yaw-rate error [deg/s]")]
    for aid, rec in sorted(series.items()):
        csv_path = outdir / f"agent_{aid}_errors.csv"
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "pos", "psi_deg", "v", "omega_degs"])
            for row in zip(rec["t"], rec["pos"], rec["psi_deg"], rec["v"], rec["omega_degs"]):
                w.writerow(row)
        fig, axes = plt.subplots(4, 1, figsize=(8, 10), sharex=True)
        for ax, (key, ylabel) in zip(axes, labels):
            ax.plot(rec["t"], rec[key], linewidth=0.8)
            ax.set_ylabel(ylabel)
            ax.grid(True, alpha=0.3)
        axes[-1].set_xlabel("t [s]")
        axes[0].set_title(f"agent {aid} ({rec['class']})")
        fig.savefig(outdir / f"agent_{aid}_errors.svg")
        plt.close(fig)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fusemot", description=__doc__)
    p.add_argument(
        "--print-default-config",
        action="store_true",
        help="print the default tracker configuration as JSON and exit",
    )
    sub = p.add_subparsers(dest="command")

    ps = sub.add_parser("simulate", help="generate a measurement/truth log from a scenario")
    ps.add_argument("--scenario", required=True)
    ps.add_argument("--out", required=True)
    ps.set_defaults(func=cmd_simulate)

    pt = sub.add_parser("track", help="run the tracker on a measurement log")
    pt.add_argument("--input", required=True)
    pt.add_argument("--config", default=None)
    pt.add_argument("--modality", choices=["camera", "lidar", "fusion"], default="fusion")
    pt.add_argument("--out", required=True)
    pt.set_defaults(func=cmd_track)

    pe = sub.add_parser("evaluate", help="score a track log against truth")
    pe.add_argument("--tracks", required=True)
    pe.add_argument("--truth", required=True)
    pe.add_argument("--out", required=True)
    pe.set_defaults(func=cmd_evaluate)

    pc = sub.add_parser("compare", help="camera-only vs lidar-only vs fusion over seeds")
    pc.add_argument("--scenario", required=True)
    pc.add_argument("--config", default=None)
    pc.add_argument("--seeds", type=int, default=10)
    pc.add_argument("--out", required=True)
    pc.set_defaults(func=cmd_compare)

    pp = sub.add_parser("plot", help="per-agent CSV error series and SVG charts")
    pp.add_argument("--report", required=True,
                    help="JSON file with 'tracks' and 'truth' JSONL paths")
    pp.add_argument("--out", required=True)
    pp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_default_config:
        json.dump(config_to_dict(TrackerConfig()), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_BAD_INPUT
    try:
        return args.func(args)
    except BadInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
