"""Command line entry point: one subcommand per experiment.

Every run writes its outputs plus ``<command>.manifest.json`` holding the
fully resolved configuration; ``ambrosia replay MANIFEST`` reproduces the
outputs byte for byte. Outputs are written only after every computation
succeeded, so a failed run leaves no partial files.

Exit codes: 0 success, 1 invalid input or arguments, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .anomaly import ForestConfig, compare_peaks, score_stream, scores_csv
from .applications import displacement_csv, displacement_impact
from .datasets import PINNED, SPIKED_THRESHOLD
from .energy import PROFILES, TrafficModel, fraction_lifetime, get_profile, lifetime
from .errors import AmbrosiaError, ValidationError
from .forecast import ArForecaster, WindowForecaster, measure_throughput
from .metrics import compute_metrics, rows_to_csv, rows_to_json, sweep
from .protocol import FORECASTERS, ProtocolConfig, frame_stream, run_session
from .timeseries import TimeSeries, generate, load_csv, parse_gen

log = logging.getLogger("ambrosia")

OUT_ENV = "AMBROSIA_OUT"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# ---------------------------------------------------------------- inputs

def _add_input(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--input", help="CSV with a header row; columns timestamp,value or index,value")
    g.add_argument(
        "--gen",
        help="synthetic stream KIND:LENGTH[,key=value...], KIND in constant, linear, sinusoid, "
        "ar1, random_walk; keys: noise_std, seed, value, slope, intercept, amplitude, period, "
        "phase, phi, sample_period, spike=INDEX@MAGNITUDE (repeatable)",
    )
    g.add_argument("--pinned", choices=sorted(PINNED), help="one of the pinned regression datasets")
    p.add_argument("--value-column", default="value", help="CSV column holding the readings")


def _load(args) -> tuple[TimeSeries, str]:
    if args.input:
        series = load_csv(args.input, args.value_column)
        digest = hashlib.sha256(Path(args.input).read_bytes()).hexdigest()
        return series, f"sha256:{digest}"
    spec = parse_gen(args.gen) if args.gen else PINNED[args.pinned]
    desc = json.dumps(asdict(spec), sort_keys=True)
    return generate(spec), "spec-sha256:" + hashlib.sha256(desc.encode()).hexdigest()


def _add_protocol(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("forecaster")
    g.add_argument("--forecaster", choices=FORECASTERS, default="window",
                   help="window: next = last + (last - value w steps back)/w; "
                   "arima: AR(p) on first differences, q = 0 (default: window)")
    g.add_argument("--window", type=int, default=5,
                   help="window size w; the first w+1 samples are always sent (default: 5)")
    g.add_argument("--ar-order", type=int, default=3, help="AR order p of the arima forecaster (default: 3)")
    g.add_argument("--fit-window", type=int, default=50,
                   help="leading samples used to fit arima coefficients; always sent (default: 50)")
    g.add_argument("--refit-every", type=int, default=None,
                   help="refit arima on the trailing fit window every N samples (default: never)")


def _config(args, delta: float, forecaster: str | None = None) -> ProtocolConfig:
    return ProtocolConfig(
        w=args.window, delta=delta, forecaster=forecaster or args.forecaster,
        ar_order=args.ar_order, fit_window=args.fit_window, refit_every=args.refit_every,
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- commands

def cmd_simulate(args) -> dict[str, str]:
    series, digest = _load(args)
    cfg = _config(args, args.delta)
    session = run_session(series, cfg)
    m = compute_metrics(session, cfg.delta)
    framed = frame_stream(session)
    metrics = {
        **asdict(m),
        "samples_sent": session.samples_sent,
        "frames": framed.total_frames,
        "payload_bytes": framed.payload_bytes,
        "full_bytes": framed.full_bytes,
    }
    print(f"sent {session.samples_sent} of {session.n} samples "
          f"({m.data_sent_pct:.2f}%), nmse={m.nmse}, max |error|={m.max_abs_error:.4g}")
    args._digest = digest
    return {"simulate_session.csv": session.to_csv(), "simulate_metrics.json": _dump(metrics)}


def cmd_sweep(args) -> dict[str, str]:
    if any(b < a for a, b in zip(args.deltas, args.deltas[1:])):
        raise ValidationError("deltas must be ascending")
    series, args._digest = _load(args)
    configs = [_config(args, 0.0, f) for f in args.forecasters]
    rows = sweep(series, args.deltas, configs)
    for r in rows:
        nmse = "-" if r.metrics.nmse is None else f"{r.metrics.nmse:.4f}"
        print(f"delta={r.delta:<6g} {r.forecaster:<7} sent={r.metrics.data_sent_pct:6.2f}%  nmse={nmse}")
    if args.format == "json":
        return {"sweep.json": rows_to_json(rows)}
    return {"sweep.csv": rows_to_csv(rows)}


def cmd_anomaly(args) -> dict[str, str]:
    if args.shingle < 1:
        raise ValidationError("--shingle must be >= 1")
    series, args._digest = _load(args)
    fc = ForestConfig(args.trees, args.tree_size, args.shingle, args.seed)
    true_scores = score_stream(series, fc)
    outputs, report = {}, []
    for d in args.deltas:
        session = run_session(series, _config(args, d))
        proc_scores = score_stream(session.processed, fc)
        peaks = compare_peaks(true_scores, proc_scores, args.threshold, args.shingle)
        report.append({
            "delta": d,
            "data_sent_pct": session.data_sent_pct,
            "peaks_preserved": peaks.preserved,
            "true_events": [list(e) for e in peaks.true_events],
            "missed": [list(e) for e in peaks.missed],
            "false_positives": [list(e) for e in peaks.false_positives],
        })
        line = f"delta={d:g} sent={session.data_sent_pct:.2f}% peaks preserved: {'yes' if peaks.preserved else 'no'}"
        if not peaks.preserved:
            line += f" (missed {peaks.missed}, false positives {peaks.false_positives})"
        print(line)
        outputs[f"anomaly_scores_delta{d!r}.csv"] = scores_csv(true_scores, proc_scores)
    outputs["anomaly_report.json"] = _dump(report)
    return outputs


def _traffic_kwargs(args) -> dict:
    return {"payload_full": args.payload, "battery_energy": args.battery,
            "overhead_bytes": args.overhead_bytes}


def cmd_lifetime(args) -> dict[str, str]:
    profile = get_profile(args.tech, args.data_rate)
    for f in args.fractions:
        if not 0.0 <= f <= 1.0:
            raise ValidationError(f"fraction {f} outside [0, 1]")
    fractions = sorted(args.fractions)
    lines = ["ti,fraction,years" if len(args.ti) > 1 else "fraction,years"]
    for ti in args.ti:
        for f in fractions:
            years = lifetime(profile, TrafficModel(ti, f, **_traffic_kwargs(args)))
            prefix = f"{_fmt(ti)}," if len(args.ti) > 1 else ""
            lines.append(f"{prefix}{_fmt(f)},{_fmt(years)}")
            print(f"{profile.name} ti={ti:g}s fraction={f:g}: {years:.3f} years")
    args._digest = None
    return {"lifetime.csv": "\n".join(lines) + "\n"}


def cmd_compare_forecasters(args) -> dict[str, str]:
    if any(n < 1000 for n in args.n):
        log.warning("n below 1000 gives noisy timings; running anyway")
    lines = ["n,window_s_per_sample,arima_s_per_sample,ratio"]
    for n in args.n:
        m = max(n, 1000)
        tw = measure_throughput(lambda: WindowForecaster(args.window), m, args.repeats)
        ta = measure_throughput(
            lambda: ArForecaster(args.ar_order, args.fit_window, refit_every=1), m, args.repeats
        )
        lines.append(f"{n},{_fmt(tw)},{_fmt(ta)},{_fmt(ta / tw)}")
        print(f"n={n}: window {tw * 1e6:.3f} us/sample, arima {ta * 1e6:.3f} us/sample, ratio {ta / tw:.1f}x")
    args._digest = None
    return {"compare_forecasters.csv": "\n".join(lines) + "\n"}


def cmd_displacement(args) -> dict[str, str]:
    if any(b < a for a, b in zip(args.deltas, args.deltas[1:])):
        raise ValidationError("deltas must be ascending")
    series, args._digest = _load(args)
    impacts = {d: displacement_impact(series, _config(args, d)) for d in args.deltas}
    report = []
    for d, imp in impacts.items():
        report.append({"delta": d, "data_sent_pct": imp.log.data_sent_pct,
                       "mse_displacement_m2": imp.mse_displacement})
        print(f"delta={d:g} sent={imp.log.data_sent_pct:.2f}% displacement MSE={imp.mse_displacement:.4g} m^2")
    return {"displacement.csv": displacement_csv(impacts), "displacement_report.json": _dump(report)}


def cmd_lifetime_gain(args) -> dict[str, str]:
    """Lifetime before/after for one session (measured data fraction)."""
    series, args._digest = _load(args)
    session = run_session(series, _config(args, args.delta))
    frac = frame_stream(session).data_fraction
    profile = get_profile(args.tech, args.data_rate)
    gain = fraction_lifetime(frac, profile, args.ti[0], **_traffic_kwargs(args))
    out = {**asdict(gain), "gain_pct": gain.gain_pct, "tech": profile.name, "ti": args.ti[0]}
    print(f"{profile.name}: {gain.baseline_years:.3f} -> {gain.reduced_years:.3f} years "
          f"(+{gain.gain_pct:.1f}%) at {100 * frac:.2f}% of the data")
    return {"session_lifetime.json": _dump(out)}


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "anomaly": cmd_anomaly,
    "lifetime": cmd_lifetime,
    "session-lifetime": cmd_lifetime_gain,
    "compare-forecasters": cmd_compare_forecasters,
    "displacement": cmd_displacement,
}


def _add_energy(p: argparse.ArgumentParser, ti_default: str) -> None:
    p.add_argument("--tech", default="lora",
                   help=f"radio technology, one of {', '.join(PROFILES)} (default: lora)")
    p.add_argument("--ti", type=_floats, default=_floats(ti_default),
                   help=f"transmission interval(s) in seconds, comma separated (default: {ti_default})")
    p.add_argument("--data-rate", type=float, default=None,
                   help="override the profile's transmit rate in bytes/s")
    p.add_argument("--payload", type=float, default=1000.0,
                   help="bytes per interval at 100%% transmission (default: 1000)")
    p.add_argument("--battery", type=float, default=13_500.0,
                   help="battery energy in joules (default: 13500, two AAA cells)")
    p.add_argument("--overhead-bytes", type=float, default=0.0,
                   help="fixed bytes charged per interval that transmits anything (default: 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ambrosia", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", default=None,
                       help=f"output directory (default: ${OUT_ENV} or the current directory)")

    p = sub.add_parser("simulate", help="run one session and report what was sent")
    _add_input(p)
    _add_protocol(p)
    p.add_argument("--delta", type=float, default=0.5,
                   help="error threshold: a sample is sent only when |true - predicted| exceeds it "
                   "(sensor units, default: 0.5)")
    common(p)

    p = sub.add_parser("sweep", help="data sent and normalized error across thresholds")
    _add_input(p)
    _add_protocol(p)
    p.add_argument("--deltas", type=_floats, default=_floats("0,0.4,0.8,1.2"),
                   help="ascending error thresholds (default: 0,0.4,0.8,1.2)")
    p.add_argument("--forecasters", type=lambda s: [x.strip() for x in s.split(",")],
                   default=["arima", "window"], help="comma-separated forecasters (default: arima,window)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    common(p)

    p = sub.add_parser("anomaly", help="random cut forest scores on true vs processed streams")
    _add_input(p)
    _add_protocol(p)
    p.add_argument("--deltas", type=_floats, default=_floats("0.5,2.0"),
                   help="error thresholds to compare (default: 0.5,2.0)")
    p.add_argument("--trees", type=int, default=40, help="trees in the forest (default: 40)")
    p.add_argument("--tree-size", type=int, default=256,
                   help="points kept per tree, oldest evicted first (default: 256)")
    p.add_argument("--shingle", type=int, default=4, help="shingle length (default: 4)")
    p.add_argument("--seed", type=int, default=0, help="forest seed (default: 0)")
    p.add_argument("--threshold", type=float, default=SPIKED_THRESHOLD,
                   help=f"score above which a point is anomalous (default: {SPIKED_THRESHOLD:g})")
    common(p)

    p = sub.add_parser("lifetime", help="battery lifetime against fraction of data sent")
    _add_energy(p, "3600")
    p.add_argument("--fractions", type=_floats, default=_floats("0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0"),
                   help="fractions of the full payload sent, each in [0, 1]")
    common(p)

    p = sub.add_parser("session-lifetime", help="lifetime gain implied by one session")
    _add_input(p)
    _add_protocol(p)
    p.add_argument("--delta", type=float, default=0.5, help="error threshold (default: 0.5)")
    _add_energy(p, "3600")
    common(p)

    p = sub.add_parser("compare-forecasters", help="per-sample cost, window vs per-sample-refit arima")
    p.add_argument("--n", type=_ints, default=_ints("1000,10000,100000"),
                   help="stream lengths (default: 1000,10000,100000)")
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--ar-order", type=int, default=3)
    p.add_argument("--fit-window", type=int, default=50)
    p.add_argument("--repeats", type=int, default=5, help="timing repetitions, median taken (min 5)")
    common(p)

    p = sub.add_parser("displacement", help="double-integrated displacement, true vs processed")
    _add_input(p)
    _add_protocol(p)
    p.add_argument("--deltas", type=_floats, default=_floats("0.3,0.5,1.0"),
                   help="ascending error thresholds in m/s^2 (default: 0.3,0.5,1.0)")
    common(p)

    p = sub.add_parser("replay", help="rerun a command from its manifest")
    p.add_argument("manifest")
    common(p)
    return parser


def _manifest(command: str, args, digest) -> dict:
    config = {k: v for k, v in vars(args).items() if not k.startswith("_") and k not in ("out", "command")}
    return {
        "subcommand": command,
        "config": config,
        "input_digest": digest,
        "version": __version__,
        "seed": config.get("seed"),
    }


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out or os.environ.get(OUT_ENV) or ".")
    command = args.command
    try:
        if command == "replay":
            manifest = json.loads(Path(args.manifest).read_text())
            command = manifest["subcommand"]
            args = argparse.Namespace(**manifest["config"], command=command, out=str(out))
            outputs = COMMANDS[command](args)
            if getattr(args, "_digest", None) != manifest["input_digest"]:
                raise ValidationError("input changed since the manifest was written")
        else:
            outputs = COMMANDS[command](args)
        outputs[f"{command}.manifest.json"] = _dump(_manifest(command, args, getattr(args, "_digest", None)))
    except (ValidationError, argparse.ArgumentTypeError, KeyError, json.JSONDecodeError, FileNotFoundError) as e:
        print(f"ambrosia: error: {e}", file=sys.stderr)
        return 1
    except (AmbrosiaError, ArithmeticError, OSError) as e:
        print(f"ambrosia: runtime error: {e}", file=sys.stderr)
        return 2

    out.mkdir(parents=True, exist_ok=True)
    for name, text in outputs.items():
        (out / name).write_text(text, encoding="utf-8")
    return 0


def main(argv=None) -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
