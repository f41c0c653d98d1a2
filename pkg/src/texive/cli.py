"""Command-line entry points.

Subcommands: ingest, train, detect, simulate, evaluate, schedule, texting.
Exit codes: 0 success, 2 validation error, 3 model error. All output is
deterministic for a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus, localize, scheduler, simulator, texting, trace_io
from .config import DEFAULT_CONFIG, PipelineConfig
from .errors import ModelError, TexiveError, ValidationError
from .pipeline import Models, metrics_from_counts, run_pipeline

_REGIONS = {"left-hand-drive": "LeftHandDrive", "right-hand-drive": "RightHandDrive"}

_PRESETS = {
    "walk": lambda seed: simulator.activity_scenario("Walk", seed),
    "stairs": lambda seed: simulator.activity_scenario("Stairs", seed),
    "idle": lambda seed: simulator.activity_scenario("Idle", seed),
    "busboard": lambda seed: simulator.activity_scenario("BusBoard", seed),
    "walk_and_sit": simulator.walk_and_sit_scenario,
    "enter_left": lambda seed: simulator.entry_scenario("Left", "LeftPocket", seed),
    "enter_right": lambda seed: simulator.entry_scenario("Right", "RightPocket", seed),
    "ride_driver": lambda seed: simulator.ride_scenario(seed, side="Left", seat="Front"),
    "ride_passenger_front": lambda seed: simulator.ride_scenario(seed, side="Right", seat="Front"),
    "ride_passenger_back": lambda seed: simulator.ride_scenario(seed, side="Right", seat="Back"),
    "ride_back_left": lambda seed: simulator.ride_scenario(seed, side="Left", seat="Back"),
}


def _config_from_args(args) -> PipelineConfig:
    overrides = {}
    if getattr(args, "window_s", None) is not None:
        overrides["window_s"] = args.window_s
    if getattr(args, "step_s", None) is not None:
        overrides["step_s"] = args.step_s
        overrides["fusion_step_s"] = args.step_s
    return DEFAULT_CONFIG.with_overrides(**overrides) if overrides else DEFAULT_CONFIG


def _emit(args, payload: dict, text_lines) -> None:
    if args.report == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _add_report(p) -> None:
    p.add_argument("--report", choices=("text", "json"), default="text")


def _cmd_ingest(args) -> int:
    data = Path(args.trace).read_bytes()
    trace = trace_io.parse_trace(data, args.format)
    if args.rate_hz:
        trace = trace_io.resample(trace, args.rate_hz)
    if args.out:
        Path(args.out).write_bytes(trace_io.serialize_trace(trace, args.out_format))
    payload = {
        "samples": len(trace),
        "duration_ms": trace.duration_ms(),
        "rate_hz": trace.nominal_rate_hz,
        "labels": [[s.start_ms, s.end_ms, s.label.name] for s in trace.labels],
    }
    _emit(
        args,
        payload,
        [
            f"samples: {len(trace)}",
            f"duration_ms: {trace.duration_ms()}",
            f"rate_hz: {trace.nominal_rate_hz}",
        ]
        + [f"label: {s.label.name} [{s.start_ms}, {s.end_ms}]" for s in trace.labels],
    )
    return 0


def _cmd_simulate(args) -> int:
    if args.keystrokes_out:
        log = simulator.generate_keystrokes(args.keystroke_class, args.n_letters, args.seed)
        Path(args.keystrokes_out).write_bytes(trace_io.serialize_keystrokes(log))
    if args.scenario:
        scenario = simulator.scenario_from_bytes(Path(args.scenario).read_bytes())
        if args.seed is not None:
            scenario = simulator.Scenario(
                seed=args.seed,
                segments=scenario.segments,
                pocket=scenario.pocket,
                noise_accel=scenario.noise_accel,
                noise_mag=scenario.noise_mag,
                noise_gyro=scenario.noise_gyro,
                rate_hz=scenario.rate_hz,
                mag_field=scenario.mag_field,
            )
    elif args.preset:
        scenario = _PRESETS[args.preset](args.seed)
    else:
        if not args.keystrokes_out:
            raise ValidationError("simulate needs --scenario, --preset, or --keystrokes-out")
        return 0
    trace, labels = simulator.generate(scenario)
    Path(args.out).write_bytes(trace_io.serialize_trace(trace, args.format))
    payload = {
        "out": args.out,
        "samples": len(trace),
        "labels": [[s.start_ms, s.end_ms, s.label.name] for s in labels],
    }
    _emit(args, payload, [f"wrote {args.out}: {len(trace)} samples, {len(labels)} label spans"])
    return 0


def _cmd_train(args) -> int:
    config = _config_from_args(args)
    if args.kind == "activity":
        if args.synthetic:
            model = corpus.build_activity_model(args.seed, config, per_class=args.per_class)
        else:
            rows = []
            for path in args.trace:
                trace = trace_io.parse_trace(Path(path).read_bytes(), args.format)
                rows.extend(corpus.training_windows(trace, config))
            from .activity import train

            model = train(rows, config.variance_floor)
        Path(args.out).write_bytes(trace_io.serialize_model(model))
        classes = model.labels()
    else:
        if not args.synthetic:
            raise ValidationError("side training requires --synthetic (needs side/pocket truth)")
        model = corpus.build_side_model(args.seed, config, per_case=args.per_class)
        Path(args.out).write_bytes(localize.serialize_side_model(model))
        classes = model.gnb.labels()
    _emit(
        args,
        {"out": args.out, "kind": args.kind, "classes": classes},
        [f"wrote {args.kind} model to {args.out}", "classes: " + " ".join(classes)],
    )
    return 0


def _cmd_detect(args) -> int:
    config = _config_from_args(args)
    trace = trace_io.parse_trace(Path(args.trace).read_bytes(), args.format)
    models = Models(
        activity=trace_io.parse_model(Path(args.model).read_bytes()),
        side=localize.parse_side_model(Path(args.side_model).read_bytes()),
    )
    keystrokes = None
    if args.keystrokes:
        keystrokes = trace_io.parse_keystrokes(Path(args.keystrokes).read_bytes())
    result = run_pipeline(trace, models, config, keystrokes, _REGIONS[args.region])
    verdict = result.verdict
    payload = {
        "role": verdict.role,
        "distracted": verdict.distracted,
        "confidence": verdict.confidence,
        "latency_ms": verdict.latency_ms,
        "events": [json.loads(e.to_json()) for e in result.events],
    }
    lines = [e.to_json() for e in result.events]
    lines.append(
        f"verdict: {verdict.role} distracted={verdict.distracted} "
        f"confidence={verdict.confidence:.3f} latency_ms={verdict.latency_ms}"
    )
    _emit(args, payload, lines)
    return 0


def _metrics_payload(report, latency_ms) -> dict:
    payload = report.to_dict()
    payload["latency_ms"] = latency_ms
    return payload


def _metrics_lines(payload) -> list:
    keys = ("tp", "fp", "tn", "fn", "precision", "sensitivity", "specificity", "accuracy", "latency_ms")
    lines = [f"{k}: {payload[k]}" for k in keys if k in payload]
    for note in payload.get("notes", []):
        lines.append(f"note: {note}")
    return lines


def _cmd_evaluate(args) -> int:
    config = _config_from_args(args)
    if args.counts:
        tp, fp, fn, tn = (int(x) for x in args.counts.split(","))
        report = metrics_from_counts(tp, fp, fn, tn)
        payload = _metrics_payload(report, "n/a")
        _emit(args, payload, _metrics_lines(payload))
        return 0
    if args.corpus == "driver":
        models = corpus.build_models(args.seed + 1000, config)
        result = corpus.eval_driver_corpus(models, args.seed, config)
        payload = _metrics_payload(result.report, max(result.latencies_ms) if result.latencies_ms else "n/a")
        _emit(args, payload, _metrics_lines(payload))
        return 0
    if args.corpus == "activity":
        model = corpus.build_activity_model(args.seed + 1000, config)
        res = corpus.eval_activity_corpus(model, args.seed, config)
        payload = {
            "accuracy": res.accuracy,
            "n_total": res.n_total,
            "entry_fp_unfiltered": res.entry_fp_unfiltered,
            "entry_fp_filtered": res.entry_fp_filtered,
            "entry_tp_unfiltered": res.entry_tp_unfiltered,
            "entry_tp_filtered": res.entry_tp_filtered,
        }
        _emit(args, payload, [f"{k}: {v}" for k, v in payload.items()])
        return 0
    if args.corpus == "side":
        model = corpus.build_side_model(args.seed + 1000, config)
        accuracy, _ = corpus.eval_side_corpus(model, args.seed, config)
        _emit(args, {"accuracy": accuracy}, [f"accuracy: {accuracy}"])
        return 0
    if args.corpus == "texting":
        errors = 0
        n = 20
        for i in range(n):
            truth = "Normal" if i < 8 else "Distracted"
            log = simulator.generate_keystrokes(truth, 400, args.seed * 100 + i)
            verdict = texting.classify_texting(texting.compute_stats(log), config)
            if verdict.label.value != truth:
                errors += 1
        payload = {"cases": n, "errors": errors, "accuracy": (n - errors) / n}
        _emit(args, payload, [f"{k}: {v}" for k, v in payload.items()])
        return 0
    raise ValidationError("evaluate needs --counts or --corpus")


def _cmd_schedule(args) -> int:
    payload: dict = {}
    lines = []
    if args.t_mean is not None:
        plan = scheduler.plan_entry_sampling(args.t_mean, args.sigma)
        payload["intervals_s"] = plan
        lines.append("intervals_s: " + " ".join(repr(v) for v in plan))
    if args.bump_rate is not None:
        model = scheduler.BumpModel(
            lam=args.bump_rate, on_s=args.on, sleep_s=args.sleep, power=args.power
        )
        prob = scheduler.detection_cycle_prob(model)
        payload["cycle_detection_prob"] = prob
        lines.append(f"cycle_detection_prob: {prob!r}")
        cost = scheduler.expected_cost(model, args.cycle_index, args.time_in_cycle)
        payload["expected_cost"] = cost
        lines.append(f"expected_cost: {cost!r}")
        if args.mc_cycles:
            mc = scheduler.simulate_cycle_detection(model, args.mc_cycles, args.seed)
            payload["mc_on_window_hit_rate"] = mc
            lines.append(f"mc_on_window_hit_rate: {mc!r}")
            lines.append("note: the Monte-Carlo on-window hit rate estimates 1-exp(-w*lam); "
                         "the closed-form cycle probability additionally carries s/(s+w).")
            payload["note"] = (
                "mc_on_window_hit_rate estimates 1-exp(-w*lam); the closed-form "
                "cycle probability additionally carries s/(s+w)."
            )
    if args.fit:
        sequences = []
        for line in Path(args.fit).read_text().splitlines():
            line = line.strip()
            if line:
                sequences.append(line.split(","))
        model = scheduler.fit_transitions(sequences)
        if args.out:
            Path(args.out).write_bytes(scheduler.serialize_transitions(model))
        payload["states"] = list(model.states)
        payload["initial"] = [float(v) for v in model.initial]
        lines.append("states: " + " ".join(model.states))
        lines.append("initial: " + " ".join(repr(float(v)) for v in model.initial))
    if not payload:
        raise ValidationError("schedule needs --t-mean, --bump-rate, or --fit")
    _emit(args, payload, lines)
    return 0


def _cmd_texting(args) -> int:
    config = _config_from_args(args)
    log = trace_io.parse_keystrokes(Path(args.keystrokes).read_bytes())
    stats = texting.compute_stats(log)
    verdict = texting.classify_texting(stats, config)
    payload = {
        "mean_interval_ms": stats.mean_interval_ms,
        "sd_interval_ms": stats.sd_interval_ms,
        "frac_under_800ms": stats.frac_under_800ms,
        "inputs_per_typo": stats.inputs_per_typo if stats.inputs_per_typo != float("inf") else "inf",
        "n_intervals": stats.n_intervals,
        "verdict": verdict.label.value,
        "confidence": verdict.confidence,
    }
    _emit(args, payload, [f"{k}: {v}" for k, v in payload.items()])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="texive", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, validate, and resample a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--rate-hz", type=float, default=None)
    p.add_argument("--out")
    p.add_argument("--out-format", choices=("csv", "jsonl"), default="csv")
    _add_report(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("simulate", help="generate synthetic traces and keystroke logs")
    p.add_argument("--scenario", help="scenario file (texive-model/1, kind=scenario)")
    p.add_argument("--preset", choices=sorted(_PRESETS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="trace.csv")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--keystrokes-out")
    p.add_argument("--keystroke-class", choices=("Normal", "Distracted"), default="Normal")
    p.add_argument("--n-letters", type=int, default=400)
    _add_report(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="train activity or side models")
    p.add_argument("--kind", choices=("activity", "side"), default="activity")
    p.add_argument("--synthetic", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-class", type=int, default=10)
    p.add_argument("--trace", nargs="*", default=[], help="labeled traces (activity training)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", required=True)
    p.add_argument("--window-s", type=float, default=None)
    p.add_argument("--step-s", type=float, default=None)
    _add_report(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("detect", help="run the full pipeline on a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--side-model", required=True)
    p.add_argument("--keystrokes")
    p.add_argument("--region", choices=sorted(_REGIONS), default="left-hand-drive")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--window-s", type=float, default=None)
    p.add_argument("--step-s", type=float, default=None)
    _add_report(p)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("evaluate", help="metrics from counts or synthetic corpora")
    p.add_argument("--counts", help="tp,fp,fn,tn")
    p.add_argument("--corpus", choices=("driver", "activity", "side", "texting"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window-s", type=float, default=None)
    p.add_argument("--step-s", type=float, default=None)
    _add_report(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("schedule", help="sampling plans and bump-detection model")
    p.add_argument("--t-mean", type=float, default=None)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--bump-rate", type=float, default=None)
    p.add_argument("--on", type=float, default=10.0)
    p.add_argument("--sleep", type=float, default=50.0)
    p.add_argument("--power", type=float, default=1.0)
    p.add_argument("--cycle-index", type=int, default=1)
    p.add_argument("--time-in-cycle", type=float, default=0.0)
    p.add_argument("--mc-cycles", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fit", help="file of comma-separated daily activity sequences")
    p.add_argument("--out", help="write fitted transition model here")
    _add_report(p)
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("texting", help="classify a keystroke log")
    p.add_argument("--keystrokes", required=True)
    p.add_argument("--window-s", type=float, default=None)
    p.add_argument("--step-s", type=float, default=None)
    _add_report(p)
    p.set_defaults(func=_cmd_texting)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, FileNotFoundError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except TexiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
