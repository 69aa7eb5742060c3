# cli.py
#
# Single command-line entry point.  Every subcommand resolves its settings
# as defaults <- config file <- flags, writes its outputs plus a manifest
# that reproduces the run bit-for-bit, and exits 0 on success, 2 on a
# usage/config problem, 3 on an I/O or format problem.  Figures are
# rendered next to the delimited outputs unless --no-figures is given;
# only CSV/JSON/PGM outputs carry the byte-reproducibility guarantee.

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .config import ConfigError, RunConfig, build_run_config
from .engine import NetworkFormatError
from .image import TransmissionJob, binarize, demo_logo, error_report, transmit_image
from .montecarlo import (
    BitTrialResult,
    ImperfectionModel,
    RngStream,
    transmit_bit,
)
from .pgm import PgmFormatError, read_pgm, write_pgm
from .protocol import build_protocol, detune_tweaks, ideal_detection_probs
from .trace import audit_summary, trace_audit
from .zeno import (
    bit0_error_bound,
    ground_prob_single,
    sweep,
    sweep_csv,
    theoretical_success,
    zeno_survival,
    zeno_survival_bound,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _parse_range(text: str) -> List[int]:
    """'2..8' -> [2..8] inclusive; '3' -> [3]."""
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _gather_config(args) -> RunConfig:
    """Layer the config file and the flags the user actually passed."""
    overrides: Dict[str, Dict] = {"protocol": {}, "model": {}, "run": {}}
    for attr, section, key in [
        ("m", "protocol", "m"),
        ("n", "protocol", "n"),
        ("invert_bits", "protocol", "invert_bits"),
        ("loss0_db", "model", "loss_bit0_db"),
        ("loss1_db", "model", "loss_bit1_db"),
        ("visibility", "model", "visibility"),
        ("source_rate", "model", "source_rate"),
        ("coupling_eff", "model", "coupling_eff"),
        ("detector_eff", "model", "detector_eff"),
        ("dark_rate", "model", "dark_rate"),
        ("seed", "run", "seed"),
        ("duration", "run", "duration_s"),
        ("slices", "run", "slices"),
        ("threshold", "run", "threshold"),
    ]:
        val = getattr(args, attr, None)
        if val is not None and val is not False:
            overrides[section][key] = val
    if getattr(args, "out_dir", None) is not None:
        overrides["run"]["out_dir"] = str(args.out_dir)
    if getattr(args, "no_figures", False):
        overrides["run"]["figures"] = False
    overrides = {k: v for k, v in overrides.items() if v}
    cfg = build_run_config(getattr(args, "config", None), overrides)

    if getattr(args, "ideal", False):
        cfg.model = ImperfectionModel.ideal(source_rate=cfg.model.source_rate)
    scale = getattr(args, "scale_rate", None)
    if scale is not None:
        if scale <= 0:
            raise ConfigError("--scale-rate must be > 0")
        from dataclasses import replace

        cfg.model = replace(cfg.model, source_rate=cfg.model.source_rate * scale)
    return cfg


def _out_dir(cfg: RunConfig) -> Path:
    d = Path(cfg.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _manifest(out: Path, command: str, cfg: RunConfig, options: Dict, outputs: List[str]) -> None:
    _dump_json(
        {
            "command": command,
            "version": __version__,
            "seed": cfg.seed,
            "config": cfg.echo(),
            "options": options,
            "outputs": sorted(outputs),
        },
        out / "manifest.json",
    )


def _binomial_ci3(p: Optional[float], n: int) -> Optional[float]:
    if p is None or n == 0:
        return None
    return 3.0 * math.sqrt(max(p * (1.0 - p), 0.0) / n)


# -- subcommands -------------------------------------------------------------


def cmd_build(args) -> int:
    cfg = _gather_config(args)
    out = _out_dir(cfg)
    built = build_protocol(cfg.m, cfg.n, cfg.invert_bits)
    (out / "network.txt").write_text(built.net.serialize())
    _dump_json(
        {
            "params": {"m": cfg.m, "n": cfg.n, "invert_bits": cfg.invert_bits},
            "theta_outer": built.params.theta_outer,
            "theta_inner": built.params.theta_inner,
            "element_count": built.element_count,
            "ports": {
                "d0": built.ports.d0,
                "d1": built.ports.d1,
                "df": list(built.ports.df),
                "bob_sinks": list(built.ports.bob_sinks),
            },
            "modes": list(built.net.mode_labels),
            "detectors": list(built.net.detectors),
        },
        out / "build.json",
    )
    _manifest(out, "build", cfg, {}, ["network.txt", "build.json"])
    ec = built.element_count
    print(
        f"built (M={cfg.m}, N={cfg.n}): {ec['elements']} elements, "
        f"{ec['outer_couplers']} outer + {ec['inner_couplers_total']} inner couplers, "
        f"{ec['switches']} switches -> {out / 'network.txt'}"
    )
    return EXIT_OK


def cmd_analytic(args) -> int:
    cfg = _gather_config(args)
    out = _out_dir(cfg)
    sp = theoretical_success(cfg.m, cfg.n)
    payload = {
        "m": cfg.m,
        "n": cfg.n,
        "ground_prob_single": ground_prob_single(cfg.n),
        "zeno_survival": zeno_survival(cfg.n),
        "zeno_survival_bound": zeno_survival_bound(cfg.n),
        "bit0_error_bound": bit0_error_bound(cfg.m),
        "s0": sp.s0,
        "s1": sp.s1,
    }
    _dump_json(payload, out / "analytic.json")
    _manifest(out, "analytic", cfg, {}, ["analytic.json"])
    print(f"M={cfg.m} N={cfg.n}")
    print(f"  single-step survival cos^2(pi/2N)   = {payload['ground_prob_single']:.6f}")
    print(f"  chain survival cos^(2N)(pi/2N)      = {payload['zeno_survival']:.6f}")
    print(f"  bit-0 per-pass error sin^2(pi/2M)   = {payload['bit0_error_bound']:.6f}")
    print(f"  conditional success S0 = {sp.s0:.6f}, S1 = {sp.s1:.6f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _gather_config(args)
    out = _out_dir(cfg)
    ms = _parse_range(args.m_range)
    ns = _parse_range(args.n_range)
    points = sweep(ms, ns)
    (out / "sweep.csv").write_text(sweep_csv(points))
    anchor = None
    for p in points:
        if (p.m, p.n) == (3, 6):
            anchor = {
                "m": 3,
                "n": 6,
                "s0": p.s0,
                "s1": p.s1,
                "s0_target": 0.750,
                "s1_target": 0.872,
                "within_tolerance": abs(p.s0 - 0.750) <= 0.005 and abs(p.s1 - 0.872) <= 0.005,
            }
    _dump_json(
        {"rows": len(points), "m_values": ms, "n_values": ns, "anchor": anchor},
        out / "sweep_summary.json",
    )
    outputs = ["sweep.csv", "sweep_summary.json"]
    if cfg.figures:
        from .figures import save_sweep_figure

        save_sweep_figure(points, out / "fig_sweep.png")
        outputs.append("fig_sweep.png")
    _manifest(out, "sweep", cfg, {"m_range": args.m_range, "n_range": args.n_range}, outputs)
    print(f"{len(points)} sweep rows -> {out / 'sweep.csv'}")
    if anchor:
        print(
            f"anchor (3,6): s0={anchor['s0']:.6f} s1={anchor['s1']:.6f} "
            f"target 0.750/0.872 within 0.005: {anchor['within_tolerance']}"
        )
    return EXIT_OK


def cmd_simulate_bit(args) -> int:
    cfg = _gather_config(args)
    if cfg.duration_s <= 0:
        raise ConfigError("duration must be > 0")
    out = _out_dir(cfg)
    built = build_protocol(cfg.m, cfg.n, cfg.invert_bits)
    t0 = time.perf_counter()
    result = transmit_bit(
        built, args.bit, cfg.duration_s, cfg.model, RngStream(cfg.seed, 0), slices=cfg.slices
    )
    wall = time.perf_counter() - t0
    n_sig = result.detections
    ci3 = _binomial_ci3(result.success_prob_estimate, n_sig)
    sp = theoretical_success(cfg.m, cfg.n)
    payload = {
        "bit_sent": result.bit_sent,
        "duration_s": result.duration_s,
        "counts": result.counts,
        "coincidence_df": result.coincidence_df,
        "bit_decoded": result.bit_decoded,
        "no_signal": result.no_signal,
        "signal_detections": n_sig,
        "success_prob_estimate": result.success_prob_estimate,
        "estimate_ci3_binomial": ci3,
        "df_conditional_rate": result.df_conditional_rate,
        "theory": {"s0": sp.s0, "s1": sp.s1},
    }
    _dump_json(payload, out / "bit_report.json")
    outputs = ["bit_report.json"]
    if cfg.figures:
        from .figures import save_counts_figure

        save_counts_figure(result, out / "fig_counts.png")
        outputs.append("fig_counts.png")
    _manifest(out, "simulate-bit", cfg, {"bit": args.bit, "ideal": bool(args.ideal)}, outputs)

    if result.success_prob_estimate is None:
        print(f"bit {args.bit}: NO SIGNAL ({result.counts})")
    else:
        print(
            f"bit {args.bit}: estimate {result.success_prob_estimate:.4f} "
            f"+- {ci3:.4f} (3 sigma, {n_sig} detections), decoded {result.bit_decoded}"
        )
        df = result.df_conditional_rate
        print(f"  D_f conditional rate {df:.5f} ({df:.3%}), coincidences {result.coincidence_df}")
    print(f"  theory S0={sp.s0:.4f} S1={sp.s1:.4f}; wall {wall:.2f} s")
    return EXIT_OK


def cmd_transmit_image(args) -> int:
    cfg = _gather_config(args)
    if cfg.duration_s <= 0:
        raise ConfigError("per-bit duration must be > 0")
    out = _out_dir(cfg)
    if args.input is not None:
        img = read_pgm(args.input)
        source = str(args.input)
    else:
        img = demo_logo()
        source = "demo"
    plane = binarize(img, cfg.threshold)
    built = build_protocol(cfg.m, cfg.n, cfg.invert_bits)
    job = TransmissionJob(
        plane=plane,
        per_bit_s=cfg.duration_s,
        model=cfg.model,
        protocol=built,
        seed=RngStream(cfg.seed, 0),
        slices=cfg.slices,
    )

    n_px = len(plane.bits)
    t0 = time.perf_counter()
    every = max(1, n_px // 10)

    def progress(done, total):
        if done % every == 0 or done == total:
            print(f"  {done}/{total} pixels", file=sys.stderr)

    received, metrics = transmit_image(job, progress=progress)
    wall = time.perf_counter() - t0

    from .image import GrayImage

    sent_gray = GrayImage(plane.width, plane.height, [255 * b for b in plane.bits])
    write_pgm(sent_gray, out / "sent.pgm")
    write_pgm(received, out / "received.pgm")
    metrics_payload = dict(metrics)
    metrics_payload["source"] = source
    metrics_payload["error_report"] = error_report(plane, received, cfg.threshold)
    _dump_json(metrics_payload, out / "metrics.json")
    outputs = ["sent.pgm", "received.pgm", "metrics.json"]
    if cfg.figures:
        from .figures import save_image_figure

        save_image_figure(sent_gray, received, out / "fig_images.png", metrics)
        outputs.append("fig_images.png")
    _manifest(
        out,
        "transmit-image",
        cfg,
        {"input": source, "ideal": bool(args.ideal), "pixels": n_px},
        outputs,
    )
    print(
        f"{n_px} pixels at T={cfg.duration_s:g} s: {metrics['bit_errors']} bit errors "
        f"(BER {metrics['ber']:.2%}), {len(metrics['no_signal_pixels'])} no-signal"
    )
    print(
        f"simulated time {metrics['simulated_time_s']:.0f} s "
        f"({metrics['simulated_time_s'] / 60:.1f} min); wall {wall:.1f} s -> {out / 'received.pgm'}"
    )
    return EXIT_OK


def cmd_trace_audit(args) -> int:
    cfg = _gather_config(args)
    out = _out_dir(cfg)
    built = build_protocol(cfg.m, cfg.n, cfg.invert_bits)
    bits = [args.bit] if args.bit is not None else [0, 1]
    reports = [trace_audit(built, bit) for bit in bits]
    payload = {
        "params": {"m": cfg.m, "n": cfg.n},
        "ideal": {f"bit{r.bit}": audit_summary(r) for r in reports},
        "perturbed": None,
    }
    all_reports = list(reports)
    if args.detune:
        tweaks = detune_tweaks(built, args.detune, args.detune_index)
        perturbed = [trace_audit(built, bit, tweaks=tweaks) for bit in bits]
        payload["perturbed"] = {
            "detune_rad": args.detune,
            "detune_index": args.detune_index,
            **{f"bit{r.bit}": audit_summary(r) for r in perturbed},
        }
        all_reports += perturbed
    _dump_json(payload, out / "trace_report.json")
    outputs = ["trace_report.json"]
    if cfg.figures:
        from .figures import save_trace_figure

        save_trace_figure(all_reports, out / "fig_trace.png")
        outputs.append("fig_trace.png")
    _manifest(
        out,
        "trace-audit",
        cfg,
        {"bit": args.bit, "detune": args.detune, "detune_index": args.detune_index},
        outputs,
    )
    for r in reports:
        print(f"ideal bit {r.bit}: max channel trace {r.max_trace:.3e} (postselect {r.postselect})")
    if args.detune:
        for r in all_reports[len(reports):]:
            nz = len(r.nonzero_rows(1e-12))
            print(f"detuned bit {r.bit}: max trace {r.max_trace:.3e}, {nz} nonzero segments")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("imperfection model overrides")
    g.add_argument("--loss0-db", dest="loss0_db", type=float, help="bit-0 channel loss (dB)")
    g.add_argument("--loss1-db", dest="loss1_db", type=float, help="bit-1 channel loss (dB)")
    g.add_argument("--visibility", type=float, help="interference visibility in (0, 1]")
    g.add_argument("--source-rate", dest="source_rate", type=float, help="photons per second")
    g.add_argument("--coupling-eff", dest="coupling_eff", type=float)
    g.add_argument("--detector-eff", dest="detector_eff", type=float)
    g.add_argument("--dark-rate", dest="dark_rate", type=float, help="dark counts/s/detector")
    g.add_argument("--scale-rate", dest="scale_rate", type=float,
                   help="multiply source rate (0.01 = desk-scale photon budget)")
    g.add_argument("--ideal", action="store_true",
                   help="lossless, dark-free, visibility-1 channel")


def _add_protocol_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, help="outer couplers M (default 3)")
    p.add_argument("--n", type=int, help="inner couplers N per half-arm (default 6)")
    p.add_argument("--invert-bits", dest="invert_bits", action="store_true", default=None,
                   help="swap which switch state encodes bit 0")


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="RNG seed (default 20260816)")
    common.add_argument("--config", type=Path, help="INI config file")
    common.add_argument("--out-dir", dest="out_dir", type=Path, help="output directory")
    common.add_argument("--no-figures", dest="no_figures", action="store_true",
                        help="skip PNG rendering")

    parser = argparse.ArgumentParser(
        prog="zenolink",
        description="Chained-Zeno interferometer simulator: trace-free "
        "counterfactual bit and image transmission.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="compile and serialize the network")
    _add_protocol_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("analytic", parents=[common], help="closed forms and ideal S0/S1")
    _add_protocol_flags(p)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("sweep", parents=[common], help="S0/S1 over an (M, N) grid -> CSV")
    p.add_argument("--m", dest="m_range", default="2..8", help="M range, e.g. 2..8 (inclusive)")
    p.add_argument("--n", dest="n_range", default="2..24", help="N range, e.g. 2..24 (inclusive)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate-bit", parents=[common], help="Monte Carlo single-bit trial")
    p.add_argument("--bit", type=int, choices=(0, 1), required=True)
    p.add_argument("--duration", type=float, help="integration time per bit (s)")
    p.add_argument("--slices", type=int, help="jitter redraws per trial (default 16)")
    _add_protocol_flags(p)
    _add_model_flags(p)
    p.set_defaults(func=cmd_simulate_bit)

    p = sub.add_parser("transmit-image", parents=[common], help="send an image pixel by pixel")
    p.add_argument("--input", type=Path, help="input PGM (P2 or P5); omit for the demo emblem")
    p.add_argument("--per-bit", dest="duration", type=float, help="seconds per pixel (default 1)")
    p.add_argument("--threshold", type=int, help="binarize threshold (default 128)")
    p.add_argument("--slices", type=int, help="jitter redraws per pixel (default 16)")
    _add_protocol_flags(p)
    _add_model_flags(p)
    p.set_defaults(func=cmd_transmit_image)

    p = sub.add_parser("trace-audit", parents=[common], help="weak-trace audit per channel segment")
    p.add_argument("--bit", type=int, choices=(0, 1), help="audit one bit (default both)")
    p.add_argument("--detune", type=float, default=0.0, help="angle error on one inner coupler (rad)")
    p.add_argument("--detune-index", dest="detune_index", type=int, default=0,
                   help="which inner coupler to detune (0-based)")
    _add_protocol_flags(p)
    p.set_defaults(func=cmd_trace_audit)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PgmFormatError, NetworkFormatError) as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
