"""Command-line front end: ``irsradar {simulate,sweep,sir,rcs,validate}``.

Exit status: 0 success, 1 invalid scenario or arguments, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._io import atomic_write_json, atomic_write_text
from .config import (ScenarioError, bundled_scenarios, detector_from_dict, read_document,
                     resolve_scenario_path, scenario_from_dict)
from .experiments import (THREADS_ENV, baseline_scenario, default_workers,
                          detection_probability_sweep, evaluate_map, parse_gamma_grid, rcs_curve,
                          sir_curve)
from .irs import ActiveIrs, IrsSpec
from .params import derive_waveform_metrics, physical_to_bin, validate_scenario
from .processing import CaCfarDetector, range_doppler_map
from .synth import compose_beat_frame, scenario_digest

log = logging.getLogger("irsradar")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

PLOT_TEMPLATE = '''"""Plot {csv} (generated by irsradar {version})."""
import csv

import matplotlib.pyplot as plt

with open({csv!r}) as fh:
    rows = list(csv.DictReader(fh))
x = [float(r["gamma_db"]) for r in rows]
fig, ax = plt.subplots()
for col in {cols!r}:
    ax.plot(x, [float(r[col]) for r in rows], marker=".", label=col)
ax.set_xlabel("reflection gain (dB)")
ax.set_ylabel({ylabel!r})
ax.grid(True)
ax.legend()
fig.savefig({png!r}, dpi=150)
'''


def _load(args):
    doc, raw = read_document(args.scenario)
    s = scenario_from_dict(doc)
    if getattr(args, "seed", None) is not None:
        s = s.replace(master_seed=args.seed)
    report = validate_scenario(s)
    for w in report.warnings:
        log.warning("%s", w)
    if not report.ok:
        raise ScenarioError("scenario failed validation", diagnostics=report.errors)
    return s, detector_from_dict(doc), raw


def _manifest(args, out_dir: Path, outputs, t0, raw=None, **extra):
    m = {
        "command": args.command,
        "argv": sys.argv[1:] if args.argv is None else list(args.argv),
        "software_version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_clock_s": round(time.perf_counter() - t0, 3),
        "outputs": sorted(str(p) for p in outputs),
    }
    if raw is not None:
        m["scenario_path"] = str(resolve_scenario_path(args.scenario))
        m["scenario_sha256"] = hashlib.sha256(raw).hexdigest()
    m.update(extra)
    atomic_write_json(out_dir / "manifest.json", m)


def _plot_script(out_dir, csv_name, cols, ylabel):
    name = csv_name.replace(".csv", "_plot.py")
    atomic_write_text(out_dir / name, PLOT_TEMPLATE.format(
        csv=csv_name, cols=cols, ylabel=ylabel, png=csv_name.replace(".csv", ".png"),
        version=__version__))
    return out_dir / name


def cmd_validate(args):
    doc, _ = read_document(args.scenario)
    s = scenario_from_dict(doc)
    detector_from_dict(doc)
    report = validate_scenario(s)
    for d in report:
        print(d)
    if not report.ok:
        return EXIT_INVALID
    m = derive_waveform_metrics(s.fmcw)
    print(f"ok: R_max={m.R_max:.2f} m  dR={m.delta_R:.3f} m  v_max={m.nu_max:.2f} m/s  "
          f"dv={m.delta_nu:.3f} m/s  N_s={m.N_s}  G_P={10 * math.log10(m.G_P):.2f} dB")
    return EXIT_OK


def cmd_simulate(args):
    t0 = time.perf_counter()
    s, det_settings, raw = _load(args)
    if args.no_noise:
        s = s.replace(noise_enabled=False)
    if args.no_interference:
        s = s.replace(interferers=())
    gamma = None
    if isinstance(s.target.reflector, ActiveIrs):
        gamma = 10 ** (args.gamma / 10) if args.gamma is not None else s.target.reflector.gamma
    m = derive_waveform_metrics(s.fmcw)
    frame = compose_beat_frame(s, gamma, s.master_seed, metrics=m)
    rd = range_doppler_map(frame, det_settings.window, metrics=m)
    out = Path(args.out_dir)
    outputs = []
    if args.frame_format == "csv":
        outputs.append(frame.to_csv(out / "frame.csv"))
    else:
        outputs.append(Path(frame.to_raw(out / "frame.bin")))
        outputs.append(out / "frame.bin.json")
    outputs += [rd.to_csv(out / "rd_map.csv"), out / "rd_map.csv.json"]

    detector = CaCfarDetector.from_config(det_settings.cfar).fit(rd.power)
    dets = detector.detect(rd)
    lines = ["range_bin,doppler_bin,range_m,velocity_mps,snr_db"]
    lines += [f"{d.range_bin},{d.doppler_bin},{d.R:.4f},{d.nu:.4f},{d.snr_est:.3f}" for d in dets]
    outputs.append(atomic_write_text(out / "detections.csv", "\n".join(lines) + "\n"))

    r_pk, d_pk = np.unravel_index(np.argmax(rd.power), rd.power.shape)
    truth = physical_to_bin(m, s.target.R, s.target.nu, s.fmcw.N_f)
    hit = evaluate_map(rd.power, truth, det_settings)
    if args.plot_script:
        name = "rd_map_plot.py"
        atomic_write_text(out / name, (
            "import json\nimport numpy as np\nimport matplotlib.pyplot as plt\n\n"
            "p = np.loadtxt('rd_map.csv', delimiter=',')\n"
            "ax_meta = json.load(open('rd_map.csv.json'))\n"
            "extent = [ax_meta['doppler_axis_mps'][0], ax_meta['doppler_axis_mps'][-1],\n"
            "          ax_meta['range_axis_m'][0], ax_meta['range_axis_m'][-1]]\n"
            "plt.imshow(10 * np.log10(p + 1e-30), origin='lower', aspect='auto', extent=extent)\n"
            "plt.xlabel('velocity (m/s)')\nplt.ylabel('range (m)')\nplt.colorbar(label='dB')\n"
            "plt.savefig('rd_map.png', dpi=150)\n"))
        outputs.append(out / name)
    _manifest(args, out, outputs, t0, raw, scenario_digest=scenario_digest(s),
              master_seed=s.master_seed, gamma_db=None if gamma is None else 10 * math.log10(gamma),
              peak_bin=[int(r_pk), int(d_pk)], hit=hit is not None, n_detections=len(dets))
    print(f"peak at range {r_pk * rd.range_per_bin:.2f} m, velocity "
          f"{(d_pk - s.fmcw.N_f // 2) * rd.velocity_per_bin:.2f} m/s; "
          f"{len(dets)} CFAR detections; target {'detected' if hit else 'missed'}")
    return EXIT_OK


def cmd_sweep(args):
    t0 = time.perf_counter()
    s, det_settings, raw = _load(args)
    grid = parse_gamma_grid(args.gamma)
    workers = args.threads or default_workers()
    res = detection_probability_sweep(s, grid, args.trials, det_settings, workers=workers)
    out = Path(args.out_dir)
    name = f"pd_{res.kind.lower()}.csv"
    outputs = [res.to_csv(out / name)]
    thresholds = {"irs": res.threshold_db()}
    if not args.no_baseline:
        base = detection_probability_sweep(baseline_scenario(s), grid, args.trials, det_settings,
                                           workers=workers)
        outputs.append(base.to_csv(out / "pd_baseline.csv"))
    if args.plot_script:
        outputs.append(_plot_script(out, name, ["pd"], "probability of detection"))
    _manifest(args, out, outputs, t0, raw, scenario_digest=scenario_digest(s),
              master_seed=s.master_seed, gamma_grid_db=grid.tolist(), trials=args.trials,
              threads=workers, thresholds_db=thresholds)
    for g, pd in zip(res.gamma_db, res.pd):
        print(f"{g:7.2f} dB  P_D={pd:.3f}")
    return EXIT_OK


def cmd_sir(args):
    t0 = time.perf_counter()
    s, _, raw = _load(args)
    grid = parse_gamma_grid(args.gamma)
    res = sir_curve(s, grid, printed_form=args.printed_form)
    out = Path(args.out_dir)
    outputs = [res.to_csv(out / "sir.csv")]
    if args.plot_script:
        outputs.append(_plot_script(out, "sir.csv", ["sir_db"], "SIR (dB)"))
    _manifest(args, out, outputs, t0, raw, scenario_digest=scenario_digest(s),
              gamma_grid_db=grid.tolist(), printed_form=args.printed_form)
    return EXIT_OK


def _irs_from_args(args):
    rows, cols = args.rows, args.cols
    if rows is None or cols is None:
        n = args.elements
        side = math.isqrt(n)
        rows, cols = (side, side) if side * side == n else (1, n)
    return IrsSpec.half_wavelength(rows, cols, f_c=args.carrier_hz, G_e=args.element_gain)


def cmd_rcs(args):
    t0 = time.perf_counter()
    spec = _irs_from_args(args)
    grid = parse_gamma_grid(args.gamma)
    res = rcs_curve(spec, grid, f_c=args.carrier_hz, baseline_dbsm=args.baseline_dbsm)
    out = Path(args.out_dir)
    outputs = [res.to_csv(out / "rcs.csv")]
    if args.plot_script:
        outputs.append(_plot_script(out, "rcs.csv", ["rcs_dbsm", "baseline_dbsm", "passive_dbsm"],
                                    "effective RCS (dBsm)"))
    _manifest(args, out, outputs, t0, elements=spec.n_elements, rows=spec.rows, cols=spec.cols,
              gamma_grid_db=grid.tolist(), passive_dbsm=res.extra["passive_dbsm"])
    print(f"N={spec.n_elements}: passive {res.extra['passive_dbsm']:.3f} dBsm, "
          f"baseline {args.baseline_dbsm:.1f} dBsm crossed at "
          f"{args.baseline_dbsm - res.extra['passive_dbsm']:.2f} dB")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="irsradar", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, gamma_default="0:40:1", scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True,
                           help="scenario JSON path or bundled name (%s)" % ", ".join(bundled_scenarios()))
        p.add_argument("--out-dir", default="out")
        p.add_argument("--plot-script", action="store_true",
                       help="also write a matplotlib script that plots the CSV")
        if gamma_default is not None:
            p.add_argument("--gamma", default=gamma_default, help="start:stop:step in dB")

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="one frame: dump beat samples, R-D map, detections")
    common(p, gamma_default=None)
    p.add_argument("--gamma", type=float, default=None, help="active IRS reflection gain (dB)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-noise", action="store_true")
    p.add_argument("--no-interference", action="store_true")
    p.add_argument("--frame-format", choices=("raw", "csv"), default="raw")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="Monte-Carlo P_D versus reflection gain")
    common(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker processes (default ${THREADS_ENV} or 1)")
    p.add_argument("--no-baseline", action="store_true", help="skip the non-IRS reference curve")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sir", help="analytic SIR versus reflection gain")
    common(p)
    p.add_argument("--printed-form", action="store_true",
                   help="use N*gamma*g^2 signal strength instead of the RCS-based echo power")
    p.set_defaults(func=cmd_sir)

    p = sub.add_parser("rcs", help="effective RCS of an active IRS versus reflection gain")
    common(p, scenario=False)
    p.add_argument("--elements", type=int, default=65536)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--carrier-hz", type=float, default=77e9)
    p.add_argument("--element-gain", type=float, default=math.pi)
    p.add_argument("--baseline-dbsm", type=float, default=10.0)
    p.set_defaults(func=cmd_rcs)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for d in exc.diagnostics:
            print(f"  {d}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
