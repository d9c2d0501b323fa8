"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 model-domain error, 4 Monte Carlo
self-check failure (some ``|z| > 5``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import montecarlo as mc
from .errors import ModelError, UnknownFigure
from .noise import CoherentSignal, PhaseDiffusion, coherent_moments, diffused_moments, estimate_phase
from .opo import (
    OpoCoupling,
    OpoDrive,
    OpoMirrorSpec,
    cavity_transmissivity,
    coupling_from_mirrors,
    drive_from_gain,
    opo_diffused_moments,
    opo_output_moments,
    phase_compression,
)
from .threshold import (
    Classification,
    SweepSpec,
    results_agree,
    threshold_bisection,
    threshold_closed_form,
    threshold_sweep,
    variance_curves,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MODEL = 3
EXIT_MC_FAIL = 4

Z_LIMIT = 5.0

PRESETS = {
    "configA": {"beta": 5.70, "gain": 2.75, "eta_in": 0.008, "eta_esc": 0.937},
    "configB": {"beta": 2.05, "gain": 3.12, "eta_in": 0.079, "eta_esc": 0.871},
}
# unpumped symmetric lossless cavity: the OPO acts as the identity
DEFAULT_COUPLING = {"eta_in": 0.5, "eta_esc": 0.5}

SWEEP_COLUMNS = ["gain", "beta", "eta_in", "eta_esc", "classification", "sigma_th_deg"]

FIGURES = ("fig4-top", "fig4-bottom", "fig6-varA", "fig6-varB", "fig6-compression")
FIG4_COUPLINGS = {"fig4-top": (0.01, 0.93), "fig4-bottom": (0.08, 0.87)}
FIG4_BETAS = (1.0, 2.0, 5.0)
FIG4_GAINS = (1.1, 6.0, 0.05)
FIG6_SIGMA_DEG = (0.0, 30.0, 0.25)
COMPRESSION_GAIN = 3.1
COMPRESSION_ANGLES_DEG = (-40.0, 0.0, 40.0)


class UsageError(Exception):
    pass


def parse_angle(text, default_unit: str = "deg") -> float:
    """Angle in radians from ``"45deg"``, ``"0.5rad"`` or a bare number in ``default_unit``."""
    if isinstance(text, (int, float)):
        value, unit = float(text), default_unit
    else:
        s = str(text).strip().lower()
        for suffix in ("deg", "rad"):
            if s.endswith(suffix):
                s, unit = s[: -len(suffix)], suffix
                break
        else:
            unit = default_unit
        try:
            value = float(s)
        except ValueError:
            raise UsageError(f"cannot parse angle {text!r}") from None
    if unit == "deg":
        return math.radians(value)
    if unit == "rad":
        return value
    raise UsageError(f"unknown angle unit {unit!r}")


def parse_range(text: str) -> tuple[float, float, float]:
    """``"lo:hi:step"`` or a single value (one-point range)."""
    parts = str(text).split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"cannot parse range {text!r}") from None
    if len(nums) == 1:
        return nums[0], nums[0], 1.0
    if len(nums) != 3:
        raise UsageError(f"range must be lo:hi:step, got {text!r}")
    return nums[0], nums[1], nums[2]


def parse_floats(text: str) -> list[float]:
    try:
        return [float(p) for p in str(text).split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


_OPO_KEYS = {"d": "d", "gain": "gain", "g": "gain", "eta-in": "eta_in", "eta-esc": "eta_esc",
             "r-ic": "r_ic", "r-oc": "r_oc", "delta": "delta_cr"}


def parse_opo(text: str) -> dict:
    """``"d=0.40,eta-in=0.08,eta-esc=0.87"`` -> parameter dict."""
    out = {}
    for item in str(text).split(","):
        if not item.strip():
            continue
        key, sep, val = item.partition("=")
        key = key.strip().lower()
        if not sep or key not in _OPO_KEYS:
            raise UsageError(f"bad --opo item {item!r}; keys: {', '.join(_OPO_KEYS)}")
        try:
            out[_OPO_KEYS[key]] = float(val)
        except ValueError:
            raise UsageError(f"bad --opo value in {item!r}") from None
    return out


@dataclass
class RunConfig:
    beta: float | None = None
    phi: float = 0.0
    sigma: float | None = None
    coupling: OpoCoupling | None = None
    drive: OpoDrive | None = None
    coupling_explicit: bool = False
    seed: int = 0
    samples: int = 1_000_000
    batches: int = 0
    batch_samples: int = 10_000
    gain_range: tuple[float, float, float] | None = None
    fmt: str | None = None
    angle_unit: str = "deg"


_LAYER_KEYS = {
    "beta", "phi", "sigma", "eta_in", "eta_esc", "gain", "d", "mirrors", "r_ic", "r_oc",
    "delta_cr", "seed", "samples", "batches", "batch_samples", "format", "angle_unit",
}


def _check_layer(layer: dict, where: str) -> None:
    unknown = set(layer) - _LAYER_KEYS
    if unknown:
        raise UsageError(f"unknown keys in {where}: {', '.join(sorted(unknown))}")
    if "gain" in layer and "d" in layer:
        raise UsageError(f"{where}: give exactly one of gain and d")
    has_eta = "eta_in" in layer or "eta_esc" in layer
    has_mirrors = "mirrors" in layer or "r_ic" in layer or "r_oc" in layer
    if has_eta and has_mirrors:
        raise UsageError(f"{where}: give either mirror reflectivities or (eta_in, eta_esc)")
    if has_eta and not ("eta_in" in layer and "eta_esc" in layer):
        raise UsageError(f"{where}: eta_in and eta_esc must be given together")


def _merge(base: dict, layer: dict) -> dict:
    """Later layers replace whole drive/coupling groups rather than mixing them."""
    out = dict(base)
    if "gain" in layer or "d" in layer:
        out.pop("gain", None)
        out.pop("d", None)
    if any(k in layer for k in ("eta_in", "eta_esc", "mirrors", "r_ic", "r_oc", "delta_cr")):
        for k in ("eta_in", "eta_esc", "mirrors", "r_ic", "r_oc", "delta_cr"):
            out.pop(k, None)
    out.update(layer)
    return out


def _mirror_spec(p: dict) -> OpoMirrorSpec:
    m = p.get("mirrors")
    if m is None:
        m = {k: p[k] for k in ("r_ic", "r_oc", "delta_cr") if k in p}
    elif isinstance(m, str):
        vals = parse_floats(m)
        if len(vals) not in (2, 3):
            raise UsageError("--mirrors takes R_ic,R_oc[,delta]")
        m = dict(zip(("r_ic", "r_oc", "delta_cr"), vals))
    if "r_ic" not in m or "r_oc" not in m:
        raise UsageError("mirror spec needs r_ic and r_oc")
    return OpoMirrorSpec(float(m["r_ic"]), float(m["r_oc"]), float(m.get("delta_cr", 0.0)))


def load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a JSON object")
    if "preset" in data:
        name = data.pop("preset")
        if name not in PRESETS:
            raise UsageError(f"unknown preset {name!r}")
        data = _merge(PRESETS[name], data)
    return data


def _args_layer(args) -> dict:
    layer = {}
    for key in ("beta", "phi", "sigma", "eta_in", "eta_esc", "d", "mirrors", "seed",
                "samples", "batches", "batch_samples"):
        val = getattr(args, key, None)
        if val is not None:
            layer[key] = val
    gain = getattr(args, "gain", None)
    if gain is not None and args.command != "sweep":
        try:
            layer["gain"] = float(gain)
        except ValueError:
            raise UsageError(f"--gain must be a number, got {gain!r}") from None
    if getattr(args, "opo", None):
        layer.update(parse_opo(args.opo))
    fmt = getattr(args, "format", None)
    if fmt is not None:
        layer["format"] = fmt
    if getattr(args, "angle_unit", None) is not None:
        layer["angle_unit"] = args.angle_unit
    return layer


def build_run_config(args) -> RunConfig:
    params: dict = {}
    if getattr(args, "preset", None):
        params = dict(PRESETS[args.preset])
    if getattr(args, "config", None):
        layer = load_config_file(args.config)
        _check_layer(layer, args.config)
        params = _merge(params, layer)
    layer = _args_layer(args)
    _check_layer(layer, "command line")
    params = _merge(params, layer)

    unit = params.get("angle_unit", "deg")
    if unit not in ("deg", "rad"):
        raise UsageError(f"angle_unit must be deg or rad, got {unit!r}")
    cfg = RunConfig(angle_unit=unit)
    if "beta" in params:
        beta = params["beta"]
        cfg.beta = [float(b) for b in beta] if isinstance(beta, list) else float(beta)
    if "phi" in params:
        cfg.phi = parse_angle(params["phi"], unit)
    if "sigma" in params:
        cfg.sigma = parse_angle(params["sigma"], unit)
    if "eta_in" in params:
        cfg.coupling = OpoCoupling(float(params["eta_in"]), float(params["eta_esc"]))
        cfg.coupling_explicit = True
    elif any(k in params for k in ("mirrors", "r_ic", "r_oc")):
        cfg.coupling = coupling_from_mirrors(_mirror_spec(params))
        cfg.coupling_explicit = True
    if isinstance(params.get("gain"), str) and ":" in params["gain"]:
        cfg.gain_range = parse_range(params["gain"])
    elif "gain" in params:
        cfg.drive = drive_from_gain(float(params["gain"]))
    elif "d" in params:
        cfg.drive = OpoDrive(float(params["d"]))
    for key, attr in (("seed", "seed"), ("samples", "samples"), ("batches", "batches"),
                      ("batch_samples", "batch_samples")):
        if key in params:
            val = params[key]
            if isinstance(val, bool) or int(val) != val:
                raise UsageError(f"{key} must be an integer, got {val!r}")
            setattr(cfg, attr, int(val))
    cfg.fmt = params.get("format")
    if cfg.fmt not in (None, "json", "csv"):
        raise UsageError(f"format must be json or csv, got {cfg.fmt!r}")
    return cfg


def _need_beta(cfg: RunConfig) -> float:
    if cfg.beta is None:
        raise UsageError("an amplitude is required (--beta or --preset)")
    if isinstance(cfg.beta, list):
        raise UsageError("this command takes a single amplitude")
    return cfg.beta


def _coupling_or_default(cfg: RunConfig) -> OpoCoupling:
    if cfg.coupling is not None:
        return cfg.coupling
    return OpoCoupling(**DEFAULT_COUPLING)


def _need_drive(cfg: RunConfig) -> OpoDrive:
    if cfg.drive is None:
        raise UsageError("an OPO drive is required (--gain, --d or --preset)")
    return cfg.drive


def _sig4(x: float) -> float:
    return float(f"{x:.4g}")


def _fmt6(x: float) -> str:
    return f"{x:.6g}"


def _moments_record(m) -> dict:
    rec = {"mean_x": m.mean_x, "mean_y": m.mean_y, "var_x": m.var_x, "var_y": m.var_y,
           "cov_xy": m.cov_xy}
    try:
        est = estimate_phase(m)
        rec["phi_hat_deg"] = math.degrees(est.phi_hat)
        rec["phase_variance"] = est.variance
    except ModelError:
        rec["phi_hat_deg"] = None
        rec["phase_variance"] = None
    return rec


def emit_json(record, out) -> None:
    json.dump(record, out, indent=2, allow_nan=False, ensure_ascii=False)
    out.write("\n")


def cmd_moments(cfg: RunConfig, args, out) -> int:
    beta = _need_beta(cfg)
    signal = CoherentSignal(beta, cfg.phi)
    use_opo = not args.no_opo and (cfg.drive is not None or cfg.coupling_explicit)
    record = {
        "beta": signal.beta,
        "phi_deg": math.degrees(signal.phi),
        "sigma_deg": None if cfg.sigma is None else math.degrees(cfg.sigma),
        "stages": {"coherent": _moments_record(coherent_moments(signal))},
    }
    stages = record["stages"]
    if cfg.sigma is not None:
        stages["diffused"] = _moments_record(diffused_moments(signal, PhaseDiffusion(cfg.sigma)))
    if use_opo:
        coupling = _coupling_or_default(cfg)
        drive = _need_drive(cfg)
        record["opo"] = {"eta_in": coupling.eta_in, "eta_esc": coupling.eta_esc,
                         "d": drive.d, "gain": drive.gain,
                         "transmissivity": cavity_transmissivity(coupling)}
        if cfg.sigma is None:
            m = opo_output_moments(signal, coupling, drive)
        else:
            if signal.phi != 0.0:
                raise ModelError("moments of a diffused state through the OPO need phi = 0")
            m = opo_diffused_moments(signal.beta, PhaseDiffusion(cfg.sigma), coupling, drive)
        stages["opo"] = _moments_record(m)
    emit_json(record, out)
    return EXIT_OK


def _result_record(res) -> dict:
    return {
        "classification": res.classification.value,
        "sigma_th_rad": res.sigma_th,
        "sigma_th_deg": None if res.sigma_th is None else _sig4(res.sigma_th_deg),
    }


def threshold_record(beta: float, coupling: OpoCoupling, drive: OpoDrive) -> dict:
    closed = threshold_closed_form(beta, coupling, drive)
    bisected = threshold_bisection(beta, coupling, drive)
    return {
        "beta": beta,
        "eta_in": coupling.eta_in,
        "eta_esc": coupling.eta_esc,
        "gain": drive.gain,
        "d": drive.d,
        "classification": closed.classification.value,
        "sigma_th_deg": None if closed.sigma_th is None else _sig4(closed.sigma_th_deg),
        "method_agreement": results_agree(closed, bisected),
        "closed_form": _result_record(closed),
        "bisection": _result_record(bisected),
    }


def cmd_threshold(cfg: RunConfig, args, out) -> int:
    emit_json(threshold_record(_need_beta(cfg), _coupling_or_default(cfg), _need_drive(cfg)), out)
    return EXIT_OK


def sweep_cell(row) -> str:
    """CSV value of sigma_th_deg: the threshold, 0 if always beneficial, inf if never, nan if neutral."""
    c = row.classification
    if c is Classification.THRESHOLD:
        return _fmt6(row.sigma_th_deg)
    if c is Classification.ALWAYS_BENEFICIAL:
        return "0"
    if c is Classification.NEVER_BENEFICIAL:
        return "inf"
    return "nan"


def write_sweep_csv(rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_fmt6(r.gain), _fmt6(r.beta), _fmt6(r.eta_in), _fmt6(r.eta_esc),
                    r.classification.value, sweep_cell(r)])


def cmd_sweep(cfg: RunConfig, args, out) -> int:
    if args.gain is not None:
        gain_range = parse_range(args.gain)
    elif cfg.gain_range is not None:
        gain_range = cfg.gain_range
    elif cfg.drive is not None:
        g = cfg.drive.gain
        gain_range = (g, g, 1.0)
    else:
        raise UsageError("sweep needs --gain lo:hi:step (or a preset)")
    if args.beta_list is not None:
        betas = parse_floats(args.beta_list)
    elif isinstance(cfg.beta, list):
        betas = cfg.beta
    else:
        betas = [_need_beta(cfg)]
    spec = SweepSpec(gain_range, tuple(betas), _coupling_or_default(cfg))
    rows = threshold_sweep(spec)
    if (cfg.fmt or "csv") == "csv":
        write_sweep_csv(rows, out)
    else:
        emit_json([
            {"gain": r.gain, "beta": r.beta, "eta_in": r.eta_in, "eta_esc": r.eta_esc,
             "classification": r.classification.value,
             "sigma_th_deg": r.sigma_th_deg if r.classification is Classification.THRESHOLD else None,
             "always_beneficial": r.always_beneficial, "methods_agree": r.methods_agree}
            for r in rows
        ], out)
    return EXIT_OK


def _mc_state(cfg: RunConfig, args) -> mc.StateSpec:
    beta = _need_beta(cfg)
    use_opo = not args.no_opo and (cfg.drive is not None or cfg.coupling_explicit)
    sigma = cfg.sigma or 0.0
    if use_opo:
        coupling, drive = _coupling_or_default(cfg), _need_drive(cfg)
        if cfg.sigma is None:
            return mc.StateSpec.opo_output(beta, coupling, drive, cfg.phi)
        return mc.StateSpec.opo_diffused(beta, sigma, coupling, drive, cfg.phi)
    if cfg.sigma is None:
        return mc.StateSpec.coherent(beta, cfg.phi)
    return mc.StateSpec.phase_diffused(beta, sigma, cfg.phi)


def cmd_mc(cfg: RunConfig, args, out) -> int:
    state = _mc_state(cfg, args)
    sampler = mc.SamplerConfig(seed=cfg.seed, n_samples=cfg.samples)
    records = [r.as_dict() for r in mc.calibrate_moments(state, sampler)]
    record = {
        "state": state.kind,
        "beta": state.beta,
        "phi_deg": math.degrees(state.phi),
        "sigma_deg": math.degrees(state.sigma),
        "seed": cfg.seed,
        "samples": cfg.samples,
        "quantities": records,
    }
    if cfg.batches:
        exp = mc.mc_phase_estimator_experiment(
            state, mc.SamplerConfig(cfg.seed, cfg.batch_samples, cfg.batches)
        )
        records.append({"quantity": "phase_variance", "analytic": exp.analytic,
                        "empirical": exp.scaled_variance, "std_error": exp.std_error,
                        "z": exp.z})
        record["batches"] = cfg.batches
        record["batch_samples"] = cfg.batch_samples
    max_z = max(abs(r["z"]) for r in records)
    record["max_abs_z"] = max_z
    record["passed"] = max_z <= Z_LIMIT
    emit_json(record, out)
    return EXIT_OK if record["passed"] else EXIT_MC_FAIL


def reproduce_rows(figure_id: str) -> tuple[list[str], list[list[str]]]:
    """Header and formatted rows for one reproducible figure dataset."""
    if figure_id in FIG4_COUPLINGS:
        eta_in, eta_esc = FIG4_COUPLINGS[figure_id]
        rows = threshold_sweep(SweepSpec(FIG4_GAINS, FIG4_BETAS, OpoCoupling(eta_in, eta_esc)))
        buf = io.StringIO()
        write_sweep_csv(rows, buf)
        lines = list(csv.reader(io.StringIO(buf.getvalue())))
        return lines[0], lines[1:]
    if figure_id in ("fig6-varA", "fig6-varB"):
        p = PRESETS["configA" if figure_id.endswith("A") else "configB"]
        lo, hi, step = (math.radians(v) for v in FIG6_SIGMA_DEG)
        curves = variance_curves(p["beta"], OpoCoupling(p["eta_in"], p["eta_esc"]),
                                 drive_from_gain(p["gain"]), (lo, hi, step))
        rows = [[_fmt6(s), _fmt6(a), _fmt6(b)] for s, a, b in
                zip(curves.sigma_deg, curves.var_no_opo, curves.var_with_opo)]
        return ["sigma_deg", "var_no_opo", "var_with_opo"], rows
    if figure_id == "fig6-compression":
        drive = drive_from_gain(COMPRESSION_GAIN)
        rows = [[_fmt6(t), _fmt6(COMPRESSION_GAIN), _fmt6(drive.d),
                 _fmt6(math.degrees(phase_compression(math.radians(t), drive)))]
                for t in COMPRESSION_ANGLES_DEG]
        return ["theta0_deg", "gain", "d", "theta_d_deg"], rows
    raise UnknownFigure(f"unknown figure {figure_id!r}; choose from {', '.join(FIGURES)}")


def cmd_reproduce(cfg: RunConfig, args, out) -> int:
    ids = FIGURES if args.figure == "all" else (args.figure,)
    outdir = Path(args.out)
    for fid in ids:
        header, rows = reproduce_rows(fid)
        if args.out == "-":
            w = csv.writer(out, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
            continue
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / f"{fid}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        out.write(f"{path}\n")
    return EXIT_OK


def _add_params(p: argparse.ArgumentParser, *, sweep: bool = False) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", metavar="PATH", help="JSON parameter file")
    if sweep:
        p.add_argument("--beta", dest="beta_list", metavar="B1,B2,...")
        p.add_argument("--gain", metavar="LO:HI:STEP")
    else:
        p.add_argument("--beta", type=float)
        p.add_argument("--gain", metavar="G")
    p.add_argument("--phi", help="input phase, e.g. 45deg or 0.3rad (default unit deg)")
    p.add_argument("--sigma", help="phase-diffusion amplitude (default unit deg)")
    p.add_argument("--eta-in", type=float)
    p.add_argument("--eta-esc", type=float)
    p.add_argument("--d", type=float, help="pump parameter sqrt(P/P_th)")
    p.add_argument("--mirrors", metavar="R_IC,R_OC[,DELTA]")
    p.add_argument("--opo", metavar="KEY=VAL,...", help="e.g. d=0.40,eta-in=0.08,eta-esc=0.87")
    p.add_argument("--no-opo", action="store_true", help="ignore any OPO settings")
    p.add_argument("--angle-unit", choices=("deg", "rad"), help="unit of bare angle numbers")
    p.add_argument("--format", choices=("json", "csv"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasesqueeze",
        description="Phase diffusion through a degenerate OPO: moments, thresholds, Monte Carlo.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("moments", help="quadrature moments along coherent -> diffusion -> OPO")
    _add_params(p)
    p = sub.add_parser("threshold", help="phase-noise threshold, closed form and bisection")
    _add_params(p)
    p = sub.add_parser("sweep", help="threshold table over gain and amplitude")
    _add_params(p, sweep=True)
    p = sub.add_parser("mc", help="Monte Carlo homodyne check of the analytic moments")
    _add_params(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--batches", type=int, help="run the two-copy estimator experiment too")
    p.add_argument("--batch-samples", type=int)
    p = sub.add_parser("reproduce", help="write figure datasets as CSV")
    p.add_argument("figure", help=f"one of {', '.join(FIGURES)} or 'all'")
    p.add_argument("--out", default=".", help="output directory, or - for stdout")
    return parser


COMMANDS = {
    "moments": cmd_moments,
    "threshold": cmd_threshold,
    "sweep": cmd_sweep,
    "mc": cmd_mc,
    "reproduce": cmd_reproduce,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig() if args.command == "reproduce" else build_run_config(args)
        return COMMANDS[args.command](cfg, args, out)
    except UsageError as exc:
        print(f"phasesqueeze: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"phasesqueeze: model error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ValueError as exc:
        # parameter-level validation in the dataclasses
        print(f"phasesqueeze: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
