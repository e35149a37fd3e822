"""``chanshort`` command-line front end.

Every command reads an optional JSON config (``--config``), applies
``--set key=value`` overrides and writes JSON or CSV to ``--out`` (stdout by
default). Exit codes: 0 success, 1 acceptance or rate-ordering failure,
2 usage, config or design error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from .channel import ChannelError, channel_from_dict
from .design import DesignError, TruncationWarning, filters_to_dict
from .montecarlo import (SHORTENERS, SimConfig, delay_sweep, design_filters, run,
                         sigma_experiment, write_results_csv)
from .rates import rate_report, write_rates_csv
from .spectral import FrequencyGrid

log = logging.getLogger("chanshort")

COMMANDS = ("design", "rates", "simulate", "sweep-sigma", "sweep-delay", "verify")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "channel": {"preset": "epr4", "snr_db": 10.0},
    "shortener": "fom",
    "sigma": 1.0,
    "nu": 1,
    "modulation": "bpsk",
    "d": None,
    "block_len": 1064,
    "n_blocks": 100,
    "snr_db": [10.0],
    "seed": 0,
    "grid_points": 4096,
    "units": "nats",
    "sigma_grid": [round(0.1 * k, 1) for k in range(11)],
    "d_values": None,
    "target": 0.5,
    "only": None,
}
CHANNEL_KEYS = {"name", "preset", "taps_re", "taps_im", "n0", "snr_db"}


class UsageError(Exception):
    pass


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> None:
    """Apply one ``key=value`` (dotted keys reach into ``channel``)."""
    key, sep, raw = assignment.partition("=")
    if not sep or not key:
        raise UsageError(f"--set expects key=value, got {assignment!r}")
    path = key.split(".")
    if path[0] not in DEFAULTS:
        raise UsageError(f"unknown config key {path[0]!r}")
    if len(path) == 1:
        cfg[key] = _parse_value(raw)
        return
    if path[0] != "channel" or len(path) != 2 or path[1] not in CHANNEL_KEYS:
        raise UsageError(f"unknown config key {key!r}")
    chan = dict(cfg.get("channel") or {})
    chan[path[1]] = _parse_value(raw)
    if path[1] == "preset":
        chan.pop("taps_re", None)
        chan.pop("taps_im", None)
    cfg["channel"] = chan


def load_config(args) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS))
    if args.config is not None:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            user = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from None
        if not isinstance(user, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(user) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    for assignment in args.set or ():
        apply_override(cfg, assignment)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.grid_points is not None:
        cfg["grid_points"] = args.grid_points
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["shortener"] not in SHORTENERS:
        raise UsageError(f"shortener must be one of {SHORTENERS}")
    try:
        sigma = float(cfg["sigma"])
    except (TypeError, ValueError):
        raise UsageError("sigma must be a number") from None
    if not 0.0 <= sigma <= 1.0:
        raise UsageError("sigma must lie in [0, 1]")
    if not isinstance(cfg["nu"], int) or cfg["nu"] < 0:
        raise UsageError("nu must be a non-negative integer")
    if int(cfg["grid_points"]) < 16:
        raise UsageError("grid_points must be at least 16")
    if cfg["units"] not in ("nats", "bits"):
        raise UsageError("units must be 'nats' or 'bits'")
    if not isinstance(cfg["channel"], dict):
        raise UsageError("channel must be a JSON object")
    unknown = set(cfg["channel"]) - CHANNEL_KEYS
    if unknown:
        raise UsageError(f"unknown channel keys: {sorted(unknown)}")


def _channel(cfg):
    try:
        return channel_from_dict(cfg["channel"])
    except (ChannelError, ValueError, KeyError) as exc:
        raise UsageError(f"bad channel: {exc}") from None


def _snr_list(cfg):
    return [float(s) for s in np.atleast_1d(cfg["snr_db"])]


def _sim_config(cfg) -> SimConfig:
    try:
        return SimConfig(_channel(cfg), cfg["modulation"], cfg["shortener"], float(cfg["sigma"]),
                         int(cfg["nu"]), cfg["d"], int(cfg["block_len"]), int(cfg["n_blocks"]),
                         tuple(_snr_list(cfg)), int(cfg["seed"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ------------------------------------------------------------------ commands

def cmd_design(cfg, out, err) -> int:
    cir = _channel(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        filters = design_filters(cir, cfg["shortener"], int(cfg["nu"]), float(cfg["sigma"]))
    for w in caught:
        err.write(f"warning: {w.message}\n")
    doc = filters_to_dict(filters)
    if cfg["shortener"] == "ubm":
        residual = doc["gm3_value"]
        err.write(f"stationarity: mean(M(1+G)) = {residual:.12f} "
                  f"(|value + 1| = {abs(residual + 1):.2e})\n")
    json.dump(doc, out, indent=2)
    out.write("\n")
    return EXIT_OK


def cmd_rates(cfg, out, err) -> int:
    base = _channel(cfg)
    grid = FrequencyGrid(int(cfg["grid_points"]))
    reports = [rate_report(base.with_snr_db(s), int(cfg["nu"]), grid, snr_db=s)
               for s in _snr_list(cfg)]
    write_rates_csv(reports, out, units=cfg["units"])
    bad = [(r.snr_db, r.violations()) for r in reports if r.violations()]
    for snr, names in bad:
        err.write(f"ordering violated at {snr:g} dB: {', '.join(names)}\n")
    return EXIT_FAIL if bad else EXIT_OK


def cmd_simulate(cfg, out, err) -> int:
    write_results_csv(run(_sim_config(cfg)), out)
    return EXIT_OK


def cmd_sweep_sigma(cfg, out, err) -> int:
    sc = _sim_config(cfg)
    out.write("# chanshort-sigma/1\nsnr_db,sigma_in,sigma_out,se\n")
    for snr in sc.snr_db:
        for s_in, s_out, se in sigma_experiment(sc, snr, cfg["sigma_grid"]):
            out.write(f"{snr:g},{s_in:g},{s_out!r},{se!r}\n")
    return EXIT_OK


def cmd_sweep_delay(cfg, out, err) -> int:
    sc = _sim_config(cfg)
    L = sc.channel.length
    d_values = cfg["d_values"] or [L - 1, L + 2, L + 20]
    sweep = delay_sweep(sc, d_values, float(cfg["target"]))
    write_results_csv([r for rows in sweep.rows.values() for r in rows], out)
    for d, snr in sweep.snr_at_target.items():
        err.write(f"D={d}: normalized MI {sweep.target:g} reached at {snr:.3f} dB\n")
    return EXIT_OK


def cmd_verify(cfg, out, err) -> int:
    from .acceptance import run_all

    only = set(cfg["only"]) if cfg["only"] else None

    def report(line):
        out.write(line + "\n")
        out.flush()

    results = run_all(only=only, report=report)
    failed = [r.number for r in results if not r.passed]
    out.write(f"{len(results) - len(failed)}/{len(results)} criteria passed\n")
    return EXIT_FAIL if failed else EXIT_OK


HANDLERS = {
    "design": cmd_design,
    "rates": cmd_rates,
    "simulate": cmd_simulate,
    "sweep-sigma": cmd_sweep_sigma,
    "sweep-delay": cmd_sweep_delay,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chanshort", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--seed", type=int, help="random seed (u64)")
    p.add_argument("--grid-points", type=int, help="frequency grid size for rate integrals")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key; values are parsed as JSON when possible")
    p.add_argument("--only", type=int, action="append", metavar="N",
                   help="verify: run only criterion N (repeatable)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    err = sys.stderr
    try:
        cfg = load_config(args)
        if args.only:
            cfg["only"] = args.only
        if args.seed is not None and args.seed < 0:
            raise UsageError("seed must be non-negative")
        out = open(args.out, "w") if args.out else sys.stdout
        try:
            return HANDLERS[args.command](cfg, out, err)
        finally:
            if args.out:
                out.close()
    except UsageError as exc:
        err.write(f"chanshort: error: {exc}\n")
        return EXIT_USAGE
    except (DesignError, ChannelError) as exc:
        err.write(f"chanshort: design failed: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        err.write(f"chanshort: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
