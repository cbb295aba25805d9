"""Command-line front end: one subcommand per experiment, CSV out.

Configuration resolves in three layers: schema defaults, then a JSON
config file (``--config``), then command-line flags.  Unknown keys and
out-of-range values are rejected with the offending key named.  Every
run emits a comment-prefixed metadata block (tool version, seed,
resolved-config hash, timestamp) followed by a fixed CSV schema, so
reruns with the same seed are byte-identical up to the timestamp line.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import re
import sys
import datetime
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import __version__, streams
from .channel import ChannelModel, snr_to_noise_variance
from .detector import VoteCensus
from .encoder import EncoderConfig, encode
from .experiments import (
    CerExperimentConfig,
    run_cer_experiment,
    run_pmepr_experiment,
    validate_lemma1,
)
from .guidance import STRATEGIES, GuidanceConfig, run_mission
from .sequences import pmepr_db
from .streams import substream

__all__ = ["main", "console_entry", "parse_config", "ExperimentSpec", "CliError"]

GEN_STREAM = 6

CHANNEL_ALIASES = {
    "awgn": "awgn",
    "flat": "flat_rayleigh",
    "flat_rayleigh": "flat_rayleigh",
    "selective": "selective_rayleigh",
    "selective_rayleigh": "selective_rayleigh",
}


class CliError(Exception):
    """Single-line, machine-parsable failure."""


# --------------------------------------------------------------------------
# Parameter schemas


def _as_int(key: str, v) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise CliError(f"{key}: expected an integer, got {v!r}")
    try:
        out = int(str(v), 0) if isinstance(v, str) else int(v)
    except ValueError:
        raise CliError(f"{key}: expected an integer, got {v!r}") from None
    if isinstance(v, float) and v != out:
        raise CliError(f"{key}: expected an integer, got {v!r}")
    return out


def _as_float(key: str, v) -> float:
    if isinstance(v, bool):
        raise CliError(f"{key}: expected a number, got {v!r}")
    try:
        return float(v)
    except (TypeError, ValueError):
        raise CliError(f"{key}: expected a number (or 'inf'), got {v!r}") from None


def _as_bool(key: str, v) -> bool:
    if isinstance(v, bool):
        return v
    text = str(v).strip().lower()
    if text in ("on", "true", "1", "yes"):
        return True
    if text in ("off", "false", "0", "no"):
        return False
    raise CliError(f"{key}: expected on/off, got {v!r}")


def _split(v) -> list:
    if isinstance(v, str):
        return [s for s in v.replace(";", ",").split(",") if s.strip()]
    if isinstance(v, (list, tuple)):
        return list(v)
    raise TypeError


def _as_floats(key: str, v) -> tuple[float, ...]:
    try:
        return tuple(_as_float(key, x) for x in _split(v))
    except TypeError:
        raise CliError(f"{key}: expected a list of numbers, got {v!r}") from None


def _as_ints(key: str, v) -> tuple[int, ...]:
    try:
        return tuple(_as_int(key, x) for x in _split(v))
    except TypeError:
        raise CliError(f"{key}: expected a list of integers, got {v!r}") from None


def _as_vec3(key: str, v) -> tuple[float, float, float]:
    vals = _as_floats(key, v)
    if len(vals) != 3:
        raise CliError(f"{key}: expected 3 coordinates, got {len(vals)}")
    return vals


def _as_waypoints(key: str, v) -> tuple[tuple[float, float, float], ...]:
    if isinstance(v, str):
        groups = [g for g in v.split(";") if g.strip()]
    elif isinstance(v, (list, tuple)):
        groups = list(v)
    else:
        raise CliError(f"{key}: expected waypoints, got {v!r}")
    if not groups:
        raise CliError(f"{key}: need at least one waypoint")
    return tuple(_as_vec3(key, g) for g in groups)


def _as_channel(key: str, v) -> str:
    text = str(v).strip().lower()
    if text not in CHANNEL_ALIASES:
        raise CliError(f"{key}: expected one of {sorted(set(CHANNEL_ALIASES))}, got {v!r}")
    return CHANNEL_ALIASES[text]


def _as_choice(choices):
    def convert(key: str, v) -> str:
        text = str(v).strip()
        if text not in choices:
            raise CliError(f"{key}: expected one of {list(choices)}, got {v!r}")
        return text

    return convert


@dataclass(frozen=True)
class Param:
    name: str
    convert: Callable[[str, Any], Any]
    default: Any
    help: str


def _p(name, convert, default, help):  # noqa: A002 - terse schema rows
    return Param(name, convert, default, help)


SCHEMAS: dict[str, tuple[Param, ...]] = {
    "gen": (
        _p("votes", _as_ints, (1, 0, 0), "vote vector, e.g. 1,0,-1"),
        _p("perm", _as_ints, None, "coordinate permutation of 1..m (default identity)"),
        _p("alpha", _as_float, math.inf, "vote amplitude scale (inf = exact limit)"),
        _p("n_phases", _as_int, 2, "phase alphabet size (even)"),
        _p("phase_randomization", _as_bool, False, "draw random phase coefficients"),
        _p("oversample", _as_int, 16, "envelope oversampling factor"),
    ),
    "pmepr": (
        _p("m", _as_int, 8, "sequence length exponent"),
        _p("p", _as_float, 0.1, "P(vote = +1)"),
        _p("z", _as_float, 0.1, "P(vote = 0)"),
        _p("alpha", _as_float, math.inf, "vote amplitude scale"),
        _p("samples", _as_int, 10_000, "number of encoded sequences"),
        _p("sensors", _as_int, 1, "sensor count (metadata; ratio is per transmitter)"),
        _p("oversample", _as_int, 16, "envelope oversampling factor"),
        _p("workers", _as_int, 1, "thread count (does not change results)"),
    ),
    "cer": (
        _p("sensors", _as_int, 50, "sensor count K"),
        _p("m_list", _as_ints, (2, 4, 6, 8), "length exponents to sweep"),
        _p("p_sweep", _as_floats, (0.2, 0.35, 0.5, 0.65, 0.8), "P(+1) grid"),
        _p("z", _as_float, 0.1, "P(vote = 0)"),
        _p("channel", _as_channel, "selective_rayleigh", "awgn | flat | selective"),
        _p("snr_db", _as_float, 10.0, "per-sensor SNR in dB"),
        _p("alpha", _as_float, math.inf, "vote amplitude scale"),
        _p("trials", _as_int, 10_000, "Monte-Carlo rounds per sweep point"),
        _p("n_phases", _as_int, 2, "phase alphabet size (even)"),
        _p("workers", _as_int, 1, "thread count (does not change results)"),
    ),
    "lemma1": (
        _p("k_plus", _as_int, 3, "sensors voting +1"),
        _p("k_minus", _as_int, 1, "sensors voting -1"),
        _p("k_zero", _as_int, 1, "sensors voting 0"),
        _p("alpha", _as_float, math.inf, "vote amplitude scale"),
        _p("noise_var", _as_float, 0.0, "receiver noise variance"),
        _p("m", _as_int, 3, "sequence length exponent"),
        _p("trials", _as_int, 100_000, "Monte-Carlo rounds"),
        _p("slot", _as_int, 1, "vote slot under test (1-based)"),
        _p("workers", _as_int, 1, "thread count (does not change results)"),
    ),
    "uav": (
        _p("strategy", _as_choice(STRATEGIES), "oac_mv", "feedback strategy"),
        _p("m", _as_int, 6, "sequence length exponent (>= 3 for oac_mv)"),
        _p("sensors", _as_int, 50, "sensor count K"),
        _p("snr_db", _as_float, 10.0, "per-sensor SNR in dB"),
        _p("channel", _as_channel, "selective_rayleigh", "awgn | flat | selective"),
        _p("sensor_var", _as_float, 2.0, "position-estimate noise variance"),
        _p("t_update", _as_float, 0.01, "feedback period in seconds"),
        _p("mu", _as_float, 2.0, "feedback gain"),
        _p("u_limit", _as_float, 3.0, "velocity cap in m/s"),
        _p("alpha", _as_float, math.inf, "vote amplitude scale"),
        _p("eps", _as_float, 0.25, "waypoint arrival radius in meters"),
        _p("max_rounds", _as_int, 20_000, "round cap before giving up"),
        _p("waypoints", _as_waypoints, ((10.0, 8.0, 6.0),), "x,y,z;x,y,z;..."),
        _p("initial", _as_vec3, (0.0, 0.0, 0.0), "start position x,y,z"),
        _p("phase_randomization", _as_bool, True, "draw random phase coefficients"),
    ),
}


@dataclass(frozen=True)
class ExperimentSpec:
    """Fully resolved run description."""

    command: str
    params: dict
    seed: int
    out: str | None

    def canonical(self) -> dict:
        doc = {"command": self.command, "seed": self.seed, "out": self.out}
        # Worker count is an execution detail: results are identical for
        # any value, so it stays out of the config identity and hash.
        doc.update((k, v) for k, v in self.params.items() if k != "workers")
        return doc

    def to_json(self) -> str:
        return json.dumps(self.canonical(), sort_keys=True, default=_json_value)

    def config_hash(self) -> str:
        """Hash of the result-determining fields (output path excluded)."""
        identity = {k: v for k, v in self.canonical().items() if k != "out"}
        doc = json.dumps(identity, sort_keys=True, default=_json_value)
        return hashlib.sha256(doc.encode()).hexdigest()[:16]


def _json_value(v):
    if isinstance(v, tuple):
        return list(v)
    raise TypeError(f"not JSON-serializable: {v!r}")


def _validate(spec: ExperimentSpec) -> None:
    """Cross-field range checks; raises CliError naming the bad key."""
    p = spec.params
    cmd = spec.command

    def need(cond: bool, key: str, msg: str):
        if not cond:
            raise CliError(f"{key}: {msg}")

    if "m" in p:
        need(1 <= p["m"] <= 16, "m", "must be in 1..16")
    if "alpha" in p:
        need(p["alpha"] > 0, "alpha", "must be > 0 (inf allowed)")
    if "n_phases" in p:
        need(p["n_phases"] >= 2, "n_phases", "must be >= 2")
        m = p.get("m", len(p.get("votes", ())))
        if m >= 2:
            need(p["n_phases"] % 2 == 0, "n_phases", "must be even for m >= 2")
    if "sensors" in p:
        need(p["sensors"] >= 1, "sensors", "must be >= 1")
    if "trials" in p:
        need(p["trials"] >= 1, "trials", "must be >= 1")
    if "samples" in p:
        need(p["samples"] >= 1, "samples", "must be >= 1")
    if "workers" in p:
        need(p["workers"] >= 1, "workers", "must be >= 1")
    if "oversample" in p:
        need(p["oversample"] >= 4, "oversample", "must be >= 4")
    if "snr_db" in p:
        need(math.isfinite(p["snr_db"]), "snr_db", "must be finite")

    if cmd == "gen":
        votes = p["votes"]
        need(1 <= len(votes) <= 16, "votes", "need 1..16 entries")
        need(all(v in (-1, 0, 1) for v in votes), "votes", "entries must be -1, 0 or +1")
        if p["perm"] is not None:
            need(
                sorted(p["perm"]) == list(range(1, len(votes) + 1)),
                "perm",
                f"must be a permutation of 1..{len(votes)}",
            )
        if len(votes) >= 2:
            need(p["n_phases"] % 2 == 0, "n_phases", "must be even for m >= 2")
    if cmd in ("pmepr", "cer"):
        need(0.0 <= p["z"] <= 1.0, "z", "must be in [0, 1]")
        ps = p["p_sweep"] if cmd == "cer" else (p["p"],)
        key = "p_sweep" if cmd == "cer" else "p"
        for val in ps:
            need(0.0 <= val <= 1.0, key, "entries must be in [0, 1]")
            need(val + p["z"] <= 1.0 + 1e-12, key, f"p={val} with z={p['z']} leaves q < 0")
        if cmd == "cer":
            need(len(p["m_list"]) >= 1, "m_list", "need at least one exponent")
            for m in p["m_list"]:
                need(1 <= m <= 16, "m_list", "entries must be in 1..16")
    if cmd == "lemma1":
        for key in ("k_plus", "k_minus", "k_zero"):
            need(p[key] >= 0, key, "must be >= 0")
        need(p["k_plus"] + p["k_minus"] + p["k_zero"] >= 1, "k_plus", "census must be non-empty")
        need(p["noise_var"] >= 0, "noise_var", "must be >= 0")
        need(1 <= p["slot"] <= p["m"], "slot", f"must be in 1..{p['m']}")
    if cmd == "uav":
        need(p["t_update"] > 0, "t_update", "must be > 0")
        need(p["mu"] > 0, "mu", "must be > 0")
        need(p["u_limit"] > 0, "u_limit", "must be > 0")
        need(p["sensor_var"] >= 0, "sensor_var", "must be >= 0")
        need(p["eps"] > 0, "eps", "must be > 0")
        need(p["max_rounds"] >= 0, "max_rounds", "must be >= 0")
        if p["strategy"] == "oac_mv":
            need(p["m"] >= 3, "m", "oac_mv needs m >= 3 (one slot per axis)")


# --------------------------------------------------------------------------
# Argument parsing and config resolution


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # Vote and coordinate lists legitimately start with a minus sign
        # ("--votes -1,0,1"); widen the negative-number detection so such
        # values are not mistaken for option names.
        self._negative_number_matcher = re.compile(
            r"^-\d+[\d.,;eE+-]*$|^-\.\d+.*$"
        )

    def error(self, message):  # keep failures single-line
        raise CliError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="airmv", description=__doc__, add_help=True)
    parser.add_argument("--version", action="version", version=f"airmv {__version__}")
    subs = parser.add_subparsers(dest="command", metavar="command")
    for cmd, schema in SCHEMAS.items():
        sp = subs.add_parser(cmd, help=f"run the {cmd} experiment", add_help=True)
        sp.add_argument("--config", default=None, help="JSON config file")
        sp.add_argument("--seed", default=None, help="master seed (default 0)")
        sp.add_argument("--out", default=None, help="output CSV path ('-' = stdout)")
        sp.add_argument(
            "--print-config",
            action="store_true",
            help="print the resolved configuration as JSON and exit",
        )
        for param in schema:
            sp.add_argument(
                f"--{param.name.replace('_', '-')}",
                dest=param.name,
                default=None,
                metavar="V",
                help=f"{param.help} (default {param.default})",
            )
    return parser


def parse_config(argv) -> tuple[ExperimentSpec, bool]:
    """Resolve defaults, config file and flags into a validated spec.

    Returns (spec, print_config_requested).
    """
    args = _build_parser().parse_args(argv)
    if args.command is None:
        raise CliError("missing command (one of: " + ", ".join(SCHEMAS) + ")")
    schema = SCHEMAS[args.command]
    by_name = {param.name: param for param in schema}

    resolved = {param.name: param.default for param in schema}
    seed, out = 0, None

    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise CliError(f"config: cannot read {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise CliError(f"config: invalid JSON in {args.config}: {exc.msg}") from None
        if not isinstance(doc, dict):
            raise CliError("config: top-level JSON value must be an object")
        for key, value in doc.items():
            if key == "command":
                if value != args.command:
                    raise CliError(f"command: config file is for {value!r}, not {args.command!r}")
            elif key == "seed":
                seed = _as_int("seed", value)
            elif key == "out":
                if value is not None and not isinstance(value, str):
                    raise CliError("out: expected a path string or null")
                out = value
            elif key in by_name:
                resolved[key] = value if value is None else by_name[key].convert(key, value)
            else:
                raise CliError(f"{key}: unknown configuration key")

    for param in schema:
        flag_value = getattr(args, param.name)
        if flag_value is not None:
            resolved[param.name] = param.convert(param.name, flag_value)
    if args.seed is not None:
        seed = _as_int("seed", args.seed)
    if args.out is not None:
        out = args.out

    spec = ExperimentSpec(command=args.command, params=resolved, seed=seed, out=out)
    _validate(spec)
    return spec, bool(args.print_config)


# --------------------------------------------------------------------------
# CSV emission


def _format_value(v, float_fmt: str) -> str:
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return float_fmt % (float(v) + 0.0)  # folds -0.0 into 0.0
    return str(v)


def emit_csv(dest, header: str, rows, metadata: dict, float_fmt: str = "%.9g") -> None:
    """Write the metadata comment block, header and rows to dest.

    ``dest`` of None or '-' writes to stdout.  Reruns of the same spec
    differ only in the generated_at line.
    """
    lines = [f"# {key}={_format_value(value, float_fmt)}" for key, value in metadata.items()]
    stamp = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    lines.append(f"# generated_at={stamp}")
    lines.append(header)
    for row in rows:
        lines.append(",".join(_format_value(v, float_fmt) for v in row))
    text = "\n".join(lines) + "\n"
    if dest is None or dest == "-":
        sys.stdout.write(text)
        return
    try:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"out: cannot write {dest}: {exc.strerror}") from None


def _base_metadata(spec: ExperimentSpec) -> dict:
    return {
        "airmv_version": __version__,
        "command": spec.command,
        "seed": spec.seed,
        "config_sha256": spec.config_hash(),
    }


# --------------------------------------------------------------------------
# Runners


def _run_gen(spec: ExperimentSpec) -> None:
    p = spec.params
    votes = p["votes"]
    cfg = EncoderConfig(
        m=len(votes),
        perm=p["perm"],
        alpha=p["alpha"],
        n_phases=p["n_phases"],
        phase_randomization=p["phase_randomization"],
    )
    rng = substream(spec.seed, GEN_STREAM)
    seq = encode(votes, cfg, rng)
    meta = _base_metadata(spec)
    meta["pmepr_db"] = pmepr_db(seq, p["oversample"])
    meta["squared_norm"] = float(np.sum(np.abs(seq) ** 2))
    rows = [(i, float(v.real), float(v.imag)) for i, v in enumerate(seq)]
    # Full precision: these vectors serve as golden references.
    emit_csv(spec.out, "index,re,im", rows, meta, float_fmt="%.17g")


def _run_pmepr(spec: ExperimentSpec) -> None:
    p = spec.params
    result = run_pmepr_experiment(
        n_sensors=p["sensors"],
        m=p["m"],
        p=p["p"],
        z=p["z"],
        alpha=p["alpha"],
        samples=p["samples"],
        seed=spec.seed,
        oversample=p["oversample"],
        workers=p["workers"],
    )
    meta = _base_metadata(spec)
    meta.update(
        m=result.m, K=result.n_sensors, p=result.p, q=result.q, z=result.z,
        alpha=result.alpha, samples=result.samples, max_pmepr_db=result.max_db,
    )
    emit_csv(spec.out, result.CSV_HEADER, result.to_rows(), meta)


def _run_cer(spec: ExperimentSpec) -> None:
    p = spec.params
    cfg = CerExperimentConfig(
        n_sensors=p["sensors"],
        m_list=p["m_list"],
        p_sweep=p["p_sweep"],
        z=p["z"],
        channel=ChannelModel(p["channel"], noise_var=snr_to_noise_variance(p["snr_db"])),
        alpha=p["alpha"],
        trials=p["trials"],
        seed=spec.seed,
        n_phases=p["n_phases"],
    )
    result = run_cer_experiment(cfg, workers=p["workers"])
    emit_csv(spec.out, result.CSV_HEADER, result.to_rows(), _base_metadata(spec))


def _run_lemma1(spec: ExperimentSpec) -> None:
    p = spec.params
    report = validate_lemma1(
        VoteCensus(p["k_plus"], p["k_minus"], p["k_zero"]),
        alpha=p["alpha"],
        noise_var=p["noise_var"],
        m=p["m"],
        trials=p["trials"],
        seed=spec.seed,
        slot=p["slot"],
        workers=p["workers"],
    )
    meta = _base_metadata(spec)
    meta["passed"] = report.passed
    emit_csv(spec.out, report.CSV_HEADER, report.to_rows(), meta)


def _run_uav(spec: ExperimentSpec) -> None:
    p = spec.params
    cfg = GuidanceConfig(
        strategy=p["strategy"],
        t_update=p["t_update"],
        mu=p["mu"],
        u_limit=p["u_limit"],
        sensor_var=p["sensor_var"],
        n_sensors=p["sensors"],
        snr_db=p["snr_db"],
        m=p["m"],
        channel_kind=p["channel"],
        alpha=p["alpha"],
        phase_randomization=p["phase_randomization"],
        waypoint_eps=p["eps"],
        max_rounds=p["max_rounds"],
    )
    log = run_mission(p["waypoints"], p["initial"], cfg, seed=spec.seed)
    meta = _base_metadata(spec)
    meta.update(
        strategy=log.strategy,
        completed=log.completed,
        rounds=log.rounds,
        final_x=float(log.final_position[0]),
        final_y=float(log.final_position[1]),
        final_z=float(log.final_position[2]),
    )
    if not log.completed:
        print(
            f"warning: max_rounds={p['max_rounds']} reached before the final waypoint",
            file=sys.stderr,
        )
    emit_csv(spec.out, log.CSV_HEADER, log.to_rows(), meta)


RUNNERS = {
    "gen": _run_gen,
    "pmepr": _run_pmepr,
    "cer": _run_cer,
    "lemma1": _run_lemma1,
    "uav": _run_uav,
}


def main(argv=None) -> int:
    """Entry point; returns the process exit code."""
    try:
        spec, print_only = parse_config(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if print_only:
        print(spec.to_json())
        return 0
    try:
        RUNNERS[spec.command](spec)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
