"""Command-line front end: parse a problem config, dispatch one analysis,
and emit a deterministic CSV or JSON document.

Every output starts with the run manifest as '#'-prefixed comment lines
(tool version, command, config content digest, resolved settings), so a
result file is self-describing and byte-identical across reruns of the
same inputs.  Floats are printed with repr, the shortest round-trip
representation (at most 17 significant digits).

Config schema: {"p": [...], "k": [...], "settings": {...}} with ascending
coefficients.  settings.sigma (a filter bandwidth) is accepted as a
convenience and converted to tau = 1/sigma immediately; all internals use
tau.  Unknown settings keys are rejected.

The environment variable DIRTYLOCUS_SEED is reserved and currently
unused: every algorithm in the tool is deterministic.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .closedloop import build_problem
from .errors import (
    BifurcationSingularityError,
    ContourDegeneracyError,
    InconclusiveRouthError,
    InvalidInputError,
    NumericalFailureError,
    PoleError,
    SingularityError,
)
from .freq import asymptotic_limits, nyquist_samples, winding_number
from .locus import trace_locus
from .roots import TAU_FLOOR, certify_epsilon, critical_tau, roots_at_tau, sweep

__all__ = [
    "ProblemConfig",
    "RunManifest",
    "load_config",
    "cmd_roots",
    "cmd_sweep",
    "cmd_critical_tau",
    "cmd_locus",
    "cmd_nyquist",
    "cmd_certify",
    "main",
    "entry",
]

_COMMANDS = ("roots", "sweep", "critical-tau", "locus", "nyquist", "certify")

_ALLOWED_SETTINGS = {
    "sigma",
    "tau",
    "tau_min",
    "tau_max",
    "steps",
    "tol",
    "epsilon",
    "omega_min",
    "omega_max",
    "points_per_decade",
    "grid_density",
}

_DEFAULTS = {
    "tau": 0.0,
    "tau_min": 0.0,
    "tau_max": 1.0,
    "steps": 50,
    "tol": 1e-8,
    "omega_min": 1e-3,
    "omega_max": 1e3,
    "points_per_decade": 200,
    "grid_density": 16,
}

_MISSING = object()


@dataclass(frozen=True)
class ProblemConfig:
    """A validated problem file: coefficients, settings, content digest."""

    p: tuple[float, ...]
    k: tuple[float, ...]
    settings: dict
    digest: str


@dataclass(frozen=True)
class RunManifest:
    """Provenance header emitted at the top of every output."""

    command: str
    settings: dict
    input_digest: str
    version: str
    extra: dict = field(default_factory=dict)

    def comment_lines(self) -> list[str]:
        lines = [
            f"# dirtylocus {self.version}",
            f"# command: {self.command}",
            f"# config_digest: sha256:{self.input_digest}",
            f"# settings: {json.dumps(self.settings, sort_keys=True)}",
        ]
        for key in sorted(self.extra):
            lines.append(f"# {key}: {json.dumps(self.extra[key], sort_keys=True)}")
        return lines


def _fmt(x: float) -> str:
    return repr(float(x))


def _require_numbers(values, name: str) -> tuple[float, ...]:
    if not isinstance(values, list) or not values:
        raise InvalidInputError(f"config field '{name}' must be a nonempty list")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise InvalidInputError(f"config field '{name}' must hold finite numbers")
        out.append(float(v))
    return tuple(out)


def load_config(path: str) -> ProblemConfig:
    """Read and validate a problem config JSON file."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InvalidInputError(f"cannot read config file {path!r}: {exc}") from exc
    digest = hashlib.sha256(raw).hexdigest()
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InvalidInputError("config must be a JSON object")
    unknown = set(obj) - {"p", "k", "settings"}
    if unknown:
        raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
    p = _require_numbers(obj.get("p"), "p")
    k = _require_numbers(obj.get("k"), "k")
    settings = obj.get("settings", {})
    if not isinstance(settings, dict):
        raise InvalidInputError("config field 'settings' must be an object")
    unknown = set(settings) - _ALLOWED_SETTINGS
    if unknown:
        raise InvalidInputError(f"unknown settings keys: {sorted(unknown)}")
    settings = dict(settings)
    for key, value in settings.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidInputError(f"setting '{key}' must be a number")
    if "sigma" in settings:
        if "tau" in settings:
            raise InvalidInputError("give either settings.sigma or settings.tau, not both")
        sigma = float(settings.pop("sigma"))
        if not sigma > 0.0:
            raise InvalidInputError(f"settings.sigma must be positive, got {sigma}")
        settings["tau"] = 1.0 / sigma
    return ProblemConfig(p, k, settings, digest)


def _resolve(flag_value, config: ProblemConfig, key: str):
    """Flags beat config settings beat built-in defaults."""
    if flag_value is not None:
        return flag_value
    if key in config.settings:
        return config.settings[key]
    if key in _DEFAULTS:
        return _DEFAULTS[key]
    raise InvalidInputError(f"missing required parameter '{key}'")


def _document(manifest: RunManifest, body_lines: list[str]) -> str:
    return "\n".join(manifest.comment_lines() + body_lines) + "\n"


def cmd_roots(config: ProblemConfig, tau: float) -> str:
    """CSV of the closed-loop roots at a single tau.

    At tau=0 the roots are the exact-design baseline and are labeled
    tracked; a single positive tau carries no continuation information,
    so its rows are labeled untracked-single-tau.
    """
    cl = build_problem(config.p, config.k)
    roots = roots_at_tau(cl, tau)
    family = "tracked" if tau == 0.0 else "untracked-single-tau"
    manifest = RunManifest("roots", {"tau": tau}, config.digest, __version__)
    lines = ["re,im,family"]
    for r in roots:
        lines.append(f"{_fmt(r.real)},{_fmt(r.imag)},{family}")
    return _document(manifest, lines)


def cmd_sweep(config: ProblemConfig, tau_min: float, tau_max: float, steps: int) -> str:
    """Long-format CSV of tracked and parasitic root paths over tau.

    The grid is geometric between max(tau_min, TAU_FLOOR) and tau_max,
    plus the exact tau=0 row when tau_min = 0.  Rows inserted by the
    adaptive continuity refinement carry refined=true.
    """
    if tau_min < 0.0 or not math.isfinite(tau_min):
        raise InvalidInputError(f"tau_min must be >= 0, got {tau_min}")
    if not math.isfinite(tau_max) or tau_max <= tau_min:
        raise InvalidInputError(f"tau_max must exceed tau_min, got {tau_max}")
    if steps < 1:
        raise InvalidInputError(f"steps must be >= 1, got {steps}")
    cl = build_problem(config.p, config.k)
    lo = max(tau_min, TAU_FLOOR)
    if lo >= tau_max:
        raise InvalidInputError(f"tau_max must exceed {lo}")
    positive = [float(t) for t in np.geomspace(lo, tau_max, steps)]
    sw = sweep(cl, [0.0] + positive)
    emit_from = 0.0 if tau_min == 0.0 else lo
    manifest = RunManifest(
        "sweep",
        {"steps": steps, "tau_max": tau_max, "tau_min": tau_min},
        config.digest,
        __version__,
    )
    lines = ["tau,path_id,family,re,im,refined"]
    for idx, tau in enumerate(sw.taus):
        if tau < emit_from:
            continue
        flag = "true" if sw.refined[idx] else "false"
        for i, path in enumerate(sw.tracked):
            r = path[idx]
            lines.append(
                f"{_fmt(tau)},t{i},tracked,{_fmt(r.real)},{_fmt(r.imag)},{flag}"
            )
        if idx > 0:
            for i, path in enumerate(sw.parasitic):
                r = path[idx - 1]
                lines.append(
                    f"{_fmt(tau)},p{i},parasitic,{_fmt(r.real)},{_fmt(r.imag)},{flag}"
                )
    return _document(manifest, lines)


def cmd_critical_tau(config: ProblemConfig, tau_max: float, tol: float) -> str:
    """JSON record of the critical time constant (null when stable throughout)."""
    cl = build_problem(config.p, config.k)
    result = critical_tau(cl, tau_max, tol)
    manifest = RunManifest(
        "critical-tau", {"tau_max": tau_max, "tol": tol}, config.digest, __version__
    )
    body = {
        "tau_crit": result.tau_crit,
        "sigma_crit": result.sigma_crit,
        "bracket_width": result.bracket_width,
        "tau_max_searched": result.tau_max_searched,
    }
    return _document(manifest, [json.dumps(body, sort_keys=True, indent=2)])


def cmd_locus(
    config: ProblemConfig,
    s0: complex,
    tau0: float,
    tau1: float,
    z: complex,
    paper_literal: bool = False,
) -> str:
    """CSV of one level-set trace; ends with '# status=...' comment lines.

    With --paper-literal-rhs the tracer integrates the uncorrected ODE
    form (no s**2 factor) with the corrector disabled, and the drift
    column shows the accumulating level-set error of that form.
    """
    cl = build_problem(config.p, config.k)
    trace = trace_locus(
        cl, s0, tau0, tau1, z, paper_literal=paper_literal, correct=not paper_literal
    )
    manifest = RunManifest(
        "locus",
        {
            "paper_literal_rhs": paper_literal,
            "s0": [s0.real, s0.imag],
            "tau0": tau0,
            "tau1": tau1,
            "z": [z.real, z.imag],
        },
        config.digest,
        __version__,
    )
    header = "tau,re,im,residual,drift,denom_mag" if paper_literal else "tau,re,im,residual,denom_mag"
    lines = [header]
    for i, tau in enumerate(trace.taus):
        v = trace.values[i]
        cells = [_fmt(tau), _fmt(v.real), _fmt(v.imag), _fmt(trace.residuals[i])]
        if paper_literal:
            cells.append(_fmt(trace.drifts[i]))
        cells.append(_fmt(trace.denominators[i]))
        lines.append(",".join(cells))
    lines.append(f"# status={trace.status}")
    lines.append(f"# stop_info={trace.stop_info}")
    return _document(manifest, lines)


def cmd_nyquist(
    config: ProblemConfig,
    tau: float,
    omega_min: float,
    omega_max: float,
    points_per_decade: int,
    with_winding: bool = False,
    with_sensitivity: bool = False,
) -> str:
    """CSV of H(j*omega, tau), dH/dtau, and log-magnitude sensitivity.

    The geometric omega grid is mirrored to negative frequencies by
    conjugation, so the curve closes like a classic Nyquist plot.  With
    --winding a JSON trailer comment reports the contour winding number
    and the RHP root count; with --sensitivity the manifest carries the
    small-s/large-s sensitivity asymptotes (tau > 0 only).
    """
    if not (0.0 < omega_min < omega_max) or not math.isfinite(omega_max):
        raise InvalidInputError(
            f"need 0 < omega_min < omega_max, got {omega_min}, {omega_max}"
        )
    if points_per_decade < 1:
        raise InvalidInputError(f"points_per_decade must be >= 1, got {points_per_decade}")
    cl = build_problem(config.p, config.k)
    decades = math.log10(omega_max / omega_min)
    npts = max(2, math.ceil(decades * points_per_decade) + 1)
    pos_grid = [float(w) for w in np.geomspace(omega_min, omega_max, npts)]
    pos = nyquist_samples(cl, tau, pos_grid)
    extra = {}
    if with_sensitivity and tau > 0.0:
        small, large = asymptotic_limits(cl, tau)
        extra["asymptotes"] = {
            "small_s": [small.real, small.imag],
            "large_s": [large.real, large.imag],
        }
    settings = {
        "omega_max": omega_max,
        "omega_min": omega_min,
        "points_per_decade": points_per_decade,
        "sensitivity": with_sensitivity,
        "tau": tau,
        "winding": with_winding,
    }
    manifest = RunManifest("nyquist", settings, config.digest, __version__, extra)
    lines = ["omega,H_re,H_im,dH_re,dH_im,sensitivity"]

    def row(omega: float, h: complex, d: complex, sens: float) -> str:
        return (
            f"{_fmt(omega)},{_fmt(h.real)},{_fmt(h.imag)},"
            f"{_fmt(d.real)},{_fmt(d.imag)},{_fmt(sens)}"
        )

    for sample in reversed(pos):
        lines.append(
            row(
                -sample.omega,
                sample.H.conjugate(),
                sample.dH_dtau.conjugate(),
                sample.log_mag_sensitivity,
            )
        )
    for sample in pos:
        lines.append(row(sample.omega, sample.H, sample.dH_dtau, sample.log_mag_sensitivity))
    if with_winding:
        wn = winding_number(cl, tau)
        rhp = sum(1 for r in roots_at_tau(cl, tau) if r.real > 0.0)
        lines.append(
            "# " + json.dumps({"rhp_roots": rhp, "winding": wn.winding_number}, sort_keys=True)
        )
    return _document(manifest, lines)


def cmd_certify(config: ProblemConfig, epsilon: float, tau_max: float, grid_density: int) -> str:
    """JSON record of the sampled closeness certificate."""
    cl = build_problem(config.p, config.k)
    tau_star = certify_epsilon(cl, epsilon, tau_max, grid_density)
    manifest = RunManifest(
        "certify",
        {"epsilon": epsilon, "grid_density": grid_density, "tau_max": tau_max},
        config.digest,
        __version__,
    )
    body = {
        "disclaimer": (
            "sampled certificate: the displacement bound is verified only at "
            "the sampled tau grid points, not between them"
        ),
        "epsilon": epsilon,
        "grid": {
            "floor": TAU_FLOOR,
            "kind": "geometric",
            "points_per_decade": grid_density,
            "tau_max": tau_max,
        },
        "tau_star": tau_star,
    }
    return _document(manifest, [json.dumps(body, sort_keys=True, indent=2)])


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; bad flags are invalid input
        raise InvalidInputError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="dirtylocus",
        description=(
            "Analyze how replacing exact derivatives with low-pass-filtered "
            "(dirty) derivatives deforms the poles of a stabilized closed loop."
        ),
        epilog=(
            "The environment variable DIRTYLOCUS_SEED is reserved and unused; "
            "all analyses are deterministic."
        ),
    )
    parser.add_argument("config", help="path to the problem config JSON")
    parser.add_argument("--command", required=True, choices=_COMMANDS)
    parser.add_argument("--tau", type=float, default=None)
    parser.add_argument("--tau-min", type=float, default=None, dest="tau_min")
    parser.add_argument("--tau-max", type=float, default=None, dest="tau_max")
    parser.add_argument("--steps", type=int, default=None)
    parser.add_argument("--epsilon", type=float, default=None)
    parser.add_argument("--omega-min", type=float, default=None, dest="omega_min")
    parser.add_argument("--omega-max", type=float, default=None, dest="omega_max")
    parser.add_argument(
        "--points-per-decade", type=int, default=None, dest="points_per_decade"
    )
    parser.add_argument("--s0-re", type=float, default=None, dest="s0_re")
    parser.add_argument("--s0-im", type=float, default=0.0, dest="s0_im")
    parser.add_argument("--z-re", type=float, default=0.0, dest="z_re")
    parser.add_argument("--z-im", type=float, default=0.0, dest="z_im")
    parser.add_argument(
        "--paper-literal-rhs", action="store_true", dest="paper_literal_rhs",
        help="trace with the uncorrected (no s**2) ODE form, a negative control",
    )
    parser.add_argument("--winding", action="store_true")
    parser.add_argument("--sensitivity", action="store_true")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    return parser


def _dispatch(args: argparse.Namespace, config: ProblemConfig) -> str:
    if args.command == "roots":
        return cmd_roots(config, float(_resolve(args.tau, config, "tau")))
    if args.command == "sweep":
        return cmd_sweep(
            config,
            float(_resolve(args.tau_min, config, "tau_min")),
            float(_resolve(args.tau_max, config, "tau_max")),
            int(_resolve(args.steps, config, "steps")),
        )
    if args.command == "critical-tau":
        return cmd_critical_tau(
            config,
            float(_resolve(args.tau_max, config, "tau_max")),
            float(_resolve(None, config, "tol")),
        )
    if args.command == "locus":
        if args.s0_re is None:
            raise InvalidInputError("locus needs --s0-re (and optionally --s0-im)")
        return cmd_locus(
            config,
            complex(args.s0_re, args.s0_im),
            float(_resolve(args.tau_min, config, "tau_min")),
            float(_resolve(args.tau_max, config, "tau_max")),
            complex(args.z_re, args.z_im),
            paper_literal=args.paper_literal_rhs,
        )
    if args.command == "nyquist":
        return cmd_nyquist(
            config,
            float(_resolve(args.tau, config, "tau")),
            float(_resolve(args.omega_min, config, "omega_min")),
            float(_resolve(args.omega_max, config, "omega_max")),
            int(_resolve(args.points_per_decade, config, "points_per_decade")),
            with_winding=args.winding,
            with_sensitivity=args.sensitivity,
        )
    if args.command == "certify":
        if args.epsilon is None and "epsilon" not in config.settings:
            raise InvalidInputError("certify needs --epsilon (or settings.epsilon)")
        return cmd_certify(
            config,
            float(_resolve(args.epsilon, config, "epsilon")),
            float(_resolve(args.tau_max, config, "tau_max")),
            int(_resolve(None, config, "grid_density")),
        )
    raise InvalidInputError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    """Run one analysis; returns the process exit code.

    0: success (bifurcation findings included); 1: invalid input;
    2: numerical failure (non-convergence, singular evaluation, contour
    degeneracy).
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_config(args.config)
        text = _dispatch(args, config)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        NumericalFailureError,
        SingularityError,
        PoleError,
        ContourDegeneracyError,
        InconclusiveRouthError,
        BifurcationSingularityError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def entry() -> None:
    raise SystemExit(main())
