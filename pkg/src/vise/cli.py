"""Command-line front end.

Subcommands: threshold, expectation, ladder, curve, simulate, standardize.
Exit codes: 0 ok, 2 invalid parameters, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from typing import Sequence

from . import environments as env
from . import voting
from .environments import FamilySweep, ParameterError
from .montecarlo import estimate_expected_increment, run_dynamics

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 2, 3
COMMANDS = ("threshold", "expectation", "ladder", "curve", "simulate", "standardize")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class CommandConfig:
    command: str
    family: str | None = None
    a: float | None = None
    b: float | None = None
    mu: float | None = None
    sigma: float | None = None
    k: float | None = None
    lam: float | None = None
    spec: str | None = None
    n: int | None = None
    alpha: float | None = None
    grid: tuple[float, float, float] | None = None
    reps: int | None = None
    seed: int | None = None
    steps: int | None = None
    fig: int | None = None
    out: str | None = None
    trajectory: str | None = None
    format: str = "text"

    def __post_init__(self):
        if self.grid is not None:
            lo, hi, step = self.grid
            if not step > 0:
                raise CliError(f"grid step must be positive, got {step}")
            if lo > hi:
                raise CliError(f"grid needs lo <= hi, got {lo}:{hi}")
        if self.reps is not None and self.reps < 2:
            raise CliError(f"--reps must be at least 2, got {self.reps}")
        if self.n is not None and self.n < 1:
            raise CliError(f"--n must be a positive integer, got {self.n}")


# -- parsing -----------------------------------------------------------------

def parse_real(text) -> float:
    """Real number, also accepting fractions such as ``11/21``."""
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}") from None


def parse_grid(text) -> tuple[float, float, float]:
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:step, got {text!r}")
    return tuple(parse_real(p) for p in parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vise", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file whose keys mirror the long flags")
        p.add_argument("--spec", help='distribution as "family=normal mu=0 sigma=1" or JSON')
        p.add_argument("--family")
        p.add_argument("--a", type=parse_real)
        p.add_argument("--b", type=parse_real)
        p.add_argument("--mu", type=parse_real)
        p.add_argument("--sigma", type=parse_real)
        p.add_argument("--k", type=parse_real)
        p.add_argument("--lambda", dest="lam", type=parse_real)
        p.add_argument("--n", type=int)
        p.add_argument("--alpha", type=parse_real, help="relative threshold, e.g. 0.5 or 11/21")
        p.add_argument("--grid", type=parse_grid, help="lo:hi:step")
        p.add_argument("--reps", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--steps", type=int, help="simulate: also run a utility trajectory of this length")
        p.add_argument("--trajectory", help="simulate: trajectory CSV path")
        p.add_argument("--fig", type=int, choices=range(1, 11), metavar="N")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("text", "csv", "json"))
    return parser


_CONFIG_KEYS = {f.name for f in fields(CommandConfig)} - {"command"}


def config_from_args(args: argparse.Namespace) -> CommandConfig:
    values: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise CliError(f"cannot read config {args.config}: {exc}", EXIT_IO) from None
        except json.JSONDecodeError as exc:
            raise CliError(f"config {args.config} is not valid JSON: {exc}") from None
        for key, value in raw.items():
            key = {"lambda": "lam"}.get(key, key)
            if key not in _CONFIG_KEYS:
                raise CliError(f"unknown config key {key!r}")
            values[key] = value
        for key in ("a", "b", "mu", "sigma", "k", "lam", "alpha"):
            if values.get(key) is not None:
                values[key] = parse_real(values[key])
        if values.get("grid") is not None:
            values["grid"] = parse_grid(values["grid"])
    for key in _CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    values.setdefault("format", "text")
    return CommandConfig(command=args.command, **values)


def spec_from_config(cfg: CommandConfig, default_family: str | None = None) -> env.DistributionSpec:
    """Distribution from --spec or the individual flags.

    Missing location/scale flags default to a zero-mean, unit-variance member
    of the family.
    """
    if cfg.spec:
        return env.parse_spec(cfg.spec)
    family = cfg.family or default_family
    if family is None:
        raise CliError("a distribution is required: pass --family (and its parameters) or --spec")
    family = env.normalize_family(family)
    mu = 0.0 if cfg.mu is None else cfg.mu
    sigma = 1.0 if cfg.sigma is None else cfg.sigma
    if family == "uniform":
        if cfg.mu is not None or cfg.sigma is not None:
            if cfg.a is not None or cfg.b is not None:
                raise CliError("uniform takes either --a/--b or --mu/--sigma, not both")
            return FamilySweep("uniform", sigma=sigma).spec_at_mu(mu)
        half = math.sqrt(3.0)
        return env.validate(env.Uniform(a=half if cfg.a is None else cfg.a, b=half if cfg.b is None else cfg.b))
    if family == "normal":
        return env.validate(env.Normal(mu=mu, sigma=sigma))
    if family == "pareto":
        if cfg.k is None:
            raise CliError("symmetrized Pareto needs --k")
        return env.validate(env.SymmetrizedPareto(k=cfg.k, mu=mu, sigma=sigma))
    lam = cfg.lam if cfg.lam is not None else math.sqrt(2.0) / sigma
    return env.validate(env.Laplace(mu=mu, lam=lam))


# -- output helpers ----------------------------------------------------------

def fmt6(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def fmt12(x) -> str:
    return f"{x:.12g}" if isinstance(x, float) else str(x)


def emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from None


def render_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=False) + "\n"
    if fmt == "csv":
        return render_csv(list(report), [list(report.values())])
    width = max(len(k) for k in report)
    return "".join(f"{k:<{width}} = {fmt6(v)}\n" for k, v in report.items())


def render_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt12(v) for v in row])
    return buf.getvalue()


# -- commands ----------------------------------------------------------------

def _ladder_fields(st, n: int) -> dict:
    lad = voting.optimal_absolute_threshold(st, n)
    return {
        "n": n,
        "n0_star": lad.n0_star,
        "interval_lo": lad.interval_lo,
        "interval_hi": lad.interval_hi,
        "ladder_center": lad.center,
        "degenerate": lad.degenerate,
    }


def cmd_threshold(cfg: CommandConfig) -> str:
    spec = spec_from_config(cfg)
    st = env.stats(spec)
    report = {
        "family": spec.family,
        "alpha0": voting.optimal_threshold_closed_form(spec),
        "R": voting.win_loss_ratio(st),
        "e_plus": st.e_plus,
        "e_minus": st.e_minus,
        "p": st.p,
        "q": st.q,
        "rho": st.rho,
    }
    if cfg.n is not None:
        report.update(_ladder_fields(st, cfg.n))
    return render_report(report, cfg.format)


def _require(cfg: CommandConfig, *names: str) -> None:
    missing = [f"--{n}" for n in names if getattr(cfg, n) is None]
    if missing:
        raise CliError(f"{cfg.command} requires {', '.join(missing)}")


def cmd_expectation(cfg: CommandConfig) -> str:
    _require(cfg, "n", "alpha")
    spec = spec_from_config(cfg)
    st = env.stats(spec)
    rule = voting.VotingRule(cfg.n, cfg.alpha)
    report = {
        "family": spec.family,
        "n": rule.n,
        "alpha": rule.alpha,
        "n0": rule.n0,
        "e_eta": voting.expected_increment(st, rule.n, rule.n0),
        "p": st.p,
        "mu": st.mu,
        "acceptance_probability": voting.acceptance_probability(st, rule.n, rule.n0),
    }
    return render_report(report, cfg.format)


def _sweep_for(cfg: CommandConfig, family: str, **defaults) -> FamilySweep:
    family = env.normalize_family(cfg.family or family)
    sigma = cfg.sigma if cfg.sigma is not None else defaults.get("sigma", 1.0)
    k = cfg.k if cfg.k is not None else defaults.get("k")
    if family == "pareto" and k is None:
        k = 8.0
    return FamilySweep(family, sigma=sigma, k=k if family == "pareto" else None)


def _ladder_table(sweep: FamilySweep, n: int, grid) -> str:
    rows = []
    for rho in voting.grid(*grid):
        rho = float(rho)
        rows.append((rho, voting.alpha0_closed_form(sweep.family, rho, sweep.k),
                     voting.optimal_absolute_threshold(sweep.stats_at_rho(rho), n).center))
    return render_csv(("rho", "alpha0_closed", "ladder_center"), rows)


def cmd_ladder(cfg: CommandConfig) -> str:
    _require(cfg, "n")
    if cfg.grid is not None:
        if cfg.family is None and cfg.spec is None:
            raise CliError("ladder --grid requires --family")
        sweep = _sweep_for(cfg, cfg.family or env.parse_spec(cfg.spec).family)
        return _ladder_table(sweep, cfg.n, cfg.grid)
    spec = spec_from_config(cfg)
    st = env.stats(spec)
    report = {"family": spec.family, "rho": st.rho, "alpha0": voting.optimal_threshold_closed_form(spec)}
    report.update(_ladder_fields(st, cfg.n))
    return render_report(report, cfg.format)


# figure presets: family, n, alpha, grid, k
FIGURES = {
    1: dict(family="normal", n=21, alpha=0.5, grid=(-2.5, 2.5, 0.01)),
    2: dict(family="uniform", n=5, grid=(-2.0, 2.0, 0.01)),
    3: dict(family="normal", n=21, grid=(-2.5, 2.5, 0.01)),
    4: dict(family="pareto", n=131, k=8.0, grid=(-2.5, 2.5, 0.01)),
    5: dict(family="pareto", n=130, k=8.0, grid=(-2.5, 2.5, 0.01)),
    6: dict(family="laplace", n=11, grid=(-2.5, 2.5, 0.01)),
    7: dict(family="laplace", grid=(-2.5, 2.5, 0.01)),
    8: dict(n=21, alpha=11 / 21, k=8.0, grid=(-2.0, 2.0, 0.01)),
    9: dict(n=21, k=8.0, grid=(-2.0, 2.0, 0.01)),
    10: dict(k=8.0, grid=(-2.0, 2.0, 0.01)),
}
COMPARISON_FAMILIES = ("pareto", "normal", "uniform", "laplace")


def quartile_matched_sweeps(k: float, sigma_normal: float = 1.0) -> dict[str, FamilySweep]:
    """Zero-mean families whose first quartile matches a normal with std ``sigma_normal``."""
    q1 = env.first_quartile(env.Normal(0.0, sigma_normal))
    out = {}
    for fam in COMPARISON_FAMILIES:
        spec = env.standardize_by_quartile(fam, q1, k=k if fam == "pareto" else None)
        out[fam] = FamilySweep(fam, sigma=spec.std, k=k if fam == "pareto" else None)
    return out


def figure_table(fig: int, cfg: CommandConfig) -> tuple[list[str], list[tuple]]:
    preset = FIGURES[fig]
    grid = cfg.grid or preset["grid"]
    n = cfg.n or preset.get("n")
    alpha = cfg.alpha if cfg.alpha is not None else preset.get("alpha")
    k = cfg.k if cfg.k is not None else preset.get("k")
    xs = [float(x) for x in voting.grid(*grid)]

    if fig == 1:
        sweep = _sweep_for(cfg, preset["family"], k=k)
        rows = [(mu, mu / sweep.sigma, e) for mu, e in voting.expectation_curve(sweep, n, alpha, xs)]
        return ["mu", "rho", "e_eta"], rows
    if 2 <= fig <= 6:
        sweep = _sweep_for(cfg, preset["family"], k=k)
        alpha0 = dict(voting.alpha0_curve(sweep, xs))
        ladder = dict(voting.ladder_curve(sweep, n, xs))
        return ["rho", "alpha0_closed", "ladder_center"], [(r, alpha0[r], ladder[r]) for r in xs]
    if fig == 7:
        return ["rho", "dalpha0_drho"], [(r, voting.laplace_alpha0_derivative(r)) for r in xs]

    sweeps = quartile_matched_sweeps(k, cfg.sigma or 1.0)
    if fig in (8, 9):
        rows = []
        for fam, sweep in sweeps.items():
            curve = voting.expectation_curve(sweep, n, alpha, xs, optimal=(fig == 9))
            rows.extend((mu, mu / sweep.sigma, e, fam) for mu, e in curve)
        return ["mu", "rho", "e_eta", "family"], rows
    pareto_col = f"alpha0_pareto{k:g}"
    order = ("uniform", "normal", "pareto", "laplace")
    rows = [
        tuple([mu] + [voting.alpha0_closed_form(f, mu / sweeps[f].sigma, sweeps[f].k) for f in order])
        for mu in xs
    ]
    return ["mu", "alpha0_uniform", "alpha0_normal", pareto_col, "alpha0_laplace"], rows


def cmd_curve(cfg: CommandConfig) -> str:
    _require(cfg, "fig")
    header, rows = figure_table(cfg.fig, cfg)
    return render_csv(header, rows)


def cmd_simulate(cfg: CommandConfig) -> str:
    _require(cfg, "n", "alpha", "reps", "seed")
    spec = spec_from_config(cfg)
    st = env.stats(spec)
    report = estimate_expected_increment(spec, cfg.n, cfg.alpha, cfg.reps, cfg.seed)
    analytic = voting.expected_increment(st, report.n, report.n0)
    z = (report.mean_increment - analytic) / report.std_error if report.std_error > 0 else 0.0
    out = {"spec": env.spec_to_dict(spec)}
    out.update(json.loads(report.to_json()))
    out["analytic_e_eta"] = analytic
    out["z_score"] = z
    out["analytic_acceptance"] = voting.acceptance_probability(st, report.n, report.n0)
    if cfg.steps is not None:
        traj = run_dynamics(spec, cfg.n, cfg.alpha, cfg.steps, cfg.seed)
        out["trajectory_final_mean"] = float(traj.utilities[-1].mean())
        out["trajectory_acceptance_rate"] = float(traj.accepted.mean())
        if cfg.trajectory:
            emit(traj.to_csv(), cfg.trajectory)
    if cfg.format == "text":
        flat = {k: v for k, v in out.items() if k != "spec"}
        return render_report({"family": spec.family, **flat}, "text")
    return json.dumps(out) + "\n"


def cmd_standardize(cfg: CommandConfig) -> str:
    if cfg.family is None:
        raise CliError("standardize requires --family")
    family = env.normalize_family(cfg.family)
    sigma_ref = cfg.sigma or 1.0
    q1 = env.first_quartile(env.Normal(0.0, sigma_ref))
    k = cfg.k if cfg.k is not None else (8.0 if family == "pareto" else None)
    spec = env.standardize_by_quartile(family, q1, k=k)
    report = {"family": family, "reference_sigma": sigma_ref, "q1_offset": q1, "sigma": spec.std,
              "sigma_ratio": spec.std / sigma_ref}
    if k is not None:
        report["k"] = k
    report["spec"] = env.spec_to_text(spec)
    return render_report(report, cfg.format)


HANDLERS = {
    "threshold": cmd_threshold,
    "expectation": cmd_expectation,
    "ladder": cmd_ladder,
    "curve": cmd_curve,
    "simulate": cmd_simulate,
    "standardize": cmd_standardize,
}


_SIGNED_FLAGS = ("--grid", "--mu", "--alpha", "--a", "--b", "--sigma", "--k", "--lambda")


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--grid -2:2:0.1`` as ``--grid=-2:2:0.1`` so argparse accepts it."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _SIGNED_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_attach_negative_values(argv))
    try:
        cfg = config_from_args(args)
        if cfg.command == "curve" and cfg.format == "text":
            cfg = replace(cfg, format="csv")
        emit(HANDLERS[cfg.command](cfg), cfg.out)
    except CliError as exc:
        print(f"vise {args.command}: error: {exc}", file=sys.stderr)
        return exc.code
    except (ParameterError, ValueError, voting.DegenerateEnvironmentError) as exc:
        print(f"vise {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
