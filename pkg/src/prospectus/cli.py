"""Command-line interface.

    prospectus <command> --config <file> [--out <dir>] [--seed <u64>]

Commands: choice-prob, cpt-utility, experiment, estimate, detect-effects.
The config defaults to the bundled ``paper-defaults``.  Everything the
commands compute goes through the library functions; the CLI only parses
files, dispatches and serializes.

Exit codes: 0 success (all asserted properties hold), 1 usage or parse
error, 2 property violation, 3 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .choice import logit_probabilities, trip_utility
from .config import PAPER_DEFAULTS, RunConfig, load_config
from .cpt import subjective_utility_continuous, subjective_utility_discrete
from .errors import (
    ConvergenceError,
    IdentifiabilityError,
    ProspectusError,
    QuadratureError,
    SchemaError,
    SeparationError,
)
from .estimation import EstimationResult, fit_cpt_nls, fit_mixed_logit_msl
from .estimation import (
    detect_probability_weighting,
    detect_reflection_effect,
    loss_aversion_ratio,
)
from .experiments import (
    Quadrant,
    Variant,
    default_distributions,
    fourfold_experiment,
    mixed_prospect_experiment,
    mixed_prospect_tariff_bounds,
    self_reference_experiment,
)
from .prospects import (
    BernoulliTwoPoint,
    DiscreteProspect,
    TruncatedNormal,
    TruncatedPoisson,
    UniformProspect,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PROPERTY = 2
EXIT_NUMERIC = 3

_EXPECTED_RA_SIGN = {
    Quadrant.HP_GAIN: 1.0,
    Quadrant.HP_LOSS: -1.0,
    Quadrant.LP_GAIN: -1.0,
    Quadrant.LP_LOSS: 1.0,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="prospectus",
                     description="Utility-theory and prospect-theory mode-choice models")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=PAPER_DEFAULTS,
                       help="config file path, or 'paper-defaults' (default)")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p = sub.add_parser("choice-prob", help="objective logit choice probabilities")
    common(p)
    p.add_argument("--options", type=Path, required=True, help="options.csv")

    p = sub.add_parser("cpt-utility", help="subjective utility of a prospect")
    common(p)
    p.add_argument("--prospect", type=Path, required=True, help="prospect JSON file")

    p = sub.add_parser("experiment", help="run a computational experiment")
    common(p)
    p.add_argument("--which", choices=("fourfold", "mixed", "selfref"), required=True)

    p = sub.add_parser("estimate", help="fit model parameters from data")
    common(p)
    p.add_argument("--data", type=Path, required=True, help="choice.csv or ce.csv")
    p.add_argument("--which", choices=("logit", "cpt"), required=True)

    p = sub.add_parser("detect-effects", help="lottery-based risk-effect detectors")
    common(p)
    p.add_argument("--lottery", type=Path, required=True, help="lottery.csv")
    return parser


def _emit(payload: dict, out_dir: Path | None, filename: str) -> None:
    text = io.dumps_json({**payload, "schema_version": io.SCHEMA_VERSION})
    sys.stdout.write(text)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / filename).write_text(text, encoding="utf-8")


def cmd_choice_prob(config: RunConfig, options_path: Path, out_dir: Path | None) -> int:
    options = io.read_trip_options(options_path)
    if len(options) < 2:
        raise SchemaError(f"{options_path}: at least two options are required")
    utilities = [trip_utility(o, config.coefficients) for o in options]
    probabilities = logit_probabilities(utilities)
    _emit({
        "options": [
            {"mode": o.mode.value, "utility": u, "probability": float(p)}
            for o, u, p in zip(options, utilities, probabilities)
        ],
    }, out_dir, "choice_prob.json")
    return EXIT_OK


def _parse_prospect_file(path: Path):
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict) or "type" not in raw:
        raise SchemaError(f"{path}: expected an object with a 'type' key")
    kind = raw.pop("type")
    try:
        if kind == "discrete":
            outcomes = raw.pop("outcomes")
            if raw:
                raise SchemaError(f"{path}: unknown key(s) {sorted(raw)}")
            return DiscreteProspect.from_outcomes(
                [u for u, _ in outcomes], [p for _, p in outcomes])
        constructors = {
            "bernoulli": BernoulliTwoPoint,
            "truncated_poisson": TruncatedPoisson,
            "normal": TruncatedNormal,
            "uniform": UniformProspect,
        }
        if kind not in constructors:
            raise SchemaError(
                f"{path}: unknown prospect type {kind!r}; expected one of "
                f"discrete, {', '.join(constructors)}")
        return constructors[kind](**raw)
    except TypeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed prospect: {exc}") from exc


def cmd_cpt_utility(config: RunConfig, prospect_path: Path, out_dir: Path | None) -> int:
    prospect = _parse_prospect_file(prospect_path)
    kwargs = dict(tariff=config.reference_tariff,
                  tariff_coefficient=config.coefficients.b)
    if isinstance(prospect, DiscreteProspect):
        result = subjective_utility_discrete(prospect, config.reference, config.cpt, **kwargs)
    else:
        result = subjective_utility_continuous(prospect, config.reference, config.cpt, **kwargs)
    _emit({
        "subjective_utility": result.value,
        "reference": result.reference_used,
        "params": {
            "alpha_gain": config.cpt.alpha_gain,
            "alpha_loss": config.cpt.alpha_loss,
            "beta_gain": config.cpt.beta_gain,
            "beta_loss": config.cpt.beta_loss,
            "loss_aversion": config.cpt.loss_aversion,
        },
    }, out_dir, "cpt_utility.json")
    return EXIT_OK


def _write_series(out_dir: Path | None, name: str, series) -> None:
    if out_dir is None:
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    io.write_series_csv(out_dir / f"{name}.csv", series)
    io.write_series_json(out_dir / f"{name}.json", series)


def _verdict(name: str, passed: bool, detail: str,
             counterexample: float | None = None) -> dict:
    verdict = {"name": name, "passed": passed, "detail": detail}
    if counterexample is not None:
        verdict["first_counterexample_gamma"] = counterexample
    return verdict


def _run_fourfold(config: RunConfig, out_dir: Path | None) -> list[dict]:
    verdicts = []
    signs = []
    for quadrant in Quadrant:
        series = fourfold_experiment(config.experiment, quadrant, Variant.DISTORTION_ONLY)
        _write_series(out_dir, f"fourfold_{quadrant.value}_distortion-only", series)
        ra = series.columns["RA"]
        expected = _EXPECTED_RA_SIGN[quadrant]
        bad = np.nonzero(np.sign(ra) != expected)[0]
        signs.append("+" if expected > 0 else "-")
        verdicts.append(_verdict(
            f"fourfold distortion-only {quadrant.value} RA sign "
            f"{'positive' if expected > 0 else 'negative'}",
            bad.size == 0,
            f"{len(ra)} grid points",
            float(series.gamma[bad[0]]) if bad.size else None))
    changes = {}
    for quadrant in Quadrant:
        series = fourfold_experiment(config.experiment, quadrant, Variant.GENERAL)
        _write_series(out_dir, f"fourfold_{quadrant.value}_general", series)
        ra = series.columns["RA"]
        changes[quadrant.value] = int(np.sum(np.diff(np.sign(ra)) != 0))
    verdicts.append(_verdict(
        "fourfold general variant violates the pattern (sign change in some quadrant)",
        any(v > 0 for v in changes.values()),
        f"sign changes per quadrant: {changes}"))
    verdicts.append(_verdict(
        "fourfold distortion-only sign pattern",
        [v["passed"] for v in verdicts[:4]] == [True] * 4,
        f"({','.join(signs)}) across (hp-gain, hp-loss, lp-gain, lp-loss)"))
    return verdicts


def _run_mixed(config: RunConfig, out_dir: Path | None) -> list[dict]:
    distribution = default_distributions(config.experiment)[config.mixed_distribution]
    gamma_lower, gamma_upper = mixed_prospect_tariff_bounds(config.experiment, distribution)
    series = mixed_prospect_experiment(config.experiment, distribution)
    _write_series(out_dir, f"mixed_{config.mixed_distribution}", series)
    gap = series.columns["p_s_R"] - series.columns["p_o"]
    bad = np.nonzero(gap >= 0)[0]
    return [
        _verdict("mixed prospect under-acceptance (p_s < p_o on the tariff window)",
                 bad.size == 0,
                 f"{len(series.gamma)} grid points on [{io.fmt(gamma_lower)}, "
                 f"{io.fmt(gamma_upper)})",
                 float(series.gamma[bad[0]]) if bad.size else None),
        _verdict("mixed prospect tariff window",
                 True,
                 f"gamma_lower={io.fmt(gamma_lower)} gamma_upper={io.fmt(gamma_upper)}"
                 + (" (infinite: risk neutral in gains)" if math.isinf(gamma_upper) else "")),
    ]


def _run_selfref(config: RunConfig, out_dir: Path | None) -> list[dict]:
    series_list = self_reference_experiment(config.experiment, grid=config.selfref_grid)
    n_pass = 0
    verdicts = []
    for series in series_list:
        name = series.metadata["distribution"]
        _write_series(out_dir, f"selfref_{name}", series)
        gap = series.columns["p_s_ref_mean"] - series.columns["p_s_ref_alternative"]
        bad = np.nonzero(gap < -1e-12)[0]
        eq_gap = abs(series.metadata["p_self_at_star"] - series.metadata["p_alt_at_star"])
        ok = bad.size == 0 and eq_gap < 1e-8
        n_pass += ok
        verdicts.append(_verdict(
            f"self-reference dominance ({name})", ok,
            f"min gap {io.fmt(float(gap.min()))}, coincidence gap {io.fmt(float(eq_gap))} "
            f"at gamma*={io.fmt(float(series.metadata['gamma_star']))}",
            float(series.gamma[bad[0]]) if bad.size else None))
    verdicts.append(_verdict(
        "self-reference dominance across distributions",
        n_pass == len(series_list),
        f"p_s_ref_mean >= p_s_ref_alternative: {'PASS' if n_pass == len(series_list) else 'FAIL'} "
        f"({n_pass}/{len(series_list)} distributions)"))
    return verdicts


def cmd_experiment(config: RunConfig, which: str, out_dir: Path | None) -> int:
    runners = {"fourfold": _run_fourfold, "mixed": _run_mixed, "selfref": _run_selfref}
    verdicts = runners[which](config, out_dir)
    all_passed = all(v["passed"] for v in verdicts)
    _emit({"experiment": which, "verdicts": verdicts, "all_passed": all_passed},
          out_dir, f"{which}_summary.json")
    return EXIT_OK if all_passed else EXIT_PROPERTY


def _result_payload(result: EstimationResult) -> dict:
    return {
        "means": result.means,
        "sds": result.sds,
        "se_means": result.se_means,
        "se_sds": result.se_sds,
        "objective": result.objective,
        "objective_name": result.objective_name,
        "converged": result.converged,
        "seed": result.seed,
        "n_observations": result.n_observations,
        "diagnostics": result.diagnostics,
    }


def cmd_estimate(config: RunConfig, data_path: Path, which: str,
                 out_dir: Path | None, seed: int) -> int:
    if which == "logit":
        observations = io.read_choice_observations(data_path)
        result = fit_mixed_logit_msl(
            observations,
            random_coefficients=config.estimation.random_coefficients,
            n_draws=config.estimation.n_draws,
            seed=seed)
    else:
        ce_observations = io.read_certainty_equivalents(data_path)
        result = fit_cpt_nls(
            ce_observations,
            init=config.estimation.cpt_init,
            n_starts=config.estimation.n_starts,
            seed=seed)
    _emit(_result_payload(result), out_dir, f"estimate_{which}.json")
    return EXIT_OK if result.converged else EXIT_NUMERIC


def cmd_detect_effects(config: RunConfig, lottery_path: Path, out_dir: Path | None) -> int:
    responses = io.read_lottery_responses(lottery_path)
    reflection = detect_reflection_effect(responses)
    weighting = detect_probability_weighting(responses)
    aversion = loss_aversion_ratio(responses)
    payload = {
        "reflection": {
            "rate": reflection.rate,
            "n_respondents": reflection.n_respondents,
            "n_excluded": reflection.n_excluded,
        },
        "probability_overweighting": {
            **{f"{io.fmt(b.band[0] * 100)}-{io.fmt(b.band[1] * 100)}%":
               {"rate": b.rate, "n_flagged": b.n_flagged, "n_eligible": b.n_eligible}
               for b in weighting.bands},
            "any": {"rate": weighting.any_rate,
                    "n_flagged": weighting.n_any_flagged,
                    "n_eligible": weighting.n_any_eligible},
        },
        "loss_aversion": {
            "mean_gain_loss_ratio": aversion.mean_ratio,
            "median_gain_loss_ratio": aversion.median_ratio,
            "n_excluded_rows": aversion.n_excluded_rows,
        },
    }
    _emit(payload, out_dir, "effects.json")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = load_config(args.config)
        seed = args.seed if args.seed is not None else config.seed
        if args.command == "choice-prob":
            return cmd_choice_prob(config, args.options, args.out)
        if args.command == "cpt-utility":
            return cmd_cpt_utility(config, args.prospect, args.out)
        if args.command == "experiment":
            return cmd_experiment(config, args.which, args.out)
        if args.command == "estimate":
            return cmd_estimate(config, args.data, args.which, args.out, seed)
        if args.command == "detect-effects":
            return cmd_detect_effects(config, args.lottery, args.out)
        raise _UsageError(f"unknown command {args.command!r}")
    except (QuadratureError, ConvergenceError, SeparationError, IdentifiabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ProspectusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
