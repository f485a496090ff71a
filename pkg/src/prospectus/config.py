"""Run configuration: a single declarative JSON file, strictly validated.

Unknown keys are rejected everywhere, every nested value is range-checked
through the domain types, and all errors carry the config path of the
offending entry.  The committed ``paper-defaults`` configuration ships
inside the package and is the implicit default of every CLI command.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import ProspectusError, SchemaError
from .experiments import ExperimentSetup, TariffGrid
from .types import (
    CptParams,
    Mode,
    Reference,
    Static,
    TariffLinked,
    UtilityCoefficients,
)

PAPER_DEFAULTS = "paper-defaults"

_MIXED_DISTRIBUTIONS = ("bernoulli", "truncated_poisson", "normal", "uniform")


@dataclass(frozen=True)
class EstimationSettings:
    n_draws: int = 500
    n_starts: int = 8
    random_coefficients: tuple[str, ...] = ("a_walk", "a_wait", "b", "c_srs")
    cpt_init: CptParams = field(
        default_factory=lambda: CptParams(0.5, 0.5, 0.5, 0.5, 2.0))


@dataclass(frozen=True)
class RunConfig:
    seed: int
    coefficients: UtilityCoefficients
    cpt: CptParams
    reference: Reference
    reference_tariff: float | None
    experiment: ExperimentSetup
    selfref_grid: TariffGrid
    mixed_distribution: str
    estimation: EstimationSettings


def _require_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _check_keys(mapping: Mapping, required: set[str], optional: set[str],
                path: str) -> None:
    unknown = set(mapping) - required - optional
    if unknown:
        raise SchemaError(f"{path}: unknown key(s) {sorted(unknown)}")
    missing = required - set(mapping)
    if missing:
        raise SchemaError(f"{path}: missing key(s) {sorted(missing)}")


def _number(mapping: Mapping, key: str, path: str) -> float:
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}.{key}: expected a number, got {value!r}")
    return float(value)


def _integer(mapping: Mapping, key: str, path: str) -> int:
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{path}.{key}: expected an integer, got {value!r}")
    return value


def _domain(path: str):
    """Context manager translating domain-type errors into schema errors."""
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and isinstance(exc, ProspectusError):
                raise SchemaError(f"{path}: {exc}") from exc
            return False
    return _Ctx()


def _parse_mode_map(mapping: Mapping, key: str, path: str) -> dict[Mode, float]:
    sub = _require_mapping(mapping[key], f"{path}.{key}")
    _check_keys(sub, {m.value for m in Mode}, set(), f"{path}.{key}")
    return {Mode(name): _number(sub, name, f"{path}.{key}") for name in sub}


def _parse_coefficients(raw, path: str) -> UtilityCoefficients:
    raw = _require_mapping(raw, path)
    _check_keys(raw, {"a_walk", "a_wait", "a_ride", "b", "c"}, set(), path)
    with _domain(path):
        return UtilityCoefficients(
            a_walk=_number(raw, "a_walk", path),
            a_wait=_number(raw, "a_wait", path),
            a_ride=_parse_mode_map(raw, "a_ride", path),
            b=_number(raw, "b", path),
            c=_parse_mode_map(raw, "c", path),
        )


def _parse_cpt(raw, path: str) -> CptParams:
    raw = _require_mapping(raw, path)
    names = {"alpha_gain", "alpha_loss", "beta_gain", "beta_loss", "loss_aversion"}
    _check_keys(raw, names, set(), path)
    with _domain(path):
        return CptParams(**{name: _number(raw, name, path) for name in sorted(names)})


def _parse_reference(raw, path: str) -> tuple[Reference, float | None]:
    raw = _require_mapping(raw, path)
    mode = raw.get("mode")
    if mode == "static":
        _check_keys(raw, {"mode", "value"}, set(), path)
        with _domain(path):
            return Static(_number(raw, "value", path)), None
    if mode == "tariff_linked":
        _check_keys(raw, {"mode", "x_tilde"}, {"tariff"}, path)
        tariff = _number(raw, "tariff", path) if "tariff" in raw else None
        with _domain(path):
            return TariffLinked(_number(raw, "x_tilde", path)), tariff
    raise SchemaError(f"{path}.mode: expected 'static' or 'tariff_linked', got {mode!r}")


def _parse_grid(raw, path: str) -> TariffGrid:
    raw = _require_mapping(raw, path)
    _check_keys(raw, {"lo", "hi", "n"}, set(), path)
    with _domain(path):
        return TariffGrid(_number(raw, "lo", path), _number(raw, "hi", path),
                          _integer(raw, "n", path))


def _parse_experiment(raw, path: str) -> tuple[ExperimentSetup, TariffGrid, str]:
    raw = _require_mapping(raw, path)
    required = {"x_hi", "x_lo", "a_certain", "b", "p_nr", "cpt", "tariff_grid"}
    _check_keys(raw, required, {"selfref_grid", "mixed_distribution"}, path)
    with _domain(path):
        setup = ExperimentSetup(
            x_hi=_number(raw, "x_hi", path),
            x_lo=_number(raw, "x_lo", path),
            a_certain=_number(raw, "a_certain", path),
            b=_number(raw, "b", path),
            cpt=_parse_cpt(raw["cpt"], f"{path}.cpt"),
            tariff_grid=_parse_grid(raw["tariff_grid"], f"{path}.tariff_grid"),
            p_nr=_number(raw, "p_nr", path),
        )
    selfref_grid = (_parse_grid(raw["selfref_grid"], f"{path}.selfref_grid")
                    if "selfref_grid" in raw else TariffGrid(12.0, 48.0, 100))
    mixed = raw.get("mixed_distribution", "normal")
    if mixed not in _MIXED_DISTRIBUTIONS:
        raise SchemaError(
            f"{path}.mixed_distribution: expected one of {_MIXED_DISTRIBUTIONS}, got {mixed!r}")
    return setup, selfref_grid, mixed


def _parse_estimation(raw, path: str) -> EstimationSettings:
    raw = _require_mapping(raw, path)
    _check_keys(raw, set(), {"n_draws", "n_starts", "random_coefficients", "cpt_init"}, path)
    kwargs = {}
    if "n_draws" in raw:
        kwargs["n_draws"] = _integer(raw, "n_draws", path)
    if "n_starts" in raw:
        kwargs["n_starts"] = _integer(raw, "n_starts", path)
    if "random_coefficients" in raw:
        names = raw["random_coefficients"]
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise SchemaError(f"{path}.random_coefficients: expected a list of names")
        kwargs["random_coefficients"] = tuple(names)
    if "cpt_init" in raw:
        kwargs["cpt_init"] = _parse_cpt(raw["cpt_init"], f"{path}.cpt_init")
    return EstimationSettings(**kwargs)


def parse_config(raw: dict, source: str = "config") -> RunConfig:
    raw = _require_mapping(raw, source)
    required = {"schema_version", "coefficients", "cpt", "reference", "experiment"}
    _check_keys(raw, required, {"seed", "estimation"}, source)
    version = _integer(raw, "schema_version", source)
    if version != 1:
        raise SchemaError(f"{source}.schema_version: unsupported version {version}")
    reference, tariff = _parse_reference(raw["reference"], f"{source}.reference")
    setup, selfref_grid, mixed = _parse_experiment(raw["experiment"], f"{source}.experiment")
    return RunConfig(
        seed=_integer(raw, "seed", source) if "seed" in raw else 0,
        coefficients=_parse_coefficients(raw["coefficients"], f"{source}.coefficients"),
        cpt=_parse_cpt(raw["cpt"], f"{source}.cpt"),
        reference=reference,
        reference_tariff=tariff,
        experiment=setup,
        selfref_grid=selfref_grid,
        mixed_distribution=mixed,
        estimation=_parse_estimation(raw.get("estimation", {}), f"{source}.estimation"),
    )


def load_config(path_or_name: str | Path) -> RunConfig:
    """Load a config file; the name 'paper-defaults' loads the bundled one."""
    if str(path_or_name) == PAPER_DEFAULTS:
        text = resources.files("prospectus").joinpath("data/paper-defaults.json").read_text(
            encoding="utf-8")
        source = PAPER_DEFAULTS
    else:
        path = Path(path_or_name)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise SchemaError(f"cannot read config {path}: {exc}") from exc
        source = str(path)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    return parse_config(raw, source)
