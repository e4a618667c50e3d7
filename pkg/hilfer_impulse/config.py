"""
Loading and validating JSON run configurations.
"""

import json
import logging
from dataclasses import dataclass
from functools import cache
from importlib import resources
from pathlib import Path
from typing import Any

from jsonschema import Draft202012Validator

from hilfer_impulse.exceptions import ConfigError
from hilfer_impulse.expr import Expr, parse
from hilfer_impulse.fraccalc import HilferOrder
from hilfer_impulse.stability import GeneralizedEnvelopeSpec, LyapunovSpec
from hilfer_impulse.systems import (
    ImpulsiveSchedule,
    ImpulsiveSystem,
    InitialForm,
    MeshSpec,
    WeightedInitialCondition,
    convert_initial,
)

logger = logging.getLogger(__name__)

ESTIMATE = "estimate"


@cache
def schema() -> dict[str, Any]:
    text = resources.files("hilfer_impulse").joinpath("schemas/run_config.json").read_text("utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class ContractionConfig:
    """
    Lipschitz constants for the contraction check; either may be the
    string "estimate" to sample them from the system instead.
    """

    L: float | str
    impulses: list[float] | str
    p: float | None = None
    box: tuple[float, float] = (-10.0, 10.0)
    samples: int = 2000
    seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    system: ImpulsiveSystem
    mesh: MeshSpec
    contraction: ContractionConfig | None = None
    lyapunov: LyapunovSpec | None = None
    grid_stride: int = 1
    h: float | None = None
    envelope_param: str | None = None
    generalized: GeneralizedEnvelopeSpec | None = None
    output_csv: str | None = None


def validate_document(document: Any) -> None:
    """
    Checks a decoded document against the run configuration schema,
    raising ConfigError naming the first offending field.
    """
    validator = Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(document), key=lambda error: list(error.absolute_path))
    if errors:
        error = errors[0]
        where = "/".join(str(part) for part in error.absolute_path) or "(root)"
        raise ConfigError(f"Invalid configuration at {where}: {error.message}")


def _parse_field(source: str, field: str) -> Expr:
    try:
        return parse(source)
    except ConfigError as error:
        raise ConfigError(f"In {field}: {error}") from error


def build_config(document: dict[str, Any]) -> RunConfig:
    """
    Turns a schema-valid document into a RunConfig, validating the
    expressions, the schedule and the parameter ranges.
    """
    validate_document(document)
    order = HilferOrder(document["order"]["mu"], document["order"]["nu"])
    schedule_doc = document["schedule"]
    schedule = ImpulsiveSchedule(
        t_points=tuple(schedule_doc["t_points"]),
        p_points=tuple(schedule_doc["p_points"]) if "p_points" in schedule_doc else None,
        horizon=schedule_doc["horizon"],
    )
    x0 = document.get("x0", 0.0)
    if document.get("x0_form", InitialForm.WEIGHTED) == InitialForm.INTEGRAL:
        x0 = convert_initial(WeightedInitialCondition(InitialForm.INTEGRAL, x0), order.lam).value
    system = ImpulsiveSystem(
        mode=document["mode"],
        order=order,
        schedule=schedule,
        g=_parse_field(document["g"], "g"),
        impulse_maps=tuple(
            _parse_field(source, f"impulse_maps/{i}")
            for i, source in enumerate(document.get("impulse_maps", []))
        ),
        x0=x0,
    )
    mesh_doc = document.get("mesh", {})
    mesh = MeshSpec(**mesh_doc)

    contraction = None
    if "contraction" in document:
        contraction_doc = dict(document["contraction"])
        contraction = ContractionConfig(
            L=contraction_doc.pop("L"),
            impulses=contraction_doc.pop("I"),
            box=tuple(contraction_doc.pop("box", (-10.0, 10.0))),
            **contraction_doc,
        )

    lyapunov = None
    grid_stride = 1
    if "lyapunov" in document:
        lyapunov_doc = dict(document["lyapunov"])
        grid_stride = lyapunov_doc.pop("grid_stride", 1)
        lyapunov = LyapunovSpec(V=_parse_field(lyapunov_doc.pop("V"), "lyapunov/V"), **lyapunov_doc)

    certificate_doc = document.get("certificate", {})

    generalized = None
    if "generalized" in document:
        generalized_doc = dict(document["generalized"])
        integral_ic = generalized_doc.pop("integral_ic", None)
        if integral_ic is None:
            integral_ic = convert_initial(
                WeightedInitialCondition(InitialForm.WEIGHTED, system.x0), order.lam
            ).value
        generalized = GeneralizedEnvelopeSpec(
            m=_parse_field(generalized_doc.pop("m"), "generalized/m"),
            integral_ic=integral_ic,
            **generalized_doc,
        )

    return RunConfig(
        system=system,
        mesh=mesh,
        contraction=contraction,
        lyapunov=lyapunov,
        grid_stride=grid_stride,
        h=certificate_doc.get("h"),
        envelope_param=certificate_doc.get("envelope_param"),
        generalized=generalized,
        output_csv=document.get("output", {}).get("csv"),
    )


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text("utf-8")
    except OSError as error:
        raise ConfigError(f"Cannot read configuration {path}: {error}") from error
    try:
        document = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigError(f"Configuration {path} is not valid JSON: {error}") from error
    logger.debug(f"Loaded configuration from {path}")
    return build_config(document)
