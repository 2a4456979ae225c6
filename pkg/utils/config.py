#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Scenario file reading and validation."""

import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.errors import ConfigurationError, ScenarioValidationError
from features.oscillation.oscillation_model import (
    DetectionModel,
    MassEigenstate,
    MixingMatrix,
    OscillationScenario,
)
from utils.helpers import parse_angle

SCHEMA_VERSION = 1
METHOD_TAGS = ("amplitude_sum", "equal_time", "component_arrival", "time_averaged")
OUTPUT_FORMATS = ("csv", "summary", "plot")

_LINE_PATTERN = re.compile(r'^\s*([^#\s=]+)\s*=\s*"?([^"#]*?)"?\s*(?:#.*)?$')


class ConfigManager:
    """Reads `key = value` scenario files into flat dotted keys."""

    def read_lines(self, text: str) -> Dict[str, str]:
        """Parse text; malformed lines and duplicate keys are collected, then raised together."""
        config: Dict[str, str] = {}
        seen: Dict[str, int] = {}
        errors: List[Tuple[str, str]] = []
        for number, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            match = _LINE_PATTERN.match(line)
            if not match:
                errors.append((f"line {number}", f"malformed line: {line!r}"))
                continue
            key, value = match.groups()
            if key in seen:
                errors.append((key, f"duplicate key (lines {seen[key]} and {number})"))
                continue
            seen[key] = number
            config[key] = value.strip()
        if errors:
            raise ScenarioValidationError(errors)
        return config

    def read_config(self, path: Union[str, Path]) -> Dict[str, str]:
        """Read a scenario file from disk."""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"cannot read scenario file {path}: {e}") from e
        return self.read_lines(text)

    @staticmethod
    def nest(flat: Dict[str, str]) -> Dict[str, Any]:
        """{"a.b": v} -> {"a": {"b": v}}."""
        nested: Dict[str, Any] = {}
        errors = []
        for key, value in flat.items():
            parts = key.split(".")
            node = nested
            for part in parts[:-1]:
                child = node.setdefault(part, {})
                if not isinstance(child, dict):
                    errors.append((key, f"'{part}' is both a value and a section"))
                    break
                node = child
            else:
                if isinstance(node.get(parts[-1]), dict):
                    errors.append((key, f"'{parts[-1]}' is both a value and a section"))
                else:
                    node[parts[-1]] = value
        if errors:
            raise ScenarioValidationError(errors)
        return nested


# Global config manager
config_manager = ConfigManager()


def _split(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def _parse_complex(text: str) -> complex:
    return complex(text.replace(" ", "").replace("i", "j"))


def parse_matrix(text: str) -> np.ndarray:
    """Rows separated by ';', complex entries by ','."""
    rows = [[_parse_complex(item) for item in row.split(",")] for row in text.split(";") if row.strip()]
    if len({len(row) for row in rows}) != 1:
        raise ValueError("mixing matrix rows must all have the same length")
    return np.array(rows, dtype=complex)


# Joins several problems into one validator error; _validate splits them again
PROBLEM_SEPARATOR = "\n"
VALUE_ERROR_PREFIX = "Value error, "


def _raise_problems(problems: List[str]) -> None:
    if problems:
        raise ValueError(PROBLEM_SEPARATOR.join(problems))


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScenarioBlock(_Block):
    masses: List[float]
    momenta: List[float]
    widths: Optional[List[float]] = None
    mixing_angle: Optional[float] = None
    mixing_angles: Optional[List[float]] = None
    mixing_matrix: Optional[str] = None
    sigma: float
    initial_flavor: int

    @field_validator("masses", "momenta", "widths", mode="before")
    @classmethod
    def _split_numbers(cls, value):
        return _split(value)

    @field_validator("mixing_angle", mode="before")
    @classmethod
    def _angle(cls, value):
        return parse_angle(value) if isinstance(value, str) else value

    @field_validator("mixing_angles", mode="before")
    @classmethod
    def _angles(cls, value):
        value = _split(value)
        if isinstance(value, list):
            value = [parse_angle(item) if isinstance(item, str) else item for item in value]
            if len(value) not in (3, 4):
                raise ValueError("mixing_angles takes theta12, theta13, theta23 and an optional delta_cp")
        return value

    @field_validator("mixing_matrix")
    @classmethod
    def _matrix(cls, value):
        if value is not None:
            parse_matrix(value)
        return value

    @model_validator(mode="after")
    def _check(self) -> "ScenarioBlock":
        problems = []
        given = [
            name
            for name in ("mixing_angle", "mixing_angles", "mixing_matrix")
            if getattr(self, name) is not None
        ]
        if len(given) != 1:
            problems.append("exactly one of mixing_angle, mixing_angles, mixing_matrix is required")
        if len(self.momenta) != len(self.masses):
            problems.append("masses and momenta must have the same length")
        if self.widths is not None and len(self.widths) != len(self.masses):
            problems.append("widths and masses must have the same length")
        widths = self.widths or [0.0] * len(self.masses)
        for index, (mass, momentum, width) in enumerate(zip(self.masses, self.momenta, widths)):
            problems.extend(
                f"mass state {index}: {problem}"
                for problem in MassEigenstate.problems(mass, momentum, width)
            )
        mixing_dim = None
        if len(given) == 1:
            try:
                mixing_dim = self.mixing().dim
            except ConfigurationError as e:
                problems.append(str(e))
        problems.extend(
            OscillationScenario.problems(self.momenta, self.sigma, self.initial_flavor, mixing_dim)
        )
        _raise_problems(problems)
        return self

    def mixing(self) -> MixingMatrix:
        if self.mixing_angle is not None:
            if len(self.masses) != 2:
                raise ConfigurationError("mixing_angle describes exactly 2 mass states")
            return MixingMatrix.from_angle(self.mixing_angle)
        if self.mixing_angles is not None:
            if len(self.masses) != 3:
                raise ConfigurationError("mixing_angles describes exactly 3 mass states")
            return MixingMatrix.from_angles(*self.mixing_angles)
        return MixingMatrix(parse_matrix(self.mixing_matrix))

    def build(self) -> OscillationScenario:
        widths = self.widths or [0.0] * len(self.masses)
        states = tuple(
            MassEigenstate(mass, momentum, width)
            for mass, momentum, width in zip(self.masses, self.momenta, widths)
        )
        return OscillationScenario(states, self.mixing(), self.sigma, self.initial_flavor)


class DetectionBlock(_Block):
    threshold: float
    product_masses: List[float]
    localization: float
    overall_constant: float = 1.0

    @field_validator("product_masses", mode="before")
    @classmethod
    def _split_numbers(cls, value):
        return _split(value)

    @model_validator(mode="after")
    def _check(self) -> "DetectionBlock":
        _raise_problems(
            DetectionModel.problems(
                self.threshold, self.product_masses, self.localization, self.overall_constant
            )
        )
        return self

    def build(self) -> DetectionModel:
        return DetectionModel(
            threshold=self.threshold,
            product_masses=tuple(self.product_masses),
            localization=self.localization,
            overall_constant=self.overall_constant,
        )


class RunBlock(_Block):
    flavor: int
    L_start: float = Field(ge=0)
    L_stop: float
    L_count: int = Field(ge=1)
    methods: List[str] = Field(default_factory=lambda: list(METHOD_TAGS))
    thresholds: Optional[List[float]] = None
    window: Optional[float] = None
    quadrature_tol: float = Field(default=1e-6, gt=0, lt=1)

    @field_validator("methods", "thresholds", mode="before")
    @classmethod
    def _split_items(cls, value):
        return _split(value)

    @field_validator("window", mode="before")
    @classmethod
    def _window(cls, value):
        if isinstance(value, str) and value.strip().lower() == "auto":
            return None
        return value

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, value):
        unknown = [tag for tag in value if tag not in METHOD_TAGS]
        if unknown:
            raise ValueError(f"unknown method tag(s) {unknown}; expected a subset of {list(METHOD_TAGS)}")
        return list(dict.fromkeys(value))

    @field_validator("thresholds")
    @classmethod
    def _increasing(cls, value):
        if value is not None and any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("thresholds must be strictly increasing")
        return value

    @model_validator(mode="after")
    def _check(self) -> "RunBlock":
        problems = []
        if self.L_count > 1 and not self.L_stop > self.L_start:
            problems.append("L_stop must exceed L_start")
        if self.window is not None and not self.window > 0:
            problems.append("window must be 'auto' or a positive T")
        _raise_problems(problems)
        return self

    @property
    def distances(self) -> np.ndarray:
        if self.L_count == 1:
            return np.array([self.L_start])
        return np.linspace(self.L_start, self.L_stop, self.L_count)


class OutputBlock(_Block):
    directory: str = "results"
    formats: List[str] = Field(default_factory=lambda: list(OUTPUT_FORMATS))

    @field_validator("formats", mode="before")
    @classmethod
    def _split_items(cls, value):
        return _split(value)

    @field_validator("formats")
    @classmethod
    def _known_formats(cls, value):
        unknown = [fmt for fmt in value if fmt not in OUTPUT_FORMATS]
        if unknown:
            raise ValueError(f"unknown output format(s) {unknown}; expected a subset of {list(OUTPUT_FORMATS)}")
        return value


class ScenarioFile(_Block):
    """A validated scenario file."""

    schema_version: int
    scenario: ScenarioBlock
    detection: DetectionBlock
    run: RunBlock
    output: OutputBlock = Field(default_factory=OutputBlock)

    @field_validator("schema_version")
    @classmethod
    def _version(cls, value):
        if value != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported schema_version {value}; supported version is {SCHEMA_VERSION}"
            )
        return value

    @model_validator(mode="after")
    def _check(self) -> "ScenarioFile":
        problems = []
        size = len(self.scenario.masses)
        if not 0 <= self.run.flavor < size:
            problems.append(f"run.flavor {self.run.flavor} out of range 0..{size - 1}")
        min_energy = float(np.min(self.build_scenario().energies))
        for threshold in [self.detection.threshold] + list(self.run.thresholds or []):
            if not threshold < min_energy:
                problems.append(
                    f"threshold {threshold:g} must lie below every particle energy (min E = {min_energy:g})"
                )
        _raise_problems(problems)
        return self

    def build_scenario(self) -> OscillationScenario:
        return self.scenario.build()

    def build_detection(self) -> DetectionModel:
        return self.detection.build()

    def normalized(self) -> Dict[str, Any]:
        """JSON-ready configuration with the mixing matrix expanded."""
        data = self.model_dump(mode="json")
        entries = self.scenario.mixing().entries
        data["scenario"]["mixing_matrix"] = [
            [[float(z.real), float(z.imag)] for z in row] for row in entries
        ]
        data["scenario"]["widths"] = self.scenario.widths or [0.0] * len(self.scenario.masses)
        data["run"]["window"] = "auto" if self.run.window is None else self.run.window
        return data


def _strip_prefix(message: str) -> str:
    return message[len(VALUE_ERROR_PREFIX):] if message.startswith(VALUE_ERROR_PREFIX) else message


def _validate(nested: Dict[str, Any]) -> ScenarioFile:
    try:
        return ScenarioFile.model_validate(nested)
    except ValidationError as e:
        raise ScenarioValidationError(
            [
                (".".join(str(part) for part in err["loc"]) or "<root>", _strip_prefix(message))
                for err in e.errors()
                for message in err["msg"].split(PROBLEM_SEPARATOR)
            ]
        ) from e


def parse_scenario(text: str) -> ScenarioFile:
    """
    Parse and validate scenario text.

    Raises:
        ScenarioValidationError: With every problem found, each as (dotted path, message)
    """
    return _validate(config_manager.nest(config_manager.read_lines(text)))


def load_scenario(path: Union[str, Path]) -> ScenarioFile:
    """Read and validate a scenario file."""
    return _validate(config_manager.nest(config_manager.read_config(path)))
