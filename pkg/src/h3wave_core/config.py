"""Run configuration: pydantic models, flat ``key = value`` and TOML loaders, CLI overrides."""

from __future__ import annotations

import configparser
import fractions
import itertools
import logging
import math
import pathlib
import re
import typing as t

import pydantic

from . import _extras, evolve, grid as grid_mod, synth

tomllib_imported = False
try:
    import tomllib

    tomllib_imported = True
except ModuleNotFoundError:
    if _extras.TOMLI_INSTALLED:  # pragma: no cover
        import tomli as tomllib  # type: ignore[import-not-found,no-redef]


logger = logging.getLogger(__name__)


FLAT_SECTION = "h3wave"
"""Section header injected in front of flat config files."""

TOML_SECTION = ("tool", "h3wave")
"""Optional table holding the settings inside a TOML file."""

KICK_RECOMMENDATION = 0.5
"""Recommended upper bound of ``dt/dr``."""

_POWER_RE = re.compile(r"^([+-]?\d+(?:\.\d*)?)\s*\^\s*([+-]?\d+(?:\.\d*)?)$")
_INF_WORDS = {"inf", "+inf", "infinity", "+infinity"}


def parse_number(value: t.Any) -> float:  # noqa: ANN401
    """Parse a config number.

    Besides plain floats, ``inf``, powers like ``2^-6`` and fractions like ``8/3`` are accepted.

    :param value: Number or string
    :raises TypeError: If ``value`` is neither a number nor a string
    :raises ValueError: If the string is not a number
    :return: The value as float
    """
    if isinstance(value, bool):
        msg = "Not a number"
        raise TypeError(msg)
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        msg = "Not a number"
        raise TypeError(msg)

    text = value.strip().casefold()
    if text in _INF_WORDS:
        return math.inf
    if text in {"-inf", "-infinity"}:
        return -math.inf
    match = _POWER_RE.match(text)
    if match:
        return float(match[1]) ** float(match[2])
    try:
        return float(fractions.Fraction(text))
    except (ValueError, ZeroDivisionError):
        msg = f"Not a number: {value!r}"
        raise ValueError(msg) from None


def _split_list(value: t.Any, separator: str) -> t.Any:  # noqa: ANN401
    if isinstance(value, str):
        return [part.strip() for part in value.split(separator) if part.strip()]
    return value


def parse_number_list(value: t.Any) -> list[float]:  # noqa: ANN401
    """Parse a comma separated string or a list into floats."""
    items = _split_list(value, ",")
    if not isinstance(items, (list, tuple)):
        msg = "Not a list of numbers"
        raise TypeError(msg)
    return [parse_number(item) for item in items]


def parse_tuple_list(value: t.Any, width: int) -> list[tuple[float, ...]]:  # noqa: ANN401
    """Parse ``"a,b; c,d"`` or nested lists into tuples of ``width`` numbers.

    :raises ValueError: If a tuple has the wrong length
    """
    groups = _split_list(value, ";")
    if not isinstance(groups, (list, tuple)):
        msg = "Not a list of tuples"
        raise TypeError(msg)
    parsed = [tuple(parse_number_list(group)) for group in groups]
    for group in parsed:
        if len(group) != width:
            msg = f"Expected {width} numbers per entry, got {group!r}"
            raise ValueError(msg)
    return parsed


class GridConfig(pydantic.BaseModel):
    """Grid section (``grid.*``)."""

    model_config = pydantic.ConfigDict(frozen=True, extra="forbid")

    r_max: float = 40.0
    n: int = 4096

    @pydantic.field_validator("r_max", mode="before")
    @classmethod
    def number(cls, value: t.Any) -> float:  # noqa: ANN401
        """Parse the wall position."""
        return parse_number(value)

    @pydantic.field_validator("r_max")
    @classmethod
    def positive_finite(cls, value: float) -> float:
        """Require a positive finite wall position.

        :raises ValueError: If ``r_max`` is not positive and finite
        """
        if not (math.isfinite(value) and value > 0):
            msg = f"r_max must be positive and finite, got {value!r}"
            raise ValueError(msg)
        return value

    @pydantic.field_validator("n", mode="before")
    @classmethod
    def integral(cls, value: t.Any) -> int:  # noqa: ANN401
        """Parse the point count; powers like ``2^12`` are accepted.

        :raises ValueError: If the value is not integral
        """
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        number = parse_number(value)
        if not number.is_integer():
            msg = f"n must be an integer, got {value!r}"
            raise ValueError(msg)
        return int(number)

    @pydantic.field_validator("n")
    @classmethod
    def enough_points(cls, value: int) -> int:
        """Require at least :py:data:`h3wave_core.grid.MIN_POINTS` points.

        :raises ValueError: If ``n`` is too small
        """
        if value < grid_mod.MIN_POINTS:
            msg = f"n must be at least {grid_mod.MIN_POINTS}, got {value!r}"
            raise ValueError(msg)
        return value

    def build(self) -> grid_mod.RadialGrid:
        """Construct the grid."""
        return grid_mod.make_grid(self.r_max, self.n)


class SchemeConfig(pydantic.BaseModel):
    """Truncation scheme section (``scheme.*``)."""

    model_config = pydantic.ConfigDict(frozen=True, extra="forbid")

    s0: float = 2.0**-6
    epsilon: float = 0.1
    t_max: float = 4.0

    @pydantic.field_validator("s0", "epsilon", "t_max", mode="before")
    @classmethod
    def number(cls, value: t.Any) -> float:  # noqa: ANN401
        """Parse numbers."""
        return parse_number(value)

    @pydantic.field_validator("s0")
    @classmethod
    def valid_scale(cls, value: float) -> float:
        """Require ``0 ≤ s0 ≤ ∞``.

        :raises ValueError: If ``s0`` is negative or not a number
        """
        if not value >= 0:
            msg = f"s0 must be non-negative, got {value!r}"
            raise ValueError(msg)
        return value

    @pydantic.field_validator("epsilon", "t_max")
    @classmethod
    def positive(cls, value: float, info: pydantic.ValidationInfo) -> float:
        """Require positive values; ``inf`` is allowed.

        :raises ValueError: If the value is not positive
        """
        if not value > 0:
            msg = f"{info.field_name} must be positive, got {value!r}"
            raise ValueError(msg)
        return value


class DiagnosticsConfig(pydantic.BaseModel):
    """Diagnostics section (``diagnostics.*``)."""

    model_config = pydantic.ConfigDict(frozen=True, extra="forbid")

    energy: bool = True
    morawetz: bool = True
    space_time: list[tuple[float, float]] = [(4.0, 4.0)]
    strichartz_triples: list[tuple[float, float, float]] = [
        (4.0, 4.0, 0.5),
        (math.inf, 2.0, 0.0),
        (3.0, 6.0, 2.0 / 3.0),
        (8.0 / 3.0, 8.0, 0.75),
    ]
    scatter_probes: list[float] = [4.0, 8.0, 12.0, 16.0]
    s0_list: list[float] = [2.0**-k for k in range(4, 11)]
    bootstrap_c: float = 1.0
    morawetz_probes: int = 10

    @pydantic.field_validator("space_time", mode="before")
    @classmethod
    def pairs(cls, value: t.Any) -> list[tuple[float, ...]]:  # noqa: ANN401
        """Parse ``"p,q; p,q"`` pairs."""
        return parse_tuple_list(value, 2)

    @pydantic.field_validator("strichartz_triples", mode="before")
    @classmethod
    def triples(cls, value: t.Any) -> list[tuple[float, ...]]:  # noqa: ANN401
        """Parse ``"p,q,gamma; ..."`` triples."""
        return parse_tuple_list(value, 3)

    @pydantic.field_validator("scatter_probes", "s0_list", mode="before")
    @classmethod
    def numbers(cls, value: t.Any) -> list[float]:  # noqa: ANN401
        """Parse comma separated numbers."""
        return parse_number_list(value)

    @pydantic.field_validator("bootstrap_c", mode="before")
    @classmethod
    def number(cls, value: t.Any) -> float:  # noqa: ANN401
        """Parse the bootstrap constant."""
        return parse_number(value)

    @pydantic.field_validator("scatter_probes")
    @classmethod
    def increasing(cls, value: list[float]) -> list[float]:
        """Require strictly increasing non-negative probe times.

        :raises ValueError: If the probes are not increasing
        """
        if any(p < 0 for p in value) or any(b <= a for a, b in itertools.pairwise(value)):
            msg = f"scatter_probes must be non-negative and strictly increasing, got {value!r}"
            raise ValueError(msg)
        return value

    @pydantic.field_validator("s0_list")
    @classmethod
    def valid_scales(cls, value: list[float]) -> list[float]:
        """Require non-negative scales.

        :raises ValueError: If a scale is negative
        """
        if any(not s0 >= 0 for s0 in value):
            msg = f"s0_list entries must be non-negative, got {value!r}"
            raise ValueError(msg)
        return value

    @pydantic.field_validator("bootstrap_c", "morawetz_probes")
    @classmethod
    def positive(cls, value: float, info: pydantic.ValidationInfo) -> float:
        """Require positive values.

        :raises ValueError: If the value is not positive
        """
        if not value > 0:
            msg = f"{info.field_name} must be positive, got {value!r}"
            raise ValueError(msg)
        return value


class OutputConfig(pydantic.BaseModel):
    """Output section (``output.*``)."""

    model_config = pydantic.ConfigDict(frozen=True, extra="forbid")

    out_dir: pathlib.Path = pathlib.Path("h3wave-out")


class RunConfig(pydantic.BaseModel):
    """Complete configuration of one run.

    :raises ValueError: If a setting has an incorrect value
    :raises pydantic.ValidationError: If a setting is not parsable or a guard is violated
    """

    model_config = pydantic.ConfigDict(frozen=True, extra="forbid")

    grid: GridConfig = GridConfig()
    data: synth.DataSpec = synth.DataSpec()
    dt: float = 5e-3
    horizon: float = 16.0
    stepper: t.Literal["linear", "cubic"] = "cubic"
    scheme: SchemeConfig = SchemeConfig()
    diagnostics: DiagnosticsConfig = DiagnosticsConfig()
    output: OutputConfig = OutputConfig()

    @pydantic.field_validator("dt", "horizon", mode="before")
    @classmethod
    def number(cls, value: t.Any) -> float:  # noqa: ANN401
        """Parse numbers."""
        return parse_number(value)

    @pydantic.field_validator("data", mode="before")
    @classmethod
    def data_numbers(cls, value: t.Any) -> t.Any:  # noqa: ANN401
        """Parse the numeric data settings given as strings."""
        if not isinstance(value, dict):
            return value
        parsed = dict(value)
        for key in ("s", "amplitude"):
            if isinstance(parsed.get(key), str):
                parsed[key] = parse_number(parsed[key])
        radius = parsed.get("radius")
        if isinstance(radius, str):
            parsed["radius"] = None if radius.strip().casefold() == "none" else parse_number(radius)
        return parsed

    @pydantic.field_validator("dt")
    @classmethod
    def positive_step(cls, value: float) -> float:
        """Require a positive finite time step.

        :raises ValueError: If ``dt`` is not positive and finite
        """
        if not (math.isfinite(value) and value > 0):
            msg = f"dt must be positive and finite, got {value!r}"
            raise ValueError(msg)
        return value

    @pydantic.field_validator("horizon")
    @classmethod
    def valid_horizon(cls, value: float) -> float:
        """Require a non-negative finite horizon.

        :raises ValueError: If ``horizon`` is negative or infinite
        """
        if not (math.isfinite(value) and value >= 0):
            msg = f"horizon must be non-negative and finite, got {value!r}"
            raise ValueError(msg)
        return value

    @pydantic.model_validator(mode="after")
    def domain_guard(self) -> RunConfig:
        """Check the finite-propagation guard and the step recommendation.

        :raises ValueError: If ``r_support + horizon + 1 > r_max`` for a cubic run
        """
        support = self.r_support
        if self.stepper == "cubic" and not evolve.guard_holds(
            support, self.horizon, self.grid.r_max
        ):
            msg = (
                f"horizon: r_support + horizon + {evolve.GUARD_MARGIN} = "
                f"{support + self.horizon + evolve.GUARD_MARGIN} exceeds grid.r_max = "
                f"{self.grid.r_max}"
            )
            raise ValueError(msg)
        dr = self.grid.r_max / self.grid.n
        if self.dt > KICK_RECOMMENDATION * dr:
            logger.warning(
                "dt=%s exceeds the recommended %s*dr=%s.", self.dt, KICK_RECOMMENDATION, dr
            )
        return self

    @property
    def r_support(self) -> float:
        """Radius outside of which the initial data vanish."""
        return synth.r_support(self.data, self.grid.r_max)

    def plan(self, horizon: float | None = None) -> evolve.StepPlan:
        """Step plan over ``[0, horizon]`` carrying the domain guard."""
        return evolve.StepPlan.from_horizon(
            self.dt,
            self.horizon if horizon is None else horizon,
            r_support=self.r_support,
            r_max=self.grid.r_max,
        )


def known_settings() -> set[str]:
    """Dotted names of all settings."""
    known = {"dt", "horizon", "stepper"}
    sections: dict[str, type[pydantic.BaseModel]] = {
        "grid": GridConfig,
        "data": synth.DataSpec,
        "scheme": SchemeConfig,
        "diagnostics": DiagnosticsConfig,
        "output": OutputConfig,
    }
    for section, model in sections.items():
        known |= {f"{section}.{name}" for name in model.model_fields}
    return known


def _flatten(values: t.Mapping[str, t.Any], prefix: str = "") -> dict[str, t.Any]:
    flat: dict[str, t.Any] = {}
    for key, value in values.items():
        name = f"{prefix}{key}"
        if isinstance(value, t.Mapping):
            flat.update(_flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def _nest(flat: t.Mapping[str, t.Any]) -> dict[str, t.Any]:
    nested: dict[str, t.Any] = {}
    for key, value in flat.items():
        section, _, name = key.partition(".")
        if name:
            nested.setdefault(section, {})[name] = value
        else:
            nested[section] = value
    return nested


def config_from_settings(
    settings: t.Mapping[str, t.Any],
    *,
    source: str = "<settings>",
    warn_unknown_settings: bool = False,
) -> RunConfig:
    """Validate dotted or nested settings into a :py:class:`RunConfig`.

    Unknown settings are dropped.

    :param settings: Settings, keys may be dotted
    :param source: Name used in log messages
    :param warn_unknown_settings: If a warning should be logged for unknown settings
    :raises pydantic.ValidationError: If a setting is invalid
    :return: The validated config
    """
    flat = _flatten(settings)
    known = known_settings()
    unknown = sorted(k for k in flat if k not in known)
    if unknown and warn_unknown_settings:
        logger.warning("Unknown setting(s) %s found in: '%s'.", unknown, source)
    return RunConfig.model_validate(_nest({k: v for k, v in flat.items() if k in known}))


def _load_config_from_flat_file(
    flat_file: pathlib.Path, *, warn_unknown_settings: bool = False
) -> RunConfig:
    """Load a flat ``key = value`` file.

    :raises ValueError: If the file cannot be parsed
    """
    text = flat_file.read_text(encoding="utf-8")
    parser = configparser.ConfigParser(
        interpolation=None,
        delimiters=("=",),
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
    )
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    if not text.lstrip().startswith("["):
        text = f"[{FLAT_SECTION}]\n{text}"
    try:
        parser.read_string(text, source=str(flat_file))
    except configparser.Error as exc:
        logger.error("Config file could not be parsed: '%s'.", flat_file)  # noqa: TRY400
        msg = f"Invalid config file {flat_file}: {exc}"
        raise ValueError(msg) from exc

    if not parser.has_section(FLAT_SECTION):
        logger.warning("Config file has no [%s] section: '%s'.", FLAT_SECTION, flat_file)
        return RunConfig()
    settings = {k.strip(): v.strip() for k, v in parser.items(FLAT_SECTION)}
    return config_from_settings(
        settings, source=str(flat_file), warn_unknown_settings=warn_unknown_settings
    )


def _load_config_from_toml_file(
    toml_file: pathlib.Path, *, warn_unknown_settings: bool = False
) -> RunConfig:
    """Load a TOML file, top level or ``[tool.h3wave]``.

    .. warning::

        Needs tomli installed for python versions before 3.11!
        Use toml extra.
    """
    _extras.install_guard_tomli(tomllib_imported=tomllib_imported)
    with toml_file.open("rb") as toml_file_handle:
        toml_dict = tomllib.load(toml_file_handle)

    section: t.Any = toml_dict
    for key in TOML_SECTION:
        if not isinstance(section, dict) or key not in section:
            section = toml_dict
            break
        section = section[key]
    return config_from_settings(
        section, source=str(toml_file), warn_unknown_settings=warn_unknown_settings
    )


def load_config_file(file_path: pathlib.Path, *, warn_unknown_settings: bool = False) -> RunConfig:
    """Load, parse and validate a run config from a file.

    ``*.toml`` files are read as TOML, everything else as flat ``key = value`` text.

    :param file_path: File to load config from
    :param warn_unknown_settings: If a warning should be logged for unknown settings in the file
    :raises FileNotFoundError: If the file is not found
    :raises ValueError: If the file cannot be parsed
    :raises pydantic.ValidationError: If a setting is invalid
    :return: The validated config
    """
    logger.debug("Try loading config file: '%s'.", file_path)
    resolved_file = file_path.resolve()
    if not resolved_file.is_file():
        logger.error("Config file is not a file: '%s'.", file_path)
        msg = f"{resolved_file}"
        raise FileNotFoundError(msg)

    if resolved_file.suffix.casefold() == ".toml":
        return _load_config_from_toml_file(
            resolved_file, warn_unknown_settings=warn_unknown_settings
        )
    return _load_config_from_flat_file(resolved_file, warn_unknown_settings=warn_unknown_settings)


class ConfigOverrides(pydantic.BaseModel):
    """Settings given on the command line; unset values leave the file config alone."""

    model_config = pydantic.ConfigDict(frozen=True, extra="forbid")

    seed: int | None = None
    out_dir: pathlib.Path | None = None


def merge_configs(
    config_base: RunConfig,
    config_add: ConfigOverrides,
    *,
    config_add_is_dominant: bool = True,
) -> RunConfig:
    """Merge command line overrides into a config.

    :param config_base: The base config to merge into
    :param config_add: The overrides
    :param config_add_is_dominant: If the overrides replace values of ``config_base``;
        defaults to :py:obj:`True`
    :return: New validated config
    """
    logger.debug("Merging configs.")
    base = config_base.model_dump()
    updates = {
        "data.seed": config_add.seed,
        "output.out_dir": config_add.out_dir,
    }
    for key, value in updates.items():
        if value is None or not config_add_is_dominant:
            continue
        section, _, name = key.partition(".")
        base[section][name] = value
    return RunConfig.model_validate(base)
