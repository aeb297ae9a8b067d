"""Atomic model parameters, scenario presets and the parameter-file format.

All frequencies, rates and detunings are stored in units of the scaling
rate ``gamma_unit`` (Hz). SI quantities (dipole moments, density and the
fundamental constants) only enter the polarizability prefactors.
"""

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml
from scipy.constants import epsilon_0, hbar, mu_0, physical_constants

from .errors import (
    ConfigError,
    IoError,
    NegativeDensity,
    NegativeRate,
    NonPositiveMoment,
    NonPositiveUnit,
    ParameterError,
    UnknownPreset,
)

BOHR_MAGNETON = physical_constants["Bohr magneton"][0]

# Not sourced from the model description; documented defaults.
DEFAULT_D32 = 2.5e-29
DEFAULT_MU42 = 9.27e-24

RABI_CONVENTIONS = ("angular", "ordinary")

_RATE_FIELDS = ("gamma1", "gamma2", "gamma3", "Gamma1", "Gamma2", "Omega_c", "Omega_e", "Omega_b")


@dataclass(frozen=True)
class SystemParameters:
    """Four-level atom parameters in units of ``gamma_unit``.

    Levels: |1> = 5S1/2 F=2, |2> = 5P1/2 F=2, |3> = 5D3/2 F=1, |4> = 5D3/2 F=2.
    ``gamma1`` is |2>->|1> decay, ``gamma2``/``gamma3`` are |3>->|2> and
    |4>->|2>; ``Gamma1``/``Gamma2`` are incoherent pumps on |2>-|3> and |2>-|4>.
    ``N`` is a number density in m^-3, ``d32`` in C*m, ``mu42`` in J/T.
    ``rabi_to_si`` selects whether a scaled Rabi frequency becomes an angular
    (x 2*pi) or an ordinary frequency when converted to SI.
    """

    gamma_unit: float = 0.67e6
    gamma1: float = 8.0
    gamma2: float = 1.0
    gamma3: float = 1.0
    Gamma1: float = 0.0
    Gamma2: float = 0.0
    Omega_c: float = 22.5
    Omega_e: float = 0.5
    Omega_b: float = 0.5
    Delta_c: float = 0.0
    Delta_e: float = 0.0
    Delta_b: float = 0.0
    omega43: float = 0.0
    N: float = 1.04e21
    d32: float = DEFAULT_D32
    mu42: float = DEFAULT_MU42
    rabi_to_si: str = "angular"
    eps0: float = field(default=epsilon_0, init=False, repr=False)
    mu0: float = field(default=mu_0, init=False, repr=False)
    hbar: float = field(default=hbar, init=False, repr=False)

    def to_dict(self):
        return {name: value if isinstance(value, str) else float(value)
                for name, value in ((f.name, getattr(self, f.name)) for f in fields(self) if f.init)}

    def rabi_si(self, scaled):
        """Convert a Rabi frequency in gamma units to s^-1."""
        factor = 2.0 * math.pi if self.rabi_to_si == "angular" else 1.0
        return scaled * self.gamma_unit * factor


PARAMETER_FIELDS = tuple(f.name for f in fields(SystemParameters) if f.init)


def validate(params):
    """Return ``params`` unchanged if every invariant holds, else raise."""
    for name in PARAMETER_FIELDS:
        value = getattr(params, name)
        if name == "rabi_to_si":
            if value not in RABI_CONVENTIONS:
                raise ParameterError(name, value, f"rabi_to_si must be one of {RABI_CONVENTIONS}, got {value!r}")
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ParameterError(name, value, f"{name} must be a finite real number, got {value!r}")
    if params.gamma_unit <= 0:
        raise NonPositiveUnit("gamma_unit", params.gamma_unit)
    for name in _RATE_FIELDS:
        if getattr(params, name) < 0:
            raise NegativeRate(name, getattr(params, name))
    if params.N < 0:
        raise NegativeDensity("N", params.N)
    for name in ("d32", "mu42"):
        if getattr(params, name) <= 0:
            raise NonPositiveMoment(name, getattr(params, name))
    return params


@dataclass(frozen=True)
class LinkageRule:
    """``target = factor * source``, re-applied whenever ``source`` changes."""

    target: str
    source: str
    factor: float

    def __str__(self):
        return f"{self.target} = {self.factor:g} * {self.source}"


PUMP_RULE = LinkageRule("Gamma1", "Gamma2", 1.5)
DETUNING_RULE = LinkageRule("Delta_b", "Delta_e", -1.5)


@dataclass(frozen=True)
class ScenarioPreset:
    id: str
    base: SystemParameters
    pump_values: tuple = (0.0, 0.4, 0.6, 0.8)
    linkage_rules: tuple = (PUMP_RULE, DETUNING_RULE)

    def __post_init__(self):
        pumps = tuple(float(g) for g in self.pump_values)
        if any(g < 0 for g in pumps):
            raise NegativeRate("Gamma2", min(pumps))
        object.__setattr__(self, "pump_values", tuple(sorted(pumps)))
        object.__setattr__(self, "linkage_rules", tuple(self.linkage_rules))


DENSITY = 1.04e21

_FIG2_BASE = SystemParameters(Omega_c=22.5, Omega_e=0.5, Omega_b=0.5, Delta_c=-0.25, N=DENSITY)
_FIG3_BASE = replace(_FIG2_BASE, Delta_c=0.25)

PRESETS = {
    "fig2-a": ScenarioPreset("fig2-a", _FIG2_BASE),
    "fig2-b": ScenarioPreset("fig2-b", replace(_FIG2_BASE, N=1.5 * DENSITY)),
    "fig3-c": ScenarioPreset("fig3-c", replace(_FIG3_BASE, Omega_c=28.0)),
    "fig3-d": ScenarioPreset("fig3-d", replace(_FIG3_BASE, Omega_c=32.0)),
}


def preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPreset(name, PRESETS) from None


def apply_linkages(scenario, Delta_e, Gamma2):
    """Parameter snapshot at one sweep point with every linkage rule applied."""
    params = replace(scenario.base, Delta_e=float(Delta_e), Gamma2=float(Gamma2))
    for rule in scenario.linkage_rules:
        params = replace(params, **{rule.target: rule.factor * getattr(params, rule.source) + 0.0})
    return validate(params)


# --- parameter files -------------------------------------------------------

def dumps(params):
    return yaml.safe_dump(params.to_dict(), sort_keys=False)


def save(params, path):
    path = Path(path)
    try:
        path.write_text(dumps(params), encoding="utf-8")
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from exc


def loads(text, source="<string>"):
    """Parse a flat key/value YAML document into validated SystemParameters.

    Unknown or duplicated keys are errors; messages carry the line number.
    """
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: malformed document: {exc}") from exc
    if root is None:
        raise ConfigError(f"{source}: empty parameter file")
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError(f"{source}: expected a flat key/value mapping")

    values = {}
    lines = {}
    for key_node, value_node in root.value:
        line = key_node.start_mark.line + 1
        key = key_node.value
        where = f"{source}:{line}: field {key!r}"
        if key not in PARAMETER_FIELDS:
            raise ConfigError(f"{where}: unknown key (valid keys: {', '.join(PARAMETER_FIELDS)})")
        if key in values:
            raise ConfigError(f"{where}: duplicate key")
        lines[key] = line
        if not isinstance(value_node, yaml.ScalarNode):
            raise ConfigError(f"{where}: expected a scalar value")
        if key == "rabi_to_si":
            values[key] = value_node.value
            continue
        try:
            values[key] = float(value_node.value)
        except ValueError:
            raise ConfigError(f"{where}: not a number: {value_node.value!r}") from None

    params = SystemParameters(**values)
    try:
        return validate(params)
    except ParameterError as exc:
        line = lines.get(exc.field)
        prefix = f"{source}:{line}" if line else source
        raise ConfigError(f"{prefix}: {exc}") from exc


def load(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from exc
    return loads(text, source=str(path))
