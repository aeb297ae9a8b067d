"""Detuning sweeps over scenario presets and pump strengths."""

import time
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .errors import DivisionByZero, IncompatibleGrids, NonPhysical, SingularSystem, SweepFailed
from .params import apply_linkages
from .response import PREDICATES, detect_bands, failed_point, response_point, total_width

SOURCES = ("analytical", "numerical")
SOURCE_CHOICES = ("analytical", "numerical", "both")
DEFAULT_RANGE = (-10.0, 10.0, 801)
MAX_FAILED_FRACTION = 0.5


@dataclass(frozen=True)
class SweepSpec:
    scenario: object
    Delta_e_range: tuple = DEFAULT_RANGE
    Gamma2_values: tuple = None
    source: str = "both"
    generator_variant: str = "verbatim"

    def __post_init__(self):
        lo, hi, n = self.Delta_e_range
        if not lo < hi:
            raise ValueError(f"Delta_e range needs lo < hi, got {lo} .. {hi}")
        if int(n) != n or n < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {n}")
        object.__setattr__(self, "Delta_e_range", (float(lo), float(hi), int(n)))
        values = self.Gamma2_values
        if values is None:
            values = self.scenario.pump_values
        values = tuple(float(v) for v in values)
        if not values:
            raise ValueError("Gamma2_values must not be empty")
        if any(v < 0 for v in values):
            raise ValueError(f"Gamma2_values must be non-negative, got {values}")
        object.__setattr__(self, "Gamma2_values", values)
        if self.source not in SOURCE_CHOICES:
            raise ValueError(f"source must be one of {SOURCE_CHOICES}, got {self.source!r}")
        if self.generator_variant not in dynamics.VARIANTS:
            raise ValueError(f"generator_variant must be one of {dynamics.VARIANTS}")

    @property
    def sources(self):
        return SOURCES if self.source == "both" else (self.source,)

    def grid(self):
        lo, hi, n = self.Delta_e_range
        return np.linspace(lo, hi, n)


@dataclass(frozen=True)
class DiscrepancyRow:
    """Largest analytical-minus-numerical coherence gap along one Gamma2 trace."""

    Gamma2: float
    max_rho23_gap: float
    rho23_gap_at: float
    max_rho24_gap: float
    rho24_gap_at: float
    max_abs_rho23_numerical: float
    max_abs_rho23_analytical: float


@dataclass(frozen=True)
class SweepResult:
    """Sweep output.

    ``points[source]`` is ordered Gamma2-major, Delta_e-minor;
    ``coherences[source]`` holds the matching ``(rho23, rho24)`` pairs.
    """

    spec: SweepSpec
    points: dict
    coherences: dict
    bands: dict
    discrepancy: tuple = None
    timing: dict = field(default_factory=dict, compare=False)

    def trace(self, source, Gamma2):
        n = self.spec.Delta_e_range[2]
        k = self.spec.Gamma2_values.index(Gamma2)
        return self.points[source][k * n:(k + 1) * n]

    def band_widths(self, source, predicate):
        return {g: total_width(self.bands[source, g, predicate]) for g in self.spec.Gamma2_values}

    @property
    def flagged(self):
        return sum(1 for pts in self.points.values() for p in pts if p.flags)


def _analytical(snapshots):
    out = []
    for p in snapshots:
        try:
            out.append((complex(dynamics.rho23_weak(p)), complex(dynamics.rho24_weak(p)), None))
        except DivisionByZero:
            out.append((None, None, "division_by_zero"))
    return out


_ERROR_FLAGS = {SingularSystem: "singular", NonPhysical: "nonphysical"}


def _numerical(snapshots, variant):
    rhos, errors = dynamics.steady_states(dynamics.build_generators(snapshots, variant))
    out = []
    for rho, err in zip(rhos, errors):
        if err is not None:
            out.append((None, None, _ERROR_FLAGS[type(err)]))
        else:
            out.append((complex(rho[1, 2]), complex(rho[1, 3]), None))
    return out


def run_sweep(spec):
    """Evaluate every (Gamma2, Delta_e) grid point for the selected sources."""
    started = time.perf_counter()
    grid = spec.grid()
    snapshots = [apply_linkages(spec.scenario, d, g) for g in spec.Gamma2_values for d in grid]

    points, coherences, bands, timing = {}, {}, {}, {}
    for source in spec.sources:
        t0 = time.perf_counter()
        if source == "analytical":
            raw = _analytical(snapshots)
        else:
            raw = _numerical(snapshots, spec.generator_variant)
        pts = []
        for snap, (r23, r24, flag) in zip(snapshots, raw):
            if flag is not None:
                pts.append(failed_point(snap.Delta_e, flag, snap))
            else:
                pts.append(response_point(snap.Delta_e, r23, r24, snap))
        failed = sum(1 for p in pts if p.flags)
        if failed > MAX_FAILED_FRACTION * len(pts):
            raise SweepFailed(f"{source}: {failed} of {len(pts)} points failed")
        points[source] = tuple(pts)
        coherences[source] = tuple((r23, r24) for r23, r24, _ in raw)
        timing[source] = time.perf_counter() - t0

    result = SweepResult(spec, points, coherences, {}, None, timing)
    for source in spec.sources:
        for g in spec.Gamma2_values:
            trace = result.trace(source, g)
            for predicate in PREDICATES:
                bands[source, g, predicate] = tuple(detect_bands(trace, predicate))

    discrepancy = _discrepancy(spec, coherences) if len(spec.sources) == 2 else None
    timing["total"] = time.perf_counter() - started
    return SweepResult(spec, points, coherences, bands, discrepancy, timing)


def _gaps(a, b):
    return np.array([abs(x - y) if x is not None and y is not None else np.nan for x, y in zip(a, b)])


def _discrepancy(spec, coherences):
    grid = spec.grid()
    n = len(grid)
    rows = []
    for k, g in enumerate(spec.Gamma2_values):
        ana = coherences["analytical"][k * n:(k + 1) * n]
        num = coherences["numerical"][k * n:(k + 1) * n]
        gap23 = _gaps([c[0] for c in ana], [c[0] for c in num])
        gap24 = _gaps([c[1] for c in ana], [c[1] for c in num])
        if np.all(np.isnan(gap23)) or np.all(np.isnan(gap24)):
            rows.append(DiscrepancyRow(g, *([float("nan")] * 6)))
            continue
        i23, i24 = int(np.nanargmax(gap23)), int(np.nanargmax(gap24))
        rows.append(DiscrepancyRow(
            g,
            float(gap23[i23]), float(grid[i23]),
            float(gap24[i24]), float(grid[i24]),
            float(max(abs(c[0]) for c in num if c[0] is not None)),
            float(max(abs(c[0]) for c in ana if c[0] is not None)),
        ))
    return tuple(rows)


# --- scenario comparison ---------------------------------------------------

@dataclass(frozen=True)
class WidthRow:
    source: str
    Gamma2: float
    predicate: str
    width_a: float
    width_b: float

    @property
    def delta(self):
        return self.width_a - self.width_b


@dataclass(frozen=True)
class ResonanceRow:
    source: str
    Gamma2: float
    quantity: str
    value_a: float
    value_b: float

    @property
    def delta(self):
        return self.value_a - self.value_b


@dataclass(frozen=True)
class Comparison:
    label_a: str
    label_b: str
    widths: tuple
    resonance: tuple

    def width_deltas(self, source, predicate):
        return {r.Gamma2: r.delta for r in self.widths if r.source == source and r.predicate == predicate}


def _resonance_value(trace, quantity):
    x = np.array([p.Delta_e for p in trace])
    y = np.array([getattr(p, quantity).real for p in trace])
    if not x[0] <= 0.0 <= x[-1]:
        return float("nan")
    return float(np.interp(0.0, x, y))


def compare_scenarios(a, b, label_a=None, label_b=None):
    """Band-width and resonance-value deltas (a minus b) per Gamma2."""
    if a.spec.Delta_e_range != b.spec.Delta_e_range:
        raise IncompatibleGrids(f"Delta_e grids differ: {a.spec.Delta_e_range} vs {b.spec.Delta_e_range}")
    if a.spec.Gamma2_values != b.spec.Gamma2_values:
        raise IncompatibleGrids(f"Gamma2 values differ: {a.spec.Gamma2_values} vs {b.spec.Gamma2_values}")
    sources = [s for s in SOURCES if s in a.points and s in b.points]
    if not sources:
        raise IncompatibleGrids("results share no coherence source")

    widths, resonance = [], []
    for source in sources:
        for g in a.spec.Gamma2_values:
            for predicate in PREDICATES:
                widths.append(WidthRow(source, g, predicate,
                                       total_width(a.bands[source, g, predicate]),
                                       total_width(b.bands[source, g, predicate])))
            ta, tb = a.trace(source, g), b.trace(source, g)
            for quantity in ("eps_r", "mu_r", "n"):
                resonance.append(ResonanceRow(source, g, quantity,
                                              _resonance_value(ta, quantity),
                                              _resonance_value(tb, quantity)))
    return Comparison(label_a or a.spec.scenario.id, label_b or b.spec.scenario.id,
                      tuple(widths), tuple(resonance))
