"""CSV, sidecar, SVG and plain-text outputs for sweep results."""

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError, IoError
from .params import LinkageRule, ScenarioPreset, SystemParameters, apply_linkages, validate
from .response import PREDICATES, ResponsePoint, detect_bands
from .sweep import SweepResult, SweepSpec

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "delta_e_over_gamma", "gamma2_over_gamma", "source",
    "re_eps", "im_eps", "re_mu", "im_mu", "re_n", "im_n", "flags",
)
QUANTITIES = (("eps_r", "permittivity"), ("mu_r", "permeability"), ("n", "index"))


def fmt(x):
    """17 significant digits: round-trips every double exactly."""
    return format(float(x), ".17g")


def _write_text(path, text):
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from exc
    return path


def _read_text(path):
    path = Path(path)
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from exc


# --- CSV + sidecar ---------------------------------------------------------

def csv_text(result, source):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    n = result.spec.Delta_e_range[2]
    for k, g in enumerate(result.spec.Gamma2_values):
        for p in result.points[source][k * n:(k + 1) * n]:
            writer.writerow([
                fmt(p.Delta_e), fmt(g), source,
                fmt(p.eps_r.real), fmt(p.eps_r.imag),
                fmt(p.mu_r.real), fmt(p.mu_r.imag),
                fmt(p.n.real), fmt(p.n.imag),
                ";".join(p.flags),
            ])
    return buf.getvalue()


def spec_to_dict(spec, source):
    sc = spec.scenario
    return {
        "csv_schema": CSV_SCHEMA_VERSION,
        "source": source,
        "sweep_source": spec.source,
        "generator_variant": spec.generator_variant,
        "Delta_e_range": list(spec.Delta_e_range),
        "Gamma2_values": list(spec.Gamma2_values),
        "scenario": {
            "id": sc.id,
            "base": sc.base.to_dict(),
            "pump_values": list(sc.pump_values),
            "linkage_rules": [
                {"target": r.target, "source": r.source, "factor": r.factor} for r in sc.linkage_rules
            ],
        },
    }


def spec_from_dict(doc):
    if doc.get("csv_schema") != CSV_SCHEMA_VERSION:
        raise ConfigError(f"unsupported csv_schema {doc.get('csv_schema')!r}")
    sc = doc["scenario"]
    scenario = ScenarioPreset(
        sc["id"],
        validate(SystemParameters(**sc["base"])),
        tuple(sc["pump_values"]),
        tuple(LinkageRule(**r) for r in sc["linkage_rules"]),
    )
    spec = SweepSpec(scenario, tuple(doc["Delta_e_range"]), tuple(doc["Gamma2_values"]),
                     doc["source"], doc["generator_variant"])
    return spec


def sidecar_path(csv_path):
    return Path(csv_path).with_suffix(".json")


def write_csv(result, source, path):
    path = _write_text(path, csv_text(result, source))
    _write_text(sidecar_path(path), json.dumps(spec_to_dict(result.spec, source), indent=2) + "\n")
    return path


def read_result(csv_path):
    """Rebuild a single-source SweepResult from a CSV export and its sidecar."""
    csv_path = Path(csv_path)
    try:
        doc = json.loads(_read_text(sidecar_path(csv_path)))
        spec = spec_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise IoError(sidecar_path(csv_path), f"malformed sidecar: {exc}") from exc
    source = spec.source

    rows = list(csv.reader(io.StringIO(_read_text(csv_path))))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise IoError(csv_path, "unexpected CSV header")
    lo, hi, n = spec.Delta_e_range
    if len(rows) - 1 != n * len(spec.Gamma2_values):
        raise IoError(csv_path, f"expected {n * len(spec.Gamma2_values)} data rows, found {len(rows) - 1}")

    nan = complex(np.nan, np.nan)
    points = []
    try:
        for row in rows[1:]:
            d, g = float(row[0]), float(row[1])
            flags = tuple(f for f in row[9].split(";") if f)
            points.append(ResponsePoint(
                d, nan, nan,
                complex(float(row[3]), float(row[4])),
                complex(float(row[5]), float(row[6])),
                complex(float(row[7]), float(row[8])),
                flags,
                apply_linkages(spec.scenario, d, g),
            ))
    except (IndexError, ValueError) as exc:
        raise IoError(csv_path, f"malformed row: {exc}") from exc

    points = tuple(points)
    bands = {}
    for k, g in enumerate(spec.Gamma2_values):
        trace = points[k * n:(k + 1) * n]
        for predicate in PREDICATES:
            bands[source, g, predicate] = tuple(detect_bands(trace, predicate))
    return SweepResult(spec, {source: points}, {source: ()}, bands)


# --- plots -----------------------------------------------------------------

def write_svg(result, source, quantity, path):
    """Re (solid) and Im (dashed) of one quantity vs Delta_e/gamma, one colour per Gamma2."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    label = dict(QUANTITIES)[quantity]
    symbol = {"eps_r": r"\varepsilon_r", "mu_r": r"\mu_r", "n": "n"}[quantity]
    with plt.rc_context({"svg.hashsalt": "lefthand-sim", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for k, g in enumerate(result.spec.Gamma2_values):
            trace = result.trace(source, g)
            x = [p.Delta_e for p in trace]
            y = np.array([getattr(p, quantity) for p in trace])
            color = f"C{k}"
            ax.plot(x, y.real, "-", color=color, lw=1.2, label=rf"$\Gamma_2={g:g}\gamma$")
            ax.plot(x, y.imag, "--", color=color, lw=1.0)
        ax.axhline(0.0, color="0.6", lw=0.5)
        ax.set_xlabel(r"$\Delta_e/\gamma$")
        ax.set_ylabel(rf"${symbol}$")
        ax.set_title(f"{result.spec.scenario.id} {label} ({source})")
        ax.legend(fontsize=7, frameon=False)
        fig.tight_layout()
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise IoError(path, exc.strerror or str(exc)) from exc
        finally:
            plt.close(fig)
    return Path(path)


# --- text reports ----------------------------------------------------------

def _band_list(bands):
    if not bands:
        return "none"
    return ", ".join(f"[{b.lo:+.4f}, {b.hi:+.4f}]" for b in bands)


def band_report(result, disagreements=None):
    spec = result.spec
    lo, hi, n = spec.Delta_e_range
    lines = [
        f"scenario: {spec.scenario.id}",
        f"grid: Delta_e/gamma in [{lo:g}, {hi:g}], {n} points",
        f"Gamma2/gamma: {', '.join(f'{g:g}' for g in spec.Gamma2_values)}",
        f"linkage: {'; '.join(str(r) for r in spec.scenario.linkage_rules)}",
        f"sources: {', '.join(spec.sources)}; generator variant: {spec.generator_variant}",
        f"flagged points: {result.flagged}",
        "",
    ]
    for source in spec.sources:
        lines.append(f"== bands ({source}) ==")
        for g in spec.Gamma2_values:
            lines.append(f"Gamma2 = {g:g}")
            for predicate in PREDICATES:
                bands = result.bands[source, g, predicate]
                width = sum(b.width for b in bands)
                lines.append(f"  {predicate:<16} width {width:9.4f}  {_band_list(bands)}")
        lines.append("")
    if result.discrepancy:
        lines.append("== analytical vs numerical coherences ==")
        lines.append(f"{'Gamma2':>7} {'max|d rho23|':>13} {'at':>8} {'max|d rho24|':>13} {'at':>8} "
                     f"{'max|rho23| num':>15} {'max|rho23| ana':>15}")
        for row in result.discrepancy:
            lines.append(f"{row.Gamma2:7g} {row.max_rho23_gap:13.6e} {row.rho23_gap_at:8.3f} "
                         f"{row.max_rho24_gap:13.6e} {row.rho24_gap_at:8.3f} "
                         f"{row.max_abs_rho23_numerical:15.6e} {row.max_abs_rho23_analytical:15.6e}")
        lines.append("")
    if disagreements is not None:
        lines.append("== verbatim vs hermitized generator rows ==")
        if disagreements:
            lines.append("rows differ for rho_ij with (i, j) in " + ", ".join(f"({i},{j})" for i, j in disagreements))
        else:
            lines.append("no row differs at the probed snapshot")
        lines.append("")
    return "\n".join(lines)


def comparison_report(cmp):
    lines = [f"comparison: {cmp.label_a} (a) vs {cmp.label_b} (b); deltas are a - b", ""]
    lines.append(f"{'source':<11} {'Gamma2':>7} {'predicate':<16} {'width a':>10} {'width b':>10} {'delta':>10}")
    for r in cmp.widths:
        lines.append(f"{r.source:<11} {r.Gamma2:7g} {r.predicate:<16} {r.width_a:10.4f} {r.width_b:10.4f} {r.delta:+10.4f}")
    lines += ["", "resonance (Delta_e = 0) real parts:"]
    lines.append(f"{'source':<11} {'Gamma2':>7} {'quantity':<8} {'a':>14} {'b':>14} {'delta':>14}")
    for r in cmp.resonance:
        lines.append(f"{r.source:<11} {r.Gamma2:7g} {'Re ' + r.quantity:<8} {r.value_a:14.6e} {r.value_b:14.6e} {r.delta:+14.6e}")
    return "\n".join(lines) + "\n"


def comparison_csv(cmp):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("source", "gamma2_over_gamma", "predicate", "width_a", "width_b", "delta"))
    for r in cmp.widths:
        writer.writerow((r.source, fmt(r.Gamma2), r.predicate, fmt(r.width_a), fmt(r.width_b), fmt(r.delta)))
    return buf.getvalue()
