"""Qualitative trend checks on sweep results.

Each check compares negative-band widths between traces or scenarios and
returns a :class:`Check` instead of raising, so a report can show every
outcome side by side.
"""

from dataclasses import dataclass

from .response import total_width


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _widths(result, source, predicate="neg_eps"):
    return result.band_widths(source, predicate)


def _saturated(result, widths):
    lo, hi, _ = result.spec.Delta_e_range
    full = [g for g, w in widths.items() if w >= hi - lo]
    if not full:
        return ""
    return f" [band spans the whole grid for Gamma2 = {', '.join(f'{g:g}' for g in full)}]"


def pumping_narrows_neg_eps(result, source):
    """neg_eps width at the weakest pump strictly exceeds that at the strongest."""
    widths = _widths(result, source)
    g_lo, g_hi = min(widths), max(widths)
    passed = widths[g_lo] > widths[g_hi]
    return Check(
        f"{result.spec.scenario.id}/{source}: pumping narrows the negative-eps band",
        passed,
        f"width(Gamma2={g_lo:g}) = {widths[g_lo]:.4f}, width(Gamma2={g_hi:g}) = {widths[g_hi]:.4f}"
        + _saturated(result, widths),
    )


def _at_least(name, wider, narrower, source):
    a, b = _widths(wider, source), _widths(narrower, source)
    if a.keys() != b.keys():
        return Check(name, False, "Gamma2 values differ between results")
    passed = all(a[g] >= b[g] for g in a)
    detail = "; ".join(f"Gamma2={g:g}: {a[g]:.4f} vs {b[g]:.4f}" for g in a)
    detail += _saturated(wider, a) or _saturated(narrower, b)
    return Check(name, passed, detail)


def density_widens_neg_eps(dense, sparse, source):
    return _at_least(
        f"{dense.spec.scenario.id} vs {sparse.spec.scenario.id}/{source}: denser vapor widens the negative-eps band",
        dense, sparse, source)


def coupling_widens_neg_eps(strong, weak, source):
    return _at_least(
        f"{strong.spec.scenario.id} vs {weak.spec.scenario.id}/{source}: stronger coupling widens the negative-eps band",
        strong, weak, source)


def double_negative_present(result, source, Gamma2=0.0):
    bands = result.bands[source, Gamma2, "double_negative"]
    re_mu_min = min(p.mu_r.real for p in result.trace(source, Gamma2) if not p.flags)
    return Check(
        f"{result.spec.scenario.id}/{source}: double-negative band at Gamma2={Gamma2:g}",
        bool(bands),
        f"{len(bands)} band(s), total width {total_width(bands):.4f}; min Re mu_r = {re_mu_min:.6f}",
    )


def trend_checks(results, source):
    """Run every trend check on sweeps of the four built-in presets."""
    return [
        pumping_narrows_neg_eps(results["fig2-a"], source),
        density_widens_neg_eps(results["fig2-b"], results["fig2-a"], source),
        coupling_widens_neg_eps(results["fig3-d"], results["fig3-c"], source),
        double_negative_present(results["fig2-a"], source),
    ]
