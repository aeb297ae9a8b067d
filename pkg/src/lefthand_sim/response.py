"""Electric and magnetic response: polarizability, Clausius-Mossotti, index, bands."""

import cmath
from dataclasses import dataclass, field

import numpy as np

from .errors import DivisionByZero, PoleEncountered, TooFewPoints

POLE_TOL = 1e-12
PREDICATES = ("neg_eps", "neg_mu", "double_negative")


@dataclass(frozen=True)
class ResponsePoint:
    """Optical response at one probe detuning (``Delta_e`` in gamma units).

    ``alpha_e`` and ``alpha_m`` are polarizability volumes in m^3. ``flags``
    names the failures hit while computing the point; flagged quantities are
    NaN.
    """

    Delta_e: float
    alpha_e: complex
    alpha_m: complex
    eps_r: complex
    mu_r: complex
    n: complex
    flags: tuple = ()
    params: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Band:
    lo: float
    hi: float
    predicate: str

    @property
    def width(self):
        return self.hi - self.lo


def polarizability(rho23, params):
    """alpha_e = |d32|^2 rho32 / (eps0 hbar Omega_e), rho32 = conj(rho23)."""
    if params.Omega_e == 0:
        raise DivisionByZero("polarizability undefined for Omega_e = 0")
    omega = params.rabi_si(params.Omega_e)
    return params.d32 ** 2 * complex(rho23).conjugate() / (params.eps0 * params.hbar * omega)


def magnetizability(rho24, params):
    """alpha_m = mu0 |mu42|^2 rho24 / (hbar Omega_b)."""
    if params.Omega_b == 0:
        raise DivisionByZero("magnetizability undefined for Omega_b = 0")
    omega = params.rabi_si(params.Omega_b)
    return params.mu0 * params.mu42 ** 2 * complex(rho24) / (params.hbar * omega)


def clausius_mossotti(N, alpha):
    """Local-field corrected relative response (1 + 2/3 N a) / (1 - 1/3 N a)."""
    n_alpha = N * alpha
    denom = 1 - n_alpha / 3
    if abs(denom) < POLE_TOL:
        raise PoleEncountered(n_alpha)
    return (1 + 2 * n_alpha / 3) / denom


def refractive_index(eps_r, mu_r):
    """n = sqrt(eps_r) * sqrt(mu_r), principal root of each factor.

    Real double-negative input gives a negative real index.
    """
    return cmath.sqrt(eps_r) * cmath.sqrt(mu_r)


def response_point(Delta_e, rho23, rho24, params):
    """Map probe coherences to a ResponsePoint, flagging instead of raising."""
    flags = []
    nan = complex(np.nan, np.nan)
    try:
        alpha_e = polarizability(rho23, params)
    except DivisionByZero:
        alpha_e, flags = nan, flags + ["division_by_zero"]
    try:
        alpha_m = magnetizability(rho24, params)
    except DivisionByZero:
        alpha_m, flags = nan, flags + ["division_by_zero"]
    eps_r = mu_r = nan
    if not flags:
        try:
            eps_r = clausius_mossotti(params.N, alpha_e)
        except PoleEncountered:
            flags.append("pole_eps")
        try:
            mu_r = clausius_mossotti(params.N, alpha_m)
        except PoleEncountered:
            flags.append("pole_mu")
    n = refractive_index(eps_r, mu_r) if not flags else nan
    return ResponsePoint(float(Delta_e), complex(alpha_e), complex(alpha_m), complex(eps_r),
                         complex(mu_r), complex(n), tuple(dict.fromkeys(flags)), params)


def failed_point(Delta_e, flag, params=None):
    nan = complex(np.nan, np.nan)
    return ResponsePoint(float(Delta_e), nan, nan, nan, nan, nan, (flag,), params)


# --- band detection --------------------------------------------------------

def _real_parts(points, predicate):
    re_eps = np.array([p.eps_r.real for p in points])
    re_mu = np.array([p.mu_r.real for p in points])
    if predicate == "neg_eps":
        return [re_eps]
    if predicate == "neg_mu":
        return [re_mu]
    if predicate == "double_negative":
        return [re_eps, re_mu]
    raise ValueError(f"unknown predicate {predicate!r}; expected one of {PREDICATES}")


def _crossing(x0, x1, y0, y1):
    if not (np.isfinite(y0) and np.isfinite(y1)) or y0 == y1:
        return None
    return x0 + (x1 - x0) * (0.0 - y0) / (y1 - y0)


def detect_bands(points, predicate):
    """Maximal detuning intervals where the predicate holds.

    ``points`` must be sorted by ``Delta_e``. Interior endpoints are placed
    at the linearly interpolated zero crossing of the real part that changes
    sign between the bracketing grid points; for ``double_negative`` the
    innermost crossing wins. Flagged points never satisfy a predicate.
    """
    points = list(points)
    if len(points) < 2:
        raise TooFewPoints(f"need at least 2 points, got {len(points)}")
    x = np.array([p.Delta_e for p in points])
    if np.any(np.diff(x) <= 0):
        raise ValueError("points must be strictly increasing in Delta_e")
    parts = _real_parts(points, predicate)
    with np.errstate(invalid="ignore"):
        mask = np.logical_and.reduce([part < 0 for part in parts])

    bands = []
    k = 0
    while k < len(x):
        if not mask[k]:
            k += 1
            continue
        start = k
        while k + 1 < len(x) and mask[k + 1]:
            k += 1
        stop = k
        lo, hi = x[start], x[stop]
        if start > 0:
            cands = [_crossing(x[start - 1], x[start], part[start - 1], part[start])
                     for part in parts if not part[start - 1] < 0]
            cands = [c for c in cands if c is not None]
            lo = max(cands) if cands else x[start]
        if stop < len(x) - 1:
            cands = [_crossing(x[stop], x[stop + 1], part[stop], part[stop + 1])
                     for part in parts if not part[stop + 1] < 0]
            cands = [c for c in cands if c is not None]
            hi = min(cands) if cands else x[stop]
        bands.append(Band(float(lo), float(hi), predicate))
        k += 1
    return bands


def total_width(bands):
    return float(sum(b.width for b in bands))
