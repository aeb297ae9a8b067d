"""Density-matrix equations of motion for the driven four-level atom.

Two generator variants are available:

``verbatim``
    The nine published equations of motion, coded term by term. The
    ``rho22`` equation follows from trace conservation and the lower
    triangle from Hermitian conjugation of the printed rows.
``hermitized``
    The same physics written as ``-i[H, rho]`` plus a Lindblad dissipator
    whose coherence damping reproduces the printed rates. It coincides with
    ``verbatim`` wherever the printed rows are mutually consistent and
    differs on the ``rho34`` row (the printed equation couples ``rho32``
    through ``Omega_e`` and omits ``Delta_e - Delta_b`` from its phase) and
    on the ``rho24`` damping when ``gamma2 != gamma3``.

Vectors use column stacking: ``vec(rho)[i + 4*j] = rho[i, j]``.
"""

import functools
import math
import warnings
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from .errors import DivisionByZero, NonPhysical, SingularSystem, StepTooLarge

DIM = 4
VARIANTS = ("verbatim", "hermitized")

# Parameters the generator is linear in.
GENERATOR_FIELDS = (
    "gamma1", "gamma2", "gamma3", "Gamma1", "Gamma2",
    "Omega_c", "Omega_e", "Omega_b",
    "Delta_c", "Delta_e", "Delta_b", "omega43",
)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
POPULATION_TOL = 1e-9
CONDITION_LIMIT = 1e12
WEAK_PROBE_RATIO = 10.0


class WeakProbeWarning(UserWarning):
    """Coupling field not much stronger than the probe components."""


def vec(rho):
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v):
    return np.asarray(v, dtype=complex).reshape((DIM, DIM), order="F")


TRACE_ROW = vec(np.eye(DIM)).real


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """4x4 density matrix; ``element(i, j)`` uses 1-based level labels."""

    rho: np.ndarray

    def element(self, i, j):
        return complex(self.rho[i - 1, j - 1])

    @property
    def populations(self):
        return np.real(np.diag(self.rho)).copy()

    def hermiticity_error(self):
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def trace_error(self):
        return float(abs(np.trace(self.rho) - 1.0))

    def check(self, herm_tol=HERMITICITY_TOL, trace_tol=TRACE_TOL, pop_tol=POPULATION_TOL):
        """Raise NonPhysical if any density-matrix invariant is violated."""
        if self.hermiticity_error() > herm_tol:
            raise NonPhysical(f"not Hermitian: max |rho - rho^H| = {self.hermiticity_error():.3e}")
        if self.trace_error() > trace_tol:
            raise NonPhysical(f"trace deviates from 1 by {self.trace_error():.3e}")
        check_populations(self.rho, pop_tol)
        return self

    @classmethod
    def ground(cls):
        rho = np.zeros((DIM, DIM), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho)


def check_populations(rho, tol=POPULATION_TOL):
    pops = np.real(np.diag(rho))
    if np.any(pops < -tol) or np.any(pops > 1.0 + tol):
        raise NonPhysical(f"populations outside [0, 1]: {pops.tolist()}")


# --- equations of motion ---------------------------------------------------

def _printed_rows(rho, p):
    r = lambda i, j: rho[i - 1, j - 1]  # noqa: E731
    I = 1j
    Oc, Oe, Ob = p.Omega_c, p.Omega_e, p.Omega_b
    g1, g2, g3 = p.gamma1, p.gamma2, p.gamma3
    G1, G2 = p.Gamma1, p.Gamma2
    Dc, De, Db, w43 = p.Delta_c, p.Delta_e, p.Delta_b, p.omega43
    return {
        (1, 1): -I * Oc * (r(1, 2) - r(2, 1)) + g1 * r(2, 2),
        (3, 3): -I * Oe * (r(3, 2) - r(2, 3)) + G1 * r(2, 2) - g2 * r(3, 3),
        (4, 4): -I * Ob * (r(4, 2) - r(2, 4)) + G2 * r(2, 2) - g3 * r(4, 4),
        (1, 2): (-I * Oe * r(1, 3) - I * Ob * r(1, 4) - I * Oc * (r(1, 1) - r(2, 2))
                 - ((g1 + G1 + G2) / 2 + I * Dc) * r(1, 2)),
        (1, 3): (-I * Oe * r(1, 2) + I * Oc * r(2, 3)
                 - ((g2 + I * w43) / 2 + I * De + I * Dc) * r(1, 3)),
        (1, 4): (-I * Ob * r(1, 2) + I * Oc * r(2, 4)
                 - ((g3 - I * w43) / 2 + I * Db + I * Dc) * r(1, 4)),
        (2, 3): (-I * Oe * (r(2, 2) - r(3, 3)) + I * Oc * r(1, 3) + I * Ob * r(4, 3)
                 - ((g1 + g2 + G1 + G2 + I * w43) / 2 + I * De) * r(2, 3)),
        (2, 4): (-I * Ob * (r(2, 2) - r(4, 4)) + I * Oc * r(1, 4) + I * Oe * r(3, 4)
                 - ((g1 + g2 + G1 + G2 - I * w43) / 2 + I * Db) * r(2, 4)),
        (3, 4): (+I * Oe * r(2, 4) - I * Oe * r(3, 2)
                 - ((g2 + g3) / 2 - I * w43) * r(3, 4)),
    }


def printed_derivative(rho, p):
    """Right-hand side of the printed equations of motion (gamma units).

    ``rho22`` follows from trace conservation. Each lower-triangle entry is
    the C-linear conjugate ``conj(f_ij(rho^H))`` of its printed partner, which
    reduces to ``conj(f_ij(rho))`` for Hermitian ``rho``.
    """
    rho = np.asarray(rho, dtype=complex)
    rows = _printed_rows(rho, p)
    mirrored = _printed_rows(rho.conj().T, p)
    out = np.zeros((DIM, DIM), dtype=complex)
    for (i, j), value in rows.items():
        out[i - 1, j - 1] = value
        if i != j:
            out[j - 1, i - 1] = np.conj(mirrored[(i, j)])
    out[1, 1] = -(out[0, 0] + out[2, 2] + out[3, 3])
    return out


def hamiltonian(p):
    """Rotating-frame Hamiltonian (gamma units) with ``d rho/dt = -i[H, rho] + ...``."""
    H = np.zeros((DIM, DIM), dtype=complex)
    H[0, 1] = H[1, 0] = -p.Omega_c
    H[1, 2] = H[2, 1] = -p.Omega_e
    H[1, 3] = H[3, 1] = -p.Omega_b
    H[1, 1] = -p.Delta_c
    H[2, 2] = -(p.Delta_c + p.Delta_e) - p.omega43 / 2
    H[3, 3] = -(p.Delta_c + p.Delta_b) + p.omega43 / 2
    return H


def jump_operators(p):
    """(rate, lower, upper) triples: population moves |upper> -> |lower>."""
    return (
        (p.gamma1, 0, 1),
        (p.gamma2, 1, 2),
        (p.gamma3, 1, 3),
        (p.Gamma1, 2, 1),
        (p.Gamma2, 3, 1),
    )


def lindblad_derivative(rho, p):
    """Hamiltonian plus Lindblad right-hand side (the ``hermitized`` variant)."""
    H = hamiltonian(p)
    out = -1j * (H @ rho - rho @ H)
    for rate, lo, hi in jump_operators(p):
        if rate == 0:
            continue
        op = np.zeros((DIM, DIM))
        op[lo, hi] = 1.0
        opdag_op = op.T @ op
        out += rate * (op @ rho @ op.T - 0.5 * (opdag_op @ rho + rho @ opdag_op))
    return out


_DERIVATIVES = {"verbatim": printed_derivative, "hermitized": lindblad_derivative}


def _check_variant(variant):
    if variant not in VARIANTS:
        raise ValueError(f"unknown generator variant {variant!r}; expected one of {VARIANTS}")


@functools.lru_cache(maxsize=None)
def _basis(variant):
    """Stack of 16x16 matrices B_k with L = sum_k p_k B_k over GENERATOR_FIELDS.

    Both right-hand sides are linear in the parameters, so each B_k is the
    generator with only field k set to one.
    """
    derivative = _DERIVATIVES[variant]
    blocks = np.zeros((len(GENERATOR_FIELDS), DIM * DIM, DIM * DIM), dtype=complex)
    for k, name in enumerate(GENERATOR_FIELDS):
        unit = SimpleNamespace(**{f: 0.0 for f in GENERATOR_FIELDS})
        setattr(unit, name, 1.0)
        for col in range(DIM * DIM):
            e = np.zeros(DIM * DIM, dtype=complex)
            e[col] = 1.0
            blocks[k, :, col] = vec(derivative(unvec(e), unit))
    blocks.setflags(write=False)
    return blocks


def _coefficients(params):
    return np.array([getattr(params, name) for name in GENERATOR_FIELDS], dtype=float)


@dataclass(frozen=True, eq=False)
class Generator:
    """Superoperator ``L`` with ``d vec(rho)/dt = L @ vec(rho)``."""

    L: np.ndarray
    variant: str

    def apply(self, rho):
        return unvec(self.L @ vec(rho))


def build_generator(params, variant="verbatim"):
    _check_variant(variant)
    L = np.tensordot(_coefficients(params), _basis(variant), axes=1)
    return Generator(L, variant)


def build_generators(param_list, variant="verbatim"):
    """Stacked generators, shape (n, 16, 16), for a batch of snapshots."""
    _check_variant(variant)
    coeffs = np.array([_coefficients(p) for p in param_list], dtype=float).reshape(-1, len(GENERATOR_FIELDS))
    return np.tensordot(coeffs, _basis(variant), axes=1)


def direct_generator(params, variant="verbatim"):
    """Generator assembled column by column from the right-hand side.

    Slower than :func:`build_generator`; kept as an independent assembly path.
    """
    _check_variant(variant)
    derivative = _DERIVATIVES[variant]
    L = np.zeros((DIM * DIM, DIM * DIM), dtype=complex)
    for col in range(DIM * DIM):
        e = np.zeros(DIM * DIM, dtype=complex)
        e[col] = 1.0
        L[:, col] = vec(derivative(unvec(e), params))
    return Generator(L, variant)


def variant_disagreements(params, atol=1e-12):
    """Density-matrix elements (1-based) whose generator rows differ between variants."""
    diff = np.abs(build_generator(params, "verbatim").L - build_generator(params, "hermitized").L)
    rows = np.nonzero(np.max(diff, axis=1) > atol)[0]
    return [(int(r % DIM) + 1, int(r // DIM) + 1) for r in rows]


# --- steady state ----------------------------------------------------------

def _constrained(L):
    A = np.array(L, dtype=complex, copy=True)
    A[..., 0, :] = TRACE_ROW
    return A


def steady_state(gen, check=True):
    """Solve ``L vec(rho) = 0`` with the rho11 row replaced by ``tr(rho) = 1``.

    The rho11 row is redundant because the rho22 row closes the trace.
    Dense LU with partial pivoting.
    """
    A = _constrained(gen.L)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularSystem("steady-state system is rank deficient", cond)
    b = np.zeros(DIM * DIM, dtype=complex)
    b[0] = 1.0
    rho = unvec(np.linalg.solve(A, b))
    if check:
        check_populations(rho)
    return DensityMatrix(rho)


def steady_states(L_stack):
    """Batched steady states for stacked generators.

    Returns ``(rhos, errors)``; ``errors[k]`` is ``None`` or the exception
    describing why snapshot ``k`` has no physical steady state (its ``rhos``
    entry is then NaN).
    """
    A = _constrained(L_stack)
    n = A.shape[0]
    rhos = np.full((n, DIM, DIM), np.nan, dtype=complex)
    errors = [None] * n
    conds = np.linalg.cond(A)
    good = np.isfinite(conds) & (conds <= CONDITION_LIMIT)
    for k in np.nonzero(~good)[0]:
        errors[k] = SingularSystem("steady-state system is rank deficient", float(conds[k]))
    if np.any(good):
        b = np.zeros((int(good.sum()), DIM * DIM, 1), dtype=complex)
        b[:, 0, 0] = 1.0
        sol = np.linalg.solve(A[good], b)[..., 0]
        rhos[good] = sol.reshape(-1, DIM, DIM).transpose(0, 2, 1)
    for k in np.nonzero(good)[0]:
        try:
            check_populations(rhos[k])
        except NonPhysical as exc:
            errors[k] = exc
    return rhos, errors


def residual(gen, rho):
    """Max-norm of ``L vec(rho)`` over the rows not replaced by the trace row."""
    r = gen.L @ vec(rho.rho if isinstance(rho, DensityMatrix) else rho)
    return float(np.max(np.abs(r[1:])))


def slowest_rate(gen, tol=1e-9):
    """Smallest nonzero relaxation rate ``-Re(lambda)`` of the generator."""
    rates = -np.linalg.eigvals(gen.L).real
    nonzero = rates[np.abs(rates) > tol]
    return float(np.min(nonzero)) if nonzero.size else 0.0


# --- time evolution --------------------------------------------------------

def rk4_propagator(L, h):
    """One classical RK4 step for ``v' = L v``.

    For a constant linear generator the four stages collapse exactly to the
    degree-4 Taylor polynomial of ``h L``.
    """
    hL = h * np.asarray(L)
    step = np.eye(hL.shape[0], dtype=complex)
    term = step.copy()
    for k in range(1, 5):
        term = term @ hL / k
        step = step + term
    return step


def evolve(gen, rho0=None, t_final=1.0, dt=1e-3, check_every=50,
           drift_limit=1e-6):
    """Integrate from ``rho0`` (default |1><1|) to ``t_final`` with fixed-step RK4.

    Times are in units of 1/gamma. The trace and the magnitude of every
    element are checked each ``check_every`` steps; growth beyond either
    bound raises StepTooLarge.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if rho0 is None:
        rho0 = DensityMatrix.ground()
    v = vec(rho0.rho if isinstance(rho0, DensityMatrix) else rho0)
    trace0 = TRACE_ROW @ v

    n_steps = int(math.floor(t_final / dt + 1e-9))
    remainder = t_final - n_steps * dt
    step = rk4_propagator(gen.L, dt)
    chunk = np.linalg.matrix_power(step, check_every)

    def checkpoint(v, t):
        drift = abs(TRACE_ROW @ v - trace0)
        if not np.isfinite(drift) or drift > drift_limit:
            raise StepTooLarge(f"trace drift {drift:.3e} at t={t:.6g} (dt={dt:g})")
        if np.max(np.abs(v)) > 1.0 + drift_limit:
            raise StepTooLarge(f"density-matrix element exceeds 1 at t={t:.6g} (dt={dt:g})")

    done = 0
    for _ in range(n_steps // check_every):
        v = chunk @ v
        done += check_every
        checkpoint(v, done * dt)
    for _ in range(n_steps - done):
        v = step @ v
    if remainder > 1e-12 * dt:
        v = rk4_propagator(gen.L, remainder) @ v
    checkpoint(v, t_final)
    return DensityMatrix(unvec(v))


# --- weak-probe analytical coherences --------------------------------------

def _warn_weak_probe(p):
    if p.Omega_c < WEAK_PROBE_RATIO * max(p.Omega_e, p.Omega_b):
        warnings.warn(
            f"weak-probe regime not satisfied: Omega_c={p.Omega_c:g} < "
            f"{WEAK_PROBE_RATIO:g} * max(Omega_e, Omega_b)",
            WeakProbeWarning,
            stacklevel=3,
        )


def rho21_weak(p):
    """Zeroth-order coupling coherence ``2i Oc / (g1 + G1 + G2 - 2i Dc)``."""
    denom = p.gamma1 + p.Gamma1 + p.Gamma2 - 2j * p.Delta_c
    if denom == 0:
        raise DivisionByZero("rho21 denominator vanishes (gamma1 + Gamma1 + Gamma2 = 0 and Delta_c = 0)")
    return 2j * p.Omega_c / denom


def rho24_weak(p):
    """Magnetic-probe coherence in the weak-probe limit, as published."""
    _warn_weak_probe(p)
    I = 1j
    damping = p.gamma1 + p.gamma2 + p.Gamma1 + p.Gamma2 + I * p.omega43
    denom = ((I * p.Delta_b + I * p.Delta_c - (p.gamma3 + I * p.omega43) / 2)
             * (I * p.Delta_b - damping / 2) + p.Omega_c ** 2)
    if denom == 0:
        raise DivisionByZero(f"rho24 denominator vanishes at Delta_b={p.Delta_b!r}")
    return p.Omega_b * p.Omega_c * rho21_weak(p) / denom


def rho23_weak(p):
    """Electric-probe coherence in the weak-probe limit, as published.

    The published denominator carries ``+(gamma3 + i omega43)/2``; it is kept.
    """
    _warn_weak_probe(p)
    I = 1j
    damping = p.gamma1 + p.gamma2 + p.Gamma1 + p.Gamma2 + I * p.omega43
    denom = ((I * p.Delta_e + I * p.Delta_c + (p.gamma3 + I * p.omega43) / 2)
             * (I * p.Delta_e - damping / 2) + p.Omega_c ** 2)
    if denom == 0:
        raise DivisionByZero(f"rho23 denominator vanishes at Delta_e={p.Delta_e!r}")
    return p.Omega_e * p.Omega_c * np.conj(rho21_weak(p)) / denom
