import warnings
from dataclasses import replace

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lefthand_sim import dynamics as D
from lefthand_sim.errors import DivisionByZero, NonPhysical, StepTooLarge
from lefthand_sim.params import SystemParameters, apply_linkages, preset

import oracles

DARK = SystemParameters(Omega_c=0.0, Omega_e=0.0, Omega_b=0.0, Gamma1=0.0, Gamma2=0.0)


def random_rho(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# --- generator ----------------------------------------------------------------

@pytest.mark.parametrize("variant", D.VARIANTS)
def test_dark_populations_only_decay(variant):
    p = replace(DARK, Delta_c=0.7, Delta_e=-1.1, Delta_b=0.3)
    rho = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    d = D.build_generator(p, variant).apply(rho)
    expected = np.diag([8 * 0.2, -8 * 0.2 + 0.3 + 0.4, -0.3, -0.4])
    np.testing.assert_allclose(d, expected, atol=1e-14)


@pytest.mark.parametrize("variant", D.VARIANTS)
def test_ground_state_stationary_without_drives(variant):
    d = D.build_generator(DARK, variant).L @ D.vec(D.DensityMatrix.ground().rho)
    assert np.all(d == 0)


def test_rho12_damping_coefficient():
    p = apply_linkages(preset("fig2-a"), 1.3, 0.4)
    L = D.build_generator(p, "verbatim").L
    k = 0 + 4 * 1  # vec index of rho12
    assert L[k, k] == pytest.approx(-(p.gamma1 + p.Gamma1 + p.Gamma2) / 2 - 1j * p.Delta_c, abs=1e-14)


@pytest.mark.parametrize("variant", D.VARIANTS)
def test_fast_assembly_matches_direct(variant, rng):
    for _ in range(5):
        p = apply_linkages(preset("fig3-d"), rng.uniform(-10, 10), rng.uniform(0, 1))
        p = replace(p, omega43=rng.uniform(-2, 2), gamma3=rng.uniform(0.5, 2))
        np.testing.assert_allclose(D.build_generator(p, variant).L, D.direct_generator(p, variant).L,
                                   atol=1e-13)


@pytest.mark.parametrize("variant", D.VARIANTS)
def test_derivative_traceless_and_hermitian(variant, rng):
    p = replace(apply_linkages(preset("fig2-b"), 3.0, 0.6), omega43=0.7)
    gen = D.build_generator(p, variant)
    for _ in range(10):
        d = gen.apply(random_rho(rng))
        assert abs(np.trace(d)) < 1e-12
        np.testing.assert_allclose(d, d.conj().T, atol=1e-12)


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=50, deadline=None)
def test_generator_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    gen = D.build_generator(apply_linkages(preset("fig2-a"), rng.uniform(-10, 10), 0.4))
    r1 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    r2 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    lhs = gen.apply(a * r1 + b * r2)
    rhs = a * gen.apply(r1) + b * gen.apply(r2)
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-11 * (1 + abs(a) + abs(b)))


def test_variants_agree_when_consistent():
    # Delta_b = Delta_e, Omega_b = Omega_e, gamma2 = gamma3: printed rows are self-consistent.
    p = SystemParameters(Delta_e=1.0, Delta_b=1.0, Omega_e=0.5, Omega_b=0.5, Gamma2=0.3, Gamma1=0.2)
    assert D.variant_disagreements(p) == []


def test_variant_disagreements_reported():
    p = apply_linkages(preset("fig2-a"), 2.0, 0.4)
    assert D.variant_disagreements(p) == [(4, 3), (3, 4)]
    rows = D.variant_disagreements(replace(p, gamma3=2.0))
    assert (2, 4) in rows and (4, 2) in rows


def test_variants_agree_on_consistent_rows():
    p = replace(apply_linkages(preset("fig3-c"), -4.0, 0.8), gamma3=1.7, omega43=0.4)
    diff = np.abs(D.build_generator(p, "verbatim").L - D.build_generator(p, "hermitized").L)
    changed = {(r % 4 + 1, r // 4 + 1) for r in np.nonzero(diff.max(axis=1) > 1e-12)[0]}
    assert changed <= {(3, 4), (4, 3), (2, 4), (4, 2)}


# --- steady state --------------------------------------------------------------

@pytest.mark.parametrize("variant", D.VARIANTS)
def test_steady_state_dark(variant):
    rho = D.steady_state(D.build_generator(DARK, variant)).rho
    np.testing.assert_allclose(rho, np.diag([1, 0, 0, 0]), atol=1e-14)


def test_steady_state_two_level_subsystem():
    p = replace(DARK, Omega_c=22.5)
    s = D.steady_state(D.build_generator(p, "hermitized"))
    assert abs(s.element(3, 3)) < 1e-14 and abs(s.element(4, 4)) < 1e-14
    assert s.populations[:2].sum() == pytest.approx(1.0, abs=1e-14)


def test_steady_state_matches_long_time_evolution():
    p = apply_linkages(preset("fig2-a"), 0.0, 0.8)
    gen = D.build_generator(p)
    s = D.steady_state(gen)
    e = D.evolve(gen, t_final=2000.0, dt=1e-3)
    np.testing.assert_allclose(s.rho, e.rho, rtol=0, atol=1e-8)


@given(
    delta=st.floats(-20, 20), gamma2=st.floats(0, 3), omega_c=st.floats(0, 40),
    omega_e=st.floats(0, 2), omega_b=st.floats(0, 2), omega43=st.floats(-5, 5),
    gamma3=st.floats(0.1, 3), delta_c=st.floats(-2, 2),
)
@settings(max_examples=60, deadline=None)
def test_hermitized_steady_state_is_physical(delta, gamma2, omega_c, omega_e, omega_b, omega43, gamma3, delta_c):
    p = SystemParameters(Delta_e=delta, Delta_b=-1.5 * delta, Gamma2=gamma2, Gamma1=1.5 * gamma2,
                         Omega_c=omega_c, Omega_e=omega_e, Omega_b=omega_b, omega43=omega43,
                         gamma3=gamma3, Delta_c=delta_c)
    gen = D.build_generator(p, "hermitized")
    s = D.steady_state(gen)
    assert s.hermiticity_error() <= 1e-9
    assert s.trace_error() <= 1e-9
    assert np.all(s.populations >= -1e-9) and np.all(s.populations <= 1 + 1e-9)
    assert D.residual(gen, s) <= 1e-9


def test_batched_steady_states_match_single():
    snaps = [apply_linkages(preset("fig3-c"), d, 0.6) for d in np.linspace(-10, 10, 9)]
    rhos, errors = D.steady_states(D.build_generators(snaps, "hermitized"))
    assert errors == [None] * 9
    for snap, rho in zip(snaps, rhos):
        np.testing.assert_allclose(rho, D.steady_state(D.build_generator(snap, "hermitized")).rho, atol=1e-14)


def test_singular_system_reported():
    # No decay and no drive: every population distribution is stationary.
    p = SystemParameters(gamma1=0, gamma2=0, gamma3=0, Omega_c=0, Omega_e=0, Omega_b=0)
    with pytest.raises(D.SingularSystem) as info:
        D.steady_state(D.build_generator(p))
    assert info.value.condition > D.CONDITION_LIMIT
    _, errors = D.steady_states(D.build_generators([p]))
    assert isinstance(errors[0], D.SingularSystem)


def test_check_populations():
    with pytest.raises(NonPhysical):
        D.DensityMatrix(np.diag([1.1, -0.1, 0, 0]).astype(complex)).check()


# --- evolution -------------------------------------------------------------------

def test_evolve_zero_time_identity(rng):
    rho0 = random_rho(rng)
    gen = D.build_generator(apply_linkages(preset("fig2-a"), 0.0, 0.4))
    assert np.array_equal(D.evolve(gen, rho0, t_final=0.0, dt=0.01).rho, rho0)


def test_evolve_complete_decay():
    gen = D.build_generator(DARK)
    rho0 = np.diag([0, 1, 0, 0]).astype(complex)
    out = D.evolve(gen, rho0, t_final=100 / DARK.gamma1, dt=1e-3)
    np.testing.assert_allclose(out.rho, np.diag([1, 0, 0, 0]), atol=1e-6)


def test_evolve_matches_exponential():
    from scipy.linalg import expm

    gen = D.build_generator(apply_linkages(preset("fig3-d"), 1.0, 0.6), "hermitized")
    rho0 = D.DensityMatrix.ground().rho
    out = D.evolve(gen, rho0, t_final=0.73, dt=1e-4)
    exact = D.unvec(expm(0.73 * gen.L) @ D.vec(rho0))
    np.testing.assert_allclose(out.rho, exact, atol=1e-9)


def test_rk4_propagator_equals_stages():
    L = D.build_generator(apply_linkages(preset("fig2-a"), 2.0, 0.4)).L
    h = 0.01
    v = D.vec(D.DensityMatrix.ground().rho)
    k1 = L @ v
    k2 = L @ (v + h / 2 * k1)
    k3 = L @ (v + h / 2 * k2)
    k4 = L @ (v + h * k3)
    np.testing.assert_allclose(D.rk4_propagator(L, h) @ v, v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4), atol=1e-15)


def test_evolve_trace_drift_small():
    gen = D.build_generator(apply_linkages(preset("fig3-c"), -3.0, 0.8))
    out = D.evolve(gen, t_final=200.0, dt=0.01)
    assert out.trace_error() <= 1e-9


def test_evolve_step_too_large():
    gen = D.build_generator(apply_linkages(preset("fig3-d"), 0.0, 0.0))
    with pytest.raises(StepTooLarge):
        D.evolve(gen, t_final=50.0, dt=0.5)


@pytest.mark.parametrize("name", ["fig2-a", "fig2-b", "fig3-c", "fig3-d"])
@pytest.mark.parametrize("gamma2", [0.0, 0.4, 0.6, 0.8])
def test_evolve_agrees_after_many_relaxation_times(name, gamma2):
    gen = D.build_generator(apply_linkages(preset(name), 3.0, gamma2), "hermitized")
    t_final = 50 / D.slowest_rate(gen)
    out = D.evolve(gen, t_final=t_final, dt=0.01)
    np.testing.assert_allclose(out.rho, D.steady_state(gen).rho, rtol=0, atol=1e-6)


# --- analytical coherences -------------------------------------------------

def test_rho21_zero_coupling():
    assert D.rho21_weak(SystemParameters(Omega_c=0.0)) == 0


def test_rho21_printed_value():
    p = SystemParameters(Omega_c=22.5, gamma1=8.0, Gamma1=0.0, Gamma2=0.0, Delta_c=0.0)
    assert D.rho21_weak(p) == 5.625j


def test_rho21_detuned_pumped():
    # 45i / (9 + 0.5i) = (18 + 324i) / 65
    p = SystemParameters(Omega_c=22.5, gamma1=8.0, Gamma1=0.6, Gamma2=0.4, Delta_c=-0.25)
    assert D.rho21_weak(p) == pytest.approx((18 + 324j) / 65, rel=1e-15)
    assert oracles.close(D.rho21_weak(p), oracles.rho21(p), 1e-14)


def test_rho21_division_by_zero():
    with pytest.raises(DivisionByZero):
        D.rho21_weak(SystemParameters(gamma1=0.0, Gamma1=0.0, Gamma2=0.0, Delta_c=0.0))


def test_probe_coherences_vanish_without_probe():
    p = apply_linkages(preset("fig2-a"), 1.0, 0.4)
    assert D.rho24_weak(replace(p, Omega_b=0.0)) == 0
    assert D.rho23_weak(replace(p, Omega_e=0.0)) == 0


def test_rho24_matches_oracle_at_resonance():
    p = apply_linkages(preset("fig2-a"), 0.0, 0.0)
    assert oracles.close(D.rho24_weak(p), oracles.rho24(p), 1e-12)
    assert oracles.close(D.rho23_weak(p), oracles.rho23(p), 1e-12)


def test_structural_symmetry():
    p = SystemParameters(Omega_e=0.5, Omega_b=0.5, Delta_e=1.7, Delta_b=1.7, omega43=0.0,
                         gamma2=1.0, gamma3=1.0, Delta_c=-0.25, Gamma2=0.4, Gamma1=0.6)
    r21 = oracles.rho21(p)
    d23, d24 = oracles.denominators(p)
    total = (p.gamma1 + p.gamma2 + p.Gamma1 + p.Gamma2) / 2
    # only the sign of the gamma3/2 term separates the two denominators
    assert complex(d23 - d24) == pytest.approx(p.gamma3 * (1j * p.Delta_e - total), rel=1e-15)
    ratio = D.rho23_weak(p) / D.rho24_weak(p)
    expected = complex(mp.conj(r21) / r21 * d24 / d23)
    assert ratio == pytest.approx(expected, rel=1e-12)


def test_weak_probe_warning():
    p = SystemParameters(Omega_c=4.0, Omega_e=0.5, Omega_b=0.5)
    with pytest.warns(D.WeakProbeWarning):
        D.rho23_weak(p)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        D.rho23_weak(replace(p, Omega_c=5.0))


def test_probe_denominator_zero():
    # gamma3 = omega43 = 0 and Delta_b = -Delta_c = 0 zero the first factor; Omega_c = 0 removes the offset
    p = SystemParameters(gamma3=0.0, Delta_c=0.0, Delta_b=0.0, Omega_c=0.0, Omega_e=0.0, Omega_b=0.0)
    with pytest.raises(DivisionByZero) as info:
        D.rho24_weak(p)
    assert "Delta_b" in str(info.value)
