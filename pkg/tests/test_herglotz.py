import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weyl_spectra import counterexample as ce
from weyl_spectra import herglotz as hz
from weyl_spectra.errors import AtomHit, CriterionFails, InvalidMeasure, NoTailBound


def single_atom(t0=0.0, mass=1.0, c0=0.0, c1=0.0):
    mu = hz.MatrixMeasure.scalar([t0], [mass])
    return hz.HerglotzFunction.from_measure(mu, [[c0]], [[c1]])


@st.composite
def measures(draw, max_dim=3, max_atoms=12):
    d = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_atoms))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(-20, 20, n))
    t = np.unique(t)
    F = []
    for _ in t:
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        F.append(A @ A.conj().T / d)
    B = rng.normal(size=(d, d))
    c0 = (B + B.T) / 2
    C = rng.normal(size=(d, d))
    c1 = 0.1 * C @ C.T
    mu = hz.MatrixMeasure.from_atoms(t, F, dim=d)
    return hz.HerglotzFunction.from_measure(mu, c0, c1)


# -- evaluate --------------------------------------------------------------

def test_single_atom_at_i():
    ev = hz.evaluate(single_atom(), 1j)
    assert ev.value[0, 0] == pytest.approx(1j, abs=1e-15)
    assert ev.value[0, 0].imag > 0


def test_single_atom_at_minus_i_is_conjugate():
    ev = hz.evaluate(single_atom(), -1j)
    assert ev.value[0, 0] == pytest.approx(-1j, abs=1e-15)


def test_unbounded_truncation_matches_double_sum():
    cm = ce.build(ce.CounterexampleSpec(0.0, math.inf, K=3, J=20))
    phi = cm.herglotz()
    z = 1.5 + 0.1j
    ev = hz.evaluate(phi, z)
    direct = 0j
    for k in range(1, 4):
        for j in range(1, 21):
            t = k + 1.0 / (j + 1)
            Fj = 2.0 ** -j / (j + 1) ** 2
            direct += (1 / (t - z) - t / (1 + t * t)) * Fj
    assert abs(ev.value[0, 0] - direct) <= 1e-12
    assert math.isfinite(ev.error_bound)


def test_evaluate_real_point_on_atom_raises():
    with pytest.raises(AtomHit):
        hz.evaluate(single_atom(), 0.0)


def test_evaluate_real_point_off_atoms():
    assert hz.evaluate(single_atom(), 2.0).value[0, 0] == pytest.approx(-0.5)


def test_truncation_bound_covers_omitted_atoms():
    phi = hz.HerglotzFunction.from_measure(
        hz.MatrixMeasure.scalar([0.0, 1.0, 5.0], [1.0, 2.0, 0.5]))
    full = hz.evaluate(phi, 0.3 + 0.2j)
    part = hz.evaluate(phi, 0.3 + 0.2j, truncation=1)
    assert abs(full.value - part.value)[0, 0] <= part.error_bound


def test_tail_without_bound_at_real_point_inside_hull():
    cm = ce.build(ce.CounterexampleSpec(0.0, math.inf, K=2, J=5))
    with pytest.raises(NoTailBound):
        hz.evaluate(cm.herglotz(), 10.5)


@settings(max_examples=60, deadline=None)
@given(measures(), st.floats(-30, 30), st.floats(1e-3, 10))
def test_nevanlinna_positivity_and_symmetry(phi, x, y):
    z = complex(x, y)
    up, down = hz.evaluate(phi, z), hz.evaluate(phi, z.conjugate())
    V = up.value
    im = (V - V.conj().T) / 2j
    assert np.linalg.eigvalsh(im).min() >= -up.error_bound
    assert np.linalg.norm(down.value - V.conj().T, 2) <= up.error_bound + down.error_bound


# -- second moment / quotient limit ---------------------------------------

def test_second_moment_one_term():
    r = hz.second_moment_at(hz.MatrixMeasure.scalar([2.0], [5.0]), 1.0, [1.0])
    assert r.is_finite and r.value == 5.0


def test_second_moment_at_atom_is_divergent():
    r = hz.second_moment_at(hz.MatrixMeasure.scalar([2.0], [5.0]), 2.0, [1.0])
    assert r.kind is hz.Kind.DIVERGENT
    assert isinstance(r.witness, hz.AtomWitness)


def test_second_moment_threshold_witness():
    r = hz.second_moment_at(hz.MatrixMeasure.scalar([0.0], [1.0]), 1e-7, [1.0])
    assert r.kind is hz.Kind.DIVERGENT
    assert isinstance(r.witness, hz.ThresholdWitness)


def test_second_moment_requires_unit_direction():
    with pytest.raises(ValueError):
        hz.second_moment_at(hz.MatrixMeasure.scalar([0.0], [1.0]), 1.0, [2.0])


def test_unbounded_window_sum_is_one():
    cm = ce.build(ce.CounterexampleSpec(0.0, math.inf, K=3, J=200))
    rep = ce.verify_counterexample(cm)
    for c in rep.checks:
        assert abs(c.window_value - 1.0) <= 1e-14 + c.window_error


def test_satellite_is_divergent():
    cm = ce.build(ce.CounterexampleSpec(0.0, math.inf, K=2, J=10))
    r = hz.second_moment_at(cm.measure, cm.satellites[0][3], [1.0])
    assert r.kind is hz.Kind.DIVERGENT


def test_quotient_limit_single_atom():
    q = hz.imag_quotient_limit(single_atom(), 1.0, [1.0], (1e-2, 1e-4, 1e-6))
    assert q.is_finite and q.estimate == pytest.approx(1.0, rel=1e-10)


def test_quotient_limit_at_atom_is_infinite():
    q = hz.imag_quotient_limit(single_atom(), 0.0, [1.0], (1e-2, 1e-4, 1e-6))
    assert q.kind is hz.Kind.INFINITE


def test_quotient_limit_rejects_bad_sequence():
    with pytest.raises(ValueError):
        hz.imag_quotient_limit(single_atom(), 1.0, [1.0], (1e-2, 1e-1, 1e-3))
    with pytest.raises(ValueError):
        hz.imag_quotient_limit(single_atom(), 1.0, [1.0], (1e-2, 1e-3))


def test_quotient_limit_inconclusive_is_reported():
    from weyl_spectra.errors import Inconclusive
    with pytest.raises(Inconclusive) as info:
        hz.imag_quotient_limit(single_atom(), 1e-3, [1.0], (1e-1, 1e-2, 1e-3))
    assert "q" in info.value.record


def test_quotient_includes_c1():
    phi = single_atom(c1=0.25)
    q = hz.imag_quotient_limit(phi, 1.0, [1.0])
    assert q.estimate == pytest.approx(1.25, rel=1e-10)


def test_quotient_moment_agreement_on_unbounded_counterexample():
    cm = ce.build(ce.CounterexampleSpec(0.0, math.inf, K=3, J=100))
    phi = cm.herglotz()
    for lam in cm.accumulation_points:
        q = hz.imag_quotient_limit(phi, lam, [1.0])
        r = hz.second_moment_at(cm.measure, lam, [1.0])
        assert q.is_finite and r.is_finite
        assert abs(q.estimate - r.value) <= q.error_bound + r.error_bound


@settings(max_examples=40, deadline=None)
@given(measures(max_dim=2, max_atoms=8), st.floats(-25, 25))
def test_quotient_moment_agreement_equivalence_random(phi, lam):
    phi = hz.HerglotzFunction.from_measure(phi.measure, phi.c0, np.zeros_like(phi.c1))
    h = np.eye(phi.dim)[0]
    r = hz.second_moment_at(phi.measure, lam, h)
    try:
        q = hz.imag_quotient_limit(phi, lam, h)
    except hz.Inconclusive:
        # near-atom points at the finest default y; only finite moments can do this
        assert r.is_finite and r.value > 1e6
        return
    assert q.is_finite == r.is_finite
    if q.is_finite:
        assert abs(q.estimate - r.value) <= q.error_bound + r.error_bound + 1e-9 * r.value


@settings(max_examples=40, deadline=None)
@given(measures(), st.floats(-25, 25), st.floats(1e-6, 1.0), st.floats(0.1, 0.9))
def test_quotient_monotone_in_y(phi, lam, y, shrink):
    h = np.eye(phi.dim)[0]
    assert hz.imag_quotient(phi, lam, y * shrink, h) >= hz.imag_quotient(phi, lam, y, h)


def test_tail_bound_soundness_under_doubling():
    lam = 2.0
    prev = None
    for J in (25, 50, 100, 200):
        cm = ce.build(ce.CounterexampleSpec(0.0, math.inf, K=4, J=J))
        r = hz.second_moment_at(cm.measure, lam, [1.0])
        if prev is not None:
            lo, hi = prev.interval
            assert lo <= r.value <= hi
        prev = r


# -- boundary value -------------------------------------------------------

def test_boundary_value_closed_form():
    bv = hz.boundary_value(single_atom(), 2.0)
    assert bv.value[0, 0].real == pytest.approx(-0.5, abs=1e-9)
    assert bv.anti_hermitian_norm <= bv.error_bound + 1e-12


def test_boundary_value_with_constants():
    bv = hz.boundary_value(single_atom(c0=1.0, c1=0.5), 2.0)
    assert bv.value[0, 0].real == pytest.approx(1.0 + 1.0 - 0.5, abs=1e-9)


def test_boundary_value_at_accumulation_point():
    cm = ce.build(ce.CounterexampleSpec(0.0, math.inf, K=2, J=100))
    bv = hz.boundary_value(cm.herglotz(), 1.0)
    assert abs(bv.value[0, 0].imag) <= bv.error_bound


def test_boundary_value_far_from_atoms_matches_real_sum():
    mu = hz.MatrixMeasure.scalar([-3.0, 0.0, 4.0], [1.0, 0.5, 2.0])
    phi = hz.HerglotzFunction.from_measure(mu)
    lam = 1.5
    direct = sum(f * (1 / (t - lam) - t / (1 + t * t)) for t, f in zip(mu.t, mu.F[:, 0, 0]))
    bv = hz.boundary_value(phi, lam)
    assert abs(bv.value[0, 0] - direct) <= bv.error_bound + 1e-12


def test_boundary_value_fails_on_atom():
    with pytest.raises(CriterionFails):
        hz.boundary_value(single_atom(), 0.0)


# -- construction / direct sums / JSON ------------------------------------

def test_rejects_non_psd_weight():
    with pytest.raises(InvalidMeasure):
        hz.MatrixMeasure.from_atoms([0.0], [np.array([[1.0, 0], [0, -1e-6]])])


def test_rejects_non_hermitian_weight():
    with pytest.raises(InvalidMeasure):
        hz.MatrixMeasure.from_atoms([0.0], [np.array([[1.0, 1.0], [0.0, 1.0]])])


def test_rejects_duplicate_abscissas():
    with pytest.raises(InvalidMeasure):
        hz.MatrixMeasure.scalar([0.0, 0.0], [1.0, 1.0])


def test_rejects_zero_weight():
    with pytest.raises(InvalidMeasure):
        hz.MatrixMeasure.scalar([0.0], [0.0])


def test_rejects_non_psd_c1():
    with pytest.raises(InvalidMeasure):
        single_atom(c1=-1.0)


def test_direct_sum_identity():
    mu = hz.MatrixMeasure.scalar([0.0, 1.0], [1.0, 2.0])
    assert hz.direct_sum([mu]) is mu


def test_direct_sum_merges_shared_atom():
    mu = hz.MatrixMeasure.scalar([0.0], [1.0])
    s = hz.direct_sum([mu, mu])
    assert s.n_atoms == 1 and s.dim == 2
    np.testing.assert_array_equal(s.F[0], np.eye(2))


def test_direct_sum_of_bounded_counterexample_directional():
    cm = ce.build(ce.CounterexampleSpec(0.0, 1.0, K=3, J=50))
    d = 3
    s = hz.direct_sum([cm.measure] * d)
    for lam in cm.accumulation_points:
        ref = hz.second_moment_at(cm.measure, lam, [1.0])
        for j in range(d):
            r = hz.second_moment_at(s, lam, np.eye(d)[j])
            assert r.value == ref.value and r.error_bound == ref.error_bound


def test_json_round_trip_complex():
    F = np.array([[2.0, 1j], [-1j, 1.0]])
    mu = hz.MatrixMeasure.from_atoms([0.5, -1.0], [F, np.eye(2)])
    phi = hz.HerglotzFunction.from_measure(mu, np.diag([1.0, -1.0]))
    back = hz.herglotz_from_json(hz.herglotz_to_json(phi))
    np.testing.assert_array_equal(back.measure.t, mu.t)
    np.testing.assert_array_equal(back.measure.F, mu.F)
    np.testing.assert_array_equal(back.c0, phi.c0)


def test_json_geometric_tail():
    mu = hz.MatrixMeasure.scalar([1.0, 2.0], [0.5, 0.25],
                                 tails=(hz.geometric_tail(2, 0.5, 1.0, 1),))
    doc = hz.herglotz_to_json(hz.HerglotzFunction.from_measure(mu))
    assert doc["tail"]["kind"] == "geometric"
    back = hz.herglotz_from_json(doc)
    assert back.measure.tail_bound(2) == pytest.approx(mu.tail_bound(2))


def test_json_rejects_non_hermitian():
    doc = {"dim": 2, "atoms": [{"t": 0.0, "F": [[1, 1], [0, 1]]}], "tail": None}
    with pytest.raises(InvalidMeasure):
        hz.herglotz_from_json(doc)


def test_measure_is_immutable():
    mu = hz.MatrixMeasure.scalar([0.0], [1.0])
    with pytest.raises(ValueError):
        mu.t[0] = 3.0
