import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weyl_spectra import counterexample as ce
from weyl_spectra import extension_model as em
from weyl_spectra import herglotz as hz
from weyl_spectra.errors import InvalidMeasure, NonScalar


def dense_eigs(model, tau):
    A, _ = em.rank_one_matrix(model, tau)
    return np.linalg.eigvalsh(A)


def random_model(rng, n):
    t = np.sort(rng.uniform(-10, 10, n))
    t = t[np.concatenate([[True], np.diff(t) > 1e-6])]
    f = rng.uniform(0.1, 2.0, len(t))
    return em.TruncatedModel(t, f, c0=rng.normal())


@pytest.fixture(scope="module")
def unit3():
    return em.TruncatedModel([0.0, 1.0, 2.0], [1.0, 1.0, 1.0])


# -- construction ---------------------------------------------------------

@pytest.mark.parametrize("t,f", [([0.0], [1.0]), ([1.0, 0.0], [1.0, 1.0]),
                                 ([0.0, 1.0], [1.0, 0.0]), ([0.0, 0.0], [1.0, 1.0])])
def test_model_validation(t, f):
    with pytest.raises(InvalidMeasure):
        em.TruncatedModel(t, f)


def test_model_arrays_frozen(unit3):
    with pytest.raises(ValueError):
        unit3.t[0] = 5.0


def test_from_measure_rejects_matrix_measure():
    mu = hz.MatrixMeasure.from_atoms([0.0, 1.0], [np.eye(2), np.eye(2)])
    with pytest.raises(NonScalar):
        em.TruncatedModel.from_measure(mu)


def test_from_measure_sorts_and_truncates():
    mu = hz.MatrixMeasure.scalar([2.0, 0.0, 1.0], [1.0, 2.0, 3.0])
    m = em.TruncatedModel.from_measure(mu)
    np.testing.assert_array_equal(m.t, [0.0, 1.0, 2.0])
    np.testing.assert_array_equal(m.f, [2.0, 3.0, 1.0])
    assert em.TruncatedModel.from_measure(mu, n=2).n == 2


def test_real_axis_m_matches_weyl_function(unit3):
    lam = 0.37
    w = hz.evaluate(unit3.weyl, lam + 1e-12j)
    assert w.value[0, 0].real == pytest.approx(float(unit3.m(lam)), abs=1e-9)


# -- eigenvalues ----------------------------------------------------------

def test_tau_infinity_gives_atoms(unit3):
    for tau in (math.inf, -math.inf):
        np.testing.assert_array_equal(em.extension_eigenvalues(unit3, tau).eigenvalues,
                                      [0.0, 1.0, 2.0])


def test_tau_zero_three_roots_match_dense(unit3):
    spec = em.extension_eigenvalues(unit3, 0.0)
    assert len(spec.eigenvalues) == 3
    np.testing.assert_allclose(spec.eigenvalues, dense_eigs(unit3, 0.0), atol=1e-8, rtol=0)
    assert em.interlaces(spec.eigenvalues, unit3.t)
    assert np.all(np.abs(spec.residuals) < 1e-6)


def test_brackets_reported(unit3):
    spec = em.extension_eigenvalues(unit3, 0.0)
    for lam, (a, b) in zip(spec.eigenvalues, spec.brackets):
        assert a < lam < b


def test_window_clipping(unit3):
    full = em.extension_eigenvalues(unit3, 0.0).eigenvalues
    inside = em.extension_eigenvalues(unit3, 0.0, (0.5, 1.9)).eigenvalues
    np.testing.assert_allclose(inside, full[(full > 0.5) & (full < 1.9)], atol=1e-11, rtol=0)


def test_window_on_atom_rejected(unit3):
    with pytest.raises(ValueError):
        em.extension_eigenvalues(unit3, 0.0, (1.0, 2.5))


def test_rows_schema(unit3):
    rows = list(em.extension_eigenvalues(unit3, 0.5).rows())
    assert set(rows[0]) == {"tau", "lambda", "left_bracket", "right_bracket", "residual"}


@pytest.mark.parametrize("n", [10, 50, 200])
def test_dense_oracle_random(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        model = random_model(rng, n)
        for tau in rng.normal(0, 5, 5):
            eig = em.extension_eigenvalues(model, tau).eigenvalues
            ref = dense_eigs(model, tau)
            assert len(eig) == len(ref)
            assert np.max(np.abs(eig - ref)) <= 1e-8
            assert em.interlaces(eig, model.t)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1),
       st.floats(-20, 20), st.floats(-20, 20))
def test_two_taus_strictly_interlace(n, seed, t1, t2):
    model = random_model(np.random.default_rng(seed), n)
    if abs(t1 - t2) < 1e-3:
        return
    a = em.extension_eigenvalues(model, t1).eigenvalues
    b = em.extension_eigenvalues(model, t2).eigenvalues
    assert em.strictly_interlace(a, b)


def test_branches_increase_with_tau():
    model = random_model(np.random.default_rng(7), 20)
    taus = np.linspace(-3, 3, 7)
    prev = None
    for tau in taus:
        spec = em.extension_eigenvalues(model, tau)
        inner = {br: x for x, br in zip(spec.eigenvalues, spec.brackets)
                 if math.isfinite(br[0]) and math.isfinite(br[1])}
        if prev is not None:
            for br, x in inner.items():
                assert x > prev[br]
        prev = inner


def test_counterexample_model_interlaces():
    cm = ce.build(ce.CounterexampleSpec(0.0, 1.0, K=3, J=50))
    model = em.TruncatedModel.from_counterexample(cm)
    for tau in (-2.0, 0.0, 3.0):
        eig = em.extension_eigenvalues(model, tau).eigenvalues
        assert em.interlaces(eig, model.t)


def test_interlace_helpers():
    assert em.strictly_interlace([0, 2], [1, 3])
    assert not em.strictly_interlace([0, 1], [2, 3])
    assert not em.strictly_interlace([0, 1], [1, 2])
    assert not em.interlaces([0.5, 0.6], [0, 1, 2])


# -- sum over accumulation points -----------------------------------------

def test_accumulation_sum_single_point():
    rep = em.accumulation_sum_check([0.0], [1.0], 1.0)
    assert rep.result.is_finite and rep.result.value == 1.0


def test_accumulation_sum_unbounded_case_at_half():
    s, _ = ce.satellite_block_mass()
    n = 2000
    k = np.arange(1, n + 1, dtype=float)
    rep = em.accumulation_sum_check(k, np.full(n, s), 0.5, tail=em.integer_points_tail(n, s))
    lo, hi = rep.result.interval
    # oracle: s * (psi'(1/2)) = s * pi^2 / 2
    exact = s * math.pi ** 2 / 2
    assert lo - 1e-15 <= exact <= hi + 1e-15
    assert rep.result.error_bound < 1e-3 * s


def test_accumulation_sum_at_accumulation_point_divergent():
    rep = em.accumulation_sum_check([1.0, 2.0, 3.0], [0.5, 0.5, 0.5], 2.0)
    assert rep.result.kind is hz.Kind.DIVERGENT
    assert "atom" in rep.to_json()["witness"].lower()


def test_accumulation_sum_trace_in_basis():
    W = [np.diag([1.0, 3.0]), np.eye(2)]
    rot = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    rep = em.accumulation_sum_check([0.0, 2.0], W, 1.0, basis=rot)
    np.testing.assert_allclose(rep.c, [4.0, 2.0])
    assert rep.result.value == pytest.approx(6.0)


def test_accumulation_sum_rejects_zero_weight():
    with pytest.raises(InvalidMeasure):
        em.accumulation_sum_check([0.0, 1.0], [1.0, 0.0], 0.5)


def test_quotient_moment_agreement_consistency_on_model():
    cm = ce.build(ce.CounterexampleSpec(0.0, 1.0, K=2, J=40))
    model = em.TruncatedModel.from_counterexample(cm)
    phi = model.weyl
    mu = hz.MatrixMeasure.scalar(model.t, model.f)
    pts = [0.3, 0.8, 0.6, float(cm.satellites[0][0]), float(cm.satellites[1][3])]
    for lam in pts:
        q = hz.imag_quotient_limit(phi, lam, [1.0])
        r = hz.second_moment_at(mu, lam, [1.0])
        assert (q.kind is hz.Kind.FINITE) == r.is_finite


# -- nowhere density ------------------------------------------------------

def test_nowhere_dense_empty_set():
    rep = em.nowhere_dense_witness([], (0.0, 1.0), 0.25)
    assert rep.ok and len(rep.witnesses) == 4
    for w in rep.witnesses:
        assert w.gap == w.window


def test_nowhere_dense_finite_set():
    pts = np.random.default_rng(1).uniform(0, 1, 500)
    rep = em.nowhere_dense_witness(np.sort(pts), (0.0, 1.0), 1e-3)
    assert rep.ok
    for w in rep.witnesses:
        lo, hi = w.gap
        assert hi > lo and not np.any((pts > lo) & (pts < hi))


def test_nowhere_dense_reports_dense_windows():
    pts = np.linspace(0, 1, 10001)
    rep = em.nowhere_dense_witness(pts, (0.0, 1.0), 0.1, min_gap=1e-3)
    assert not rep.ok and len(rep.dense_windows) == 10


def test_nowhere_dense_bounded_gaps_shrink():
    gaps = []
    for J in (25, 50, 100, 200):
        cm = ce.build(ce.CounterexampleSpec(0.0, 1.0, K=3, J=J))
        atoms = cm.measure.sorted().t
        rep = em.nowhere_dense_witness(atoms, (0.5, 1.0), 1e-2,
                                       probes=cm.accumulation_points)
        assert len(rep.witnesses) == 50
        gaps.append([rep.probe_gaps[x] for x in cm.accumulation_points])
    gaps = np.array(gaps)
    assert np.all(np.diff(gaps, axis=0) < 0)


def test_nowhere_dense_validation():
    with pytest.raises(ValueError):
        em.nowhere_dense_witness([], (0.0, 1.0), 0.0)
    with pytest.raises(ValueError):
        em.nowhere_dense_witness([], (1.0, 0.0), 0.1)


# -- spectrum partition ---------------------------------------------------

def test_partition_tau_infinity():
    cm = ce.build(ce.CounterexampleSpec(0.0, 1.0, K=3, J=50))
    model = em.TruncatedModel.from_counterexample(cm)
    part = em.spectrum_partition(model, math.inf, (0.4, 0.99))
    t = model.t
    np.testing.assert_array_equal(part.point_spectrum, t[(t > 0.4) & (t < 0.99)])
    assert part.essential_candidates == [0.75, 0.875, 0.9375]


def test_partition_empty_window(unit3):
    part = em.spectrum_partition(unit3, 0.0, (1.5, 1.5))
    assert len(part.point_spectrum) == 0 and part.essential_candidates == []


def test_partition_without_generator(unit3):
    part = em.spectrum_partition(unit3, 0.0, (-5.0, 5.0))
    assert part.essential_candidates == [] and len(part.point_spectrum) == 3


def test_refinement_drift_shrinks():
    spec = ce.CounterexampleSpec(0.0, 1.0, K=3, J=25)
    table = em.refinement_drift(spec, 0.0, (0.55, 0.99), doublings=3)
    assert table["J"] == [25, 50, 100, 200]
    d = np.array(table["distance"])
    assert np.all(np.diff(d, axis=0) < 0)
