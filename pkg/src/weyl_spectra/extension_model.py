"""Finite multiplication-operator models and their self-adjoint extensions.

For a scalar atomic measure with atoms ``t_1 < ... < t_N`` and masses ``f_k``
the truncated Weyl function on the real axis is the rational function

    m(lam) = C0 + lam C1 + sum_k f_k (1/(t_k - lam) - t_k/(1 + t_k**2)),

strictly increasing between consecutive poles.  The extension with parameter
``tau`` has the roots of ``m(lam) = tau`` as eigenvalues; ``tau = inf`` gives
the multiplication operator itself, whose eigenvalues are the atoms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import counterexample as ce
from . import herglotz as hz
from .errors import InvalidMeasure, NonScalar

BISECTION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TruncatedModel:
    """First ``N`` atoms of a scalar measure, sorted, with constants ``c0, c1``.

    ``generator`` optionally keeps the construction the atoms came from, which
    supplies accumulation points for :func:`spectrum_partition`.
    """

    t: np.ndarray
    f: np.ndarray
    c0: float = 0.0
    c1: float = 0.0
    generator: Optional[ce.CounterexampleMeasure] = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if t.ndim != 1 or t.shape != f.shape:
            raise InvalidMeasure("atoms and masses must be 1-d of equal length")
        if len(t) < 2:
            raise InvalidMeasure("a truncated model needs at least two atoms")
        if np.any(np.diff(t) <= 0):
            raise InvalidMeasure("atoms must be strictly increasing")
        if np.any(f <= 0):
            raise InvalidMeasure("masses must be positive")
        if self.c1 < 0:
            raise InvalidMeasure("c1 must be nonnegative")
        t.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "f", f)

    @classmethod
    def from_measure(cls, measure, n=None, c0=0.0, c1=0.0, generator=None):
        if measure.dim != 1:
            raise NonScalar("extension models are scalar (d = 1)")
        n = measure.n_atoms if n is None else n
        mu = measure.sorted() if n == measure.n_atoms else measure.truncated(n).sorted()
        return cls(mu.t, mu.F[:, 0, 0].real, float(c0), float(c1), generator)

    @classmethod
    def from_counterexample(cls, cm, c0=0.0, c1=0.0):
        return cls.from_measure(cm.measure, c0=c0, c1=c1, generator=cm)

    @property
    def n(self):
        return len(self.t)

    @property
    def weyl(self):
        mu = hz.MatrixMeasure.scalar(self.t, self.f)
        return hz.HerglotzFunction.from_measure(mu, [[self.c0]], [[self.c1]])

    @property
    def shift(self):
        """``C0 - sum f_k t_k/(1+t_k^2)``, the limit of ``m`` at infinity when ``c1 = 0``."""
        return self.c0 - math.fsum(self.f * self.t / (1.0 + self.t ** 2))

    def m(self, lam):
        """Real-axis Weyl function; ``lam`` may be an array of non-atoms."""
        lam = np.asarray(lam, dtype=float)
        with np.errstate(divide="ignore"):
            res = np.sum(self.f / (self.t - lam[..., None]), axis=-1)
        return res + self.shift + self.c1 * lam


@dataclass(frozen=True)
class ExtensionSpectrum:
    tau: float
    eigenvalues: np.ndarray
    brackets: tuple
    residuals: np.ndarray = field(default_factory=lambda: np.empty(0))

    def rows(self):
        for lam, (a, b), r in zip(self.eigenvalues, self.brackets, self.residuals):
            yield {"tau": self.tau, "lambda": float(lam), "left_bracket": a,
                   "right_bracket": b, "residual": float(r)}


def _bisect(model, tau, lo, hi, tol):
    """Vectorized bisection of ``m - tau`` on brackets with m(lo) < tau < m(hi).

    A bracket is done once it is ``tol`` wide and both ends have moved off
    the initial atoms; tiny masses put roots closer than ``tol`` to an atom,
    and these keep halving down to float resolution so the root stays
    strictly inside its bracket.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    if lo.size == 0:
        return lo
    lo0, hi0 = lo.copy(), hi.copy()
    while True:
        width = hi - lo
        mid = lo + 0.5 * width
        stuck = (mid <= lo) | (mid >= hi)
        done = (width <= tol) & (lo > lo0) & (hi < hi0)
        active = ~(stuck | done)
        if not np.any(active):
            break
        below = model.m(mid) < tau
        lo = np.where(active & below, mid, lo)
        hi = np.where(active & ~below, mid, hi)
    root = lo + 0.5 * (hi - lo)
    return np.clip(root, np.nextafter(lo0, np.inf), np.nextafter(hi0, -np.inf))


def _outer_bracket(model, tau, side, limit):
    """Finite bracket for the root beyond the outermost atom, or None."""
    edge = model.t[0] if side < 0 else model.t[-1]
    if model.c1 == 0.0:
        if (side < 0 and not tau > model.shift) or (side > 0 and not tau < model.shift):
            return None
    step = max(1.0, abs(edge))
    far = edge + side * step
    while True:
        if limit is not None and (far - limit) * side >= 0:
            far = limit
            val = model.m(far)
            ok = val < tau if side < 0 else val > tau
            break
        val = model.m(far)
        if (side < 0 and val < tau) or (side > 0 and val > tau):
            ok = True
            break
        step *= 2.0
        far = edge + side * step
        if not math.isfinite(far):
            return None
    if not ok:
        return None
    return (far, edge) if side < 0 else (edge, far)


def extension_eigenvalues(model, tau, window=(-math.inf, math.inf), tol=BISECTION_TOL):
    """Eigenvalues in ``window`` of the extension with parameter ``tau``.

    One bisection per bracket between consecutive atoms (clipped to the
    window) plus the two unbounded end brackets.
    """
    a, b = map(float, window)
    if not a <= b:
        raise ValueError("window must satisfy a <= b")
    t = model.t
    if np.any(t == a) or np.any(t == b):
        raise ValueError("window bounds must not be atom abscissas")
    if tau == math.inf or tau == -math.inf:
        inside = t[(t >= a) & (t <= b)]
        brackets = tuple((float(x), float(x)) for x in inside)
        return ExtensionSpectrum(math.inf, inside.copy(), brackets, np.zeros(len(inside)))
    tau = float(tau)
    lefts = t[:-1]
    rights = t[1:]
    lo = np.maximum(lefts, a)
    hi = np.minimum(rights, b)
    keep = lo < hi
    # clipped brackets need a sign change at the window edge
    clip_lo = keep & (lo > lefts)
    clip_hi = keep & (hi < rights)
    if np.any(clip_lo):
        keep[clip_lo] &= model.m(lo[clip_lo]) < tau
    if np.any(clip_hi):
        keep[clip_hi] &= model.m(hi[clip_hi]) > tau
    los, his = list(lo[keep]), list(hi[keep])
    names = [(float(l), float(r)) for l, r in zip(lefts[keep], rights[keep])]
    for side, edge_ok in ((-1, a < t[0]), (+1, b > t[-1])):
        if not edge_ok:
            continue
        limit = a if side < 0 else b
        br = _outer_bracket(model, tau, side, None if math.isinf(limit) else limit)
        if br is None:
            continue
        los.append(br[0])
        his.append(br[1])
        names.append((-math.inf, float(t[0])) if side < 0 else (float(t[-1]), math.inf))
    roots = _bisect(model, tau, los, his, tol)
    order = np.argsort(roots)
    roots = roots[order]
    names = tuple(names[i] for i in order)
    return ExtensionSpectrum(tau, roots, names, model.m(roots) - tau)


def rank_one_matrix(model, tau):
    """``(D + alpha v v^T, alpha)`` whose eigenvalues solve ``m(lam) = tau`` (``c1 = 0``).

    ``D = diag(t)``, ``v_k = sqrt(f_k)``, ``alpha = -1/(tau - shift)``.
    """
    if model.c1 != 0.0:
        raise ValueError("rank-one realization requires c1 = 0")
    alpha = -1.0 / (tau - model.shift)
    v = np.sqrt(model.f)
    return np.diag(model.t) + alpha * np.outer(v, v), alpha


def interlaces(eigs, atoms):
    """Exactly one eigenvalue strictly between each pair of consecutive atoms,
    at most one below and one above."""
    eigs = np.sort(np.asarray(eigs))
    atoms = np.sort(np.asarray(atoms))
    if np.any(np.isin(eigs, atoms)):
        return False
    pos = np.searchsorted(atoms, eigs)
    counts = np.bincount(pos, minlength=len(atoms) + 1)
    return bool(np.all(counts[1:-1] == 1) and counts[0] <= 1 and counts[-1] <= 1)


def strictly_interlace(x, y):
    """Merged sorted lists alternate between ``x`` and ``y`` with no ties."""
    tagged = sorted([(v, 0) for v in x] + [(v, 1) for v in y])
    vals = [v for v, _ in tagged]
    if len(set(vals)) != len(vals):
        return False
    return all(a[1] != b[1] for a, b in zip(tagged, tagged[1:]))


# ---------------------------------------------------------------------------
# condition on accumulation points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AccumulationSumReport:
    lam: float
    result: hz.SecondMomentResult
    c: np.ndarray
    basis: np.ndarray

    def to_json(self):
        r = self.result
        doc = {"lambda": self.lam, "kind": r.kind.value,
               "c_k": self.c.tolist(), "c_k_definition": "trace of F_k in the given basis"}
        if r.is_finite:
            doc.update(value=r.value, error_bound=r.error_bound)
        else:
            doc["witness"] = r.witness.describe()
        return doc


def accumulation_sum_check(points, weights, lam, basis=None, truncation=None,
                      threshold=hz.DIVERGENCE_THRESHOLD, tail=None):
    r"""Certified :math:`\sum_k c_k/(\lambda_k-\lambda)^2` with ``c_k = sum_j (F_k e_j, e_j)``.

    ``weights`` are ``d x d`` PSD matrices attached to ``points``.  ``tail``
    is an optional callable ``tail(lam) -> (lower, upper)`` enclosing the
    contribution of points beyond the list.
    """
    pts = np.asarray(points, dtype=float)
    W = np.asarray(weights)
    if W.ndim == 1:
        W = W.reshape(-1, 1, 1)
    d = W.shape[1]
    basis = np.eye(d) if basis is None else np.asarray(basis)
    if not np.allclose(basis.conj().T @ basis, np.eye(d), atol=1e-12):
        raise ValueError("basis must be orthonormal")
    c = np.real(np.array([sum(b.conj() @ Wk @ b for b in basis.T) for Wk in W]))
    if np.any(c <= 0):
        raise InvalidMeasure("every c_k must be positive")
    n = len(pts) if truncation is None else int(truncation)
    lam = float(lam)
    hit = np.flatnonzero(pts == lam)
    if hit.size:
        res = hz.SecondMomentResult(hz.Kind.DIVERGENT,
                                    witness=hz.AtomWitness(lam, float(c[hit[0]])))
        return AccumulationSumReport(lam, res, c, basis)
    terms = c / (pts - lam) ** 2
    value = math.fsum(terms[:n]) + math.fsum(terms[n:])
    lo = hi = 0.0
    if tail is not None:
        lo, hi = tail(lam)
    value += lo
    if value >= threshold:
        res = hz.SecondMomentResult(hz.Kind.DIVERGENT,
                                    witness=hz.ThresholdWitness(value, threshold))
    else:
        res = hz.SecondMomentResult(hz.Kind.FINITE, value,
                                    float((hi - lo) + hz._round_err(value, len(pts))))
    return AccumulationSumReport(lam, res, c, basis)


def integer_points_tail(n, c):
    """Enclosure for ``sum_{k>n} c/(k - lam)**2`` (points ``k = n+1, n+2, ...``).

    Integral comparison: ``1/(n+1-lam) <= sum <= 1/(n-lam)`` for ``lam < n``.
    """
    def tail(lam):
        if lam >= n:
            return 0.0, math.inf
        return c / (n + 1 - lam), c / (n - lam)
    return tail


# ---------------------------------------------------------------------------
# nowhere density
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowWitness:
    window: tuple
    gap: Optional[tuple]

    @property
    def length(self):
        return 0.0 if self.gap is None else self.gap[1] - self.gap[0]


@dataclass(frozen=True)
class NowhereDenseReport:
    witnesses: tuple
    dense_windows: tuple
    probe_gaps: dict

    @property
    def ok(self):
        return not self.dense_windows

    def to_json(self):
        return {"ok": self.ok,
                "witnesses": [{"window": list(w.window),
                               "gap": None if w.gap is None else list(w.gap)}
                              for w in self.witnesses],
                "dense_windows": [list(w) for w in self.dense_windows],
                "probe_gaps": {repr(k): v for k, v in self.probe_gaps.items()}}


def _largest_gap(points, a, b):
    inner = points[(points > a) & (points < b)]
    edges = np.concatenate([[a], inner, [b]])
    gaps = np.diff(edges)
    i = int(np.argmax(gaps))
    return float(edges[i]), float(edges[i + 1])


def accumulation_gap(points, x):
    """Distance from ``x`` to the nearest point; shrinks as points crowd in."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return math.inf
    return float(np.min(np.abs(points - x)))


def nowhere_dense_witness(points, interval, resolution, min_gap=0.0, probes=()):
    """Gap witnesses for ``points`` in every window of ``interval``.

    The interval is cut into windows of length at most ``resolution``; each
    window gets its largest point-free open subinterval.  Windows whose best
    gap is not longer than ``min_gap`` are reported as dense.
    ``probes`` get their :func:`accumulation_gap` recorded.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    a, b = map(float, interval)
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError("interval must be finite with a < b")
    pts = np.sort(np.asarray(points, dtype=float))
    n = max(1, int(math.ceil((b - a) / resolution)))
    edges = np.linspace(a, b, n + 1)
    wit, dense = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        gap = _largest_gap(pts, lo, hi)
        if gap[1] - gap[0] > min_gap:
            wit.append(WindowWitness((float(lo), float(hi)), gap))
        else:
            wit.append(WindowWitness((float(lo), float(hi)), None))
            dense.append((float(lo), float(hi)))
    gaps = {float(p): accumulation_gap(pts, p) for p in probes}
    return NowhereDenseReport(tuple(wit), tuple(dense), gaps)


# ---------------------------------------------------------------------------
# spectrum partition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumPartition:
    point_spectrum: np.ndarray
    essential_candidates: list
    note: str = ""


def spectrum_partition(model, tau, interval):
    """Eigenvalues in ``interval`` and accumulation points of the generator.

    A truncated model has no essential spectrum; the candidates come from
    the generating construction and are limits under refinement.
    """
    a, b = map(float, interval)
    if not a < b:
        return SpectrumPartition(np.empty(0), [], "empty window")
    spec = extension_eigenvalues(model, tau, (a, b))
    cands = []
    note = "no generator: essential candidates unavailable"
    if model.generator is not None:
        cands = [x for x in ce.essential_spectrum_accumulation(model.generator)
                 if a < x < b]
        note = "candidates are accumulation points under refinement"
    return SpectrumPartition(spec.eigenvalues, cands, note)


def refinement_drift(spec, tau, interval, doublings=3):
    """For each ``lam_k``: distance to the nearest eigenvalue as ``J`` doubles.

    Returns ``{"J": [...], "lambda_k": [...], "distance": [[...], ...]}`` with
    one distance row per ``J``.
    """
    rows, Js = [], []
    lam_k = None
    J = spec.J
    for _ in range(doublings + 1):
        cm = ce.build(ce.CounterexampleSpec(spec.mu1, spec.mu2, spec.K, J, 1,
                                            spec.outside_atoms))
        model = TruncatedModel.from_counterexample(cm)
        eig = extension_eigenvalues(model, tau, interval).eigenvalues
        lam_k = np.asarray(cm.accumulation_points)
        rows.append([float(np.min(np.abs(eig - x))) for x in lam_k])
        Js.append(J)
        J *= 2
    return {"J": Js, "lambda_k": lam_k.tolist(), "distance": rows}
