r"""Discrete matrix-valued measures and the Nevanlinna functions they generate.

A Nevanlinna (Herglotz) function with a purely atomic spectral measure is

.. math::

    \Phi(z) = C_0 + z C_1 + \sum_k \Big(\frac{1}{t_k - z} - \frac{t_k}{1 + t_k^2}\Big) F_k,

with ``C_0`` Hermitian, ``C_1`` PSD and PSD weights ``F_k`` such that
:math:`\sum_k \|F_k\|/(1+t_k^2) < \infty`.

A :class:`MatrixMeasure` holds a finite list of explicit atoms plus any number
of :class:`TailPiece` objects that stand for the atoms which were *not*
materialized.  Each tail piece carries certified bounds, so every quantity
computed here is an enclosure: explicit sum plus a rigorously bounded
remainder.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (AtomHit, CriterionFails, Inconclusive, InvalidMeasure,
                     NoTailBound)

PSD_TOL = 1e-12
DIVERGENCE_THRESHOLD = 1e12
STABILIZATION_RTOL = 1e-8
DEFAULT_Y_SEQUENCE = tuple(10.0 ** -k for k in range(1, 9))

# relative allowance for floating point summation of n nonnegative terms
_EPS = np.finfo(float).eps


def _round_err(abs_sum, n):
    return 2.0 * _EPS * (n + 4) * abs_sum


# ---------------------------------------------------------------------------
# tail pieces
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TailPiece:
    """Bounds for an omitted family of atoms ``f_k * pattern`` at ``t_k``.

    Parameters
    ----------
    mass : float
        Upper bound on ``sum f_k / (1 + t_k**2)``.
    lo, hi : float
        Closed hull containing every omitted abscissa (may be infinite).
    pattern : ndarray
        PSD ``d x d`` matrix; the omitted weights are ``f_k * pattern``.
    raw_mass : float
        Upper bound on ``sum f_k`` (``inf`` when the family has infinite mass).
    moment : callable, optional
        ``moment(lam) -> (lower, upper)`` enclosure of ``sum f_k/(t_k-lam)**2``.
        Falls back to a hull-distance bound when absent.
    descriptor : dict, optional
        JSON representation, for pieces that can be serialized.
    """

    mass: float
    lo: float
    hi: float
    pattern: np.ndarray
    raw_mass: float = math.inf
    moment: Optional[Callable[[float], tuple]] = None
    descriptor: Optional[dict] = None

    @property
    def norm(self):
        return float(np.linalg.norm(self.pattern, 2))

    def distance(self, x):
        if self.lo <= x <= self.hi:
            return 0.0
        return min(abs(x - self.lo), abs(x - self.hi))

    def moment_enclosure(self, lam):
        """Enclosure of ``sum f_k / (t_k - lam)**2`` (scalar part)."""
        if self.moment is not None:
            return self.moment(lam)
        delta = self.distance(lam)
        if delta <= 0.0:
            return 0.0, math.inf
        if math.isfinite(self.raw_mass):
            return 0.0, self.raw_mass / delta ** 2
        # (1+t^2)/(t-lam)^2 is maximal on |t-lam| = delta
        return 0.0, self.mass * (1.0 + (abs(lam) + delta) ** 2) / delta ** 2

    def resolvent_bound(self, z):
        """Bound on ``|sum f_k (1/(t_k-z) - t_k/(1+t_k^2))|`` (scalar part)."""
        z = complex(z)
        rho = math.hypot(self.distance(z.real), z.imag)
        bounds = []
        if rho > 0.0:
            # 1 + t z = (1 + z^2) + z (t - z)
            bounds.append(self.mass * (abs(1 + z * z) / rho + abs(z)))
        if math.isfinite(self.raw_mass):
            _, m2 = self.moment_enclosure(z.real)
            if math.isfinite(m2):
                bounds.append(math.sqrt(m2 * self.raw_mass) + 0.5 * self.raw_mass)
        return min(bounds) if bounds else math.inf

    def embedded(self, dim, offset):
        """Same piece acting on the block ``offset:offset+d`` of ``C^dim``."""
        d = self.pattern.shape[0]
        big = np.zeros((dim, dim), dtype=self.pattern.dtype)
        big[offset:offset + d, offset:offset + d] = self.pattern
        return TailPiece(self.mass, self.lo, self.hi, big, self.raw_mass,
                         self.moment, None)


def geometric_tail(n_listed, ratio, scale, dim):
    """Tail with ``||F_k||/(1+t_k^2) <= scale * ratio**k`` for ``k >= n_listed``.

    Locations of the omitted atoms are unknown, so only nonreal evaluation
    points can be bounded.
    """
    if not 0.0 <= ratio < 1.0 or scale < 0.0:
        raise InvalidMeasure("geometric tail needs 0 <= ratio < 1, scale >= 0")
    mass = scale * ratio ** n_listed / (1.0 - ratio)
    return TailPiece(mass, -math.inf, math.inf, np.eye(dim), math.inf, None,
                     {"kind": "geometric", "ratio": ratio, "scale": scale})


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

def _as_matrix(a, dim=None):
    a = np.asarray(a)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMeasure(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise InvalidMeasure(f"expected {dim}x{dim} matrix, got {a.shape}")
    if not np.iscomplexobj(a):
        a = a.astype(float)
    return a


def _check_hermitian(a, what, psd):
    if np.linalg.norm(a - a.conj().T) > PSD_TOL:
        raise InvalidMeasure(f"{what} is not Hermitian")
    if psd:
        a = 0.5 * (a + a.conj().T)
        if np.linalg.eigvalsh(a).min() < -PSD_TOL:
            raise InvalidMeasure(f"{what} is not positive semidefinite")


def _hermitize(a):
    return 0.5 * (a + a.conj().T)


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MatrixMeasure:
    """Purely atomic ``d x d`` PSD measure with certified remainder.

    Use :meth:`from_atoms` to build one; it validates and freezes the data.
    ``t`` has shape ``(n,)`` and ``F`` shape ``(n, d, d)``.
    """

    t: np.ndarray
    F: np.ndarray
    tails: tuple = ()
    infinite_mass: bool = False

    @classmethod
    def from_atoms(cls, abscissas, weights, dim=None, tails=(),
                   infinite_mass=False, merge=False):
        t = np.asarray(abscissas, dtype=float).reshape(-1)
        if dim is None:
            if len(t) == 0:
                raise InvalidMeasure("dim is required for an empty atom list")
            dim = _as_matrix(weights[0]).shape[0]
        mats = [_as_matrix(w, dim) for w in weights]
        if len(mats) != len(t):
            raise InvalidMeasure("abscissas and weights differ in length")
        if not np.all(np.isfinite(t)):
            raise InvalidMeasure("atom abscissas must be finite")
        for k, w in enumerate(mats):
            _check_hermitian(w, f"weight {k} at t={t[k]!r}", psd=True)
            if not np.any(w):
                raise InvalidMeasure(f"weight {k} at t={t[k]!r} is zero")
        dtype = np.result_type(float, *[w.dtype for w in mats]) if mats else float
        F = np.zeros((len(t), dim, dim), dtype=dtype)
        for k, w in enumerate(mats):
            F[k] = _hermitize(w)
        if merge and len(t):
            t, F = _merge_atoms(t, F)
        if len(np.unique(t)) != len(t):
            raise InvalidMeasure("atom abscissas must be pairwise distinct")
        for piece in tails:
            if piece.pattern.shape != (dim, dim):
                raise InvalidMeasure("tail pattern has wrong dimension")
        return cls(_frozen(t), _frozen(F), tuple(tails), bool(infinite_mass))

    @classmethod
    def scalar(cls, abscissas, masses, tails=(), infinite_mass=False):
        masses = np.asarray(masses, dtype=float).reshape(-1)
        return cls.from_atoms(abscissas, masses.reshape(-1, 1, 1), dim=1,
                              tails=tails, infinite_mass=infinite_mass)

    @property
    def dim(self):
        return self.F.shape[1]

    @property
    def n_atoms(self):
        return len(self.t)

    @property
    def is_complete(self):
        """True when no atoms were omitted."""
        return not self.tails

    def norms(self):
        return np.linalg.norm(self.F, ord=2, axis=(1, 2))

    def tail_bound(self, n):
        """Certified bound on ``sum_{k>=n} ||F_k|| / (1 + t_k^2)``."""
        rest = self.norms()[n:] / (1.0 + self.t[n:] ** 2)
        return float(math.fsum(rest) + sum(p.mass * p.norm for p in self.tails))

    def directional(self, h):
        """Scalar masses ``(F_k h, h)``."""
        h = np.asarray(h)
        return np.real(np.einsum("i,kij,j->k", h.conj(), self.F, h))

    def truncated(self, n):
        """First ``n`` listed atoms as a complete (finite) measure."""
        return MatrixMeasure(_frozen(self.t[:n]), _frozen(self.F[:n]), (), False)

    def sorted(self):
        order = np.argsort(self.t, kind="stable")
        return MatrixMeasure(_frozen(self.t[order]), _frozen(self.F[order]),
                             self.tails, self.infinite_mass)


def _merge_atoms(t, F):
    order = np.argsort(t, kind="stable")
    t, F = t[order], F[order]
    keys, start = np.unique(t, return_index=True)
    merged = np.add.reduceat(F, start, axis=0)
    return keys, merged


@dataclass(frozen=True, eq=False)
class HerglotzFunction:
    """``Phi(z) = c0 + z c1 + integral of the Nevanlinna kernel against measure``."""

    c0: np.ndarray
    c1: np.ndarray
    measure: MatrixMeasure

    def __post_init__(self):
        d = self.measure.dim
        c0 = _as_matrix(self.c0, d)
        c1 = _as_matrix(self.c1, d)
        _check_hermitian(c0, "C0", psd=False)
        _check_hermitian(c1, "C1", psd=True)
        object.__setattr__(self, "c0", _frozen(_hermitize(c0)))
        object.__setattr__(self, "c1", _frozen(_hermitize(c1)))

    @classmethod
    def from_measure(cls, measure, c0=None, c1=None):
        d = measure.dim
        return cls(np.zeros((d, d)) if c0 is None else c0,
                   np.zeros((d, d)) if c1 is None else c1, measure)

    @property
    def dim(self):
        return self.measure.dim


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Evaluation:
    value: np.ndarray
    error_bound: float


def _kernel(t, z):
    return 1.0 / (t - z) - t / (1.0 + t * t)


def _check_not_atom(measure, x):
    hit = np.flatnonzero(measure.t == x)
    if hit.size:
        raise AtomHit(f"z={x!r} is an atom abscissa")


def _tail_resolvent(measure, z):
    total = 0.0
    for piece in measure.tails:
        b = piece.resolvent_bound(z)
        if not math.isfinite(b):
            raise NoTailBound(f"omitted atoms cannot be bounded at z={z!r}")
        total += b * piece.norm
    return total


def evaluate(phi, z, truncation=None):
    """Evaluate ``phi`` at ``z`` from the first ``truncation`` atoms.

    Listed atoms beyond the truncation and all tail pieces enter the error
    bound only.

    Returns
    -------
    Evaluation
        ``value`` is ``d x d`` complex; the exact function value lies within
        ``error_bound`` in spectral norm.
    """
    z = complex(z)
    mu = phi.measure
    n = mu.n_atoms if truncation is None else int(truncation)
    if not 0 <= n <= mu.n_atoms:
        raise ValueError(f"truncation {n} outside 0..{mu.n_atoms}")
    if z.imag == 0.0:
        _check_not_atom(mu, z.real)
    coef = _kernel(mu.t, z)
    head = np.einsum("k,kij->ij", coef[:n], mu.F[:n])
    value = phi.c0 + z * phi.c1 + head
    norms = mu.norms()
    err = float(np.sum(np.abs(coef[n:]) * norms[n:]))
    err += _tail_resolvent(mu, z)
    err += _round_err(float(np.sum(np.abs(coef[:n]) * norms[:n]))
                      + np.linalg.norm(phi.c0, 2) + abs(z) * np.linalg.norm(phi.c1, 2), n)
    return Evaluation(value, err)


# ---------------------------------------------------------------------------
# second moments and the boundary-limit criterion
# ---------------------------------------------------------------------------

class Kind(str, enum.Enum):
    FINITE = "finite"
    DIVERGENT = "divergent"
    INFINITE = "infinite"


@dataclass(frozen=True)
class AtomWitness:
    t: float
    mass: float

    def describe(self):
        return f"atom at t={self.t!r} with (F h,h)={self.mass!r} > 0"


@dataclass(frozen=True)
class ThresholdWitness:
    partial_sum: float
    threshold: float

    def describe(self):
        return (f"partial sums reached {self.partial_sum!r} >= threshold "
                f"{self.threshold!r} with nonnegative tail")


@dataclass(frozen=True)
class SecondMomentResult:
    kind: Kind
    value: Optional[float] = None
    error_bound: float = 0.0
    witness: object = None

    def __post_init__(self):
        if self.kind is Kind.DIVERGENT and self.witness is None:
            raise ValueError("a divergent result needs a witness")
        if self.value is not None and self.value < 0:
            raise ValueError("second moment must be nonnegative")
        if self.error_bound < 0:
            raise ValueError("error bound must be nonnegative")

    @property
    def is_finite(self):
        return self.kind is Kind.FINITE

    @property
    def interval(self):
        return self.value, self.value + self.error_bound


def _unit(h, dim):
    h = np.asarray(h, dtype=complex).reshape(-1)
    if h.shape != (dim,):
        raise ValueError(f"direction must have length {dim}")
    if abs(np.linalg.norm(h) - 1.0) > 1e-12:
        raise ValueError("direction must have unit norm")
    return h


def _atom_at(mu, w, lam):
    hit = np.flatnonzero(mu.t == lam)
    if hit.size and w[hit[0]] > PSD_TOL:
        return AtomWitness(float(lam), float(w[hit[0]]))
    return None


def _tail_moment(mu, lam, h):
    lo = hi = 0.0
    for piece in mu.tails:
        weight = float(np.real(h.conj() @ piece.pattern @ h))
        if weight <= 0.0:
            continue
        a, b = piece.moment_enclosure(lam)
        lo += weight * a
        hi += weight * b
    return lo, hi


def second_moment_at(mu, lam, h, truncation=None,
                     divergence_threshold=DIVERGENCE_THRESHOLD):
    r"""Certified value of :math:`\sum_k (F_k h,h)/(t_k-\lambda)^2`.

    ``value`` is the explicit sum plus the lower end of the tail enclosure,
    so the exact second moment lies in ``[value, value + error_bound]``.
    Listed atoms past ``truncation`` are summed exactly as part of the tail.
    """
    if not divergence_threshold > 0:
        raise ValueError("divergence_threshold must be positive")
    lam = float(lam)
    h = _unit(h, mu.dim)
    n = mu.n_atoms if truncation is None else int(truncation)
    w = np.clip(mu.directional(h), 0.0, None)
    witness = _atom_at(mu, w, lam)
    if witness is not None:
        return SecondMomentResult(Kind.DIVERGENT, witness=witness)
    mask = w > 0
    terms = np.zeros_like(w)
    with np.errstate(divide="ignore"):
        # a distance that underflows to 0 gives inf, caught by the threshold
        terms[mask] = w[mask] / (mu.t[mask] - lam) ** 2
    head = math.fsum(terms[:n])
    rest = math.fsum(terms[n:])
    lo, hi = _tail_moment(mu, lam, h)
    if not math.isfinite(hi):
        if head + rest + lo >= divergence_threshold:
            return SecondMomentResult(
                Kind.DIVERGENT, witness=ThresholdWitness(head + rest + lo,
                                                         divergence_threshold))
        raise NoTailBound(f"tail second moment unbounded at lambda={lam!r}")
    value = head + rest + lo
    if value >= divergence_threshold:
        return SecondMomentResult(
            Kind.DIVERGENT, witness=ThresholdWitness(value, divergence_threshold))
    err = (hi - lo) + _round_err(value, mu.n_atoms) + 1e-15 * hi
    return SecondMomentResult(Kind.FINITE, value, err)


def imag_quotient(phi, lam, y, h):
    r"""``(1/y) Im (Phi(lam + i y) h, h)`` over the listed atoms.

    Uses the closed form :math:`\sum_k (F_k h,h)/((t_k-\lambda)^2+y^2) + (C_1h,h)`
    of the imaginary part, which avoids cancellation for small ``y``.
    """
    mu = phi.measure
    w = np.clip(mu.directional(h), 0.0, None)
    c1 = float(np.real(h.conj() @ phi.c1 @ h))
    return math.fsum(w / ((mu.t - lam) ** 2 + y * y)) + c1


@dataclass(frozen=True)
class QuotientLimit:
    kind: Kind
    estimate: Optional[float]
    error_bound: float
    sequence: tuple
    reason: str = ""

    @property
    def is_finite(self):
        return self.kind is Kind.FINITE


def _check_y_sequence(ys):
    ys = tuple(float(y) for y in ys)
    if len(ys) < 3:
        raise ValueError("y_sequence needs at least three values")
    if any(y <= 0 for y in ys) or any(b >= a for a, b in zip(ys, ys[1:])):
        raise ValueError("y_sequence must be positive and strictly decreasing")
    return ys


def imag_quotient_limit(phi, lam, h, y_sequence=DEFAULT_Y_SEQUENCE,
                        divergence_threshold=DIVERGENCE_THRESHOLD,
                        rtol=STABILIZATION_RTOL):
    """Classify ``lim_{y->0} (1/y) Im (Phi(lam+iy) h, h)`` as finite or infinite.

    The quotient is nondecreasing as ``y`` decreases.  It is *finite* once the
    last two values agree to ``rtol``; the estimate is Richardson-corrected in
    ``y**2`` and the tail enclosure of the omitted atoms is added.  It is
    *infinite* when the values cross ``divergence_threshold`` or grow like
    ``c/y**2`` (an atom at ``lam``).

    Raises
    ------
    Inconclusive
        Neither criterion applies; the sequence is attached as ``record``.
    """
    ys = _check_y_sequence(y_sequence)
    lam = float(lam)
    h = _unit(h, phi.dim)
    # an atom at lam contributes exactly (F h, h)/y**2, however small F is;
    # sampled y cannot see masses far below y**2
    w = np.clip(phi.measure.directional(h)[phi.measure.t == lam], 0.0, None)
    if w.size and w[0] > 0:
        qs = tuple(imag_quotient(phi, lam, y, h) for y in ys)
        return QuotientLimit(Kind.INFINITE, None, 0.0, qs, "atom at lambda")
    qs = tuple(imag_quotient(phi, lam, y, h) for y in ys)
    q_prev, q_last = qs[-2], qs[-1]
    y_prev, y_last = ys[-2], ys[-1]
    if q_last >= divergence_threshold:
        return QuotientLimit(Kind.INFINITE, None, 0.0, qs, "threshold")
    a_prev, a_last = q_prev * y_prev ** 2, q_last * y_last ** 2
    if a_last > 0 and q_last > q_prev * (1 + rtol) and abs(a_last - a_prev) <= 1e-2 * a_last:
        return QuotientLimit(Kind.INFINITE, None, 0.0, qs, "atom")
    if abs(q_last - q_prev) <= rtol * abs(q_last):
        lo, hi = _tail_moment(phi.measure, lam, h)
        if not math.isfinite(hi):
            raise NoTailBound(f"tail second moment unbounded at lambda={lam!r}")
        correction = (q_last - q_prev) * y_last ** 2 / (y_prev ** 2 - y_last ** 2)
        estimate = q_last + correction + lo
        err = abs(q_last - q_prev) + (hi - lo) + _round_err(q_last, phi.measure.n_atoms)
        return QuotientLimit(Kind.FINITE, estimate, err, qs, "stabilized")
    raise Inconclusive(f"quotient at lambda={lam!r} neither stabilized nor diverged",
                       record={"y": ys, "q": qs})


@dataclass(frozen=True)
class BoundaryValue:
    value: np.ndarray
    error_bound: float

    @property
    def hermitian_part(self):
        return _hermitize(self.value)

    @property
    def anti_hermitian_norm(self):
        return float(np.linalg.norm(0.5 * (self.value - self.value.conj().T), 2))


def boundary_value(phi, lam, y_sequence=DEFAULT_Y_SEQUENCE, **limit_kwargs):
    """Extrapolated ``Phi(lam + i0)`` after checking the limit criterion.

    Every standard basis direction must classify finite; the last two
    evaluations are combined by linear extrapolation in ``y``.
    """
    ys = _check_y_sequence(y_sequence)
    d = phi.dim
    for j in range(d):
        res = imag_quotient_limit(phi, lam, np.eye(d)[j], ys, **limit_kwargs)
        if not res.is_finite:
            raise CriterionFails(f"direction e_{j} diverges at lambda={lam!r}")
    y_prev, y_last = ys[-2], ys[-1]
    e_prev = evaluate(phi, complex(lam, y_prev))
    e_last = evaluate(phi, complex(lam, y_last))
    limit = (y_prev * e_last.value - y_last * e_prev.value) / (y_prev - y_last)
    err = float(np.linalg.norm(limit - e_last.value, 2)) + e_last.error_bound
    return BoundaryValue(limit, err)


# ---------------------------------------------------------------------------
# direct sums
# ---------------------------------------------------------------------------

def direct_sum(mus):
    """Block-diagonal measure ``mus[0] + mus[1] + ...``; shared atoms merge."""
    mus = list(mus)
    if not mus:
        raise ValueError("direct_sum needs at least one measure")
    if len(mus) == 1:
        return mus[0]
    dims = [m.dim for m in mus]
    dim = sum(dims)
    offsets = np.concatenate([[0], np.cumsum(dims)[:-1]])
    abscissas = np.unique(np.concatenate([m.t for m in mus]))
    index = {float(x): i for i, x in enumerate(abscissas)}
    dtype = np.result_type(*[m.F.dtype for m in mus])
    F = np.zeros((len(abscissas), dim, dim), dtype=dtype)
    tails = []
    for m, off in zip(mus, offsets):
        rows = [index[float(x)] for x in m.t]
        F[rows, off:off + m.dim, off:off + m.dim] = m.F
        tails.extend(p.embedded(dim, off) for p in m.tails)
    return MatrixMeasure(_frozen(abscissas), _frozen(F), tuple(tails),
                         any(m.infinite_mass for m in mus))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _matrix_to_json(a):
    a = np.asarray(a)
    if np.iscomplexobj(a) and np.any(a.imag):
        return [[[float(x.real), float(x.imag)] for x in row] for row in a]
    return [[float(x) for x in np.real(row)] for row in a]


def _matrix_from_json(rows):
    arr = []
    complex_ = False
    for row in rows:
        out = []
        for x in row:
            if isinstance(x, (list, tuple)):
                if len(x) != 2:
                    raise InvalidMeasure("complex entries must be [re, im]")
                out.append(complex(float(x[0]), float(x[1])))
                complex_ = True
            else:
                out.append(float(x))
        arr.append(out)
    return np.array(arr, dtype=complex if complex_ else float)


def herglotz_to_json(phi, meta=None):
    """Dictionary in the measure-file schema (see README)."""
    mu = phi.measure
    tail = None
    if len(mu.tails) == 1 and mu.tails[0].descriptor is not None:
        tail = dict(mu.tails[0].descriptor)
    doc = {
        "dim": mu.dim,
        "c0": _matrix_to_json(phi.c0),
        "c1": _matrix_to_json(phi.c1),
        "atoms": [{"t": float(t), "F": _matrix_to_json(F)}
                  for t, F in zip(mu.t, mu.F)],
        "tail": tail,
    }
    if meta is not None:
        doc["meta"] = meta
    return doc


def herglotz_from_json(doc, tails=None):
    """Inverse of :func:`herglotz_to_json`.

    ``tails`` overrides the file's tail entry (used when a generator can
    rebuild exact tails from the ``meta`` block).
    """
    try:
        dim = int(doc["dim"])
        atoms = doc["atoms"]
        t = [float(a["t"]) for a in atoms]
        F = [_matrix_from_json(a["F"]) for a in atoms]
        c0 = _matrix_from_json(doc.get("c0") or np.zeros((dim, dim)).tolist())
        c1 = _matrix_from_json(doc.get("c1") or np.zeros((dim, dim)).tolist())
        tail_doc = doc.get("tail")
    except (KeyError, TypeError) as exc:
        raise InvalidMeasure(f"malformed measure document: {exc}") from exc
    if tails is None:
        tails = ()
        if tail_doc is not None:
            if tail_doc.get("kind") != "geometric":
                raise InvalidMeasure(f"unknown tail kind {tail_doc.get('kind')!r}")
            tails = (geometric_tail(len(t), float(tail_doc["ratio"]),
                                    float(tail_doc["scale"]), dim),)
    mu = MatrixMeasure.from_atoms(t, F, dim=dim, tails=tails)
    return HerglotzFunction(c0, c1, mu)
