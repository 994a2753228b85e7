"""Atomic measures whose point masses accumulate at points of finite second moment.

Two families are built.

*Bounded interval* ``(mu1, mu2)``: anchor points
``lam_k = mu2 - (mu2 - mu1) 2**-(k+1)`` and, for ``k >= 1``, satellites
``lam_jk = lam_k - c_k/(j+1)`` with ``c_k = min(1 - eps, lam_k - lam_{k-1})``
carrying ``F_jk = u_jk (lam_k - lam_jk)**2``, ``u_jk = s_k 2**-j``,
``s_k = 2**-k``.  Unit atoms at the integers outside ``[mu1, mu2]`` make the
total mass infinite.

*Unbounded interval* ``(mu1, inf)`` with ``mu1 <= 1``: satellites
``k + 1/(j+1)`` with mass ``F_j = 2**-j (j+1)**-2`` for every ``k >= 1``.

Only ``K`` accumulation points and ``J`` satellites per point are listed; the
rest of each infinite family is represented by tail pieces with closed-form
enclosures, so every reported number is certified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import mpmath
import numpy as np
from scipy.special import polygamma

from . import herglotz as hz
from .errors import InvalidInterval
from .herglotz import MatrixMeasure, TailPiece

EPS_SPACING = 1e-9
OUTSIDE_ATOMS = 32
_REL = 1e-13


@dataclass(frozen=True)
class CounterexampleSpec:
    mu1: float
    mu2: float
    K: int
    J: int
    defect: int = 1
    outside_atoms: int = OUTSIDE_ATOMS

    def __post_init__(self):
        mu1, mu2 = float(self.mu1), float(self.mu2)
        if math.isnan(mu1) or math.isnan(mu2) or not mu1 < mu2:
            raise InvalidInterval(f"need mu1 < mu2, got ({self.mu1}, {self.mu2})")
        if mu1 == math.inf or mu2 == -math.inf:
            raise InvalidInterval("empty interval")
        if self.K < 1 or self.J < 1 or self.defect < 1 or self.outside_atoms < 1:
            raise ValueError("K, J, defect and outside_atoms must be >= 1")
        if mu2 == math.inf and mu1 > 1:
            raise InvalidInterval("unbounded case requires mu1 <= 1")
        object.__setattr__(self, "mu1", mu1)
        object.__setattr__(self, "mu2", mu2)

    @property
    def bounded(self):
        return math.isfinite(self.mu2)

    @property
    def case(self):
        return "bounded" if self.bounded else "unbounded"

    def to_json(self):
        return {"mu1": _num_to_json(self.mu1), "mu2": _num_to_json(self.mu2),
                "K": self.K, "J": self.J, "defect": self.defect,
                "outside_atoms": self.outside_atoms}

    @classmethod
    def from_json(cls, doc):
        return cls(_num_from_json(doc["mu1"]), _num_from_json(doc["mu2"]),
                   int(doc["K"]), int(doc["J"]), int(doc.get("defect", 1)),
                   int(doc.get("outside_atoms", OUTSIDE_ATOMS)))


def _num_to_json(x):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _num_from_json(x):
    return float(x)


@dataclass(frozen=True, eq=False)
class CounterexampleMeasure:
    """Constructed measure together with its generating data.

    ``windows[k-1] = (alpha_k, beta_k)`` isolates the satellites of ``lam_k``.
    ``block_tails[k-1]`` bounds the unlisted satellites of ``lam_k`` and
    ``other_tails`` everything else that was not listed.
    """

    spec: CounterexampleSpec
    measure: MatrixMeasure
    anchor: Optional[float]
    accumulation_points: tuple
    satellites: np.ndarray
    weights_meta: dict
    windows: tuple
    block_tails: tuple
    other_tails: tuple
    outside_abscissas: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def interval(self):
        return self.spec.mu1, self.spec.mu2

    def herglotz(self, c0=None, c1=None):
        return hz.HerglotzFunction.from_measure(self.measure, c0, c1)

    def meta(self):
        doc = {"spec": self.spec.to_json(), "case": self.spec.case,
               "lambda_k": list(map(float, self.accumulation_points)),
               "lambda_jk": self.satellites.tolist(),
               "windows": [list(map(float, w)) for w in self.windows]}
        if self.anchor is not None:
            doc["lambda_0"] = float(self.anchor)
        for key, val in self.weights_meta.items():
            doc[key] = np.asarray(val).tolist()
        return doc


# ---------------------------------------------------------------------------
# certified enclosures for the omitted satellite families
# ---------------------------------------------------------------------------

def _satellite_moment(a, sign, c, s, j0, lam, max_terms=2_000_000):
    r"""Enclosure of :math:`\sum_{j>j_0} s 2^{-j} (c/(j+1))^2 / (a + \sigma c/(j+1) - \lambda)^2`.

    Each term equals ``s 2**-j / (1 + e (j+1))**2`` with
    ``e = sign (a - lam) / c``; once ``|1 + e (j+1)| >= 1`` the terms are
    bounded by ``s 2**-j``.
    """
    e = sign * (a - lam) / c
    start = j0 + 1
    if e >= 0:
        stop = j0 + 64
    else:
        stop = max(j0 + 64, int(math.ceil(2.0 / -e)) + 64)
    if stop - j0 > max_terms:
        return 0.0, math.inf
    j = np.arange(start, stop + 1, dtype=float)
    den = 1.0 + e * (j + 1.0)
    if np.any(den == 0.0):
        return math.inf, math.inf
    total = math.fsum(s * np.exp2(-j) / den ** 2)
    return total * (1 - _REL), total * (1 + _REL) + s * 2.0 ** (-stop)


def _satellite_piece(a, sign, c, s, j0, dim=1):
    """Tail piece for satellites ``j > j0`` of one accumulation point."""
    raw = s * c * c * 2.0 ** (-j0) / (j0 + 2) ** 2
    edge = a + sign * c / (j0 + 2)
    lo, hi = min(a, edge), max(a, edge)
    origin = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
    return TailPiece(raw / (1.0 + origin ** 2), lo, hi, np.eye(dim), raw,
                     partial(_satellite_moment, a, sign, c, s, j0))


def _sum_pieces(pieces, lam):
    lo = hi = 0.0
    for p in pieces:
        a, b = p.moment_enclosure(lam)
        lo += a
        hi += b
    return lo, hi


def _integer_tail_moment(start, side, lam):
    """Enclosure of ``sum 1/(m - lam)**2`` over ``m = start, start+side, ...``."""
    x = (start - lam) * side
    if x <= 0:
        return 0.0, math.inf
    val = float(polygamma(1, x))
    return val * (1 - _REL), val * (1 + _REL)


def _integer_tail_mass(start, side):
    """Bound on ``sum 1/(1+m**2)`` over ``m = start, start+side, ...``."""
    a = start * side
    if a >= 1:
        return math.pi / 2 - math.atan(a - 1)
    return math.pi / math.tanh(math.pi)


def _integer_piece(start, side):
    lo, hi = (start, math.inf) if side > 0 else (-math.inf, start)
    return TailPiece(_integer_tail_mass(start, side), lo, hi, np.eye(1),
                     math.inf, partial(_integer_tail_moment, start, side))


# ---------------------------------------------------------------------------
# bounded case
# ---------------------------------------------------------------------------

def _bounded_lambda(spec, k):
    width = spec.mu2 - spec.mu1 if math.isfinite(spec.mu1) else 1.0
    return spec.mu2 - width * 2.0 ** (-(k + 1))


def _bounded_spacing(spec, k):
    return min(1.0 - EPS_SPACING, _bounded_lambda(spec, k) - _bounded_lambda(spec, k - 1))


def _bounded_block(spec, k, J):
    lam = _bounded_lambda(spec, k)
    c = _bounded_spacing(spec, k)
    j = np.arange(1, J + 1, dtype=float)
    sat = lam - c / (j + 1.0)
    s = 2.0 ** (-k)
    u = s * np.exp2(-j)
    F = u * (lam - sat) ** 2
    return lam, c, s, sat, u, F


def _bounded_ktail_moment(spec, K, lam, blocks=60):
    pieces = []
    last = K
    for k in range(K + 1, K + blocks + 1):
        # stop before lam_{k+1} collapses onto mu2 in double precision
        if _bounded_spacing(spec, k + 1) <= 0.0:
            break
        a = _bounded_lambda(spec, k)
        pieces.append(_satellite_piece(a, -1, _bounded_spacing(spec, k), 2.0 ** (-k), 0))
        last = k
    lo, hi = _sum_pieces(pieces, lam)
    # blocks beyond: total raw mass <= 2**-last/4, support in [start, mu2]
    start = _bounded_lambda(spec, last + 1) - 0.5 * _bounded_spacing(spec, last + 1)
    delta = start - lam if lam < start else (lam - spec.mu2 if lam > spec.mu2 else 0.0)
    if delta <= 0:
        return lo, math.inf
    return lo, hi + 0.25 * 2.0 ** (-last) / delta ** 2


def _outside_integers(spec, n):
    right_start = math.floor(spec.mu2) + 1
    right = [right_start + i for i in range(n)]
    left = []
    left_start = None
    if math.isfinite(spec.mu1):
        left_start = math.ceil(spec.mu1) - 1
        left = [left_start - i for i in range(n)]
    return right_start, left_start, right, left


def build_bounded(spec):
    """Scalar (or ``defect``-fold) measure for a bounded-above interval."""
    if not spec.bounded:
        raise InvalidInterval("build_bounded needs a finite mu2")
    K, J = spec.K, spec.J
    lambdas, sats, us, Fs, windows, block_tails = [], [], [], [], [], []
    for k in range(1, K + 1):
        lam, c, s, sat, u, F = _bounded_block(spec, k, J)
        lambdas.append(lam)
        sats.append(sat)
        us.append(u)
        Fs.append(F)
        block_tails.append(_satellite_piece(lam, -1, c, s, J))
        lam_prev = _bounded_lambda(spec, k - 1)
        first_next = _bounded_lambda(spec, k + 1) - 0.5 * _bounded_spacing(spec, k + 1)
        alpha = lam_prev + 0.5 * (sat[0] - lam_prev)
        beta = lam + 0.5 * (first_next - lam)
        windows.append((alpha, beta))
    ktail = TailPiece(0.25 * 2.0 ** (-K), _bounded_lambda(spec, K + 1)
                      - 0.5 * _bounded_spacing(spec, K + 1), spec.mu2, np.eye(1),
                      0.25 * 2.0 ** (-K), partial(_bounded_ktail_moment, spec, K))
    right_start, left_start, right, left = _outside_integers(spec, spec.outside_atoms)
    outside = np.array(sorted(left + right), dtype=float)
    other = [ktail, _integer_piece(right_start + spec.outside_atoms, +1)]
    if left_start is not None:
        other.append(_integer_piece(left_start - spec.outside_atoms, -1))
    t = np.concatenate([np.concatenate(sats), outside])
    w = np.concatenate([np.concatenate(Fs), np.ones(len(outside))])
    meta = {"s_k": [2.0 ** (-k) for k in range(1, K + 1)], "u_jk": np.array(us),
            "F_jk": np.array(Fs)}
    return _assemble(spec, t, w, _bounded_lambda(spec, 0), lambdas, np.array(sats),
                     meta, windows, block_tails, other, outside)


# ---------------------------------------------------------------------------
# unbounded case
# ---------------------------------------------------------------------------

def _unbounded_masses(J):
    j = np.arange(1, J + 1, dtype=float)
    return np.exp2(-j) / (j + 1.0) ** 2


def satellite_block_mass(terms=1100):
    """``s = sum_j 2**-j (j+1)**-2`` with a certified geometric tail bound."""
    total = math.fsum(_unbounded_masses(terms))
    tail = 2.0 ** (-terms) / (terms + 2) ** 2
    return total, tail


def _unbounded_ktail_moment(K, lam, terms=80):
    r"""Enclosure of :math:`\sum_{k>K}\sum_j F_j/(k + 1/(j+1) - \lambda)^2`.

    The sum over ``k`` is a trigamma value for each ``j``.
    """
    if lam >= K + 1:
        return 0.0, math.inf
    j = np.arange(1, terms + 1, dtype=float)
    Fj = np.exp2(-j) / (j + 1.0) ** 2
    vals = polygamma(1, K + 1 + 1.0 / (j + 1.0) - lam)
    total = math.fsum(Fj * vals)
    rest = 2.0 ** (-terms) / (terms + 2) ** 2 * float(polygamma(1, K + 1 - lam))
    return total * (1 - _REL), total * (1 + _REL) + rest


def build_unbounded(spec):
    """Measure for an interval unbounded above (``mu1 <= 1``)."""
    if spec.bounded:
        raise InvalidInterval("build_unbounded needs mu2 = inf")
    K, J = spec.K, spec.J
    Fj = _unbounded_masses(J)
    j = np.arange(1, J + 1, dtype=float)
    lambdas, sats, windows, block_tails = [], [], [], []
    for k in range(1, K + 1):
        lambdas.append(float(k))
        sats.append(k + 1.0 / (j + 1.0))
        windows.append((k - 0.25, k + 0.75))
        block_tails.append(_satellite_piece(float(k), +1, 1.0, 1.0, J))
    s, _ = satellite_block_mass()
    ktail = TailPiece(s / K, K + 1.0, math.inf, np.eye(1), math.inf,
                      partial(_unbounded_ktail_moment, K))
    t = np.concatenate(sats)
    w = np.tile(Fj, K)
    meta = {"F_j": Fj}
    return _assemble(spec, t, w, None, lambdas, np.array(sats), meta, windows,
                     block_tails, [ktail], np.empty(0))


def _assemble(spec, t, w, anchor, lambdas, sats, meta, windows, block_tails,
              other, outside):
    order = np.argsort(t)
    scalar = MatrixMeasure.scalar(t[order], w[order],
                                  tails=tuple(block_tails) + tuple(other),
                                  infinite_mass=True)
    measure = hz.direct_sum([scalar] * spec.defect)
    return CounterexampleMeasure(spec, measure, anchor, tuple(lambdas), sats,
                                 meta, tuple(windows), tuple(block_tails),
                                 tuple(other), outside)


def build(spec):
    """Dispatch on the interval type."""
    return build_bounded(spec) if spec.bounded else build_unbounded(spec)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass
class PointCheck:
    k: int
    lam: float
    direction: int
    window: tuple
    window_value: float
    window_error: float
    complement_value: float
    complement_error: float
    total: hz.SecondMomentResult
    expected_window: float

    @property
    def ok(self):
        return (self.total.is_finite and math.isfinite(self.total.error_bound)
                and math.isfinite(self.window_error)
                and math.isfinite(self.complement_error))

    def to_json(self):
        return {"k": self.k, "lambda_k": self.lam, "direction": self.direction,
                "window": list(self.window), "window_value": self.window_value,
                "window_error": self.window_error,
                "expected_window": self.expected_window,
                "complement_value": self.complement_value,
                "complement_error": self.complement_error,
                "total_value": self.total.value,
                "total_error": self.total.error_bound, "ok": self.ok}


@dataclass
class VerificationReport:
    case: str
    checks: list
    summability: list
    mass_certificate: dict
    satellites_divergent: bool

    @property
    def passed(self):
        return (all(c.ok for c in self.checks)
                and all(math.isfinite(s["upper"]) for s in self.summability)
                and self.mass_certificate["certified"]
                and self.satellites_divergent)

    def to_json(self):
        return {"case": self.case, "status": "PASS" if self.passed else "FAIL",
                "second_moment_checks": [c.to_json() for c in self.checks],
                "summability": self.summability,
                "total_mass": self.mass_certificate,
                "satellites_divergent": self.satellites_divergent}


def _block_scalar(cm, lam, window, block_tail):
    """Window and complement parts of the scalar second moment at ``lam``."""
    mu = cm.measure
    w = mu.directional(np.eye(mu.dim)[0])
    terms = w / (mu.t - lam) ** 2
    inside = (mu.t >= window[0]) & (mu.t < window[1])
    wlo, whi = block_tail.moment_enclosure(lam)
    win = math.fsum(terms[inside]) + wlo
    win_err = (whi - wlo) + hz._round_err(win, int(inside.sum()))
    olo, ohi = _sum_pieces(cm.other_tails + tuple(p for p in cm.block_tails
                                                  if p is not block_tail), lam)
    comp = math.fsum(terms[~inside]) + olo
    comp_err = (ohi - olo) + hz._round_err(comp, int((~inside).sum()))
    return win, win_err, comp, comp_err


def summability(measure):
    """Certified enclosure of ``sum (F_k e_j, e_j)/(1+t_k^2)`` per direction."""
    out = []
    for j in range(measure.dim):
        e = np.eye(measure.dim)[j]
        w = measure.directional(e)
        listed = math.fsum(w / (1.0 + measure.t ** 2))
        extra = sum(float(np.real(e @ p.pattern @ e)) * p.mass for p in measure.tails)
        out.append({"direction": j, "lower": listed,
                    "upper": listed + extra + hz._round_err(listed, measure.n_atoms)})
    return out


def total_mass_certificate(cm, threshold=1e3):
    """Exhibit partial trace sums of the full measure exceeding ``threshold``.

    Only atoms of the untruncated construction are summed (a sub-collection
    of the measure), so the partial sums are lower bounds of the total mass.
    """
    spec = cm.spec
    total, count = 0.0, 0
    if spec.bounded:
        right_start = math.floor(spec.mu2) + 1
        while total < threshold:
            total += 1.0 * spec.defect
            count += 1
        source = f"unit atoms at integers {right_start}, {right_start}+1, ..."
    else:
        per_block = math.fsum(_unbounded_masses(spec.J)) * spec.defect
        while total < threshold:
            total += per_block
            count += spec.J
        source = f"satellites k + 1/(j+1), j <= {spec.J}, of blocks k = 1, 2, ..."
    return {"certified": total >= threshold, "threshold": threshold,
            "partial_sum": total, "atoms_used": count, "source": source}


def verify_counterexample(cm, mass_threshold=1e3):
    """Check summability, finite second moments at every ``lam_k`` and infinite mass.

    Failures are reported in the returned :class:`VerificationReport`,
    never raised.
    """
    checks = []
    d = cm.measure.dim
    for k, (lam, window, btail) in enumerate(zip(cm.accumulation_points, cm.windows,
                                                 cm.block_tails), start=1):
        try:
            win, win_err, comp, comp_err = _block_scalar(cm, lam, window, btail)
        except (ValueError, ArithmeticError):
            win = win_err = comp = comp_err = math.inf
        expected = 2.0 ** (-k) if cm.spec.bounded else 1.0
        for j in range(d):
            try:
                total = hz.second_moment_at(cm.measure, lam, np.eye(d)[j])
            except hz.NoTailBound as exc:
                total = hz.SecondMomentResult(hz.Kind.DIVERGENT,
                                              witness=str(exc))
            checks.append(PointCheck(k, float(lam), j, window, win, win_err,
                                     comp, comp_err, total, expected))
    sat_div = True
    for row in np.atleast_2d(cm.satellites):
        for x in row[:3]:
            res = hz.second_moment_at(cm.measure, float(x), np.eye(d)[0])
            sat_div &= res.kind is hz.Kind.DIVERGENT
    return VerificationReport(cm.spec.case, checks, summability(cm.measure),
                              total_mass_certificate(cm, mass_threshold), sat_div)


# ---------------------------------------------------------------------------
# accumulation points
# ---------------------------------------------------------------------------

def _levin_limit(seq):
    acc = mpmath.levin(method="levin", variant="u")
    with mpmath.workdps(30):
        val, _ = acc.update_psum([mpmath.mpf(float(x)) for x in seq])
    return float(val)


def _forward_runs(x):
    """Index ranges ``(a, b)`` of atoms ``x[a..b]`` whose gaps strictly decrease."""
    g = np.diff(x)
    runs, start = [], 0
    for i in range(1, len(g)):
        if g[i] >= g[i - 1]:
            runs.append((start, i))
            start = i + 1
    runs.append((start, len(g)))
    return [(a, b) for a, b in runs if b > a]


def _one_sided(x, hi_edge, resolution, min_run, window):
    out = []
    for a, b in _forward_runs(x):
        run = x[a:b + 1]
        if len(run) < min_run:
            continue
        w = min(window, len(run))
        est = _levin_limit(run[-w:])
        est_alt = _levin_limit(run[-(w - 3):]) if w > 6 else est
        upper = x[b + 1] if b + 1 < len(x) else hi_edge
        if not (run[-1] < est < upper):
            continue
        if abs(est - est_alt) > resolution:
            continue
        out.append(est)
    return out


def detect_accumulation_points(abscissas, interval=(-math.inf, math.inf),
                               resolution=1e-3, min_run=8, window=15):
    """Estimate limit points of a finite atom set from monotone clustering.

    A run of at least ``min_run`` atoms whose successive gaps shrink is
    extrapolated (Levin u-transform on its last ``window`` atoms).  The
    estimate is kept if it is stable to ``resolution`` and lies in the gap
    that follows the run.  Runs are searched in both directions.
    """
    lo, hi = interval
    x = np.unique(np.asarray(abscissas, dtype=float))
    x = x[(x > lo) & (x < hi)]
    if len(x) < min_run:
        return []
    found = _one_sided(x, hi, resolution, min_run, window)
    found += [-v for v in _one_sided(-x[::-1], -lo, resolution, min_run, window)]
    return sorted(found)


def essential_spectrum_accumulation(cm, resolution=1e-3, min_run=8, window=15):
    """Accumulation points of the atoms of ``cm`` inside its interval.

    For a constructed measure, an estimate within ``resolution`` of a
    generating point ``lam_k`` is reported as that exact point.
    """
    if isinstance(cm, MatrixMeasure):
        return detect_accumulation_points(cm.t, resolution=resolution,
                                          min_run=min_run, window=window)
    est = detect_accumulation_points(cm.measure.t, cm.interval, resolution,
                                     min_run, window)
    declared = np.asarray(cm.accumulation_points)
    out = []
    for e in est:
        i = int(np.argmin(np.abs(declared - e)))
        out.append(float(declared[i]) if abs(declared[i] - e) <= resolution else e)
    return out


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------

def to_json(cm):
    return hz.herglotz_to_json(cm.herglotz(), meta=cm.meta())


def from_json(doc):
    """Rebuild a constructed measure from a file written by :func:`to_json`.

    The listed atoms must agree exactly with a fresh construction from the
    recorded spec; the analytic tails are reattached from that construction.
    """
    try:
        spec = CounterexampleSpec.from_json(doc["meta"]["spec"])
    except (KeyError, TypeError) as exc:
        raise hz.InvalidMeasure(f"missing counterexample meta: {exc}") from exc
    cm = build(spec)
    loaded = hz.herglotz_from_json(doc, tails=cm.measure.tails)
    if (not np.array_equal(loaded.measure.t, cm.measure.t)
            or not np.array_equal(loaded.measure.F, cm.measure.F)):
        raise hz.InvalidMeasure("atoms do not match the recorded construction")
    return cm
