"""Weyl-Titchmarsh analysis of ``-y'' + p(t) y = lam y`` on ``(0, inf)``.

The boundary condition at 0 is ``y'(0) - theta y(0) = 0``.  ``phi`` has data
``(1, theta)`` at 0 and ``chi`` has ``(0, 1)``, so ``W[phi, chi] = 1`` where
``W[f, g] = f g' - f' g``.  The Weyl solution is ``phi + m chi``.

Solutions that grow exponentially are integrated in segments.  Whenever the
state norm passes ``_RESCALE`` it is divided out and its log is accumulated,
so every trajectory is stored as ``scaled values * exp(log_scale)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, interpolate

from .errors import (AtomNearEndpoint, DiskNotShrinking, Inconclusive,
                     StepUnderflow)
from .potential import ZERO, Potential, check_regular

DEFAULT_T_LADDER = (10.0, 20.0, 40.0, 80.0)
DEFAULT_ETA_LADDER = (1e-1, 1e-2, 1e-3, 1e-4)
GROWTH_R2 = 0.99
GEOMETRIC_RATIO = 0.75
_RESCALE = 1e100
_METHOD = "DOP853"
# step control tolerance relative to the requested one; global error
# accumulates over many steps
_SAFETY = 0.05


@dataclass(frozen=True, eq=False)
class SLProblem:
    """Potential plus boundary parameter; regularity at 0 is spot-checked."""

    potential: Potential = ZERO
    theta: float = 0.0
    regularity: float = field(default=math.nan, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        if isinstance(self.potential, str):
            object.__setattr__(self, "potential", Potential.expr(self.potential))
        object.__setattr__(self, "regularity", check_regular(self.potential))

    def p(self, t):
        return self.potential(t)


# ---------------------------------------------------------------------------
# segmented integration of a fundamental pair
# ---------------------------------------------------------------------------

@dataclass
class _Track:
    t: np.ndarray
    state: np.ndarray  # rows: y, y', c, c', int|y|^2, int|c|^2 (scaled)
    log_scale: np.ndarray


def _pair_rhs(problem, lam, sign):
    p = problem.potential.scalar

    def rhs(t, s):
        q = p(t) - lam
        return np.array([s[1], q * s[0], s[3], q * s[2],
                         sign * abs(s[0]) ** 2, sign * abs(s[2]) ** 2], dtype=complex)
    return rhs


def _overflow(t, s):
    return math.log(abs(s[0]) + abs(s[1]) + abs(s[2]) + abs(s[3]) + 1e-300) \
        - math.log(_RESCALE)


_overflow.terminal = True
_overflow.direction = 1


def _march(problem, lam, init, companion, t0, t1, tol, t_eval):
    """Integrate the pair from ``t0`` to ``t1`` (either direction).

    ``t_eval`` are output points ordered from ``t0`` towards ``t1``.
    Integral rows accumulate ``int |.|^2`` over the traversed range.
    """
    sign = 1.0 if t1 >= t0 else -1.0
    rhs = _pair_rhs(problem, complex(lam), sign)
    s = np.array([init[0], init[1], companion[0], companion[1], 0, 0], dtype=complex)
    L = 0.0
    t_eval = np.asarray(t_eval, dtype=float)
    out_t, out_s, out_L = [], [], []
    pending = t_eval
    if pending.size and pending[0] == t0:
        out_t.append(t0)
        out_s.append(s.copy())
        out_L.append(L)
        pending = pending[1:]
    t = t0
    while (t1 - t) * sign > 0:
        stops = np.append(pending[(pending - t1) * sign < 0], t1)
        sol = integrate.solve_ivp(rhs, (t, t1), s, method=_METHOD, rtol=tol * _SAFETY,
                                  atol=tol * _SAFETY * 1e-3, events=_overflow,
                                  t_eval=stops)
        if sol.status == -1:
            raise StepUnderflow(f"integration stalled: {sol.message}",
                                t=float(sol.t[-1]) if sol.t.size else t)
        if sol.status == 1:
            t_end = float(sol.t_events[0][-1])
            s = sol.y_events[0][-1].copy()
        else:
            t_end = t1
            s = sol.y[:, -1].copy()
        for k, tk in enumerate(sol.t):
            if pending.size and tk == pending[0]:
                out_t.append(float(tk))
                out_s.append(sol.y[:, k])
                out_L.append(L)
                pending = pending[1:]
        if sol.status == 1:
            norm = abs(s[0]) + abs(s[1]) + abs(s[2]) + abs(s[3])
            s[:4] /= norm
            s[4:] /= norm ** 2
            L += math.log(norm)
        t = t_end
    if pending.size:
        raise StepUnderflow("output points were not reached", t=t)
    return _Track(np.array(out_t), np.array(out_s).T, np.array(out_L))


def _companion(y0, dy0):
    """Data with Wronskian 1 against ``(y0, dy0)``."""
    s = y0 * y0 + dy0 * dy0
    if abs(s) > 1e-12:
        return (-dy0 / s, y0 / s)
    return (0.0, 1.0 / y0) if y0 != 0 else (-1.0 / dy0, 0.0)


def scaled_wronskian_drift(y, dy, c, dc, log_scale):
    """``|W - 1| / max(1, |y c'| + |y' c|)`` with ``W`` the true Wronskian.

    The denominator is the size of the two products whose difference is
    ``W``; relative to it the drift is the cancellation error actually
    committed, which stays bounded for exponentially growing pairs.
    """
    w = y * dc - dy * c
    mag = np.abs(y * dc) + np.abs(dy * c)
    logS = 2.0 * np.asarray(log_scale)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        big = logS + np.log(mag) > 0
        drift_big = np.abs(w - np.exp(-logS)) / mag
        drift_small = np.abs(np.exp(np.where(big, 0.0, logS)) * w - 1.0)
    return float(np.max(np.where(big, drift_big, drift_small)))


@dataclass(frozen=True)
class IVPSolution:
    """Samples of ``y`` and ``y'``; true values are ``scaled * exp(log_scale)``."""

    lam: complex
    grid: np.ndarray
    y_scaled: np.ndarray
    dy_scaled: np.ndarray
    log_scale: np.ndarray
    log_norm2: np.ndarray
    wronskian_drift: float
    error_estimate: float
    tol: float

    @property
    def y(self):
        with np.errstate(over="ignore"):
            return self.y_scaled * np.exp(self.log_scale)

    @property
    def dy(self):
        with np.errstate(over="ignore"):
            return self.dy_scaled * np.exp(self.log_scale)


def _log_integral(track, row):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(track.state[row].real)) + 2 * track.log_scale


def _run_pair(problem, lam, init, T, tol, grid):
    comp = _companion(complex(init[0]), complex(init[1]))
    return _march(problem, lam, init, comp, 0.0, T, tol, grid)


def solve_ivp(problem, lam, init=None, T=10.0, tol=1e-8, grid=None,
              estimate_error=True):
    """Integrate ``-y'' + p y = lam y`` on ``[0, T]`` from ``init = (y0, dy0)``.

    ``init`` defaults to ``(1, theta)``.  A companion with Wronskian 1 is
    carried along to monitor drift.  ``error_estimate`` is the largest
    difference from a run at ``tol/32``, measured as
    ``|delta state| / max(1, |state|)``.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    init = (1.0, problem.theta) if init is None else init
    grid = np.linspace(0.0, T, 201) if grid is None else np.asarray(grid, dtype=float)
    if grid[0] != 0.0 or np.any(np.diff(grid) <= 0) or grid[-1] > T:
        raise ValueError("grid must start at 0, increase, and stay within [0, T]")
    tr = _run_pair(problem, lam, init, T, tol, grid)
    y, dy, c, dc = tr.state[:4]
    drift = scaled_wronskian_drift(y, dy, c, dc, tr.log_scale)
    err = math.nan
    if estimate_error:
        fine = _run_pair(problem, lam, init, T, tol / 32, grid)
        shift = np.exp(fine.log_scale - tr.log_scale)
        d = np.hypot(np.abs(y - fine.state[0] * shift), np.abs(dy - fine.state[1] * shift))
        size = np.hypot(np.abs(y), np.abs(dy))
        with np.errstate(over="ignore"):
            scale = np.maximum(np.exp(-np.minimum(tr.log_scale, 700)), size)
        err = float(np.max(d / np.maximum(scale, 1e-300)))
    return IVPSolution(complex(lam), tr.t, y, dy, tr.log_scale,
                       _log_integral(tr, 4), drift, err, tol)


def fundamental_pair(problem, lam, T_ladder, tol):
    """``phi, chi`` sampled on ``T_ladder`` (plus 0), with scaled drift."""
    grid = np.concatenate([[0.0], np.asarray(T_ladder, dtype=float)])
    tr = _march(problem, lam, (1.0, problem.theta), (0.0, 1.0), 0.0, grid[-1], tol, grid)
    drift = scaled_wronskian_drift(*tr.state[:4], tr.log_scale)
    return tr, drift


# ---------------------------------------------------------------------------
# L^2 classification
# ---------------------------------------------------------------------------

def _r2(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if np.ptp(y) == 0 or np.ptp(x) == 0:
        return 0.0, 0.0
    slope, icpt = np.polyfit(x, y, 1)
    res = y - (slope * x + icpt)
    return float(slope), float(1 - np.sum(res ** 2) / np.sum((y - y.mean()) ** 2))


@dataclass(frozen=True)
class GrowthRecord:
    """One trajectory's ``log int_0^T |y|^2`` on the ladder and its verdict."""

    T: tuple
    log_integral: tuple
    verdict: str  # "converged" | "growing" | "inconclusive"
    rule: str

    def to_json(self):
        return {"T": list(self.T), "log_integral": list(self.log_integral),
                "verdict": self.verdict, "rule": self.rule}


def classify_growth(T, log_I, tol):
    """Decide whether ``int_0^T |y|^2`` converges or grows along ``T``.

    Converged: last increment below ``tol * (1 + I)``, or the last two
    increments shrink geometrically (ratio <= 0.75).
    Growing: ``log I`` fits a positive slope with R^2 > 0.99 against ``T``,
    ``log T`` or (for super-exponential growth) ``log log I`` against
    ``log T``, and increments are not shrinking.
    """
    T = np.asarray(T, float)
    lI = np.asarray(log_I, float)
    rec = dict(T=tuple(T.tolist()), log_integral=tuple(lI.tolist()))
    if not np.all(np.isfinite(lI)):
        return GrowthRecord(verdict="inconclusive", rule="non-finite integral", **rec)
    # rounding can make a converged integral wobble; compare in relative terms
    rel_tol = tol * (1.0 + np.exp(-lI))
    step = np.diff(lI)
    if np.any(step < -rel_tol[1:]):
        return GrowthRecord(verdict="inconclusive", rule="non-monotone integral", **rec)
    if abs(step[-1]) <= rel_tol[-1]:
        return GrowthRecord(verdict="converged", rule="increment below tol", **rec)
    with np.errstate(divide="ignore"):
        log_inc = lI[1:] + np.log(-np.expm1(-np.maximum(step, 1e-300)))
    with np.errstate(over="ignore"):
        ratios = np.exp(np.diff(log_inc))
    if np.all(ratios[-2:] <= GEOMETRIC_RATIO):
        return GrowthRecord(verdict="converged", rule="geometric decay of increments", **rec)
    if ratios[-1] > GEOMETRIC_RATIO:
        fits = [("log I vs T", _r2(T, lI)), ("log I vs log T", _r2(np.log(T), lI))]
        if np.all(lI > 1.0):
            fits.append(("log log I vs log T", _r2(np.log(T), np.log(lI))))
        for name, (slope, r2) in fits:
            if slope > 0 and r2 > GROWTH_R2:
                return GrowthRecord(verdict="growing", rule=name, **rec)
    return GrowthRecord(verdict="inconclusive", rule="no rule applies", **rec)


def _dirichlet_log_integral(problem, lam, T, tol):
    """``log int_0^T |psi|^2`` for ``psi(T) = 0, psi'(T) = 1`` normalized so that
    ``|psi(0)|^2 + |psi'(0)|^2 = 1``.  Backward integration makes the
    subdominant solution at infinity the dominant one."""
    tr = _march(problem, lam, (0.0, 1.0), (1.0, 0.0), T, 0.0, tol, [0.0])
    y, dy = tr.state[0, -1], tr.state[1, -1]
    L = tr.log_scale[-1]
    log_norm0 = 0.5 * math.log(abs(y) ** 2 + abs(dy) ** 2) + L
    return math.log(abs(tr.state[4, -1].real)) + 2 * L - 2 * log_norm0


@dataclass(frozen=True)
class L2Count:
    count: int
    lam: complex
    phi: GrowthRecord
    chi: GrowthRecord
    weyl: Optional[GrowthRecord]
    wronskian_drift: float

    def to_json(self):
        return {"count": self.count, "lambda": [self.lam.real, self.lam.imag],
                "phi": self.phi.to_json(), "chi": self.chi.to_json(),
                "weyl": None if self.weyl is None else self.weyl.to_json(),
                "wronskian_drift": self.wronskian_drift}


def count_l2_solutions(problem, lam, T_ladder=DEFAULT_T_LADDER, tol=1e-6,
                       ode_tol=1e-8):
    """Dimension of the space of solutions square-integrable on ``(0, inf)``.

    Both ``phi`` and ``chi`` converging gives 2.  Otherwise the
    Dirichlet-at-``T`` solution, normalized at 0, stands in for the best
    combination: 1 if its integral converges along the ladder, 0 if it grows.
    """
    T_ladder = tuple(float(x) for x in T_ladder)
    if len(T_ladder) < 3 or any(b <= a for a, b in zip(T_ladder, T_ladder[1:])):
        raise ValueError("T_ladder needs at least three increasing rungs")
    lam = complex(lam)
    tr, drift = fundamental_pair(problem, lam, T_ladder, ode_tol)
    phi = classify_growth(T_ladder, _log_integral(tr, 4)[1:], tol)
    chi = classify_growth(T_ladder, _log_integral(tr, 5)[1:], tol)
    if phi.verdict == chi.verdict == "converged":
        return L2Count(2, lam, phi, chi, None, drift)
    logs = [_dirichlet_log_integral(problem, lam, T, ode_tol) for T in T_ladder]
    weyl = classify_growth(T_ladder, logs, tol)
    if weyl.verdict == "converged":
        return L2Count(1, lam, phi, chi, weyl, drift)
    if weyl.verdict == "growing":
        return L2Count(0, lam, phi, chi, weyl, drift)
    raise Inconclusive("cannot separate growth from convergence at the largest T",
                       record={"phi": phi.to_json(), "chi": chi.to_json(),
                               "weyl": weyl.to_json()})


@dataclass(frozen=True)
class DeficiencyIndices:
    n_plus: int
    n_minus: int
    plus: L2Count
    minus: L2Count

    @property
    def consistent(self):
        return self.n_plus == self.n_minus

    def to_json(self):
        return {"n_plus": self.n_plus, "n_minus": self.n_minus,
                "consistent": self.consistent,
                "plus": self.plus.to_json(), "minus": self.minus.to_json()}


def deficiency_indices(problem, T_ladder=DEFAULT_T_LADDER, tol=1e-6, ode_tol=1e-8):
    plus = count_l2_solutions(problem, 1j, T_ladder, tol, ode_tol)
    minus = count_l2_solutions(problem, -1j, T_ladder, tol, ode_tol)
    return DeficiencyIndices(plus.count, minus.count, plus, minus)


# ---------------------------------------------------------------------------
# Weyl disks and the m-function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeylDisk:
    z: complex
    T: float
    center: complex
    radius: float


@dataclass(frozen=True)
class WeylM:
    value: complex
    radius: float
    disks: tuple
    nested: bool
    wronskian_drift: float


def weyl_disks(problem, z, T_ladder=DEFAULT_T_LADDER, tol=1e-10):
    """Disks of ``m`` for which ``phi + m chi`` meets a real condition at ``T``.

    Center ``-[phi, conj chi]/[chi, conj chi]`` at ``T``; radius
    ``1 / (2 |Im z| int_0^T |chi|^2)``.
    """
    z = complex(z)
    if z.imag == 0:
        raise ValueError("z must be nonreal")
    tr, drift = fundamental_pair(problem, z, T_ladder, tol)
    disks = []
    for i, T in enumerate(T_ladder, start=1):
        ph, dph, ch, dch = tr.state[:4, i]
        num = ph * np.conj(dch) - dph * np.conj(ch)
        den = ch * np.conj(dch) - dch * np.conj(ch)
        center = -num / den
        log_r = -math.log(2 * abs(z.imag)) - math.log(tr.state[5, i].real) \
            - 2 * tr.log_scale[i]
        disks.append(WeylDisk(z, float(T), complex(center), math.exp(log_r)))
    return disks, drift


def weyl_m(problem, z, T_ladder=DEFAULT_T_LADDER, tol=1e-10, shrink_ratio=0.9):
    """Deepest disk center and radius along the ladder.

    Raises DiskNotShrinking when the last radius is not small and either
    has not dropped below ``shrink_ratio`` times the previous one or the
    radii extrapolate geometrically to a positive limit.
    """
    disks, drift = weyl_disks(problem, z, T_ladder, tol)
    nested = all(b.radius <= a.radius and
                 abs(b.center - a.center) <= a.radius - b.radius + 1e-9 * (1 + abs(a.center))
                 for a, b in zip(disks, disks[1:]))
    last = disks[-1]
    small = last.radius <= 1e-8 * (1 + abs(last.center))
    if not small and len(disks) > 1:
        r = np.array([d.radius for d in disks])
        stalled = r[-1] > shrink_ratio * r[-2]
        if len(r) > 2:
            # decrements shrinking geometrically: radius converges to r_inf > 0
            q = (r[-2] - r[-1]) / (r[-3] - r[-2])
            if 0 <= q <= GEOMETRIC_RATIO:
                r_inf = r[-1] - (r[-2] - r[-1]) * q / (1 - q)
                stalled = stalled or r_inf >= 0.5 * r[-1]
        if stalled:
            raise DiskNotShrinking("Weyl disks stop contracting (limit circle)",
                                   center=last.center, radius=last.radius)
    return WeylM(last.center, last.radius, tuple(disks), nested, drift)


def _weyl_branch(z, p):
    """``w = y'/y`` of the solution decaying like ``exp(int w)``, i.e. Re w <= 0."""
    w = 1j * np.sqrt(z - p)
    return np.where(w.real > 0, -w, w)


def m_riccati(problem, z, T, tol=1e-10):
    """``m(z)`` for an array of nonreal ``z`` by backward Riccati integration.

    ``w = psi'/psi`` solves ``w' = p - z - w^2``; starting from the
    Liouville-Green value at ``T`` the Weyl solution attracts backwards,
    and ``m = w(0) - theta``.  Exact start when ``p`` is constant.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag == 0):
        raise ValueError("z must be nonreal")
    w0 = _weyl_branch(z, float(problem.p(T)))
    if problem.potential.zero:
        return w0 - problem.theta
    p = problem.potential.scalar

    def rhs(t, w):
        return (p(t) - z) - w * w

    sol = integrate.solve_ivp(rhs, (T, 0.0), w0, method=_METHOD, rtol=tol, atol=tol)
    if sol.status == -1:
        raise StepUnderflow(f"Riccati integration stalled: {sol.message}",
                            t=float(sol.t[-1]))
    return sol.y[:, -1] - problem.theta


def spectral_function(problem, z, T, which="m", tol=1e-10):
    """``m(z)`` (``which="m"``) or ``-1/m(z)`` (``which="transform"``).

    The latter's measure is the one that makes the transform built on
    ``phi`` isometric.
    """
    m = m_riccati(problem, z, T, tol)
    if which == "m":
        return m
    if which == "transform":
        return -1.0 / m
    raise ValueError("which must be 'm' or 'transform'")


@dataclass(frozen=True)
class MeasureEstimate:
    mass: float
    error: float
    per_eta: tuple
    quadrature_error: float
    truncation_error: float

    def to_json(self):
        return {"mass": self.mass, "error": self.error,
                "per_eta": [list(x) for x in self.per_eta],
                "quadrature_error": self.quadrature_error,
                "truncation_error": self.truncation_error}


def spectral_measure_estimate(problem, interval, eta_ladder=DEFAULT_ETA_LADDER,
                              grid=201, T_ladder=(40.0, 80.0), which="m", tol=1e-10):
    """``F((a, b))`` by Stieltjes inversion, extrapolated as ``eta -> 0``.

    For each ``eta`` the integral ``(1/pi) int_a^b Im f(lam + i eta) dlam`` is
    taken with composite Simpson on ``grid`` points; the two smallest
    ``eta`` are combined by linear Richardson extrapolation.  The reported
    error adds the extrapolation step, a Simpson half-grid estimate and the
    change between the last two ``T``.
    """
    a, b = map(float, interval)
    if b < a:
        raise ValueError("interval must satisfy a <= b")
    etas = tuple(float(e) for e in eta_ladder)
    if len(etas) < 2 or any(e2 >= e1 for e1, e2 in zip(etas, etas[1:])) or etas[-1] <= 0:
        raise ValueError("eta_ladder must be positive and strictly decreasing")
    if a == b:
        return MeasureEstimate(0.0, 0.0, tuple((e, 0.0) for e in etas), 0.0, 0.0)
    n = int(grid) | 1
    if n < 5:
        raise ValueError("grid must have at least 5 points")
    lam = np.linspace(a, b, n)
    per_eta, quad_err, trunc_err = [], 0.0, 0.0
    last_imag = None
    endpoint_q = []
    for eta in etas:
        z = lam + 1j * eta
        vals = spectral_function(problem, z, T_ladder[-1], which, tol).imag / math.pi
        if len(T_ladder) > 1 and not problem.potential.zero:
            coarse = spectral_function(problem, z, T_ladder[-2], which, tol).imag / math.pi
            trunc_err = max(trunc_err, float(integrate.simpson(np.abs(vals - coarse), x=lam)))
        full = float(integrate.simpson(vals, x=lam))
        half = float(integrate.simpson(vals[::2], x=lam[::2]))
        quad_err = abs(full - half) / 15.0
        per_eta.append((eta, full))
        endpoint_q.append(eta * math.pi * np.array([vals[0], vals[-1]]))
        last_imag = vals
    q_prev, q_last = endpoint_q[-2], endpoint_q[-1]
    for side, (qp, ql) in zip((a, b), zip(q_prev, q_last)):
        if ql > 1e-6 and ql >= 0.5 * qp:
            raise AtomNearEndpoint(f"eta * Im does not vanish near {side}")
    (e1, f1), (e2, f2) = per_eta[-2], per_eta[-1]
    extrap = (e1 * f2 - e2 * f1) / (e1 - e2)
    err = abs(extrap - f2) + quad_err + trunc_err + 1e-14 * (1 + abs(extrap))
    return MeasureEstimate(float(extrap), float(err), tuple(per_eta),
                           float(quad_err), float(trunc_err))


# ---------------------------------------------------------------------------
# transform
# ---------------------------------------------------------------------------

def _as_function(f, support):
    if callable(f):
        return f
    arr = np.asarray(f, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return interpolate.CubicSpline(arr[:, 0], arr[:, 1], extrapolate=False)
    ts = np.linspace(0.0, support, len(arr))
    return interpolate.CubicSpline(ts, arr, extrapolate=False)


def fourier_transform(problem, f, lambda_grid, support, tol=1e-10):
    """``(V f)(lam) = int_0^support phi(t, lam) f(t) dt`` for each ``lam``.

    ``f`` is a callable, a list of ``[t, f]`` samples, or samples on a
    uniform grid over ``[0, support]`` (cubic spline).  All ``lam`` are
    advanced in one vectorized system.
    """
    lam = np.atleast_1d(np.asarray(lambda_grid))
    fn = _as_function(f, support)
    G = lam.size
    dtype = complex if np.iscomplexobj(lam) else float
    p = problem.potential.scalar

    def rhs(t, s):
        y, dy = s[:G], s[G:2 * G]
        ft = float(fn(t))
        if not math.isfinite(ft):
            ft = 0.0
        return np.concatenate([dy, (p(t) - lam) * y, y * ft])

    s0 = np.concatenate([np.ones(G), np.full(G, problem.theta), np.zeros(G)]).astype(dtype)
    sol = integrate.solve_ivp(rhs, (0.0, float(support)), s0, method=_METHOD,
                              rtol=tol, atol=tol)
    if sol.status == -1:
        raise StepUnderflow(f"transform integration stalled: {sol.message}",
                            t=float(sol.t[-1]))
    return sol.y[2 * G:, -1]


@dataclass(frozen=True)
class ParsevalReport:
    norm2: float
    spectral_norm2: float

    @property
    def relative_error(self):
        return abs(self.spectral_norm2 - self.norm2) / self.norm2


def parseval_check(problem, f, support, k_max, n_k=1000, eta=1e-8, T=80.0, tol=1e-10):
    """Compare ``||f||^2`` with ``int |Vf|^2 dF`` over ``lam = k^2 in [0, k_max^2]``.

    ``dF`` is the measure of ``-1/m``, whose density is estimated at
    height ``eta``.  Spectrum below 0 is not included.
    """
    fn = _as_function(f, support)
    ts = np.linspace(0.0, support, 4001)
    fv = np.nan_to_num(np.array([fn(t) for t in ts], dtype=float))
    norm2 = float(integrate.simpson(fv ** 2, x=ts))
    # Gauss nodes avoid k = 0, where density and Jacobian form 0 * inf
    x, wts = np.polynomial.legendre.leggauss(int(n_k))
    k = 0.5 * k_max * (x + 1.0)
    lam = k ** 2
    V = fourier_transform(problem, fn, lam, support, tol)
    dens = spectral_function(problem, lam + 1j * eta, T, "transform").imag / math.pi
    spec = float(0.5 * k_max * np.sum(wts * np.abs(V) ** 2 * dens * 2 * k))
    return ParsevalReport(norm2, spec)
