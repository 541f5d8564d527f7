"""Characteristic times and couplings of the squeezing dynamics.

tau0: first local minimum of xi(t) under constant coupling.
t0:   first maximum of <Jx>(t), located as the first -/+ sign change of
      B = <Jz Jy + Jy Jz> because d<Jx>/dt = -2 kappa B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .dicke import KAPPA, ModelParams, make_initial_css
from .evolve import Propagator, make_propagator, propagate_times
from .observables import SqueezingReport, b_values, jx_values, xi_values

INV_PHI = (math.sqrt(5) - 1) / 2
DEFAULT_SCAN_FRACTION = 1 / 200
DEFAULT_HORIZON_PERIODS = 3.0
SCAN_CHUNK = 64
FLOOR_RTOL = 1e-9
FLOOR_ATOL = 1e-12


class SearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExtremumResult:
    time: float
    value: float
    kind: str  # "squeezing-min" or "jx-max"
    bracket: tuple[float, float]
    refinement_tolerance: float


@dataclass(frozen=True)
class PhasePrediction:
    omega_eff: float
    period: float
    t0: float


@dataclass(frozen=True)
class CouplingScanResult:
    grid: list[tuple[float, float, float]]  # (coupling, min xi, tau0)
    optimum: float
    optimum_xi: float
    optimum_time: float
    plateau: tuple[float, float]
    plateau_threshold: float


def predict_t0(params: ModelParams, coupling: Optional[float] = None) -> PhasePrediction:
    """Pendulum estimate: omega_eff = sqrt(2 kappa Omega N), t0 = T/4.

    Meant for N >= 1000 and kappa < Omega << N kappa; not enforced.
    """
    if coupling is None:
        coupling = params.omega_ratio
    if coupling <= 0:
        raise ValueError("t0 prediction is undefined at zero coupling")
    omega_eff = math.sqrt(2 * KAPPA * coupling * params.n_atoms)
    period = 2 * math.pi / omega_eff
    return PhasePrediction(omega_eff, period, period / 4)


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    """Minimize a unimodal f on [a, b] to an interval of width <= tol.

    Returns (x, f(x)) for the best point evaluated.
    """
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


class _Trajectory:
    """Constant-coupling trajectory from the initial coherent state."""

    def __init__(self, params: ModelParams, coupling: float, prop: Optional[Propagator] = None):
        if coupling <= 0:
            raise ValueError("extremum searches require coupling > 0")
        self.params = params
        self.coupling = coupling
        self.prop = prop if prop is not None else make_propagator(params, coupling)
        self.css = make_initial_css(params)

    def states(self, times) -> np.ndarray:
        return propagate_times(self.prop, self.css, times)

    def xi(self, t: float) -> float:
        return float(xi_values(self.states([t]), self.params.j)[0])

    def b(self, t: float) -> float:
        return float(b_values(self.states([t]), self.params.j)[0])

    def jx(self, t: float) -> float:
        return float(jx_values(self.states([t]), self.params.j)[0])


def _scan_defaults(params, coupling, scan_dt, horizon):
    period = predict_t0(params, coupling).period
    if scan_dt is None:
        scan_dt = period * DEFAULT_SCAN_FRACTION
    if horizon is None:
        horizon = DEFAULT_HORIZON_PERIODS * period
    if scan_dt <= 0:
        raise ValueError("scan_dt must be > 0")
    return scan_dt, horizon


def _scan(values_of: Callable[[np.ndarray], np.ndarray], scan_dt: float, horizon: float,
          start: int, accept: Callable[[np.ndarray, int], bool]) -> tuple[np.ndarray, np.ndarray, int]:
    """Walk the grid k*scan_dt in chunks until ``accept(values, k)`` holds."""
    n_max = int(math.ceil(horizon / scan_dt)) + 1
    times = np.empty(0)
    vals = np.empty(0)
    k0 = 0
    while k0 < n_max:
        ks = np.arange(k0, min(k0 + SCAN_CHUNK, n_max))
        times = np.concatenate([times, ks * scan_dt])
        vals = np.concatenate([vals, values_of(ks * scan_dt)])
        for k in range(max(start, k0 - 1), len(vals) - 1):
            if accept(vals, k):
                return times, vals, k
        k0 = ks[-1] + 1
    raise SearchError(f"no extremum found before the scan horizon t={horizon:.6g}")


def find_first_squeezing_min(params: ModelParams, coupling: Optional[float] = None,
                             scan_dt: Optional[float] = None, tol: float = 1e-6,
                             horizon: Optional[float] = None,
                             prop: Optional[Propagator] = None) -> ExtremumResult:
    """First local minimum tau0 of xi(t), bracketed on a grid and refined by golden section."""
    if coupling is None:
        coupling = params.omega_ratio
    traj = _Trajectory(params, coupling, prop)
    scan_dt, horizon = _scan_defaults(params, coupling, scan_dt, horizon)

    def xis(ts):
        return xi_values(traj.states(ts), params.j)

    def is_min(v, k):
        return k >= 1 and v[k] < v[k - 1] and v[k] <= v[k + 1]

    try:
        times, _, k = _scan(xis, scan_dt, horizon, 1, is_min)
    except SearchError as exc:
        raise SearchError(f"N={params.n_atoms}, coupling={coupling}: {exc}") from None
    lo, hi = times[k - 1], times[k + 1]
    t, val = golden_section(traj.xi, lo, hi, tol)
    return ExtremumResult(float(t), float(val), "squeezing-min", (float(lo), float(hi)), tol)


def find_first_jx_max(params: ModelParams, coupling: Optional[float] = None,
                      scan_dt: Optional[float] = None, tol: float = 1e-6,
                      horizon: Optional[float] = None,
                      prop: Optional[Propagator] = None) -> ExtremumResult:
    """First interior maximum t0 of <Jx>(t), where B changes sign from - to +.

    Bisection continues past ``tol`` until |B| < 1e-8 j^2 so that the
    squeezing angle at the returned time vanishes to ~1e-8.
    """
    if coupling is None:
        coupling = params.omega_ratio
    traj = _Trajectory(params, coupling, prop)
    scan_dt, horizon = _scan_defaults(params, coupling, scan_dt, horizon)
    b_tol = 1e-8 * params.j**2

    def bs(ts):
        return b_values(traj.states(ts), params.j)

    def crosses(v, k):
        return k >= 1 and v[k] < 0 <= v[k + 1]

    try:
        times, vals, k = _scan(bs, scan_dt, horizon, 1, crosses)
    except SearchError as exc:
        raise SearchError(f"N={params.n_atoms}, coupling={coupling}: {exc}") from None
    lo, hi = float(times[k]), float(times[k + 1])
    bracket = (lo, hi)
    if vals[k + 1] == 0:
        t = hi
    else:
        t = 0.5 * (lo + hi)
        for _ in range(200):
            t = 0.5 * (lo + hi)
            bt = traj.b(t)
            if hi - lo <= tol and abs(bt) < b_tol:
                break
            if hi - lo < 4 * np.spacing(hi):
                break
            if bt < 0:
                lo = t
            else:
                hi = t
    return ExtremumResult(float(t), traj.jx(t), "jx-max", bracket, tol)


def xi0_identity(report: SqueezingReport, params: ModelParams, coupling: Optional[float] = None,
                 b_tol: Optional[float] = None) -> float:
    """Predicted xi^2 = 1 - (Omega/kappa)(1 + <Jx>/j) at an instant with B = 0.

    Compare with ``report.xi ** 2``.
    """
    if coupling is None:
        coupling = params.omega_ratio
    if b_tol is None:
        b_tol = 1e-8 * params.j**2
    if abs(report.b_moment) > b_tol:
        raise ValueError(f"identity holds only where B = 0; got B = {report.b_moment:.3e}")
    return 1.0 - (coupling / KAPPA) * (1.0 + report.jx_mean / params.j)


def plateau_threshold(optimum_xi: float, digits: int = 5, rtol: Optional[float] = None) -> float:
    """Largest xi still counted as sharing the optimum.

    With ``rtol`` the band is optimum*(1+rtol); otherwise it is every value that
    rounds to the same ``digits`` significant figures as the optimum.
    """
    if rtol is not None:
        return optimum_xi * (1 + rtol)
    if optimum_xi < 1e-12:
        return 1e-12
    unit = 10.0 ** (math.floor(math.log10(optimum_xi)) - digits + 1)
    return round(optimum_xi / unit) * unit + 0.5 * unit


def optimal_coupling_scan(params: ModelParams, coupling_range: tuple[float, float],
                          grid_points: int = 16, refine_tol: float = 1e-4,
                          plateau_digits: int = 5, plateau_rtol: Optional[float] = None,
                          time_tol: float = 1e-10, compute_plateau: bool = True) -> CouplingScanResult:
    """Minimize the first squeezing minimum over the Josephson coupling.

    Grid search, golden-section refinement around the best grid point, then
    bisection for the edges of the plateau where min-xi stays within the
    plateau threshold of the optimum.
    """
    lo, hi = map(float, coupling_range)
    if not (0 < lo < hi):
        raise ValueError(f"coupling range must satisfy 0 < lo < hi, got {coupling_range}")
    if grid_points < 8:
        raise ValueError("grid_points must be >= 8")

    cache: dict[float, ExtremumResult] = {}

    def evaluate(g: float) -> ExtremumResult:
        if g not in cache:
            try:
                cache[g] = find_first_squeezing_min(params, g, tol=time_tol)
            except SearchError as exc:
                raise SearchError(f"coupling scan failed at coupling={g}: {exc}") from None
        return cache[g]

    couplings = np.linspace(lo, hi, grid_points)
    grid = []
    for g in couplings:
        res = evaluate(float(g))
        grid.append((float(g), res.value, res.time))
    values = np.array([row[1] for row in grid])
    k = int(np.argmin(values))
    floor_tol = FLOOR_RTOL * values[k] + FLOOR_ATOL
    tied = np.flatnonzero(values <= values[k] + floor_tol)

    def edge(inside: float, outside: float, limit: float) -> float:
        # bisect for the last coupling with min-xi <= limit, between inside and outside
        while abs(outside - inside) > refine_tol:
            mid = 0.5 * (inside + outside)
            if evaluate(mid).value <= limit:
                inside = mid
            else:
                outside = mid
        return inside

    if tied.size > 1:
        # Flat floor (small N): below its upper edge the minimum is reached with
        # theta_min != 0 at tau0, so the upper edge is the storable optimum.
        top = int(tied[-1])
        if top + 1 < grid_points:
            best = edge(float(couplings[top]), float(couplings[top + 1]), values[k] + floor_tol)
        else:
            best = float(couplings[top])
        best_xi = evaluate(best).value
    else:
        a = couplings[max(k - 1, 0)]
        b = couplings[min(k + 1, grid_points - 1)]
        best, best_xi = golden_section(lambda g: evaluate(g).value, a, b, refine_tol)
        if values[k] < best_xi:
            best, best_xi = float(couplings[k]), float(values[k])
    threshold = max(plateau_threshold(best_xi, plateau_digits, plateau_rtol), best_xi)

    left_out = [g for g, v, _ in grid if g < best and v > threshold]
    right_out = [g for g, v, _ in grid if g > best and v > threshold]
    if not compute_plateau:
        plateau_lo = plateau_hi = float("nan")
    else:
        plateau_lo = edge(best, max(left_out), threshold) if left_out else lo
        plateau_hi = edge(best, min(right_out), threshold) if right_out else hi
    return CouplingScanResult(
        grid=grid,
        optimum=float(best),
        optimum_xi=float(best_xi),
        optimum_time=evaluate(best).time,
        plateau=(float(plateau_lo), float(plateau_hi)),
        plateau_threshold=threshold,
    )


def power_rule_fit(n_list: Sequence[int], optima: Sequence[float]) -> float:
    """Least-squares slope of log(optimal coupling) against log N."""
    n = np.asarray(n_list, dtype=float)
    y = np.asarray(optima, dtype=float)
    if n.shape != y.shape:
        raise ValueError("n_list and optima must have equal length")
    if np.unique(n).size < 3:
        raise ValueError("power-rule fit needs at least 3 distinct atom numbers")
    if np.any(n <= 0) or np.any(y <= 0):
        raise ValueError("atom numbers and couplings must be positive")
    slope, _ = np.polyfit(np.log(n), np.log(y), 1)
    return float(slope)
