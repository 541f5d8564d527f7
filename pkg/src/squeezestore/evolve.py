"""Time evolution under H(t) = 2 kappa Jz^2 + Omega(t) Jx.

The field-on phase uses the exact spectral decomposition of the constant
tridiagonal Hamiltonian; the field-off phase is diagonal in the Dicke basis
and applied analytically. ``reference_propagate`` is a plain RK4 integrator
kept independent of both, for cross-checks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .dicke import (
    KAPPA,
    ModelParams,
    QuenchProtocol,
    SpinState,
    TridiagonalHamiltonian,
    build_hamiltonian,
    make_initial_css,
)
from .observables import SqueezingReport, squeezing_reports

log = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


class PropagationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class _Sector:
    """Eigen-decomposition of H restricted to one parity sector."""

    sign: int  # +1: c_m = c_-m, -1: c_m = -c_-m
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class _ParityLayout:
    """Index bookkeeping for the symmetric/antisymmetric bases.

    For m > 0 the sector vectors are (|m> +- |-m>)/sqrt2; for even N the
    symmetric sector additionally contains |0>.
    """

    def __init__(self, dim: int):
        self.dim = dim
        n_pos = dim // 2
        self.upper = np.arange(dim - n_pos, dim)
        self.mirror = dim - 1 - self.upper
        self.center = n_pos if dim % 2 == 1 else None

    def project(self, c: np.ndarray, sign: int) -> np.ndarray:
        """Sector components of amplitude rows ``c`` (..., dim)."""
        part = (c[..., self.upper] + sign * c[..., self.mirror]) / SQRT2
        if sign > 0 and self.center is not None:
            part = np.concatenate([c[..., self.center, None], part], axis=-1)
        return part

    def embed(self, u: np.ndarray, sign: int, out: np.ndarray) -> None:
        """Add sector rows ``u`` (..., n_sector) into full amplitude rows ``out``."""
        if sign > 0 and self.center is not None:
            out[..., self.center] += u[..., 0]
            u = u[..., 1:]
        out[..., self.upper] += u / SQRT2
        out[..., self.mirror] += sign * u / SQRT2


def _sector_matrices(ham: TridiagonalHamiltonian, layout: _ParityLayout, sign: int):
    d, e = ham.diagonal, ham.offdiagonal
    up = layout.upper
    diag = d[up].copy()
    off = e[up[:-1]].copy()
    if layout.center is not None:
        if sign > 0:
            diag = np.concatenate([[d[layout.center]], diag])
            off = np.concatenate([[SQRT2 * e[layout.center]], off])
    else:
        # the m = -1/2 <-> +1/2 link folds onto the diagonal
        diag[0] += sign * e[up[0] - 1]
    return diag, off


class Propagator:
    """Spectral decomposition of the constant-coupling Hamiltonian.

    H commutes with the reflection m -> -m, so it is diagonalized separately
    in the two parity sectors; ``eigenvalues``/``eigenvectors`` assemble the
    full decomposition H = V diag(eigenvalues) V^T on demand.
    """

    def __init__(self, params: ModelParams, coupling: float, sectors: tuple):
        self.params = params
        self.coupling = coupling
        self.sectors = sectors
        self.layout = _ParityLayout(params.dim)

    @cached_property
    def _full(self):
        dim = self.params.dim
        vals, cols = [], []
        for sec in self.sectors:
            block = np.zeros((sec.eigenvectors.shape[1], dim))
            self.layout.embed(sec.eigenvectors.T, sec.sign, block)
            vals.append(sec.eigenvalues)
            cols.append(block)
        w = np.concatenate(vals)
        v = np.concatenate(cols).T
        order = np.argsort(w, kind="stable")
        return w[order], v[:, order]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._full[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._full[1]

    def orthogonality_error(self) -> float:
        v = self.eigenvectors
        return float(np.max(np.abs(v.T @ v - np.eye(v.shape[0]))))

    def reconstruction_error(self) -> float:
        """max |V diag(l) V^T - H| relative to max |H|."""
        dense = build_hamiltonian(self.params, self.coupling).to_dense()
        v = self.eigenvectors
        rebuilt = (v * self.eigenvalues) @ v.T
        return float(np.max(np.abs(rebuilt - dense)) / np.max(np.abs(dense)))


def make_propagator(params: ModelParams, coupling: Optional[float] = None) -> Propagator:
    ham = build_hamiltonian(params, coupling)
    layout = _ParityLayout(params.dim)
    sectors = []
    for sign in (1, -1):
        diag, off = _sector_matrices(ham, layout, sign)
        try:
            if diag.size == 1:
                w, v = diag.copy(), np.ones((1, 1))
            else:
                w, v = eigh_tridiagonal(diag, off)
        except LinAlgError as exc:
            raise PropagationError(
                f"eigensolver failed for N={params.n_atoms}, coupling={ham.coupling}: {exc}"
            ) from exc
        sectors.append(_Sector(sign, w, v))
    return Propagator(params, ham.coupling, tuple(sectors))


def _check_dim(prop: Propagator, state: SpinState):
    if state.dim != prop.params.dim:
        raise ValueError(f"state has dimension {state.dim}, propagator {prop.params.dim}")


def propagate_times(prop: Propagator, state: SpinState, times) -> np.ndarray:
    """Amplitudes at each time in ``times`` (offsets from ``state``), shape (n_t, dim)."""
    _check_dim(prop, state)
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("propagation times must be >= 0")
    out = np.zeros((times.size, prop.params.dim), dtype=complex)
    for sec in prop.sectors:
        part = prop.layout.project(state.amplitudes, sec.sign)
        if not np.any(part):
            continue
        coeffs = sec.eigenvectors.T @ part
        phases = np.exp(-1j * np.outer(times, sec.eigenvalues))
        prop.layout.embed((phases * coeffs) @ sec.eigenvectors.T, sec.sign, out)
    out[times == 0] = state.amplitudes
    return out


def spectral_propagate(prop: Propagator, state: SpinState, dt: float) -> SpinState:
    """c(t + dt) = V exp(-i L dt) V^T c(t)."""
    _check_dim(prop, state)
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if dt == 0:
        return state
    return SpinState(propagate_times(prop, state, [dt])[0], state.j)


def free_phases(m: np.ndarray, times) -> np.ndarray:
    return np.exp(-2j * KAPPA * np.outer(np.atleast_1d(times), m**2))


def free_evolve(state: SpinState, dt: float) -> SpinState:
    """Field-off evolution c_m -> exp(-2 i kappa m^2 dt) c_m."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    return SpinState(state.amplitudes * free_phases(state.m, dt)[0], state.j)


def reference_propagate(params: ModelParams, coupling: float, state: SpinState, dt: float,
                        steps: int, drift_tol: float = 1e-6) -> SpinState:
    """Fixed-step classical RK4 for i dc/dt = H c. Test oracle only."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    ham = build_hamiltonian(params, coupling)
    c = np.array(state.amplitudes, dtype=complex)
    h = dt / steps

    def rhs(x):
        return -1j * ham.matvec(x)

    for _ in range(steps):
        k1 = rhs(c)
        k2 = rhs(c + 0.5 * h * k1)
        k3 = rhs(c + 0.5 * h * k2)
        k4 = rhs(c + h * k3)
        c = c + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = abs(np.linalg.norm(c) - state.norm())
    if drift > drift_tol:
        raise PropagationError(f"RK4 norm drift {drift:.3e} exceeds {drift_tol}; step {h} too large")
    return SpinState(c, state.j)


@dataclass(frozen=True)
class Snapshot:
    requested_time: float
    time: float
    m: np.ndarray
    probabilities: np.ndarray


@dataclass(eq=False)
class TimeSeries:
    params: ModelParams
    protocol: QuenchProtocol
    times: np.ndarray
    reports: list[SqueezingReport]
    field_on: np.ndarray
    snapshots: list[Snapshot] = field(default_factory=list)
    states: Optional[np.ndarray] = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.reports])

    @property
    def xi(self) -> np.ndarray:
        return self.column("xi")

    @property
    def theta_min(self) -> np.ndarray:
        return self.column("theta_min")

    @property
    def jx_mean(self) -> np.ndarray:
        return self.column("jx_mean")


def output_grid(t_max: float, dt_out: float, t_off: Optional[float] = None) -> np.ndarray:
    """Uniform grid 0, dt_out, ... <= t_max with t_off inserted as an exact sample."""
    n = int(np.floor(t_max / dt_out * (1 + 1e-12)))
    times = np.arange(n + 1) * dt_out
    if t_off is not None and 0 < t_off <= t_max:
        if np.min(np.abs(times - t_off)) > 1e-12 * max(t_max, 1.0):
            times = np.sort(np.append(times, t_off))
        else:
            times[np.argmin(np.abs(times - t_off))] = t_off
    return times


def simulate(params: ModelParams, protocol: QuenchProtocol, t_max: float, dt_out: float,
             snapshot_times: Sequence[float] = (), keep_states: bool = False) -> TimeSeries:
    """Run the quench protocol from the initial coherent state.

    The field is on for t < t_off and the state at t_off is the last
    spectrally propagated one; after that only the self-interaction acts.
    """
    if t_max <= 0 or dt_out <= 0:
        raise ValueError("t_max and dt_out must be > 0")
    css = make_initial_css(params)
    times = output_grid(t_max, dt_out, protocol.t_off)
    t_off = protocol.t_off if protocol.t_off is not None else np.inf
    on = times < t_off
    pre_times = times[times <= t_off]

    if protocol.coupling == 0:
        pre = css.amplitudes * free_phases(params.m, pre_times)
    else:
        prop = make_propagator(params, protocol.coupling)
        pre = propagate_times(prop, css, pre_times)
    states = np.empty((times.size, params.dim), dtype=complex)
    states[: pre_times.size] = pre
    if pre_times.size < times.size:
        at_off = pre[-1]
        post_times = times[pre_times.size:] - t_off
        states[pre_times.size:] = at_off * free_phases(params.m, post_times)
        log.debug("field switched off at t=%g", t_off)

    reports = squeezing_reports(states, params.j)
    snaps = []
    for t_req in snapshot_times:
        k = int(np.argmin(np.abs(times - t_req)))
        snaps.append(Snapshot(float(t_req), float(times[k]), params.m, np.abs(states[k]) ** 2))
    return TimeSeries(
        params=params,
        protocol=protocol,
        times=times,
        reports=reports,
        field_on=on,
        snapshots=snaps,
        states=states if keep_states else None,
    )
