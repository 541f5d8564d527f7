"""Spin moments and squeezing diagnostics.

Moments are evaluated from the ladder-operator action on the amplitude
vector, never from dense spin matrices, so cost is O(N) per state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dicke import SpinState, raising_elements

NORM_TOL = 1e-8
MEAN_SPIN_TOL = 1e-8
DEGENERATE_TOL = 1e-12


class MeanSpinError(ValueError):
    """Mean spin has a component off the x axis; the y-z normal plane is undefined."""


@dataclass(frozen=True)
class SpinMoments:
    jx: float
    jy: float
    jz: float
    jx2: float
    jy2: float
    jz2: float
    jzjy: float  # <Jz Jy + Jy Jz>


@dataclass(frozen=True)
class SqueezingReport:
    xi: float
    theta_min: float
    a_moment: float
    b_moment: float
    c_moment: float
    jx_mean: float
    min_variance: float
    degenerate: bool


def _moment_arrays(c: np.ndarray, j: float) -> dict:
    """Moments for amplitude arrays of shape (..., 2j+1)."""
    m = np.arange(c.shape[-1]) - j
    jp = raising_elements(j)
    prob = np.abs(c) ** 2
    norm2 = prob.sum(axis=-1)
    jz = prob @ m
    jz2 = prob @ m**2

    lo, hi = c[..., :-1], c[..., 1:]
    # <J+> = sum_k conj(c_{k+1}) <k+1|J+|k> c_k
    j_plus = np.sum(np.conj(hi) * jp * lo, axis=-1)
    if c.shape[-1] > 2:
        j_plus2 = np.sum(np.conj(c[..., 2:]) * (jp[1:] * jp[:-1]) * c[..., :-2], axis=-1)
    else:
        j_plus2 = np.zeros_like(j_plus)
    # <Jz J+ + J+ Jz>: matrix element (2m + 1) <m+1|J+|m>
    sym = np.sum(np.conj(hi) * ((2 * m[:-1] + 1) * jp) * lo, axis=-1)

    transverse = 0.5 * (j * (j + 1) * norm2 - jz2)
    return {
        "norm2": norm2,
        "jx": j_plus.real,
        "jy": j_plus.imag,
        "jz": jz,
        "jx2": transverse + 0.5 * j_plus2.real,
        "jy2": transverse - 0.5 * j_plus2.real,
        "jz2": jz2,
        "jzjy": sym.imag,
    }


def _check_norm(norm2, what="state"):
    dev = np.max(np.abs(np.sqrt(np.atleast_1d(norm2)) - 1.0))
    if dev > NORM_TOL:
        raise ValueError(f"{what} is not normalized (|norm - 1| = {dev:.3e})")


def spin_moments(state: SpinState) -> SpinMoments:
    mom = _moment_arrays(state.amplitudes, state.j)
    _check_norm(mom["norm2"])
    return SpinMoments(**{k: float(v) for k, v in mom.items() if k != "norm2"})


def _reports_from_moments(mom: dict, j: float, check_mean_spin: bool) -> list[SqueezingReport]:
    jy = np.atleast_1d(mom["jy"])
    jz = np.atleast_1d(mom["jz"])
    if check_mean_spin:
        off_axis = np.maximum(np.abs(jy), np.abs(jz))
        bad = off_axis >= MEAN_SPIN_TOL * j
        if np.any(bad):
            worst = float(np.max(off_axis))
            raise MeanSpinError(
                f"mean spin not along x: max(|<Jy>|, |<Jz>|) = {worst:.3e} >= {MEAN_SPIN_TOL}*j"
            )
    jy2 = np.atleast_1d(mom["jy2"])
    jz2 = np.atleast_1d(mom["jz2"])
    a = jz2 - jy2
    b = np.atleast_1d(mom["jzjy"])
    c = jz2 + jy2
    radius = np.hypot(a, b)
    degenerate = radius < DEGENERATE_TOL * c
    raw = 0.5 * c - 0.5 * radius
    if np.any(raw < -1e-10):
        raise ArithmeticError(f"negative minimal variance {float(np.min(raw)):.3e}")
    var = np.maximum(raw, 0.0)
    xi = np.sqrt(var / (j / 2))
    theta = 0.5 * np.arctan2(-b, -a)
    theta = np.where(theta <= -np.pi / 2, theta + np.pi, theta)
    theta = np.where(degenerate, 0.0, theta) + 0.0  # drop -0.0
    jx = np.atleast_1d(mom["jx"])
    return [
        SqueezingReport(
            xi=float(xi[i]),
            theta_min=float(theta[i]),
            a_moment=float(a[i]),
            b_moment=float(b[i]),
            c_moment=float(c[i]),
            jx_mean=float(jx[i]),
            min_variance=float(var[i]),
            degenerate=bool(degenerate[i]),
        )
        for i in range(len(a))
    ]


def squeezing_report(state: SpinState, check_mean_spin: bool = True) -> SqueezingReport:
    """Squeezing parameter and angle in the y-z plane normal to the mean spin.

    The minimizing angle solves (cos 2theta, sin 2theta) = -(A, B)/sqrt(A^2+B^2),
    measured from the z axis. For A = B = 0 (e.g. the coherent state) the
    angle is reported as 0 and ``degenerate`` is set.
    """
    mom = _moment_arrays(state.amplitudes, state.j)
    _check_norm(mom["norm2"])
    return _reports_from_moments(mom, state.j, check_mean_spin)[0]


def squeezing_reports(amplitudes: np.ndarray, j: float, check_mean_spin: bool = True) -> list[SqueezingReport]:
    """Batch version of :func:`squeezing_report` for a (n_states, 2j+1) array."""
    amplitudes = np.atleast_2d(amplitudes)
    mom = _moment_arrays(amplitudes, j)
    _check_norm(mom["norm2"], "trajectory state")
    return _reports_from_moments(mom, j, check_mean_spin)


def xi_values(amplitudes: np.ndarray, j: float) -> np.ndarray:
    """Squeezing parameter only, for searches (no mean-spin check)."""
    mom = _moment_arrays(np.atleast_2d(amplitudes), j)
    a = mom["jz2"] - mom["jy2"]
    c = mom["jz2"] + mom["jy2"]
    var = np.maximum(0.5 * c - 0.5 * np.hypot(a, mom["jzjy"]), 0.0)
    return np.sqrt(var / (j / 2))


def jx_values(amplitudes: np.ndarray, j: float) -> np.ndarray:
    return _moment_arrays(np.atleast_2d(amplitudes), j)["jx"]


def b_values(amplitudes: np.ndarray, j: float) -> np.ndarray:
    return _moment_arrays(np.atleast_2d(amplitudes), j)["jzjy"]


def probability_histogram(state: SpinState) -> tuple[np.ndarray, np.ndarray]:
    """(m, |c_m|^2) in ascending m."""
    return state.m, np.abs(state.amplitudes) ** 2


def variance_along(state: SpinState, theta: float) -> float:
    """Variance of Jy sin(theta) + Jz cos(theta)."""
    mom = spin_moments(state)
    s, c = np.sin(theta), np.cos(theta)
    second = s * s * mom.jy2 + c * c * mom.jz2 + s * c * mom.jzjy
    first = s * mom.jy + c * mom.jz
    return float(second - first**2)


def energy(state: SpinState, coupling: float) -> float:
    """<2 kappa Jz^2 + coupling Jx>."""
    mom = spin_moments(state)
    return 2 * mom.jz2 + coupling * mom.jx
