"""Dicke-basis representation of the collective spin of a two-mode condensate.

Amplitudes are stored at index ``k = m + j`` so even and odd atom numbers
share one layout. Units throughout: kappa = 1, hbar = 1, so times are in
1/kappa and couplings are given as Omega_R / kappa.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

KAPPA = 1.0


@dataclass(frozen=True)
class ModelParams:
    """One simulation scenario: atom number and Josephson coupling."""

    n_atoms: int
    omega_ratio: float = 0.0

    def __post_init__(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {self.n_atoms!r}")
        if not np.isfinite(self.omega_ratio) or self.omega_ratio < 0:
            raise ValueError(f"omega_ratio must be finite and >= 0, got {self.omega_ratio!r}")
        object.__setattr__(self, "n_atoms", int(self.n_atoms))
        object.__setattr__(self, "omega_ratio", float(self.omega_ratio))

    @property
    def kappa(self) -> float:
        return KAPPA

    @property
    def j(self) -> float:
        return self.n_atoms / 2

    @property
    def dim(self) -> int:
        return self.n_atoms + 1

    @property
    def m(self) -> np.ndarray:
        return np.arange(self.dim) - self.j

    @property
    def is_even(self) -> bool:
        return self.n_atoms % 2 == 0


@dataclass(frozen=True, eq=False)
class SpinState:
    """Pure state sum_m c_m |j, m> with amplitudes in ascending m."""

    amplitudes: np.ndarray
    j: float

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size != round(2 * self.j) + 1:
            raise ValueError(
                f"expected {round(2 * self.j) + 1} amplitudes for j={self.j}, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "j", float(self.j))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def n_atoms(self) -> int:
        return self.dim - 1

    @property
    def m(self) -> np.ndarray:
        return np.arange(self.dim) - self.j

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, m: float) -> complex:
        return complex(self.amplitudes[_index(self.j, m)])


@dataclass(frozen=True)
class QuenchProtocol:
    """Step-function coupling: ``coupling`` for t < t_off, zero afterwards.

    ``t_off=None`` means the field is never switched off.
    """

    coupling: float
    t_off: Optional[float] = None

    def __post_init__(self):
        if self.coupling < 0:
            raise ValueError("coupling must be >= 0")
        if self.t_off is not None and self.t_off < 0:
            raise ValueError("t_off must be >= 0")

    def coupling_at(self, t: float) -> float:
        if self.t_off is None or t < self.t_off:
            return self.coupling
        return 0.0

    def field_on(self, t: float) -> bool:
        return self.coupling_at(t) > 0


@dataclass(frozen=True, eq=False)
class TridiagonalHamiltonian:
    """Real symmetric tridiagonal H in the Dicke basis (ascending m)."""

    diagonal: np.ndarray
    offdiagonal: np.ndarray
    coupling: float

    def to_dense(self) -> np.ndarray:
        return (
            np.diag(self.diagonal)
            + np.diag(self.offdiagonal, 1)
            + np.diag(self.offdiagonal, -1)
        )

    def matvec(self, c: np.ndarray) -> np.ndarray:
        out = self.diagonal * c
        out[:-1] += self.offdiagonal * c[1:]
        out[1:] += self.offdiagonal * c[:-1]
        return out


def _index(j: float, m: float) -> int:
    k = m + j
    if abs(k - round(k)) > 1e-9 or not 0 <= round(k) <= round(2 * j):
        raise ValueError(f"m={m} is not a valid projection for j={j}")
    return int(round(k))


def raising_elements(j: float) -> np.ndarray:
    """<m+1|J+|m> for m = -j .. j-1."""
    m = np.arange(round(2 * j)) - j
    return np.sqrt(j * (j + 1) - m * (m + 1))


def build_hamiltonian(params: ModelParams, coupling: Optional[float] = None) -> TridiagonalHamiltonian:
    """H = 2 kappa Jz^2 + coupling * Jx, coupling defaulting to ``params.omega_ratio``."""
    if coupling is None:
        coupling = params.omega_ratio
    if coupling < 0:
        raise ValueError("coupling must be >= 0")
    diag = 2 * KAPPA * params.m**2
    off = 0.5 * coupling * raising_elements(params.j)
    return TridiagonalHamiltonian(diag, off, float(coupling))


def make_initial_css(params: ModelParams) -> SpinState:
    """Coherent state |j,-j>_x = exp(-i pi Jy / 2)|j,-j>.

    c_m = (-1)^(j+m) 2^(-j) sqrt(binom(2j, j+m)); binomials in log space.
    """
    n = params.n_atoms
    k = np.arange(n + 1)
    log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    mag = np.exp(0.5 * log_binom - params.j * np.log(2.0))
    mag /= np.linalg.norm(mag)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    return SpinState(sign * mag, params.j)


def dicke_state(params: ModelParams, m: float) -> SpinState:
    c = np.zeros(params.dim, dtype=complex)
    c[_index(params.j, m)] = 1.0
    return SpinState(c, params.j)


def make_even_ansatz(params: ModelParams, alpha: float, phi: float) -> SpinState:
    """e^{i phi} sin(alpha)/sqrt2 (|j,1> + |j,-1>) + cos(alpha) |j,0>."""
    if not params.is_even:
        raise ValueError("even ansatz requires an even number of atoms")
    if params.j < 1:
        raise ValueError("even ansatz needs j >= 1 (N >= 2)")
    j = params.j
    c = np.zeros(params.dim, dtype=complex)
    side = np.exp(1j * phi) * np.sin(alpha) / np.sqrt(2)
    c[_index(j, 1)] = side
    c[_index(j, -1)] = side
    c[_index(j, 0)] = np.cos(alpha)
    return SpinState(c, j)


def make_odd_ansatz(params: ModelParams, alpha: float, phi: float) -> SpinState:
    """e^{i phi} sin(alpha)/sqrt2 (|j,3/2> - |j,-3/2>) + cos(alpha)/sqrt2 (|j,1/2> - |j,-1/2>)."""
    if params.is_even:
        raise ValueError("odd ansatz requires an odd number of atoms")
    if params.j < 1.5:
        raise ValueError("odd ansatz needs j >= 3/2 (N >= 3)")
    j = params.j
    c = np.zeros(params.dim, dtype=complex)
    outer = np.exp(1j * phi) * np.sin(alpha) / np.sqrt(2)
    inner = np.cos(alpha) / np.sqrt(2)
    c[_index(j, 1.5)] = outer
    c[_index(j, -1.5)] = -outer
    c[_index(j, 0.5)] = inner
    c[_index(j, -0.5)] = -inner
    return SpinState(c, j)


def make_ansatz(params: ModelParams, alpha: float, phi: float) -> SpinState:
    if params.is_even:
        return make_even_ansatz(params, alpha, phi)
    return make_odd_ansatz(params, alpha, phi)


def fidelity(a: SpinState, b: SpinState) -> float:
    """|<a|b>|^2."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def parity_residual(state: SpinState) -> float:
    """max |c_{-m} - s c_m| with s = +1 for even N, -1 for odd N."""
    c = state.amplitudes
    sign = 1.0 if state.n_atoms % 2 == 0 else -1.0
    return float(np.max(np.abs(c[::-1] - sign * c)))
