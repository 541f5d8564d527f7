"""Thomas-Fermi estimate of the self-interaction strength and unit conversion."""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018, 10 significant digits
HBAR = 1.054571817e-34  # J s
ATOMIC_MASS_UNIT = 1.660539067e-27  # kg

SODIUM_23_MASS_U = 22.98977
SODIUM_SCATTERING_LENGTH = 2.75e-9  # m


@dataclass(frozen=True)
class PhysicalParams:
    atom_mass: float  # kg
    trap_frequency: float  # rad/s
    a_aa: float  # m
    a_bb: float
    a_ab: float
    n_atoms: int

    def __post_init__(self):
        for name in ("atom_mass", "trap_frequency", "a_aa", "a_bb", "a_ab"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be >= 1")

    @property
    def a_eff(self) -> float:
        return self.a_aa + self.a_bb - 2 * self.a_ab

    @property
    def oscillator_length(self) -> float:
        return math.sqrt(HBAR / (self.atom_mass * self.trap_frequency))


def sodium_params(n_atoms: int = 1000, trap_frequency: float = 2 * math.pi * 500) -> PhysicalParams:
    """23Na in |F=1, M_F=+-1> with a_aa = a_bb = 2 a_ab = 2.75 nm."""
    a = SODIUM_SCATTERING_LENGTH
    return PhysicalParams(
        atom_mass=SODIUM_23_MASS_U * ATOMIC_MASS_UNIT,
        trap_frequency=trap_frequency,
        a_aa=a,
        a_bb=a,
        a_ab=a / 2,
        n_atoms=n_atoms,
    )


def kappa_thomas_fermi(p: PhysicalParams) -> float:
    """kappa in units of hbar*omega for a spherical harmonic trap.

    kappa/(hbar omega) = 15^(2/5)/14 * (a_eff/a_ho) * (a_ho/(N a_aa))^(3/5)
    """
    if p.a_eff <= 0:
        raise ValueError(
            f"a_eff = {p.a_eff:.4g} m <= 0 gives kappa <= 0; the negative-kappa branch is not supported"
        )
    a_ho = p.oscillator_length
    return 15 ** 0.4 / 14 * (p.a_eff / a_ho) * (a_ho / (p.n_atoms * p.a_aa)) ** 0.6


def model_time_to_lab(t_model: float, kappa_over_hbar_omega: float, omega: float) -> float:
    """Seconds corresponding to a time in 1/kappa units."""
    if kappa_over_hbar_omega <= 0 or omega <= 0:
        raise ValueError("kappa and omega must be positive")
    return t_model / (kappa_over_hbar_omega * omega)


def lab_time_to_model(t_lab: float, kappa_over_hbar_omega: float, omega: float) -> float:
    if kappa_over_hbar_omega <= 0 or omega <= 0:
        raise ValueError("kappa and omega must be positive")
    return t_lab * kappa_over_hbar_omega * omega
