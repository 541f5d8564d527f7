"""Spin squeezing and its storage in a two-component condensate."""

from .dicke import (
    ModelParams,
    QuenchProtocol,
    SpinState,
    build_hamiltonian,
    dicke_state,
    fidelity,
    make_ansatz,
    make_even_ansatz,
    make_initial_css,
    make_odd_ansatz,
)
from .evolve import (
    Propagator,
    TimeSeries,
    free_evolve,
    make_propagator,
    reference_propagate,
    simulate,
    spectral_propagate,
)
from .observables import SqueezingReport, probability_histogram, spin_moments, squeezing_report
from .physical import PhysicalParams, kappa_thomas_fermi, model_time_to_lab, sodium_params
from .search import (
    find_first_jx_max,
    find_first_squeezing_min,
    optimal_coupling_scan,
    power_rule_fit,
    predict_t0,
    xi0_identity,
)

__version__ = "0.1.0"
