"""Density-matrix simulation of transition-selective NMR gates on small spin systems."""
__version__ = "0.1.0"

from .core import SpinSystem, angular_momentum, expm_hermitian, is_unitary, pauli
from .gates import (EquivalenceReport, GateSpec, equivalence, fredkin, fredkin_sequence,
                    fredkin_via_cnot_toffoli, ideal_gate, phase_insensitive_fidelity,
                    transition_cnot, transition_toffoli)
from .product_operator import Decomposition, ProductTerm, compose, decompose
from .sequence import (Delay, Ideal, Sequence, SoftPulse, apply_unitary, equilibrium_state,
                       phase_cancellation_experiment, plan_transition_pulse, prepare_input,
                       run_sequence)
from .spectrometer import FidParams, fid, peaks, spectrum, transitions

__all__ = [
    "SpinSystem", "angular_momentum", "expm_hermitian", "is_unitary", "pauli",
    "EquivalenceReport", "GateSpec", "equivalence", "fredkin", "fredkin_sequence",
    "fredkin_via_cnot_toffoli", "ideal_gate", "phase_insensitive_fidelity",
    "transition_cnot", "transition_toffoli", "Decomposition", "ProductTerm", "compose",
    "decompose", "Delay", "Ideal", "Sequence", "SoftPulse", "apply_unitary",
    "equilibrium_state", "phase_cancellation_experiment", "plan_transition_pulse",
    "prepare_input", "run_sequence", "FidParams", "fid", "peaks", "spectrum", "transitions",
]
