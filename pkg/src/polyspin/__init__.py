"""Spin-half in a multi-frequency quantized coherent field.

Energy-shell (non-degenerate) field description, dressed-state spectra,
multi-photon effective Hamiltonians from the resolvent expansion, and
collapse/revival dynamics validated against a brute-force Fock oracle.
"""

from .bases import (
    SPIN_DOWN,
    SPIN_UP,
    Basis,
    FockSpinState,
    ShellSpinState,
    fock_basis_connected,
    fock_basis_cutoff,
    shell_basis,
    shell_window_basis,
)
from .shell import (
    GammaTable,
    Mode,
    ModeSet,
    SupportError,
    enumerate_shell,
    gamma_gaussian,
    gamma_table,
    ladder_element,
    mode_set,
    shell_index,
)
from .hamiltonian import (
    HermitianOperator,
    SpinFieldParams,
    assemble_jcm_fock,
    assemble_jcm_shell,
    assemble_rabi,
    detuning,
    rabi_couplings,
)
from .spectra import (
    CrossingReport,
    DetuningScan,
    avoided_crossing,
    degenerate_basis_pathology,
    detuning_scan,
    eigensystem,
)
from .effective import (
    EffectiveTwoLevel,
    RabiAmplitudes,
    dressed_energies,
    effective_hamiltonian,
    even_q_coupling,
    excitation_spectrum,
    first_order,
    odd_q_coupling,
    rabi_amplitudes,
    rabi_excitation,
    second_order_shifts,
    third_order_q0,
)
from .dynamics import (
    EvolutionTrace,
    RegionScan,
    compare_bases,
    evolve,
    initial_state,
    l2_discrepancy,
    region_scan,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
