"""Frequency-domain quantum model of a detuned cavity with wave-field backaction.

Library layout:

* model               constants, parameters, derived couplings
* freq_response       intracavity transfer coefficients (tuned/detuned)
* io_noise            output relations, squeeze parameters, spectra, qCRB
* gw_field            polarization/TT machinery, fluctuation channel, radiation
* gauge_equivalence   radiation-reaction picture and equivalence certification
* commutator_audit    equal-time commutators as c-number kernel integrals
* cli                 batch front end (CSV/JSON plus rendered figures)
"""

__version__ = "0.1.0"

from .errors import (
    IntegrationFailureError,
    SingularityError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .model import (
    INFINITE_MASS,
    DerivedCouplings,
    PhysicalConstants,
    SystemParams,
    derive_couplings,
    xi_backaction,
)
from .freq_response import (
    FrequencyGrid,
    QuadratureSolution,
    ResponsePair,
    chi_responses,
    effective_rates,
    solve_detuned,
    solve_general,
    solve_tuned,
)
from .io_noise import (
    NoiseEllipse,
    OutputRelation,
    SpectrumSeries,
    backaction_kernels,
    input_output,
    output_relation,
    output_spectrum,
    qcrb_bound,
    squeeze_params,
)
from .gw_field import (
    HInputChannel,
    ModeProfile,
    PolarizationPair,
    WaveVector,
    h_input_channel,
    long_wave_prefactor,
    mode_profile,
    polarization_basis,
    radiated_field_exact,
    radiated_field_farzone,
    stress_energy_source,
    tt_project_planewave,
    tt_project_radial,
)
from .gauge_equivalence import (
    MassSusceptibility,
    compare_gauges,
    mass_susceptibility,
    newtonian_cavity_solution,
    radiation_reaction_coefficient,
)
from .commutator_audit import (
    CommutatorResult,
    equal_time_commutator,
    time_kernels,
    wrong_commutator_closed_form,
)
