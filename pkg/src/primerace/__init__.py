"""Prime races: sieving, race statistics, weighted prime sums and limiting
bias densities computed from L-function zeros."""
from .counters import (
    LeadDensity,
    LogDensity,
    Race,
    RaceSeries,
    Sweep,
    e_vector,
    find_ordering,
    lead_density,
    li,
    log_density,
    pi2_sweep,
    race_series,
    sign_changes,
    sweep,
)
from .density import (
    BesselFactor,
    DensityResult,
    QuadratureOptions,
    bessel_factor,
    bessel_j0,
    density,
    fm_symmetry_suite,
    rho_hat,
    transform_spec,
    unbiased_check,
)
from .errors import *  # noqa: F401,F403
from .kernels import KernelResult, KernelSpec, abel_delta, bentz_sum, chebyshev_series, kt_gauss_sum
from .residues import (
    CharacterTable,
    ResidueSystem,
    bias_constant,
    build_character_table,
    build_residue_system,
    epsilon,
)
from .sieve import checkpoint, restore, stream_prime_powers, stream_primes
from .zeros import ZeroArchive, ZeroSet, load_archive, load_zero_file, validate_zeros

__version__ = "0.1.0"
