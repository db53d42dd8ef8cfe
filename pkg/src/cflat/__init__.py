"""Compute-and-forward over block-fading channels with algebraic lattice codes."""

from .numfield import (
    NumberField,
    PrimeIdeal,
    ResidueField,
    RingElement,
    embed_element,
    make_quadratic_field,
    prime_above,
    residue_reduce,
    ring_mul,
)
from .channel import (
    BlockFadingChannel,
    EquationCandidate,
    am_rate,
    block_rate_Z,
    gram_matrix,
    mac_sum_capacity,
    mmse_scale,
    naive_rate,
)
from .svp import (
    SearchBasis,
    SVPResult,
    best_equation,
    best_integer_block,
    brute_force_shortest,
    build_search_basis,
    enumerate_short_vectors,
    minkowski_bound,
    shortest_vector,
    top_equations,
)
from .codec import (
    ConstructionALattice,
    EffectiveNoiseSpec,
    NestedCodePair,
    build_construction_a,
    decode_equation,
    encode,
    enumerate_fine_vectors,
    lattice_membership,
    map_message,
    product_distance,
    reduce_mod_coarse,
    ring_combine,
    sample_dither,
    simulate_codec,
    union_bound,
)
from .simkit import SweepConfig, SweepResult, dof_slope, run_sweep, sample_channels

__version__ = "0.1.0"
