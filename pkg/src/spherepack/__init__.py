"""Dense packings of equal spheres in a cube near cubic close-packed sizes.

Submodules
----------
numerics   arbitrary-precision reals, directed rounding, exact decimals
lattice    ccp arrangements, shells and removal patterns
construct  explicit improved packings and the lower bound ``I_p``
optimizer  stochastic local search over sphere translations
certifier  exact validity and improvement certificates
io         packing files and search reports
"""
from .certifier import Certificate, Verdict, brute_min_distance, certify
from .construct import (
    ConstructionError,
    ConstructivePacking,
    TauTriple,
    build_P2,
    build_Pp,
    lower_bound_I,
    precision_schedule,
    tau_recurrence,
)
from .lattice import LatticePoint, Packing, Provenance, apply_pattern, g, gen_ccp, layer, split_layer
from .numerics import BigReal, ExactRational, PrecisionError, quartic_root_a, sqrt
from .optimizer import (
    SearchConfig,
    SearchReport,
    SegmentSet,
    feasible_segments,
    improve,
    move_sphere,
    run_search,
)

__version__ = "0.1.0"

__all__ = [
    "BigReal", "Certificate", "ConstructionError", "ConstructivePacking", "ExactRational",
    "LatticePoint", "Packing", "PrecisionError", "Provenance", "SearchConfig", "SearchReport",
    "SegmentSet", "TauTriple", "Verdict", "apply_pattern", "brute_min_distance", "build_P2",
    "build_Pp", "certify", "feasible_segments", "g", "gen_ccp", "improve", "layer",
    "lower_bound_I", "move_sphere", "precision_schedule", "quartic_root_a", "run_search",
    "split_layer", "sqrt", "tau_recurrence",
]
