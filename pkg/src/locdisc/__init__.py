"""Local discrimination of bipartite pure states with and without an EPR resource."""

from .builders import (
    attach_resource,
    build_assisted_tree,
    build_extended_tree,
    build_hadamard_tree,
    build_nonmax_tree,
    build_teleportation_tree,
)
from .engine import (
    DiscriminationReport,
    FlatLOProtocol,
    Leaf,
    Measurement,
    Node,
    ProtocolError,
    ProtocolTree,
    classify_adaptivity,
    restrict_protocol,
    run_flat,
    run_tree,
    validate_measurement,
    verify_perfect_discrimination,
)
from .entanglement import (
    average_entanglement,
    conversion_filter,
    entanglement_entropy,
    mc_assisted_discrimination,
    schmidt_rank,
    vidal_probability,
)
from .families import (
    NonMaxParams,
    StateSet,
    extend_with_product,
    gen_canonical_set,
    gen_hadamard_set_4x4,
    gen_nonmax_set,
    subset,
)
from .identify import (
    IdentifiabilityVerdict,
    SearchConfig,
    WitnessProblem,
    certify_2x2,
    check_set,
    constraint_matrix,
    fails_necessary_condition,
    search_numeric,
)
from .states import (
    DimensionError,
    SchmidtDecomposition,
    StateVector,
    apply_local_operator,
    epr,
    from_coefficient_matrix,
    inner_product,
    local_unitary,
    schmidt_coefficients,
    schmidt_decompose,
    tensor_product,
    to_coefficient_matrix,
)

__version__ = "0.1.0"
