"""Discretized fractional square functions, sparse domination and weight scans."""

from .geometry import (
    Box,
    DyadicCube,
    DyadicLattice,
    Grid,
    cube_average,
    cube_cells,
    scan_lattices,
    triple_cells,
)
from .functions import (
    BmoSymbol,
    GridFunction,
    SphereKernel,
    bmo_norm,
    load_text,
    lp_norm,
    make_test_field,
    make_test_kernels,
    save_text,
)
from .operators import (
    build_ladder,
    commutator,
    dyadic_marcinkiewicz,
    fractional_integral,
    fractional_maximal,
    grand_maximal,
    marcinkiewicz,
    mollified_marcinkiewicz,
    multiplier_envelope,
)
from .sparse import (
    DominationBlowupError,
    SparseCertificate,
    SparseFamily,
    SparseNode,
    build_fractional_sparse_family,
    build_sparse_family,
    load_sparse_text,
    save_sparse_text,
    sparse_operator,
    verify_sparse,
)
from .weights import (
    WeightCharacteristic,
    ap_characteristic,
    apq_characteristic,
    characteristic_growth,
    conjugated_ratios,
    exp_bmo_weight,
    gamma_constant,
    halving_fraction,
    john_nirenberg_probe,
    power_rule_margin,
    power_weight,
    reverse_holder_pair,
    reverse_holder_probe,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    commutator_exponent,
    config_hash,
    load_config,
    parse_config_text,
    read_csv,
    run_commutator,
    run_domination,
    run_eval,
    run_multiplier,
    run_sparse,
    run_uniformity,
    run_weights,
    sparse_form_exponent,
    square_function_exponent,
    write_csv,
)

__version__ = "0.1.0"
