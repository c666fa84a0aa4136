"""Hyperstructures: multi-level bond structures with boundary maps and globalizers."""
from .brunnian import (
    BrunnianSpec,
    HComplex,
    build_brunnian,
    h_complex_to_hyperstructure,
    is_brunnian_bond,
    is_brunnian_complex,
    validate_h_complex,
)
from .constructors import (
    ClusterLadder,
    ConeSpec,
    ProductionRule,
    Restart,
    StackMove,
    StackPlan,
    cluster_hyperstructure,
    cone_hyperstructure,
    organization_pipeline,
    stack,
)
from .core import (
    BondId,
    BondTree,
    HigherSpace,
    Hyperstructure,
    ValidationReport,
    as_higher_space,
    boundary,
    delete,
    fission,
    from_layers,
    fuse,
    new_hyperstructure,
    support,
    top_representation,
    validate,
)
from .globalizer import (
    Aggregator,
    GlobalizerSpec,
    Product,
    PropertyAssignment,
    Refiner,
    check_gluing,
    globalize,
    localize,
    minimal_flip,
)
from .persistence import ParametrizedFamily, PersistenceInterval, stability_rank, sweep
from .serialize import decode, encode, export_dot

__version__ = "0.1.0"
