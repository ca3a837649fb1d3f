"""quadpic: exact computation in the Picard subgroup generated by reduced
motives of affine quadrics.

Everything is exact integer arithmetic over finite lattices of field
extensions; two independent evaluation routes (closed-form Witt-index sums
and the Grassmannian projector-tower read-off) cross-check each other.
"""

from .decomp import (
    ClassKey,
    Decomposition,
    IndecomposableClass,
    Summand,
    canonical_class,
    declare_decomposition,
    decompose_real,
    registered_decomposition,
    t_equivalent,
    tate_counts,
)
from .errors import DisagreementError, ModelError, QuadPicError
from .fields import (
    Extension,
    ExtensionLattice,
    ValidationReport,
    Violation,
    declared_lattice_from_data,
    lattice_to_data,
    parse_model,
    real_lattice,
    serialize_model,
)
from .forms import (
    GWClass,
    Grassmannian,
    HYPERBOLIC_PLANE,
    ProjectiveQuadric,
    QuadraticForm,
    gw_normalize,
    orthogonal_sum,
    pfister_real,
    prime,
    real_form_from_key,
)
from .pic import (
    BasisExpansion,
    Certificate,
    EqualityVerdict,
    InverseCheckReport,
    PicElement,
    Refusal,
    RelationsVerdict,
    all_flags,
    basis_real,
    det,
    det_product,
    fingerprint,
    generator_e,
    identity,
    independent,
    inverse_identity_check,
    motivically_equivalent,
    relations_check,
    tate_element,
)
from .tower import ProjectorTower, active_index, build_tower, twist_readoff
from .twists import (
    PhiFingerprint,
    TateTwist,
    ZERO_TWIST,
    phi_affine,
    phi_det,
    phi_ratio_summand,
)

__version__ = "0.1.0"
