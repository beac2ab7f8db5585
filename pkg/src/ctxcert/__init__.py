"""Finite operational quantum theories, ontological models, and
machine-checked contextuality no-go certificates."""

from .qmath import (
    IDENTITY_TOL,
    VALIDITY_TOL,
    ChoiMatrix,
    DensityOperator,
    Effect,
    KrausChannel,
    Povm,
    apply_channel,
    bloch_from_density,
    born_probability,
    channels_equal,
    choi_matrix,
    density_from_bloch,
    is_positive_semidefinite,
    pure_density,
    unitary_rotation_y,
)
from .operational import (
    Measurement,
    MixtureDecl,
    OperationalTheory,
    Preparation,
    Transformation,
    coarse_grain_povm,
    hexagon_theory,
    meas_equivalent,
    mix_channels,
    mix_measurements,
    mix_preparations,
    prep_equivalent,
    transf_equivalent,
)
from .ontomodel import (
    Distribution,
    IndicatorSet,
    OntModel,
    OnticSpace,
    StateView,
    TransitionMatrix,
    classify_state_view,
    disjoint,
    is_outcome_deterministic,
    model_reproduces_theory,
    outcome_determinism_from_prep_nc,
    predict,
    support,
)
from .nogo import (
    Certificate,
    ConstraintSystem,
    VerificationError,
    build_prep_system,
    gleason_contradiction,
    meas_nogo,
    od_unsharp_contradiction,
    pointwise_feasibility,
    prep_nogo,
    transf_nogo,
    trivial_povm_forced_indicator,
)
from .bbmodel import (
    BBPreparation,
    PureOnticState,
    bb_indicator,
    bb_meas_noncontextuality_property,
    bb_prep_contextuality_demo,
    bb_sample,
    bb_simulate,
)
from .kraus import (
    RemixMatrix,
    pair_remix_unitary,
    remix_kraus,
    triple_remix_unitary,
    verify_mixture_identities,
    with_zero_ops,
)

__version__ = "0.1.0"
