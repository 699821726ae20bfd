"""Computational toolkit for 2-variable weighted shifts.

Weight diagrams, toral and spherical Aluthge transforms, moment-matrix
positivity, Berger measures of the standard families, closed-form spectra
and Drury-Arveson asymptotics.
"""
from .errors import (
    ConstructionError,
    HypothesisError,
    InvalidWeightError,
    MeasureError,
    NotSymmetricError,
    OutOfTableError,
    SchemaError,
    ShiftlabError,
    UnsupportedDiagramError,
)
from .lattice import (
    LatticeWindow,
    MomentTable,
    Tail,
    WeightDiagram,
    check_commutativity,
    core,
    moment,
    moment_table,
    operator_norms,
    restrict,
    table_diagram,
)
from .measures import (
    AtomicMeasure1D,
    AtomicMeasure2D,
    backward_extension_1d,
    backward_extension_2d,
    extremal_and_marginal,
    measure_moments,
    rho,
    weights_from_measure,
)
from .sequences import MeasureSequence, WeightSequence
from .transforms import ats_member, is_spherical_fixed_point, scale, spherical, toral, toral_commutes
from .positivity import (
    PsdVerdict,
    componentwise_hyponormal,
    hankel_matrix,
    hankel_sweep,
    is_psd,
    k_hyponormal,
    moment_matrix,
    six_point_test,
)
from .families import (
    Q_TILDE,
    build_diagonal_core,
    build_drury_arveson,
    build_example46,
    build_fig2_family,
    build_fig2_general,
    build_flat,
    build_quasinormal_from_row,
    build_tensor,
    example46,
    example46_crossing,
    example46_verdicts,
    fig2_subnormal,
    fig2_toral_hyponormal,
    thm311_check,
)

__version__ = "0.1.0"
