"""Exact measure and integration on GL2 over a two-dimensional local field.

The field is F_q((t1))((t2)); measures take values in the ring of Laurent
polynomials in an infinitesimal X over the rationals.  See the README for
the mathematical conventions and the document grammar.
"""

from .errors import (
    BudgetExceeded,
    DivergentSeries,
    GL2MeasureError,
    InvalidLevel,
    InvalidSet,
    NotEqualSets,
    NotInvertible,
    NotReduced,
    NotRepresentable,
    PrecisionExhausted,
    UnknownName,
    UnsupportedSupport,
    ZeroValue,
)
from .field import (
    DEFAULT_WINDOW,
    FieldElem,
    Level,
    LEVEL_ZERO,
    Window,
    field_inv,
    in_ideal,
    module_of,
    valuation,
)
from .field_integration import (
    ECoset,
    EStepFn,
    FDDSet,
    FIdealCoset,
    FSimpleFn,
    f_integrate,
    f_mu,
    factor_rhs,
    haar_integral_E,
    iterated_product_integral,
    lift_integral,
    lift_step_fn,
)
from .integration import (
    CircleFamily,
    SimpleFn,
    convolve_K,
    family_integral,
    integrate,
    integrate_over,
    translate_fn,
)
from .matrices import (
    Coset,
    CosetRelation,
    ElementaryFactor,
    Mat2,
    coset_compare,
    cosets_equal,
    elementary_decompose,
    enumerate_K_mod_K10,
    enumerate_cosets,
    in_K,
    in_Kij,
    index,
    index_in_K,
    intersect_cosets,
    mat_inv,
)
from .measure import MeasureContext, lambda_constant, mu, mu_dd, mu_distinguished
from .sets import (
    DDDSet,
    DDSet,
    common_refinement,
    dd_intersect,
    ddd_ops,
    full_K,
    is_empty,
    is_refinement,
    reduce,
    set_equal,
    translate_ddd,
    validate_ddd,
)
from .values import GlobalParams, ValueElem, dominant_term, geometric_closed_form

__version__ = "0.1.0"
