"""dirtylocus: closed-loop pole analysis under dirty-derivative feedback.

A stabilized loop p(s) - k(s) stays stable when the differentiators in k
are replaced by first-order-filtered (dirty) derivatives of high enough
bandwidth.  This package quantifies that: it tracks the closed-loop root
trajectories over the filter time constant tau, brackets the critical
tau where stability is lost, traces level sets of the characteristic
function H(s, tau) by an ODE, and measures Nyquist/Bode sensitivity.
"""

__version__ = "0.1.0"

from .closedloop import (
    DirtyClosedLoop,
    FeedbackSpec,
    PlantSpec,
    assemble_numerator,
    build_problem,
    delta_eval,
    eval_G,
    eval_H,
)
from .errors import (
    BifurcationSingularityError,
    ContourDegeneracyError,
    DirtyLocusError,
    InconclusiveRouthError,
    InvalidInputError,
    NumericalFailureError,
    PoleError,
    SingularityError,
)
from .freq import (
    FreqSample,
    NyquistResult,
    asymptotic_limits,
    dH_dtau,
    log_mag_sensitivity,
    nyquist_samples,
    winding_number,
)
from .locus import LocusField, LocusTrace, locus_field_scan, locus_rhs, trace_locus
from .poly import (
    BiPoly,
    RealPoly,
    bipoly_at_tau,
    bipoly_eval,
    linear_power,
    poly_add,
    poly_derivative,
    poly_eval,
    poly_mul,
    poly_roots,
)
from .roots import (
    CriticalTau,
    RootSweep,
    StabilityReport,
    certify_epsilon,
    classify_parasitic,
    critical_tau,
    is_hurwitz,
    match_roots,
    roots_at_tau,
    routh_hurwitz,
    sweep,
)

__all__ = [
    "__version__",
    "BiPoly",
    "RealPoly",
    "poly_add",
    "poly_mul",
    "poly_derivative",
    "poly_eval",
    "linear_power",
    "bipoly_at_tau",
    "bipoly_eval",
    "poly_roots",
    "PlantSpec",
    "FeedbackSpec",
    "DirtyClosedLoop",
    "build_problem",
    "delta_eval",
    "assemble_numerator",
    "eval_H",
    "eval_G",
    "RootSweep",
    "StabilityReport",
    "CriticalTau",
    "roots_at_tau",
    "match_roots",
    "classify_parasitic",
    "sweep",
    "is_hurwitz",
    "routh_hurwitz",
    "critical_tau",
    "certify_epsilon",
    "LocusTrace",
    "LocusField",
    "locus_rhs",
    "trace_locus",
    "locus_field_scan",
    "FreqSample",
    "NyquistResult",
    "dH_dtau",
    "log_mag_sensitivity",
    "nyquist_samples",
    "winding_number",
    "asymptotic_limits",
    "DirtyLocusError",
    "InvalidInputError",
    "NumericalFailureError",
    "SingularityError",
    "PoleError",
    "InconclusiveRouthError",
    "BifurcationSingularityError",
    "ContourDegeneracyError",
]
