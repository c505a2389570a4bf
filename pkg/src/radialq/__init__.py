"""radialq: radial limits and asymptotics of q-series with periodic coefficients."""

from .hp import (
    DEFAULT_PRECISION,
    bernoulli,
    bernoulli_numbers,
    gamma_hp,
    remainder_prefactor,
    zeta_even,
)
from .series import (
    EvaluationError,
    ExponentialExponent,
    PeriodicCoefficients,
    PolynomialExponent,
    SeriesSpec,
    SeriesValue,
    SpecificationError,
    TermBudgetError,
    evaluate,
    exponent_value,
    partial_sum,
)
from .radial import (
    Extrapolation,
    FitError,
    Grid,
    LeadingTerm,
    RadialLimit,
    RootOfUnity,
    classify_radial_limit,
    closed_form_limit,
    extrapolate_limit,
    mean,
    twist,
)
from .eulermac import (
    AsymptoticExpansion,
    DerivativePolynomial,
    ExpansionTerm,
    ResidualReport,
    boundary_terms,
    derivative_polynomials,
    integral_expansion,
    remainder_bound,
    series_expansion,
    verify_expansion,
)
from .lacunary import (
    LacunaryReport,
    MeanNotZeroError,
    ResidueOscillation,
    Slopes,
    fixed_points,
    oscillation_report,
    oscillation_sequences,
    slopes,
)
from .qintegral import (
    LemmaPair,
    LemmaSum,
    lemma_limit,
    lemma_sum,
    q_integral_power,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PRECISION",
    "bernoulli",
    "bernoulli_numbers",
    "gamma_hp",
    "remainder_prefactor",
    "zeta_even",
    "EvaluationError",
    "ExponentialExponent",
    "PeriodicCoefficients",
    "PolynomialExponent",
    "SeriesSpec",
    "SeriesValue",
    "SpecificationError",
    "TermBudgetError",
    "evaluate",
    "exponent_value",
    "partial_sum",
    "Extrapolation",
    "FitError",
    "Grid",
    "LeadingTerm",
    "RadialLimit",
    "RootOfUnity",
    "classify_radial_limit",
    "closed_form_limit",
    "extrapolate_limit",
    "mean",
    "twist",
    "AsymptoticExpansion",
    "DerivativePolynomial",
    "ExpansionTerm",
    "ResidualReport",
    "boundary_terms",
    "derivative_polynomials",
    "integral_expansion",
    "remainder_bound",
    "series_expansion",
    "verify_expansion",
    "LacunaryReport",
    "MeanNotZeroError",
    "ResidueOscillation",
    "Slopes",
    "fixed_points",
    "oscillation_report",
    "oscillation_sequences",
    "slopes",
    "LemmaPair",
    "LemmaSum",
    "lemma_limit",
    "lemma_sum",
    "q_integral_power",
]
