"""riskcore: finite-sample coherent risk estimation.

Discrete expected shortfall, spectral L-estimators and their canonical
discretisation, the weight/mixture bijection, robust suprema over
representing sets, black-box weight recovery, and the asymptotic
diagnostics (influence functions, CLT variance, Efron bootstrap,
Kolmogorov and Wasserstein distances) behind them.
"""

from .asymptotics import (
    RngSpec,
    asymptotic_variance,
    bootstrap_distribution,
    bootstrap_resample,
    influence_function,
    kolmogorov_distance,
    truncated_kolmogorov,
    wasserstein1,
)
from .core import (
    Mixture,
    RepresentingSet,
    Sample,
    SortedSample,
    WeightVector,
    empirical_quantile,
    sort_sample,
    t_inverse,
    t_map,
)
from .errors import RiskError
from .estimators import (
    discrete_es,
    discrete_es_profile,
    kusuoka_plugin,
    l_estimate,
    l_estimator_oracle,
    mixture_estimate,
    recover_comonotonic_weights,
    robust_sup,
)
from .harness import (
    ExperimentReport,
    LipschitzClass,
    bootstrap_check,
    bundled_lipschitz_class,
    check_axioms,
    clt_check,
    consistency_sweep,
    rate_experiment,
)
from .population import (
    ReferenceDistribution,
    distribution_from_json,
    population_es,
    population_spectral_risk,
)
from .spectra import (
    Spectrum,
    StepSpectrum,
    canonical_weights,
    expected_shortfall_spectrum,
    exponential_spectrum,
    linear_spectrum,
    piecewise_linear_spectrum,
    primitive_gap,
    spectrum_from_json,
    step_spectrum,
    uniform_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "RngSpec",
    "asymptotic_variance",
    "bootstrap_distribution",
    "bootstrap_resample",
    "influence_function",
    "kolmogorov_distance",
    "truncated_kolmogorov",
    "wasserstein1",
    "Mixture",
    "RepresentingSet",
    "Sample",
    "SortedSample",
    "WeightVector",
    "empirical_quantile",
    "sort_sample",
    "t_inverse",
    "t_map",
    "RiskError",
    "discrete_es",
    "discrete_es_profile",
    "kusuoka_plugin",
    "l_estimate",
    "l_estimator_oracle",
    "mixture_estimate",
    "recover_comonotonic_weights",
    "robust_sup",
    "ExperimentReport",
    "LipschitzClass",
    "bootstrap_check",
    "bundled_lipschitz_class",
    "check_axioms",
    "clt_check",
    "consistency_sweep",
    "rate_experiment",
    "ReferenceDistribution",
    "distribution_from_json",
    "population_es",
    "population_spectral_risk",
    "Spectrum",
    "StepSpectrum",
    "canonical_weights",
    "expected_shortfall_spectrum",
    "exponential_spectrum",
    "linear_spectrum",
    "piecewise_linear_spectrum",
    "primitive_gap",
    "spectrum_from_json",
    "step_spectrum",
    "uniform_spectrum",
    "__version__",
]
