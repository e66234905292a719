"""Joint risk clustering and parametric shared-frailty hazard modeling.

Units in grouped right-censored survival data are clustered by their
frailty-adjusted risk scores through a learned row-stochastic k-nearest
similarity graph whose connected components are the clusters, while the
Weibull/exponential baseline, regression coefficients and frailty variance
are estimated by penalized marginal likelihood.
"""

from .data import SurvivalDataset
from .errors import (ConfigError, DataSchemaError, DomainError, FitError,
                     InvalidParameterError, NumericalError)
from .estimator import (FitReport, FrailtyGraphClustering, adapt_lambda, fit_model,
                        init_state, update_params)
from .hazards import (ExponentialHazard, GammaFrailty, InverseGaussianFrailty,
                      WeibullHazard, make_baseline, make_frailty)
from .likelihood import (LinearRiskScores, ModelParams, distance_matrix, graph_penalty,
                         marginal_loglik, pairwise_distance, penalized_objective,
                         risk_scores)
from .metrics import (RecoveryReport, SilhouetteReport, accuracy, adjusted_rand,
                      recovery_report, silhouette)
from .simulate import SimConfig, empirical_survival, generate, simulate_dataset

__version__ = "0.1.0"

__all__ = [
    "SurvivalDataset", "FrailtyGraphClustering", "FitReport", "fit_model",
    "update_params", "adapt_lambda", "init_state",
    "WeibullHazard", "ExponentialHazard", "GammaFrailty", "InverseGaussianFrailty",
    "make_baseline", "make_frailty",
    "ModelParams", "LinearRiskScores", "marginal_loglik", "risk_scores",
    "pairwise_distance", "distance_matrix", "graph_penalty", "penalized_objective",
    "SilhouetteReport", "RecoveryReport", "silhouette", "accuracy", "adjusted_rand",
    "recovery_report",
    "SimConfig", "generate", "simulate_dataset", "empirical_survival",
    "ConfigError", "DataSchemaError", "DomainError", "FitError",
    "InvalidParameterError", "NumericalError",
    "__version__",
]
