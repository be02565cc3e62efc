"""Social influence estimation from paired network and item-response data.

Two-step Bayesian pipeline: fit a latent space model to the peer network,
then fit an adapted latent space item response model with respondent
positions fixed at the network estimate. The influence weight of the
second step measures the size and direction of social influence.
"""

from .model import (
    AdaptedLsirmParams,
    DataError,
    Hyperparams,
    ItemResponseData,
    LsmParams,
    NetworkData,
    NumericalError,
    adapted_lsirm_log_likelihood,
    lsm_log_likelihood,
    log_priors_adapted,
    log_priors_lsm,
    response_probability,
)

__all__ = [
    "AdaptedLsirmParams",
    "DataError",
    "Hyperparams",
    "ItemResponseData",
    "LsmParams",
    "NetworkData",
    "NumericalError",
    "adapted_lsirm_log_likelihood",
    "lsm_log_likelihood",
    "log_priors_adapted",
    "log_priors_lsm",
    "response_probability",
]

__version__ = "0.1.0"
