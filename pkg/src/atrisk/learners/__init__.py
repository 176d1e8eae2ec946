from .gbt import GBTModel, GBTParams, Tree, fit_gbt
from .importance import base_id, importance, load_model, model_from_json, model_to_json, save_model
from .logistic import LogisticModel, fit_logistic, penalized_gradient, penalized_loglik, predict_logistic
from .probit import ProbitModel, fit_probit, fit_probit_encompassing, log_odds

__all__ = [
    "GBTModel", "GBTParams", "LogisticModel", "ProbitModel", "Tree",
    "base_id", "fit_gbt", "fit_logistic", "fit_probit", "fit_probit_encompassing",
    "importance", "load_model", "log_odds", "model_from_json", "model_to_json",
    "penalized_gradient", "penalized_loglik", "predict_logistic", "save_model",
]
