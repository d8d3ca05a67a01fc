from graftsurv.models.boosting import GradientBoostedSurvival, gb_grid
from graftsurv.models.coxnet import CoxnetSurvival, coxnet_grid
from graftsurv.models.forest import RandomSurvivalForest, rsf_grid
from graftsurv.models.io import load_model, save_model

__all__ = [
    "CoxnetSurvival",
    "GradientBoostedSurvival",
    "RandomSurvivalForest",
    "coxnet_grid",
    "gb_grid",
    "load_model",
    "rsf_grid",
    "save_model",
]
