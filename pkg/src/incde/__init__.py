"""Neural-CDE surrogate modeling of elasto-plastic material behavior.

The package is organized as a plain numpy library:

``voigt``
    Small-strain tensor algebra in 6-component Voigt notation and
    isotropic linear elasticity.
``plasticity``
    Rate-independent J2 and Drucker-Prager return mapping, used as the
    ground truth ("oracle") material everywhere.
``autodiff`` / ``nn``
    Reverse-mode automatic differentiation on a dynamic tape, feed-forward
    networks, Adam, and the sequence training loop.
``datagen``
    Random-walk strain paths, uniform partitioning, normalization and the
    on-disk dataset container.
``model``
    The stabilized incremental neural CDE cell, explicit ODE solvers, the
    stress predictor and its backpropagated tangent stiffness.
``baseline1d``
    One-dimensional comparison of the incremental cell against a plain
    neural CDE on a bilinear elastic-plastic target.
``fem``
    Plane-strain Q4 finite elements with Broyden/Sherman-Morrison
    iteration, accepting either the oracle or a trained surrogate.
``experiments``
    Material-point and boundary-value studies emitting CSV reports.
"""

from .voigt import (
    ElasticParams,
    elastic_stiffness,
    pressure_deviator,
    von_mises_strain,
    von_mises_stress,
)
from .plasticity import DpParams, J2Params, OracleState, dp_return_map, j2_return_map
from .datagen import Dataset, NormConstants, WalkConfig, build_dataset
from .nn import AdamState, Mlp, TrainConfig, train
from .model import IncdeModel, SolverConfig, predict_stress_series, tangent_stiffness

__all__ = [
    "ElasticParams",
    "elastic_stiffness",
    "pressure_deviator",
    "von_mises_stress",
    "von_mises_strain",
    "J2Params",
    "DpParams",
    "OracleState",
    "j2_return_map",
    "dp_return_map",
    "WalkConfig",
    "Dataset",
    "NormConstants",
    "build_dataset",
    "Mlp",
    "AdamState",
    "TrainConfig",
    "train",
    "IncdeModel",
    "SolverConfig",
    "predict_stress_series",
    "tangent_stiffness",
]

__version__ = "0.1.0"
