"""mrwlab: simulation and verification laboratory for Markov-modulated walks."""

from .kernels import DiscreteKernel, ParametricKernel, PointMass, UnsupportedKernel
from .laws import (
    FiniteNLaw,
    GeometricLaw,
    InvalidDistribution,
    LogSquareLaw,
    ParetoIntLaw,
    PolyLogLaw,
    TailMassTooLarge,
    ZipfLaw,
    law_from_name,
)
from .model import (
    Model,
    ModelSpec,
    NotStochastic,
    Reducible,
    StationaryLaw,
    build_model,
    dual_model,
    load_spec,
    negate_model,
    save_spec,
    scale_model,
)
from .simulate import (
    CampaignResult,
    CycleStats,
    LadderRecord,
    StoppingRecord,
    Trajectory,
    cycle_decompose,
    ladder_process,
    run_campaign,
    run_trajectory,
    stopping_times,
)
from . import zoo

__version__ = "0.1.0"
