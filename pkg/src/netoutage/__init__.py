"""Monte Carlo and analytic outage scaling for MAC schemes on spatial networks."""

from .asymptotics import AsymptoticResult, conjecture_envelope, eta_max, gamma_kappa_for, tdma_bounds
from .errors import (
    CoincidentPointError,
    EstimationError,
    FitError,
    NotSupportedError,
    NumericalError,
    ParameterError,
    UsageError,
)
from .harness import FitResult, SweepResult, TaxonomyLabel, classify, fit_kappa_gamma, reproduce_figure, sweep
from .mac import Aloha, ClusterMac, CsmaMatern, TdmaLattice, UnreasonableTdma, check_conditions
from .networks import LatticeModel, MaternModel, PoissonModel, Scenario, ThomasModel
from .outage import LinkSpec, OutageEstimate, PathLossModel, RayleighFading, estimate_success
from .pointprocess import ClusterSpec, PointPattern, ProductDensity, Window

__version__ = "0.1.0"
