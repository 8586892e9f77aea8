'''
Stochastic saddle-point problems: empirical solvers, excess-risk rate
experiments and shifted-process checks, with an optional autograd backend
'''
from . import geometry
from . import problems
from . import solver
from . import risk
from . import shifted
from . import viz
from . import constants

from .problems import MatrixGame, AucSaddle, from_config
from .solver import SolverConfig, solve_saddle, duality_gap
from .risk import ExperimentConfig, run_experiment, strong_excess_risk
from .shifted import ShiftedProcessConfig, exp_moment_check
from .backend import backend, set_backend
from .print_backend import print_backend, set_print_backend

__all__ = [
    'MatrixGame', 'AucSaddle', 'from_config', 'SolverConfig', 'solve_saddle',
    'duality_gap', 'ExperimentConfig', 'run_experiment', 'strong_excess_risk',
    'ShiftedProcessConfig', 'exp_moment_check'
]

__version__ = '0.1.0'
