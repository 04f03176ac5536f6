"""odejet: neural ODEs regularized to be cheap for adaptive solvers.

The library stacks four layers:

* dense float64 tensor kernels with a compiled fast path
  (:mod:`odejet.backend`) behind a closed primitive registry
  (:mod:`odejet.ops`);
* truncated Taylor-series propagation and jets for exact higher-order
  trajectory derivatives (:mod:`odejet.taylor`, :mod:`odejet.jet`), with a
  nested dual-number oracle (:mod:`odejet.nested`);
* tape-based reverse-mode AD (:mod:`odejet.tape`) and explicit Runge-Kutta
  solvers with evaluation-count instrumentation (:mod:`odejet.solve`);
* an MLP-dynamics neural ODE with derivative-norm regularization, its
  training loop, and the experiment CLI (:mod:`odejet.model`,
  :mod:`odejet.experiments`, :mod:`odejet.cli`).
"""

from .backend import backend_name
from .errors import (DivergenceError, NonFiniteError, OdejetError, ShapeError,
                     SingularityError, TrainingError,
                     UnsupportedOperationError)
from .jet import jet, jet_opcount, ode_taylor_coefficients, total_derivative
from .mlp import MlpParams, dynamics, init_mlp
from .nested import Dual, nested_derivatives, nested_jet, nested_opcount
from .objective import (Batch, RegularizedObjective, objective,
                        objective_grad)
from .opcount import OpCounter
from .regularize import solve_with_regularizer
from .rng import RngState
from .solver import (SolveConfig, SolveStats, Trajectory, adaptive_solve,
                     error_norm, fixed_solve, rk_step)
from .tableaus import ButcherTableau, builtin_tableaus, tableau_by_order
from .tape import Gradients, Tape, Var, backward, record, vjp
from .taylor import (TaylorBundle, derivatives_from_taylor, factorial,
                     taylor_add, taylor_div, taylor_exp,
                     taylor_from_derivatives, taylor_mul, taylor_sin_cos,
                     taylor_tanh)
from .train import TrainSchedule, TrainState, sgd_momentum, train

__version__ = "0.1.0"
