"""Physics-informed neural networks for 2D poroelastic flow and deformation."""

from .net import LayerSpec, MlpParams, DerivBundle, init_params, forward, forward_with_derivs, grad_scalar
from .pde import SolutionParams, MaterialParams, analytic_solution, analytic_bundle
from .sampling import GridSpec, build_schedule, extract_bc, extract_ic, lhs_sample, make_grid
from .training import (
    AdamState, CurriculumConfig, LossBreakdown, TrainConfig, adam_step, data_loss,
    physics_loss, total_loss, train_curriculum, train_standard,
)
from .checkpoint import load_checkpoint, save_checkpoint

__version__ = "0.1.0"
