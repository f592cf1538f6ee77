"""Loss terms and the Adam-driven standard and curriculum training loops."""

import math
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import autodiff as ad
from . import net, pde
from .net import LayerSpec
from .errors import ConfigError, NumericError, UsageError
from .fdcheck import batch_gradient_oracle, gradient_check
from .sampling import GridSpec, build_schedule, lhs_sample, training_data

# Sub-seed offsets; every random stream derives from TrainConfig.seed.
INIT_SEED_OFFSET = 0
COLLOC_SEED_OFFSET = 1000
SHUFFLE_SEED_OFFSET = 2000
SUBSAMPLE_SEED_OFFSET = 3000


@dataclass(frozen=True)
class LossBreakdown:
    mse_u: float
    mse_v: float
    mse_p: float
    mse_f: float
    mse_g: float
    mse_h: float
    data: float
    physics: float
    total: float

    def is_finite(self):
        return all(math.isfinite(getattr(self, f.name)) for f in fields(self))

    def as_tuple(self):
        return tuple(getattr(self, f.name) for f in fields(self))


def _data_terms(params, points, targets):
    if len(points) == 0:
        raise UsageError("data batch is empty")
    diff = targets - net.traced_forward(params, points)
    return tuple(ad.mean(diff[:, i] * diff[:, i]) for i in range(3))


def _physics_terms(params, points, sp):
    if len(points) == 0:
        raise UsageError("collocation set is empty")
    b = net.traced_bundle(params, points)
    src = pde.sources(points, sp)
    f, g, h = pde.residuals(b, sp)
    out = []
    for i, res in enumerate((f, g, h)):
        d = res - src[:, i]
        out.append(ad.mean(d * d))
    return tuple(out)


def _combine(du, dv, dp, pf, pg, ph):
    data = du + dv + dp
    physics = pf + pg + ph
    return data, physics, data + physics


def data_loss(params, batch):
    """(MSE_u, MSE_v, MSE_p) of the network against a labeled batch."""
    return tuple(float(v) for v in _data_terms(params, batch.points, batch.targets))


def physics_loss(params, colloc, sp=pde.SolutionParams()):
    """(MSE_f, MSE_g, MSE_h): mean squared PDE residual minus manufactured source."""
    return tuple(float(v) for v in _physics_terms(params, colloc.points, sp))


def total_loss(params, batch, colloc, sp=pde.SolutionParams()):
    terms = _data_terms(params, batch.points, batch.targets) + _physics_terms(params, colloc.points, sp)
    data, physics, total = _combine(*terms)
    return LossBreakdown(*(float(v) for v in terms), float(data), float(physics), float(total))


def batch_objective(data_points, data_targets, colloc_points, sp):
    """Objective for :func:`net.grad_scalar` computing the same total as :func:`total_loss`."""

    def objective(params):
        terms = _data_terms(params, data_points, data_targets) + _physics_terms(params, colloc_points, sp)
        return _combine(*terms)[2]

    return objective


# -- Adam ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdamState:
    first_moment: net.ParamGradient
    second_moment: net.ParamGradient
    step_count: int = 0

    @classmethod
    def zeros_like(cls, params):
        return cls(net.ParamGradient.zeros_like(params), net.ParamGradient.zeros_like(params), 0)


def _check_congruent(params, other, what):
    for (name, a), (_, b) in zip(params.blocks(), other.blocks()):
        if np.shape(a) != np.shape(b):
            raise UsageError(f"{what} block {name} has shape {np.shape(b)}, expected {np.shape(a)}")
    if len(params.weights) != len(other.weights):
        raise UsageError(f"{what} has {len(other.weights)} layers, expected {len(params.weights)}")


def adam_step(params, grad, state, lr=1e-3, beta1=0.9, beta2=0.999, eps_adam=1e-8):
    """One bias-corrected Adam update; returns new (params, state)."""
    _check_congruent(params, grad, "gradient")
    _check_congruent(params, state.first_moment, "first moment")
    _check_congruent(params, state.second_moment, "second moment")
    step = state.step_count + 1
    c1 = 1.0 - beta1**step
    c2 = 1.0 - beta2**step

    def update(theta, g, m, v):
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * (g * g)
        m_hat = m / c1
        v_hat = v / c2
        return theta - lr * m_hat / (np.sqrt(v_hat) + eps_adam), m, v

    new = {"weights": ([], [], []), "biases": ([], [], [])}
    for key in ("weights", "biases"):
        for theta, g, m, v in zip(
            getattr(params, key), getattr(grad, key),
            getattr(state.first_moment, key), getattr(state.second_moment, key),
        ):
            t2, m2, v2 = update(theta, g, m, v)
            new[key][0].append(t2)
            new[key][1].append(m2)
            new[key][2].append(v2)
    params2 = net.MlpParams(params.spec, new["weights"][0], new["biases"][0])
    state2 = AdamState(
        net.ParamGradient(tuple(new["weights"][1]), tuple(new["biases"][1])),
        net.ParamGradient(tuple(new["weights"][2]), tuple(new["biases"][2])),
        step,
    )
    return params2, state2


# -- configuration and logs -------------------------------------------------------------


@dataclass(frozen=True)
class CurriculumConfig:
    n_intervals: int = 10
    epochs_per_interval: int = None  # None: split TrainConfig.epochs evenly
    mode: str = "incremental"
    ic_subsample: int = None


@dataclass(frozen=True)
class TrainConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    net: LayerSpec = field(default_factory=LayerSpec)
    epochs: int = 3000
    batch_size: int = 256
    learning_rate: float = 1e-3
    colloc_total: int = 1000
    curriculum: CurriculumConfig = None
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    solution: pde.SolutionParams = field(default_factory=pde.SolutionParams)
    lhs_centered: bool = False

    def validate(self):
        if self.epochs < 0:
            raise ConfigError("train.epochs must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("train.batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("train.learning_rate must be positive")
        if self.colloc_total < 1:
            raise ConfigError("train.colloc_total must be >= 1")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1 and self.adam_epsilon > 0):
            raise ConfigError("adam parameters out of range")
        c = self.curriculum
        if c is not None:
            if c.n_intervals < 1:
                raise ConfigError("curriculum.n_intervals must be >= 1")
            if self.colloc_total % c.n_intervals:
                raise ConfigError(
                    f"train.colloc_total ({self.colloc_total}) must be divisible by "
                    f"curriculum.n_intervals ({c.n_intervals})"
                )
            if c.epochs_per_interval is None and self.epochs % c.n_intervals:
                raise ConfigError(
                    f"train.epochs ({self.epochs}) must be divisible by curriculum.n_intervals "
                    f"({c.n_intervals}) unless curriculum.epochs_per_interval is set"
                )
            if c.epochs_per_interval is not None and c.epochs_per_interval < 0:
                raise ConfigError("curriculum.epochs_per_interval must be >= 0")
        return self

    @property
    def epochs_per_interval(self):
        c = self.curriculum
        if c.epochs_per_interval is not None:
            return c.epochs_per_interval
        return self.epochs // c.n_intervals


@dataclass(frozen=True)
class TrainingLogRecord:
    epoch: int
    interval: int
    losses: LossBreakdown
    wall_millis: int


@dataclass
class TrainStats:
    """Counters filled in by the trainers."""

    residual_evals: list = field(default_factory=list)  # per epoch, training steps only
    steps: int = 0
    gradchecks: list = field(default_factory=list)  # fdcheck.CheckResult per checked step
    final_state: AdamState = None


@dataclass(frozen=True, eq=False)
class _Stage:
    interval: int
    data: object
    colloc: object
    epochs: int


def _gradcheck_step(params, data_pts, data_tgt, col_pts, sp, grad):
    fd = batch_gradient_oracle(params, data_pts, data_tgt, col_pts, sp)
    return gradient_check(grad.flat(), fd)


def _run(cfg, stages, stats, on_record, gradcheck_steps):
    params = net.init_params(cfg.net, cfg.seed + INIT_SEED_OFFSET)
    state = AdamState.zeros_like(params)
    rng = np.random.default_rng(cfg.seed + SHUFFLE_SEED_OFFSET)
    sp = cfg.solution
    log = []
    epoch = 0
    t0 = time.perf_counter()
    for stage in stages:
        data, colloc = stage.data, stage.colloc
        n_data = len(data)
        n_batches = -(-n_data // cfg.batch_size)
        if len(colloc) < n_batches:
            raise ConfigError(
                f"stage {stage.interval}: {len(colloc)} collocation points cannot cover "
                f"{n_batches} mini-batches"
            )
        for _ in range(stage.epochs):
            epoch += 1
            order = rng.permutation(n_data)
            chunks = np.array_split(rng.permutation(len(colloc)), n_batches)
            evals = 0
            for b in range(n_batches):
                idx = order[b * cfg.batch_size:(b + 1) * cfg.batch_size]
                cidx = chunks[b]
                dp, dt, cp = data.points[idx], data.targets[idx], colloc.points[cidx]
                try:
                    _, grad = net.grad_scalar(params, batch_objective(dp, dt, cp, sp))
                except NumericError as exc:
                    raise NumericError(f"epoch {epoch}: {exc}", log) from exc
                if stats is not None and len(stats.gradchecks) < gradcheck_steps:
                    stats.gradchecks.append(_gradcheck_step(params, dp, dt, cp, sp, grad))
                params, state = adam_step(
                    params, grad, state, cfg.learning_rate,
                    cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon,
                )
                evals += len(cidx)
            losses = total_loss(params, data, colloc, sp)
            rec = TrainingLogRecord(epoch, stage.interval, losses,
                                    int((time.perf_counter() - t0) * 1000))
            log.append(rec)
            if on_record is not None:
                on_record(rec)
            if stats is not None:
                stats.residual_evals.append(evals)
                stats.steps += n_batches
            if not losses.is_finite():
                raise NumericError(f"non-finite loss at epoch {epoch}", log)
    if stats is not None:
        stats.final_state = state
    return params, log


def standard_stage(cfg):
    data = training_data(cfg.grid, cfg.solution)
    colloc = lhs_sample(cfg.colloc_total, seed=cfg.seed + COLLOC_SEED_OFFSET,
                        centered=cfg.lhs_centered)
    return _Stage(None, data, colloc, cfg.epochs)


def make_schedule(cfg):
    c = cfg.curriculum
    return build_schedule(
        cfg.grid, cfg.solution, c.n_intervals, cfg.colloc_total // c.n_intervals, c.mode,
        seed=cfg.seed + COLLOC_SEED_OFFSET, ic_subsample=c.ic_subsample,
        centered=cfg.lhs_centered, subsample_seed=cfg.seed + SUBSAMPLE_SEED_OFFSET,
    )


def train_standard(cfg, stats=None, on_record=None, gradcheck_steps=0):
    """Train on all IC/BC data and one whole-domain collocation set at once.

    Returns (params, log).  ``stats`` (a :class:`TrainStats`) collects counters,
    ``on_record`` is called with each log record as it is produced.
    """
    if cfg.curriculum is not None:
        raise ConfigError("train_standard called with a curriculum configuration")
    cfg.validate()
    return _run(cfg, [standard_stage(cfg)], stats, on_record, gradcheck_steps)


def train_curriculum(cfg, stats=None, on_record=None, gradcheck_steps=0):
    """Train interval by interval in temporal order, carrying parameters and Adam state."""
    if cfg.curriculum is None:
        raise ConfigError("train_curriculum needs a curriculum configuration")
    cfg.validate()
    schedule = make_schedule(cfg)
    stages = []
    for i in range(schedule.n_intervals):
        data, colloc = schedule.stage(i)
        stages.append(_Stage(i, data, colloc, cfg.epochs_per_interval))
    return _run(cfg, stages, stats, on_record, gradcheck_steps)


def train(cfg, **kwargs):
    if cfg.curriculum is None:
        return train_standard(cfg, **kwargs)
    return train_curriculum(cfg, **kwargs)


def with_curriculum(cfg, **kwargs):
    """Copy of ``cfg`` with a curriculum section built from ``kwargs``."""
    return replace(cfg, curriculum=CurriculumConfig(**kwargs))


LOG_HEADER = ["epoch", "interval", "mse_u", "mse_v", "mse_p", "mse_f", "mse_g", "mse_h",
              "data", "physics", "total", "wall_ms"]


def log_row(rec, wall_clock=True):
    interval = "" if rec.interval is None else str(rec.interval)
    wall = str(rec.wall_millis) if wall_clock else ""
    return [str(rec.epoch), interval] + [repr(v) for v in rec.losses.as_tuple()] + [wall]
