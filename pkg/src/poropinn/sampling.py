"""Grid-based IC/BC training data, plus Latin hypercube collocation for curriculum schedules."""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .pde import SolutionParams, analytic_solution

UNIT_CUBE = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))


@dataclass(frozen=True)
class GridSpec:
    nx: int = 50
    nz: int = 50
    nt: int = 50

    def __post_init__(self):
        for name in ("nx", "nz", "nt"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 2:
                raise ConfigError(f"grid.{name} must be an integer >= 2, got {v!r}")

    @property
    def size(self):
        return self.nx * self.nz * self.nt


@dataclass(frozen=True, eq=False)
class LabeledSet:
    points: np.ndarray
    targets: np.ndarray
    kind: str

    def __post_init__(self):
        if self.points.shape != self.targets.shape or self.points.ndim != 2 or self.points.shape[1] != 3:
            raise ValueError("points and targets must both have shape (N, 3)")
        if self.kind not in ("initial", "boundary", "mixed"):
            raise ValueError(f"unknown LabeledSet kind {self.kind!r}")

    def __len__(self):
        return len(self.points)

    def subset(self, index):
        return LabeledSet(self.points[index], self.targets[index], self.kind)


@dataclass(frozen=True, eq=False)
class CollocationSet:
    points: np.ndarray
    t_range: tuple

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True, eq=False)
class CurriculumSchedule:
    n_intervals: int
    edges: np.ndarray
    per_interval_data: list
    per_interval_colloc: list
    mode: str = "incremental"

    def stage(self, i):
        """Training data and collocation points active during stage ``i``."""
        if self.mode == "incremental":
            return self.per_interval_data[i], self.per_interval_colloc[i]
        data = concat_labeled(self.per_interval_data[: i + 1])
        pts = np.concatenate([c.points for c in self.per_interval_colloc[: i + 1]])
        return data, CollocationSet(pts, (float(self.edges[0]), float(self.edges[i + 1])))


def concat_labeled(sets):
    kinds = {s.kind for s in sets}
    kind = kinds.pop() if len(kinds) == 1 else "mixed"
    return LabeledSet(
        np.concatenate([s.points for s in sets]),
        np.concatenate([s.targets for s in sets]),
        kind,
    )


def _axes(gs):
    return np.linspace(0.0, 1.0, gs.nx), np.linspace(0.0, 1.0, gs.nz), np.linspace(0.0, 1.0, gs.nt)


def make_grid(gs):
    """All grid points as an (nx*nz*nt, 3) array; t outermost, x innermost."""
    xs, zs, ts = _axes(gs)
    t, z, x = np.meshgrid(ts, zs, xs, indexing="ij")
    return np.stack([x.ravel(), z.ravel(), t.ravel()], axis=1)


def _grid_indices(gs):
    kt, kz, kx = np.meshgrid(np.arange(gs.nt), np.arange(gs.nz), np.arange(gs.nx), indexing="ij")
    return kx.ravel(), kz.ravel(), kt.ravel()


def _labeled(points, sp, kind):
    return LabeledSet(points, analytic_solution(points, sp), kind)


def extract_ic(gs, sp=SolutionParams()):
    grid = make_grid(gs)
    _, _, kt = _grid_indices(gs)
    return _labeled(grid[kt == 0], sp, "initial")


def extract_bc(gs, sp=SolutionParams()):
    """Spatial-boundary points at every time level, t = 0 included."""
    grid = make_grid(gs)
    kx, kz, _ = _grid_indices(gs)
    on_edge = (kx == 0) | (kx == gs.nx - 1) | (kz == 0) | (kz == gs.nz - 1)
    return _labeled(grid[on_edge], sp, "boundary")


def training_data(gs, sp=SolutionParams()):
    """IC followed by BC; the t = 0 boundary points appear in both."""
    return concat_labeled([extract_ic(gs, sp), extract_bc(gs, sp)])


def lhs_sample(n, box=UNIT_CUBE, seed=0, centered=False):
    """Latin hypercube design of ``n`` points in ``box`` (a sequence of (lo, hi) per axis).

    Each axis is cut into ``n`` equal strata holding exactly one sample.  With
    ``centered`` the samples sit at stratum midpoints instead of uniform jitter.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    box = np.asarray(box, dtype=np.float64)
    if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 1] < box[:, 0]):
        raise ValueError("box must be a sequence of (lo, hi) pairs with lo <= hi")
    rng = np.random.default_rng(seed)
    d = box.shape[0]
    out = np.empty((n, d))
    for k in range(d):
        strata = rng.permutation(n)
        jitter = np.full(n, 0.5) if centered else rng.random(n)
        lo, hi = box[k]
        out[:, k] = lo + (hi - lo) * (strata + jitter) / n
    t_range = (float(box[-1, 0]), float(box[-1, 1]))
    return CollocationSet(out, t_range)


def interval_of_level(k, nt, n_intervals):
    """Curriculum interval owning time level ``k`` (of ``nt``).

    Levels on a shared edge go to the earlier interval; t = 0 goes to interval 0.
    Integer arithmetic keeps the assignment exact.
    """
    k = np.asarray(k)
    return np.maximum(0, -(-k * n_intervals // (nt - 1)) - 1)


def build_schedule(gs, sp=SolutionParams(), n_intervals=10, colloc_per_interval=100,
                   mode="incremental", seed=0, ic_subsample=None, centered=False,
                   subsample_seed=None):
    """Split IC/BC data and collocation points into ``n_intervals`` equal time intervals.

    Interval ``i`` draws its collocation points with seed ``seed + i``.  With
    ``ic_subsample`` the IC set attached to interval 0 is reduced to that many
    points, drawn uniformly without replacement using ``subsample_seed``.
    """
    if n_intervals < 1:
        raise ConfigError("curriculum.n_intervals must be >= 1")
    if mode not in ("incremental", "cumulative"):
        raise ConfigError(f"curriculum.mode must be 'incremental' or 'cumulative', got {mode!r}")
    if gs.nt - 1 < n_intervals:
        raise ConfigError(
            f"every curriculum interval needs at least one grid time level: "
            f"grid.nt - 1 ({gs.nt - 1}) must be >= curriculum.n_intervals ({n_intervals})"
        )
    edges = np.linspace(0.0, 1.0, n_intervals + 1)

    ic = extract_ic(gs, sp)
    if ic_subsample is not None:
        if not 1 <= ic_subsample <= len(ic):
            raise ConfigError(f"curriculum.ic_subsample must be in [1, {len(ic)}]")
        rng = np.random.default_rng(seed if subsample_seed is None else subsample_seed)
        pick = np.sort(rng.choice(len(ic), ic_subsample, replace=False))
        ic = ic.subset(pick)

    bc = extract_bc(gs, sp)
    levels = np.rint(bc.points[:, 2] * (gs.nt - 1)).astype(np.int64)
    owner = interval_of_level(levels, gs.nt, n_intervals)

    data, colloc = [], []
    for i in range(n_intervals):
        bc_i = bc.subset(owner == i)
        data.append(concat_labeled([ic, bc_i]) if i == 0 else bc_i)
        box = ((0.0, 1.0), (0.0, 1.0), (float(edges[i]), float(edges[i + 1])))
        colloc.append(lhs_sample(colloc_per_interval, box, seed=seed + i, centered=centered))
    return CurriculumSchedule(n_intervals, edges, data, colloc, mode)


def write_csv(dataset, path):
    """Write a LabeledSet (x,z,t,u,v,p) or CollocationSet (x,z,t) as CSV."""
    labeled = isinstance(dataset, LabeledSet)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "z", "t", "u", "v", "p"] if labeled else ["x", "z", "t"])
        rows = np.hstack([dataset.points, dataset.targets]) if labeled else dataset.points
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
