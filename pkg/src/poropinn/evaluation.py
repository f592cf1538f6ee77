"""Prediction-versus-manufactured-solution comparisons: slices, profiles, error norms."""

import csv
from dataclasses import dataclass

import numpy as np

from . import net
from .pde import SolutionParams, analytic_solution
from .sampling import make_grid

FIELDS = ("u", "v", "p")
DEFAULT_TIMES = tuple(round(0.1 * k, 10) for k in range(11))
NORM_FLOOR = 1e-12


def _predictor(params, predict):
    if predict is not None:
        return predict
    return lambda q: net.forward(params, q)


@dataclass(frozen=True, eq=False)
class FieldSlice:
    """Fields on an nx x nz spatial grid at fixed t; arrays are indexed [ix, iz, field]."""

    t_value: float
    x: np.ndarray
    z: np.ndarray
    analytic: np.ndarray
    predicted: np.ndarray

    @property
    def grid(self):
        return len(self.x), len(self.z)

    @property
    def abs_error(self):
        return np.abs(self.analytic - self.predicted)

    def relative_l2(self):
        """Per-field relative L2 error over the slice."""
        diff = (self.predicted - self.analytic).reshape(-1, 3)
        ref = self.analytic.reshape(-1, 3)
        return np.linalg.norm(diff, axis=0) / np.maximum(np.linalg.norm(ref, axis=0), NORM_FLOOR)


@dataclass(frozen=True, eq=False)
class ProfileTable:
    """Fields along z at fixed x for several times; arrays are indexed [it, iz, field]."""

    x_value: float
    times: np.ndarray
    z: np.ndarray
    analytic: np.ndarray
    predicted: np.ndarray

    def rows(self):
        for it, t in enumerate(self.times):
            for iz, z in enumerate(self.z):
                yield (z, t, self.analytic[it, iz], self.predicted[it, iz])


def field_slice(params, t_value, nx=50, nz=50, sp=SolutionParams(), predict=None):
    if not 0.0 <= t_value <= 1.0:
        raise ValueError(f"t_value must lie in [0, 1], got {t_value}")
    xs, zs = np.linspace(0.0, 1.0, nx), np.linspace(0.0, 1.0, nz)
    X, Z = np.meshgrid(xs, zs, indexing="ij")
    q = np.stack([X.ravel(), Z.ravel(), np.full(X.size, float(t_value))], axis=1)
    exact = analytic_solution(q, sp).reshape(nx, nz, 3)
    pred = np.asarray(_predictor(params, predict)(q)).reshape(nx, nz, 3)
    return FieldSlice(float(t_value), xs, zs, exact, pred)


def profile(params, x_value, t_list=DEFAULT_TIMES, nz=50, sp=SolutionParams(), predict=None):
    times = np.sort(np.asarray(t_list, dtype=np.float64))
    zs = np.linspace(0.0, 1.0, nz)
    T, Z = np.meshgrid(times, zs, indexing="ij")
    q = np.stack([np.full(T.size, float(x_value)), Z.ravel(), T.ravel()], axis=1)
    exact = analytic_solution(q, sp).reshape(len(times), nz, 3)
    pred = np.asarray(_predictor(params, predict)(q)).reshape(len(times), nz, 3)
    return ProfileTable(float(x_value), times, zs, exact, pred)


def error_norms(params, gs, sp=SolutionParams(), predict=None):
    """{field: (relative L2, max abs)} over every point of the space-time grid."""
    q = make_grid(gs)
    exact = analytic_solution(q, sp)
    diff = np.asarray(_predictor(params, predict)(q)) - exact
    out = {}
    for i, name in enumerate(FIELDS):
        rel = np.linalg.norm(diff[:, i]) / max(np.linalg.norm(exact[:, i]), NORM_FLOOR)
        out[name] = (float(rel), float(np.max(np.abs(diff[:, i]))))
    return out


def write_slice_csv(fs, path):
    with open(path, "w", newline="") as fh:
        fh.write(f"# t={fs.t_value!r}\n")
        w = csv.writer(fh)
        w.writerow(["x", "z", "u_exact", "v_exact", "p_exact", "u_pred", "v_pred", "p_pred"])
        for ix, x in enumerate(fs.x):
            for iz, z in enumerate(fs.z):
                w.writerow([repr(float(v)) for v in (x, z, *fs.analytic[ix, iz], *fs.predicted[ix, iz])])


def write_profile_csv(table, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "t", "u_exact", "u_pred", "v_exact", "v_pred", "p_exact", "p_pred"])
        for z, t, exact, pred in table.rows():
            vals = [z, t]
            for i in range(3):
                vals += [exact[i], pred[i]]
            w.writerow([repr(float(v)) for v in vals])


def write_norms(norms, path):
    with open(path, "w") as fh:
        fh.write("field,rel_l2,max_abs\n")
        for name in FIELDS:
            rel, mx = norms[name]
            fh.write(f"{name},{rel!r},{mx!r}\n")
