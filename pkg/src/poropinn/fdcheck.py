"""Finite-difference oracles for the network derivatives and parameter gradients.

These only ever call the plain evaluators (``net.forward`` and value-only loss
evaluation), never the derivative propagation they are used to check.
"""

from dataclasses import dataclass

import numpy as np

from . import net, pde

JAC_STEP = 1e-4
HESS_STEP = 1e-3
PARAM_STEP = 1e-6

JAC_TOL = 1e-6
HESS_TOL = 1e-5
GRAD_TOL = 1e-5
IDENTITY_TOL = 1e-10


@dataclass
class CheckResult:
    name: str
    worst: float
    tol: float
    where: str = ""

    @property
    def ok(self):
        return self.worst <= self.tol

    def line(self):
        status = "PASS" if self.ok else "FAIL"
        loc = f" at {self.where}" if self.where and not self.ok else ""
        return f"{status} {self.name}: worst={self.worst:.3e} tol={self.tol:.0e}{loc}"


def fd_jacobian(f, point, h=JAC_STEP):
    """Central-difference Jacobian of a vector function, [i, j] = d f_i / d x_j."""
    point = np.asarray(point, dtype=np.float64)
    cols = []
    for j in range(point.size):
        e = np.zeros_like(point)
        e[j] = h
        cols.append((np.asarray(f(point + e)) - np.asarray(f(point - e))) / (2.0 * h))
    return np.stack(cols, axis=-1)


def fd_hessians(f, point, h=HESS_STEP):
    """Central-difference second derivatives, [i, j, k] = d2 f_i / dx_j dx_k."""
    point = np.asarray(point, dtype=np.float64)
    n = point.size
    f0 = np.asarray(f(point))
    out = np.zeros(f0.shape + (n, n))
    for j in range(n):
        ej = np.zeros(n)
        ej[j] = h
        out[..., j, j] = (np.asarray(f(point + ej)) - 2.0 * f0 + np.asarray(f(point - ej))) / h**2
        for k in range(j + 1, n):
            ek = np.zeros(n)
            ek[k] = h
            mixed = (
                np.asarray(f(point + ej + ek)) - np.asarray(f(point + ej - ek))
                - np.asarray(f(point - ej + ek)) + np.asarray(f(point - ej - ek))
            ) / (4.0 * h * h)
            out[..., j, k] = mixed
            out[..., k, j] = mixed
    return out


def fd_gradient(f, x, h=PARAM_STEP):
    """Central-difference gradient of a scalar function of a flat vector."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def scaled_error(computed, reference):
    """|computed - reference| / (1 + |computed|), elementwise."""
    computed = np.asarray(computed)
    return np.abs(computed - reference) / (1.0 + np.abs(computed))


def network_derivative_errors(params, point):
    """Worst scaled Jacobian and Hessian errors of ``forward_with_derivs`` at one point.

    Returns (jac_err, jac_index, hess_err, hess_index).
    """
    b = net.forward_with_derivs(params, point)
    fwd = lambda q: net.forward(params, q)
    je = scaled_error(b.jacobian, fd_jacobian(fwd, point))
    he = scaled_error(b.hessians, fd_hessians(fwd, point))
    ji = np.unravel_index(np.argmax(je), je.shape)
    hi = np.unravel_index(np.argmax(he), he.shape)
    return float(je[ji]), ji, float(he[hi]), hi


def derivative_suite(n_samples, spec=None, seed=0, jac_tol=JAC_TOL, hess_tol=HESS_TOL):
    """FD conformance over ``n_samples`` random (network, point) pairs."""
    spec = spec or net.LayerSpec()
    rng = np.random.default_rng(seed)
    worst_j = CheckResult("jacobian vs central differences", 0.0, jac_tol)
    worst_h = CheckResult("hessians vs central differences", 0.0, hess_tol)
    for s in range(n_samples):
        params = net.init_params(spec, int(rng.integers(2**31)))
        point = rng.random(3)
        je, ji, he, hi = network_derivative_errors(params, point)
        loc = f"sample {s}, point {np.array2string(point, precision=6)}"
        if je > worst_j.worst:
            worst_j.worst, worst_j.where = je, f"{loc}, jacobian{list(map(int, ji))}"
        if he > worst_h.worst:
            worst_h.worst, worst_h.where = he, f"{loc}, hessians{list(map(int, hi))}"
    return [worst_j, worst_h]


def identity_suite(n_points=1000, sp=pde.SolutionParams(), seed=0, tol=IDENTITY_TOL):
    """Residual operators applied to the manufactured solution versus the closed-form sources."""
    q = np.random.default_rng(seed).random((n_points, 3))
    b = pde.analytic_bundle(q, sp)
    out = []
    for name, res, src in (
        ("f(analytic) - r_u", pde.residual_f(b, sp.eta), pde.source_ru(q, sp)),
        ("g(analytic) - r_v", pde.residual_g(b, sp.eta), pde.source_rv(q, sp)),
        ("h(analytic) - r_p", pde.residual_h(b), pde.source_rp(q, sp)),
    ):
        err = np.abs(res - src)
        i = int(np.argmax(err))
        out.append(CheckResult(name, float(err[i]), tol, f"point {np.array2string(q[i], precision=6)}"))
    return out


def gradient_relative_error(grad, fd):
    """Relative error per entry, |g - fd| / max(|g|, |fd|); zero where both vanish."""
    grad = np.asarray(grad)
    denom = np.maximum(np.abs(grad), np.abs(fd))
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(denom > 0, np.abs(grad - fd) / denom, 0.0)
    return rel


def _extended_params(params, vector):
    """MlpParams holding extended-precision copies of a flat parameter vector."""
    out_w, out_b, pos = [], [], 0
    for w, b in zip(params.weights, params.biases):
        out_w.append(vector[pos:pos + w.size].reshape(w.shape))
        pos += w.size
        out_b.append(vector[pos:pos + b.size])
        pos += b.size
    return net.MlpParams(params.spec, out_w, out_b)


def extended_batch_loss(params, vector, data_points, data_targets, colloc_points, sp):
    """Total loss evaluated in extended precision, written independently of the training code."""
    dt = np.longdouble
    q = _extended_params(params, np.asarray(vector, dtype=dt))
    xd = np.asarray(data_points, dtype=dt)
    pred = net._forward_values(q, xd)
    diff = np.asarray(data_targets, dtype=dt) - pred
    data = sum(np.sum(diff[:, i] ** 2) / len(xd) for i in range(3))

    xc = np.asarray(colloc_points, dtype=dt)
    b = net._assemble(xc, net._propagate(q, xc), False)
    src = pde.sources(xc, sp)
    physics = 0
    for i, res in enumerate(pde.residuals(b, sp)):
        physics = physics + np.sum((res - src[:, i]) ** 2) / len(xc)
    return data + physics


def batch_gradient_oracle(params, data_points, data_targets, colloc_points, sp, h=PARAM_STEP):
    """Central differences of the batch loss in parameter space (extended precision)."""
    x0 = params.flat().astype(np.longdouble)
    loss = lambda vec: extended_batch_loss(params, vec, data_points, data_targets, colloc_points, sp)
    g = np.empty(x0.size)
    for i in range(x0.size):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = float((loss(xp) - loss(xm)) / (2 * h))
    return g


def gradient_check(grad, fd, floor=1e-10, tol=GRAD_TOL, name="parameter gradient vs central differences"):
    """Worst relative error over entries with |grad| > floor."""
    g = np.asarray(grad)
    rel = gradient_relative_error(g, fd)
    rel[np.abs(g) <= floor] = 0.0
    i = int(np.argmax(rel))
    return CheckResult(name, float(rel[i]), tol, f"flat parameter index {i}")
