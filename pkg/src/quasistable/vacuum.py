"""Physical-vacuum kernels f2 and f3 by a Nystrom method.

Both conditions are imposed at sqrt(s) = mu_i, the quadrature nodes.  With
the conjugated minus-branch coefficients they reduce (after dividing by the
coefficient of the delta term) to

    f2(mu) + Phi(mu) { 2A (mu+M) H2_1(M tau) - (mu-M) H1_1(M tau)
                       - (i pi beta/4) h*(mu) I[f2](mu) } = 0,
    f3(nu, mu) + Phi(mu)/2 { (i pi beta/8) alpha(nu) H1_1(nu tau) h*(mu)/(mu+nu)
                       + (mu+M) H2_1(M tau) f2(nu)
                       - (i pi beta/2) h*(mu) I[f3(nu, .)](mu) } = 0,

with Phi = (-i pi beta tau/8) alpha(mu) H1_2(mu tau) G_-(mu^2)*,
h(mu) = script_h(1, 2, mu tau, M tau) and

    I[f](mu) = int_0^K dkappa' alpha H2_1(mu' tau) f(mu') / (mu - mu' + i0).

The +i0 is the delta part of the conjugated T; what is left is a principal
value, handled by subtracting the integrand at the node.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg

from .errors import IllConditioned, NoConvergence
from .model import (
    MassQuadrature,
    ModelParams,
    _kernel,
    alpha,
    coefficients,
    green_rim,
    mu_of_kappa,
)
from .specfun import cylinder_table

COND_LIMIT = 1e12
RESIDUAL_TOL = 1e-6


def vacuum_quadrature(params: ModelParams, panels: int = 12, order: int = 16) -> MassQuadrature:
    """Graded rule for the vacuum equations.

    G(mu^2 - i0) peaks at mu ~ M with a width set by Im Pi; equal panels
    cannot resolve it, so panels are halved geometrically towards kappa_M.
    """
    base = MassQuadrature.for_params(params, panels=panels, order=order)
    if params.beta == 0 or params.M <= 2.0 * params.m:
        return base
    k_m = math.sqrt(params.M**2 / params.threshold - 1.0)
    width = abs(_kernel(params, base).pi_rim(np.array([params.M**2]), -1)[0].imag) \
        / (2.0 * params.threshold * k_m)
    width = min(max(0.5 * width, 1e-4), base.kappa_max / panels)
    return MassQuadrature.graded(base.kappa_max, k_m, width, panels, order)


def _bary_weights(x: np.ndarray) -> np.ndarray:
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    return 1.0 / np.prod(d, axis=1)


def _panel_diff(quad: MassQuadrature) -> np.ndarray:
    """Block-diagonal differentiation matrix: Lagrange interpolation per panel."""
    n, p = quad.order, quad.panels
    x = quad.nodes.reshape(p, n)
    out = np.zeros((n * p, n * p))
    for k in range(p):
        xs = x[k]
        w = _bary_weights(xs)
        d = xs[:, None] - xs[None, :]
        np.fill_diagonal(d, 1.0)
        blk = (w[None, :] / w[:, None]) / d
        np.fill_diagonal(blk, 0.0)
        np.fill_diagonal(blk, -blk.sum(axis=1))
        out[k * n:(k + 1) * n, k * n:(k + 1) * n] = blk
    return out


def interpolation_matrix(quad: MassQuadrature, points: np.ndarray) -> np.ndarray:
    """Rows that map node values to values at ``points`` (per-panel Lagrange)."""
    n, p = quad.order, quad.panels
    x = quad.nodes.reshape(p, n)
    points = np.asarray(points, dtype=float)
    out = np.zeros((points.size, n * p))
    panel = np.clip(np.searchsorted(quad.edges, points, side="right") - 1, 0, p - 1)
    for k in np.unique(panel):
        rows = np.nonzero(panel == k)[0]
        xs = x[k]
        w = _bary_weights(xs)
        d = points[rows, None] - xs[None, :]
        hit = d == 0
        d[hit] = 1.0
        blk = w[None, :] / d
        blk /= blk.sum(axis=1, keepdims=True)
        exact = hit.any(axis=1)
        blk[exact] = hit[exact].astype(float)
        out[rows, k * n:(k + 1) * n] = blk
    return out


def pv_matrix(params: ModelParams, quad: MassQuadrature, a: np.ndarray) -> np.ndarray:
    """K with (K f)_i = PV int_0^K dkappa a f / (mu_i - mu(kappa)), collocated at the nodes.

    Uses 1/(mu_i - mu) = (mu_i + mu) / (4m^2 (kappa_i^2 - kappa^2)) and the
    subtraction of h(kappa) = a f (mu_i + mu) at kappa_i; the diagonal term
    needs h'(kappa_i), taken from the per-panel differentiation matrix.
    """
    kap = quad.nodes
    w = quad.weights
    mu = mu_of_kappa(params, kap)
    four_m2 = params.threshold
    kmax = quad.kappa_max
    n = kap.size
    a = np.asarray(a, dtype=complex)
    den = kap[None, :] ** 2 - kap[:, None] ** 2
    np.fill_diagonal(den, 1.0)
    inv = 1.0 / den
    np.fill_diagonal(inv, 0.0)
    # sum_j w_j (h_j - h_i) / (k_j^2 - k_i^2), h_j = a_j f_j (mu_i + mu_j)
    off = w[None, :] * inv * (mu[:, None] + mu[None, :]) * a[None, :]
    diag = -(w[None, :] * inv).sum(axis=1) * 2.0 * mu * a
    mat = off.astype(complex)
    mat[np.arange(n), np.arange(n)] += diag
    # w_i h'(k_i) / (2 k_i), h' = 2 mu_i (a f)' + a f mu'(k_i)
    dmat = _panel_diff(quad)
    mat += (w / (2.0 * kap))[:, None] * (2.0 * mu[:, None] * dmat * a[None, :])
    mat[np.arange(n), np.arange(n)] += w / (2.0 * kap) * a * four_m2 * kap / mu
    # closed-form PV of 1 / (kappa^2 - kappa_i^2) over [0, K]
    log_term = np.log((kmax - kap) / (kmax + kap)) / (2.0 * kap)
    mat[np.arange(n), np.arange(n)] += 2.0 * mu * a * log_term
    return -mat / four_m2


@dataclass(frozen=True)
class _Grid:
    quad: MassQuadrature
    kappa: np.ndarray
    mu: np.ndarray
    density: np.ndarray
    a: np.ndarray
    phi: np.ndarray
    hstar: np.ndarray
    h1M: complex
    h2M: complex
    alpha: np.ndarray
    h1_mu: np.ndarray
    op: np.ndarray


def _grid(params: ModelParams, quad: MassQuadrature) -> _Grid:
    p = params
    kap = quad.nodes
    mu = mu_of_kappa(p, kap)
    al = alpha(p.form_factor, mu, p.m)
    tab = cylinder_table(mu * p.tau)
    tm = cylinder_table(np.array([p.M * p.tau]))
    ker = _kernel(p, quad)
    hm = mu * p.tau * ker.PM + ker.XQM
    g = green_rim(p, mu * mu, -1, quad)
    phi = -1j * math.pi * p.beta * p.tau / 8.0 * al * tab.h1[2] * np.conj(g)
    a = al * tab.h2[1]
    density = mu / (p.threshold * kap)
    hstar = np.conj(hm)
    integral = pv_matrix(p, quad, a) - np.diag(1j * math.pi * density * a)
    op = np.eye(kap.size) - (phi * 1j * math.pi * p.beta / 4.0 * hstar)[:, None] * integral
    return _Grid(quad, kap, mu, density, a, phi, hstar, complex(tm.h1[1, 0]), complex(tm.h2[1, 0]),
                 al, tab.h1[1], op)


def _rhs_f2(params: ModelParams, gr: _Grid, A: float) -> np.ndarray:
    p = params
    bracket = 2.0 * A * (gr.mu + p.M) * gr.h2M - (gr.mu - p.M) * gr.h1M
    return -gr.phi * bracket


def _rhs_f3(params: ModelParams, gr: _Grid, f2_first: np.ndarray, mu_first: np.ndarray,
            alpha_first: np.ndarray, h1_first: np.ndarray) -> np.ndarray:
    """Right-hand side B[i, k] for the second argument mu_i and first argument nu_k."""
    p = params
    r_term = (1j * math.pi * p.beta / 8.0) * alpha_first[None, :] * h1_first[None, :] * gr.hstar[:, None] \
        / (gr.mu[:, None] + mu_first[None, :])
    t_term = ((gr.mu + p.M) * gr.h2M)[:, None] * f2_first[None, :]
    return -0.5 * gr.phi[:, None] * (r_term + t_term)


def _op_f3(params: ModelParams, gr: _Grid) -> np.ndarray:
    # the f3 operator carries Phi/2 * (i pi beta/2) = Phi * (i pi beta/4): same as for f2
    return gr.op


def _factor(op: np.ndarray):
    cond = float(abs(np.linalg.cond(op, 1)))
    if not cond < COND_LIMIT:
        raise IllConditioned(f"condition number {cond:.3g} exceeds {COND_LIMIT:.0e}")
    return scipy.linalg.lu_factor(op), float(cond)


@dataclass(frozen=True)
class F2Solution:
    kappa: np.ndarray
    mu: np.ndarray
    values: np.ndarray
    A: float
    residual: float
    condition: float


@dataclass(frozen=True)
class F3Solution:
    values: np.ndarray
    residual: float
    asymmetry: float
    condition: float


@dataclass(frozen=True)
class VacuumKernels:
    """f3[k, i] = f3(mu_k, mu_i): first argument along axis 0."""

    kappa: np.ndarray
    mu: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    A: float
    residual_f2: float
    residual_f3: float
    asymmetry_f3: float
    quad: MassQuadrature

    @property
    def f3_symmetric(self) -> np.ndarray:
        """(f3 + f3^T)/2, the part seen by the symmetric pair operator."""
        return 0.5 * (self.f3 + self.f3.T)


def _f2_residual(params: ModelParams, quad: MassQuadrature, f2: np.ndarray, A: float) -> float:
    fine = quad.refined(2)
    gf = _grid(params, fine)
    f_fine = interpolation_matrix(quad, fine.nodes) @ f2
    return float(np.max(np.abs(gf.op @ f_fine - _rhs_f2(params, gf, A))))


def solve_f2(params: ModelParams, quad: MassQuadrature | None = None, A: float = 0.0,
             tol: float | None = RESIDUAL_TOL) -> F2Solution:
    """Nystrom solve for f2; the residual is re-evaluated on the twice-refined grid."""
    quad = quad or vacuum_quadrature(params)
    gr = _grid(params, quad)
    if params.beta == 0:
        zero = np.zeros(gr.mu.size, complex)
        return F2Solution(gr.kappa, gr.mu, zero, A, 0.0, 1.0)
    lu, cond = _factor(gr.op)
    f2 = scipy.linalg.lu_solve(lu, _rhs_f2(params, gr, A))
    res = _f2_residual(params, quad, f2, A)
    if tol is not None and res > tol:
        raise NoConvergence(f"f2 residual {res:.3g} above {tol:.3g}")
    return F2Solution(gr.kappa, gr.mu, f2, A, res, cond)


def _f3_residual(params: ModelParams, quad: MassQuadrature, f2: np.ndarray, f3: np.ndarray) -> float:
    fine = quad.refined(2)
    gf = _grid(params, fine)
    interp = interpolation_matrix(quad, fine.nodes)
    # first argument stays on the solve grid, second goes to the fine grid
    second = interp @ f3.T
    first = mu_of_kappa(params, quad.nodes)
    rhs = _rhs_f3(params, gf, f2, first, alpha(params.form_factor, first, params.m),
                  cylinder_table(first * params.tau).h1[1])
    return float(np.max(np.abs(gf.op @ second - rhs)))


def solve_f3(params: ModelParams, quad: MassQuadrature | None, f2: F2Solution,
             tol: float | None = RESIDUAL_TOL) -> F3Solution:
    """Row-by-row solve (one LU shared by all rows); f3 is reported unsymmetrised."""
    quad = quad or vacuum_quadrature(params)
    gr = _grid(params, quad)
    n = gr.mu.size
    if params.beta == 0:
        return F3Solution(np.zeros((n, n), complex), 0.0, 0.0, 1.0)
    lu, cond = _factor(_op_f3(params, gr))
    rhs = _rhs_f3(params, gr, f2.values, gr.mu, gr.alpha, gr.h1_mu)
    sol = scipy.linalg.lu_solve(lu, rhs)
    f3 = sol.T
    res = _f3_residual(params, quad, f2.values, f3)
    scale = max(float(np.max(np.abs(f3))), 1e-300)
    asym = float(np.max(np.abs(f3 - f3.T)) / scale)
    if tol is not None and res > tol:
        raise NoConvergence(f"f3 residual {res:.3g} above {tol:.3g}")
    return F3Solution(f3, res, asym, cond)


def solve_vacuum(params: ModelParams, quad: MassQuadrature | None = None, A: float = 0.0,
                 tol: float | None = RESIDUAL_TOL) -> VacuumKernels:
    quad = quad or vacuum_quadrature(params)
    s2 = solve_f2(params, quad, A, tol)
    s3 = solve_f3(params, quad, s2, tol)
    return VacuumKernels(s2.kappa, s2.mu, s2.values, s3.values, A, s2.residual, s3.residual,
                         s3.asymmetry, quad)


def _conditions(params: ModelParams, kernels: VacuumKernels, branch: int, stride: int) -> tuple[float, float]:
    """Sup-norm of both original conditions built from CoefficientSet objects."""
    p = params
    quad = kernels.quad
    fine = quad.refined(2)
    mu_f = mu_of_kappa(p, fine.nodes)
    interp = interpolation_matrix(quad, fine.nodes)
    f2_f = interp @ kernels.f2
    f3_f = interp @ kernels.f3.T
    a_f = alpha(p.form_factor, mu_f, p.m) * cylinder_table(mu_f * p.tau).h2[1]
    pv = pv_matrix(p, fine, a_f)
    i_f2 = pv @ f2_f
    i_f3 = pv @ f3_f
    dens = mu_f / (p.threshold * fine.nodes)
    r1 = r2 = 0.0
    for i in range(0, mu_f.size, stride):
        cs = coefficients(p, float(mu_f[i] ** 2), branch, quad).conjugate()
        # full line in kappa': the delta part counts both roots, the PV part is doubled
        common = _common(cs, p)
        t_f2 = cs.T_singular * 2.0 * dens[i] * f2_f[i] + 2.0 * common * i_f2[i]
        cond2 = cs.r + 2.0 * kernels.A * cs.t + t_f2
        r2 = max(r2, abs(cond2))
        t_f3 = cs.T_singular * 2.0 * dens[i] * f3_f[i] + 2.0 * common * i_f3[i]
        cond1 = cs.R(kernels.mu) + 2.0 * t_f3 + cs.t * kernels.f2
        r1 = max(r1, float(np.max(np.abs(cond1))))
    return float(r1), float(r2)


def _common(cs, params: ModelParams) -> complex:
    # the conjugated T numerator is common* alpha(mu) H2_1(mu tau)
    mu = np.array([2.0 * params.m * 1.5])
    h2 = cylinder_table(mu * params.tau).h2[1]
    return complex(cs.T_numerator(mu)[0] / (alpha(params.form_factor, mu, params.m)[0] * h2[0]))


def vacuum_residuals(params: ModelParams, quad: MassQuadrature | None, kernels: VacuumKernels,
                     stride: int = 8) -> dict:
    """Both original conditions with the conjugated minus-branch coefficients.

    The same kernels are also tried with the plus-branch coefficients; that
    pair is a measurement, not a requirement.
    """
    if params.beta == 0:
        return {"minus": (0.0, 0.0), "plus": (0.0, 0.0)}
    minus = _conditions(params, kernels, -1, stride)
    plus = _conditions(params, kernels, 1, stride)
    return {"minus": minus, "plus": plus}


def scan_A(params: ModelParams, quad: MassQuadrature | None, values) -> list[tuple[float, float]]:
    """(A, f2 residual) pairs for a sweep of the free constant."""
    quad = quad or vacuum_quadrature(params)
    out = []
    for A in values:
        sol = solve_f2(params, quad, float(A), tol=None)
        out.append((float(A), sol.residual))
    return out


def tail_ratio(params: ModelParams, kernels: VacuumKernels) -> float:
    """max |f2| / max |alpha| over the last octave of the mu grid."""
    mu = kernels.mu
    top = mu >= 0.5 * mu[-1]
    al = np.abs(alpha(params.form_factor, mu[top], params.m))
    if not np.any(al > 0):
        return 0.0
    return float(np.max(np.abs(kernels.f2[top])) / np.max(al))
