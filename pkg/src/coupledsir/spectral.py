"""Spectral radii, the coupled-layer threshold operator, and threshold curves.

The layer-1 epidemic threshold for a two-layer network is the inverse
spectral radius of

    H_T = A11 + (tau22 / alpha^2) * A12 (I - tau22 A22)^{-1} A12^T,

the coupling term carrying tau12*tau21 = tau11*tau22/alpha^2 from the rate
constraint beta11*beta22 = alpha^2*beta12*beta21. The operator is valid
while tau22 * lambda(A22) < 1 so the inverse exists as a convergent
non-negative series. All spectral radii are computed matrix-free by power
iteration; the operator above never materializes the dense n1 x n1 matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConvergenceError, ParameterError, SupercriticalLayerError
from .graphs import Graph, LayeredNetwork
from .params import EpidemicParams

__all__ = [
    "spectral_radius",
    "layer_spectral_radius",
    "HtOperator",
    "build_ht_operator",
    "epidemic_threshold",
    "block_spectral_radius",
    "jacobian_leading_eigenvalue",
    "ThresholdCurve",
    "threshold_curve",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


def spectral_radius(
    apply: Callable[[np.ndarray], np.ndarray],
    n: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[float, np.ndarray]:
    """Dominant eigenvalue and eigenvector of a non-negative linear operator.

    Power iteration from the all-ones vector. Internally iterates the shifted
    operator v -> apply(v) + v, which for a non-negative operator has the same
    Perron vector but strictly dominant leading eigenvalue even on bipartite
    structures (where +rho and -rho would otherwise tie).

    Returns (rho, v) with v unit-norm and ||apply(v) - rho*v|| <= tol*rho.
    For the zero operator returns rho = 0 with the normalized start vector.
    """
    if n < 1:
        raise ParameterError("operator dimension must be at least 1")
    v = np.full(n, 1.0 / np.sqrt(n))
    residual = np.inf
    for _ in range(max_iter):
        w = np.asarray(apply(v), dtype=np.float64)
        rho = float(v @ w)
        residual = float(np.linalg.norm(w - rho * v))
        if rho > 0 and residual <= tol * rho:
            return rho, v
        if rho <= 0 and not np.any(w):
            return 0.0, v
        u = w + v
        norm = np.linalg.norm(u)
        if norm == 0.0:
            # apply(v) = -v cannot happen for a non-negative operator on a
            # positive vector; treat defensively as non-convergence.
            break
        v = u / norm
    raise ConvergenceError(
        f"power iteration did not converge within {max_iter} iterations "
        f"(last residual {residual:.3e})",
        residual=residual,
    )


def layer_spectral_radius(g: Graph, tol: float = DEFAULT_TOL) -> float:
    """lambda(A) of a single layer's adjacency matrix; cached on the graph."""
    if g._spectral_radius is None:
        if g.edge_count == 0:
            g._spectral_radius = 0.0
        else:
            a = g.adjacency()
            rho, _ = spectral_radius(a.dot, g.n, tol=tol)
            g._spectral_radius = rho
    return g._spectral_radius


class HtOperator:
    """Matrix-free action of A11 + (tau22/alpha^2)*A12 (I - tau22 A22)^{-1} A12^T.

    The inner solve is a sparse LU factorization of (I - tau22*A22) for
    layers up to 2000 nodes (every scenario here), conjugate gradient above
    that; either way the solution is refined until the relative residual is
    at most 1e-10.
    """

    SOLVE_RESIDUAL = 1e-10
    DENSE_SOLVE_LIMIT = 2000

    def __init__(self, net: LayeredNetwork, tau22: float, alpha: float):
        self.net = net
        self.tau22 = float(tau22)
        self.alpha = float(alpha)
        self.n = net.n1
        self._a11 = net.a11()
        self._coupled = tau22 > 0.0 and net.interlink_count > 0
        if self._coupled:
            from scipy.sparse import identity

            self._a12 = net.a12()
            self._a21 = self._a12.T.tocsr()
            self._m = (identity(net.n2, format="csr") - tau22 * net.a22()).tocsc()
            if net.n2 <= self.DENSE_SOLVE_LIMIT:
                from scipy.sparse.linalg import splu

                self._lu = splu(self._m)
                self._cg = None
            else:
                self._lu = None
                from scipy.sparse.linalg import cg

                self._cg = cg

    def _solve(self, b: np.ndarray) -> np.ndarray:
        """Solve (I - tau22*A22) x = b to relative residual <= 1e-10."""
        scale = float(np.linalg.norm(b))
        if scale == 0.0:
            return np.zeros_like(b)
        if self._lu is not None:
            x = self._lu.solve(b)
        else:
            x, info = self._cg(self._m, b, rtol=1e-12, atol=0.0)
            if info != 0:
                raise ConvergenceError("conjugate gradient failed in the inner solve")
        for _ in range(3):
            r = b - self._m @ x
            if np.linalg.norm(r) <= self.SOLVE_RESIDUAL * scale:
                return x
            x = x + (self._lu.solve(r) if self._lu is not None else self._cg(self._m, r, rtol=1e-12, atol=0.0)[0])
        raise ConvergenceError("inner solve could not reach the residual target")

    def __call__(self, v: np.ndarray) -> np.ndarray:
        y = self._a11 @ v
        if self._coupled:
            z = self._a21 @ v
            y = y + (self.tau22 / self.alpha**2) * (self._a12 @ self._solve(z))
        return y


def build_ht_operator(net: LayeredNetwork, tau22: float, alpha: float) -> HtOperator:
    """Threshold operator of dimension n1 for a given layer-2 strength.

    Raises SupercriticalLayerError when tau22 * lambda(A22) >= 1: layer 2 then
    sustains the epidemic on its own and the layer-1 threshold is undefined.
    """
    if tau22 < 0:
        raise ParameterError("tau22 must be non-negative")
    if alpha <= 0:
        raise ParameterError("alpha must be positive")
    if tau22 > 0:
        lam2 = layer_spectral_radius(net.layer2)
        if tau22 * lam2 >= 1.0:
            raise SupercriticalLayerError(
                f"tau22 * lambda(A22) = {tau22 * lam2:.6g} >= 1: layer 2 is "
                "self-sustaining and the layer-1 threshold is undefined"
            )
    return HtOperator(net, tau22, alpha)


def epidemic_threshold(
    net: LayeredNetwork, tau22: float, alpha: float, tol: float = DEFAULT_TOL
) -> float:
    """Layer-1 epidemic threshold tau11c = 1 / rho(H_T)."""
    op = build_ht_operator(net, tau22, alpha)
    rho, _ = spectral_radius(op, net.n1, tol=tol)
    if rho <= 0.0:
        raise ParameterError(
            "threshold undefined: the coupled operator has spectral radius 0 "
            "(layer 1 has no edges and no effective coupling)"
        )
    return 1.0 / rho


def block_spectral_radius(
    net: LayeredNetwork,
    tau11: float,
    tau12: float,
    tau21: float,
    tau22: float,
    tol: float = DEFAULT_TOL,
) -> float:
    """rho of the (n1+n2)-dimensional block matrix [t11*A11, t12*A12; t21*A21, t22*A22],
    computed matrix-free."""
    for name, t in (("tau11", tau11), ("tau12", tau12), ("tau21", tau21), ("tau22", tau22)):
        if t < 0:
            raise ParameterError(f"{name} must be non-negative")
    n1 = net.n1
    a11, a22, a12 = net.a11(), net.a22(), net.a12()
    a21 = a12.T.tocsr()

    def apply(v: np.ndarray) -> np.ndarray:
        v1, v2 = v[:n1], v[n1:]
        y1 = tau11 * (a11 @ v1) + tau12 * (a12 @ v2)
        y2 = tau21 * (a21 @ v1) + tau22 * (a22 @ v2)
        return np.concatenate([y1, y2])

    rho, _ = spectral_radius(apply, net.n_total, tol=tol)
    return rho


def jacobian_leading_eigenvalue(net: LayeredNetwork, params: EpidemicParams) -> float:
    """Leading eigenvalue of the linearized-growth matrix [beta_mn*A_mn] - mu*I.

    Positive means the linearized infection grows (the epidemic spreads);
    negative means it dies out.
    """
    t11, t12, t21, t22 = params.taus()
    rho = block_spectral_radius(net, t11, t12, t21, t22)
    return params.mu * rho - params.mu


@dataclass
class ThresholdCurve:
    """Normalized threshold tau_c1 as a function of normalized layer-2 strength.

    points[i] = (tau2, tau_c1) with tau2 = tau22*lambda(A22) strictly
    increasing in [0, 1) and tau_c1 = tau11c*lambda(A11) non-increasing
    in (0, 1].
    """

    points: list[tuple[float, float]]
    alpha: float
    coupling: float  # omega if known, else the inter-link count
    lambda1: float
    lambda2: float

    _SLACK = 1e-6

    def __post_init__(self):
        taus = [p[0] for p in self.points]
        vals = [p[1] for p in self.points]
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ParameterError("tau2 values must be strictly increasing")
        if taus and (taus[0] < 0 or taus[-1] >= 1):
            raise ParameterError("tau2 values must lie in [0, 1)")
        if any(v <= 0 or v > 1 + self._SLACK for v in vals):
            raise ParameterError("tau_c1 values must lie in (0, 1]")
        if any(b > a + self._SLACK for a, b in zip(vals, vals[1:])):
            raise ParameterError("tau_c1 must be non-increasing in tau2")

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("tau2,tau_c1,omega,alpha,lambda1,lambda2\n")
            for tau2, tau_c1 in self.points:
                fh.write(
                    f"{tau2:.12g},{tau_c1:.12g},{self.coupling:.12g},"
                    f"{self.alpha:.12g},{self.lambda1:.12g},{self.lambda2:.12g}\n"
                )


def threshold_curve(
    net: LayeredNetwork,
    alpha: float,
    tau2_grid: Sequence[float],
    omega: Optional[float] = None,
    tol: float = DEFAULT_TOL,
) -> ThresholdCurve:
    """Normalized threshold curve over a grid of layer-2 strengths.

    For each grid value tau2, sets tau22 = tau2/lambda(A22), computes the
    layer-1 threshold, and records tau_c1 = tau11c*lambda(A11).
    """
    grid = [float(t) for t in tau2_grid]
    if not grid:
        raise ParameterError("tau2 grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterError("tau2 grid must be strictly increasing")
    if grid[0] < 0 or grid[-1] >= 1.0:
        raise ParameterError("tau2 grid values must lie in [0, 1)")
    lam1 = layer_spectral_radius(net.layer1)
    lam2 = layer_spectral_radius(net.layer2)
    if lam1 <= 0 or lam2 <= 0:
        raise ParameterError("both layers need at least one edge to normalize strengths")
    points = []
    for tau2 in grid:
        tau22 = tau2 / lam2
        tau11c = epidemic_threshold(net, tau22, alpha, tol=tol)
        points.append((tau2, tau11c * lam1))
    coupling = omega if omega is not None else float(net.interlink_count)
    return ThresholdCurve(points=points, alpha=alpha, coupling=coupling, lambda1=lam1, lambda2=lam2)
