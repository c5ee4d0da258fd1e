"""
Chebyshev-Lobatto interpolation on [0, 1]
"""
import numpy as np
from scipy.interpolate import BarycentricInterpolator

from induced_map.services import chebyshev_grid


def lobatto_nodes(count):
    """Ascending Chebyshev-Lobatto nodes x_j = (1 - cos(pi j/(N-1)))/2"""
    return chebyshev_grid(count)


def barycentric_weights(count):
    weights = (-1.0) ** np.arange(count)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return weights


def differentiation_matrix(nodes):
    """D with (D f)(x_i) = p'(x_i) for the interpolant p of f at the nodes"""
    count = len(nodes)
    weights = barycentric_weights(count)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (weights[None, :] / weights[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def cardinal_matrix(nodes, points):
    """
    Values of the Lagrange cardinal functions at arbitrary points

    Args:
        nodes: interpolation nodes (N,)
        points: evaluation points (P,)

    Returns:
        (P, N) array C with p(points) = C @ f(nodes)
    """
    points = np.atleast_1d(np.asarray(points, dtype=float))
    if len(nodes) == 1:
        return np.ones((points.size, 1))
    return BarycentricInterpolator(nodes, np.eye(len(nodes)))(points).reshape(points.size, len(nodes))
