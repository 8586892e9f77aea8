"""
Euclidean projections onto the feasible sets of the saddle-point blocks and
lattice grids over the truncated simplex.
"""
import itertools

import numpy as np


def project_simplex(v, z=1.):
    """
    Projection of v onto the simplex scaled by z:
        P(v; z) = argmin_{w >= 0, sum(w) = z} ||w - v||^2
    computed by sorting (water-filling).
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    n_features = v.size
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - z
    ind = np.arange(n_features) + 1
    cond = u - cssv / ind > 0
    rho = np.count_nonzero(cond)
    theta = cssv[rho - 1] / rho
    return np.maximum(v - theta, 0)


def project_truncated_simplex(v, floor):
    """
    Euclidean projection onto {z : sum(z) = 1, z_i >= floor}.

    Substituting z = floor + w reduces the problem to the projection of
    v - floor onto the simplex of mass 1 - dim * floor.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    mass = 1. - v.size * floor
    if mass <= 0:
        raise ValueError("Truncated simplex is empty: dim * exp(-L) = "
                         f"{v.size * floor:.6g} >= 1")
    return floor + project_simplex(v - floor, mass)


def project_ball(v, radius):
    """
    Euclidean projection onto the ball of given radius centered at 0.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    nrm = np.linalg.norm(v)
    if nrm > radius:
        return v * (radius / nrm)
    return v.copy()


def project_box(v, bound):
    """
    Euclidean projection onto the box [-bound, bound]^dim.
    """
    return np.clip(np.asarray(v, dtype=np.float64).ravel(), -bound, bound)


def _compositions(total, parts):
    """ All tuples of `parts` nonnegative integers summing to `total` """
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    comps = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        edges = (-1, ) + bars + (total + parts - 1, )
        comps.append([edges[i + 1] - edges[i] - 1 for i in range(parts)])
    return np.array(comps, dtype=np.int64)


def simplex_grid(dim, floor, resolution):
    """
    Lattice points of the truncated simplex {z : sum(z) = 1, z_i >= floor}
    with l1 distance between neighbouring points at most `resolution`.

    Returns
    -------
    points : np.ndarray
        Array of shape (Npoints, dim).
    """
    mass = 1. - dim * floor
    if mass <= 0:
        raise ValueError("Truncated simplex is empty")
    if resolution <= 0:
        raise ValueError("Grid resolution must be positive")
    if dim == 1:
        return np.ones((1, 1))
    if resolution > 2 * mass:
        raise ValueError(f"Grid resolution {resolution:.4g} is coarser than "
                         f"the truncated simplex (l1 diameter {2 * mass:.4g})")
    num = int(np.ceil(2 * mass / resolution - 1e-12))
    comps = _compositions(num, dim)
    return floor + mass * comps / num
