"""Harmonic extension operators on the box {0,...,N}^d.

Builds the Dirichlet extension (boundary values prescribed), the Neumann
extension (inward normal differences prescribed), odd and even reflections
of face data, the face-by-face decomposition of a box harmonic function
into periodic strip solutions, and the tangential/normal gradient
comparison report those constructions feed.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import lattice
from .halfspace import dirichlet_strip_solve

__all__ = [
    "dirichlet_extension",
    "neumann_extension",
    "odd_reflect",
    "even_reflect",
    "face_decomposition_dirichlet",
    "gradient_comparison",
]

logger = logging.getLogger(__name__)

#: boxes with at most this many vertices use a dense LU factorization
DENSE_SOLVER_LIMIT = 20_000

#: conjugate gradient tolerance for boxes above the dense limit
CG_RTOL = 1e-12

_REFLECT_CONSISTENCY_TOL = 1e-8


def _box_dims(u: np.ndarray):
    d = u.ndim
    if d < 2:
        raise ValueError(f"box arrays need at least 2 axes, got {d}")
    sizes = set(u.shape)
    if len(sizes) != 1:
        raise ValueError(f"box array shape {u.shape} is not cubic")
    N = u.shape[0] - 1
    if N < 2:
        raise ValueError(f"box side length must be at least 2, got {N}")
    return d, N


def _grid_adjacency(shape):
    """Sparse adjacency matrix of the grid graph on prod(shape) vertices,
    C-order flattened."""
    eye_parts = [scipy.sparse.identity(s, format="csr") for s in shape]
    n = int(np.prod(shape))
    out = scipy.sparse.csr_matrix((n, n))
    for axis, s in enumerate(shape):
        if s < 2:
            continue
        ones = np.ones(s - 1)
        step = scipy.sparse.diags([ones, ones], [-1, 1], format="csr")
        parts = list(eye_parts)
        parts[axis] = step
        term = parts[0]
        for block in parts[1:]:
            term = scipy.sparse.kron(term, block, format="csr")
        out = out + term
    return out


def _solver_method(d, N):
    return "dense" if (N + 1) ** d <= DENSE_SOLVER_LIMIT else "iterative"


@lru_cache(maxsize=None)
def _dirichlet_system(d, N, method):
    shape = (N - 1,) * d
    A = _grid_adjacency(shape)
    M = 2 * d * scipy.sparse.identity(A.shape[0], format="csr") - A
    if method == "dense":
        return scipy.linalg.lu_factor(M.toarray())
    return M


def _dirichlet_boundary_rhs(f, d, N):
    rhs = np.zeros((N - 1,) * d)
    inner = [slice(1, N)] * d
    for i in range(d):
        lo = list(inner)
        lo[i] = 0
        hi = list(inner)
        hi[i] = N
        dst_lo = [slice(None)] * d
        dst_lo[i] = 0
        dst_hi = [slice(None)] * d
        dst_hi[i] = N - 2
        rhs[tuple(dst_lo)] += f[tuple(lo)]
        rhs[tuple(dst_hi)] += f[tuple(hi)]
    return rhs


def dirichlet_extension(f: np.ndarray) -> np.ndarray:
    """Solve the interior Laplace equation with boundary values from ``f``.

    ``f`` is a full (N+1,)^d array; only its boundary entries are read and
    they are copied into the result bit for bit.  The interior system is
    symmetric positive definite after boundary elimination and is solved
    by a cached dense LU factorization on small boxes, by conjugate
    gradients above DENSE_SOLVER_LIMIT vertices.
    """
    f = np.asarray(f, dtype=float)
    d, N = _box_dims(f)
    rhs = _dirichlet_boundary_rhs(f, d, N)
    method = _solver_method(d, N)
    system = _dirichlet_system(d, N, method)
    if method == "dense":
        sol = scipy.linalg.lu_solve(system, rhs.ravel())
    else:
        sol, info = scipy.sparse.linalg.cg(
            system, rhs.ravel(), rtol=CG_RTOL, atol=0.0
        )
        if info != 0:
            residual = float(np.linalg.norm(system @ sol - rhs.ravel()))
            raise RuntimeError(
                f"interior solve did not converge (info={info}, "
                f"residual {residual:.3e})"
            )
    out = f.copy()
    out[(slice(1, N),) * d] = sol.reshape((N - 1,) * d)
    return out


@lru_cache(maxsize=None)
def _neumann_system(d, N, method):
    shape = (N - 1,) * d
    A = _grid_adjacency(shape)
    deg = np.asarray(A.sum(axis=1)).ravel()
    M = scipy.sparse.diags(deg) - A
    # gauge: replace the first equation with a pin on the first interior
    # vertex; the dropped balance equation is implied by the others when
    # the data sums to zero
    M = M.tolil()
    M[0, :] = 0.0
    M[0, 0] = 1.0
    if method == "dense":
        return scipy.linalg.lu_factor(M.toarray())
    return scipy.sparse.linalg.splu(M.tocsc())


def neumann_extension(g: np.ndarray, d: int, N: int) -> np.ndarray:
    """Harmonic function whose inward normal differences match ``g``.

    ``g`` lists one value per edge of lattice.normal_edges(d, N), in that
    order, and must sum to zero (no solution exists otherwise).  The
    interior is gauged to mean zero.  Face vertices are filled through
    their unique inward edge; ridge and corner vertices carry no
    constraint and are set, in increasing boundary codimension, to the
    mean of their already filled neighbours.
    """
    if N < 2 or d < 2:
        raise ValueError(f"need d >= 2 and N >= 2, got d={d}, N={N}")
    edges = lattice.normal_edges(d, N)
    g = np.asarray(g, dtype=float)
    if g.shape != (len(edges),):
        raise ValueError(
            f"expected {len(edges)} normal edge values for d={d}, N={N}, "
            f"got shape {g.shape}"
        )
    total = float(g.sum())
    if abs(total) > 1e-12 * max(1.0, float(np.abs(g).max(initial=0.0))):
        raise ValueError(
            f"normal data sums to {total:.3e}; a nonzero total flux admits "
            "no harmonic extension"
        )

    shape = (N - 1,) * d
    heads = np.array([e[1] for e in edges]) - 1
    rhs = np.zeros(shape)
    np.subtract.at(rhs, tuple(heads.T), g)
    flat = rhs.ravel()
    flat[0] = 0.0  # pinned vertex

    method = _solver_method(d, N)
    system = _neumann_system(d, N, method)
    if method == "dense":
        sol = scipy.linalg.lu_solve(system, flat)
    else:
        sol = system.solve(flat)
    sol = sol - sol.mean()

    out = np.full((N + 1,) * d, np.nan)
    out[(slice(1, N),) * d] = sol.reshape(shape)
    for e, value in zip(edges, g):
        out[e[0]] = out[e[1]] - value

    # ridge and corner fill by increasing codimension
    by_codim = {}
    for x in lattice.boundary_vertices(d, N):
        c = sum(1 for xi in x if xi in (0, N))
        if c >= 2:
            by_codim.setdefault(c, []).append(x)
    for c in sorted(by_codim):
        for x in by_codim[c]:
            nbrs = []
            for i, xi in enumerate(x):
                if xi == 0:
                    nbrs.append(x[:i] + (1,) + x[i + 1 :])
                elif xi == N:
                    nbrs.append(x[:i] + (N - 1,) + x[i + 1 :])
            out[x] = np.mean([out[n] for n in nbrs])
    return out


def _reflect_scale(data):
    return max(1.0, float(np.abs(data).max(initial=0.0)))


def odd_reflect(data: np.ndarray, axis: int = 0) -> np.ndarray:
    """Extend face data of length N+1 to a 2N-periodic array odd about 0.

    The fixed points x = 0 and x = N must carry (numerically) zero values,
    otherwise no odd extension exists and a ValueError is raised.
    """
    data = np.asarray(data, dtype=float)
    N = data.shape[axis] - 1
    if N < 1:
        raise ValueError("need at least 2 samples along the reflection axis")
    ends = np.take(data, [0, N], axis=axis)
    worst = float(np.abs(ends).max())
    if worst > _REFLECT_CONSISTENCY_TOL * _reflect_scale(data):
        raise ValueError(
            f"data reaches {worst:.3e} at a fixed point of the odd "
            "reflection; an odd extension forces 0 there"
        )
    sl = [slice(None)] * data.ndim
    sl[axis] = slice(N - 1, 0, -1)
    return np.concatenate([data, -data[tuple(sl)]], axis=axis)


def even_reflect(data: np.ndarray, axis: int = 0) -> np.ndarray:
    """Extend face data of length N+1 to a 2(N-1)-periodic array, even
    about the half-integer mirror between 0 and 1.

    Consistency requires data[1] = data[0] and data[N-1] = data[N] (the
    tangential differences across both mirrors vanish).
    """
    data = np.asarray(data, dtype=float)
    N = data.shape[axis] - 1
    if N < 2:
        raise ValueError("need at least 3 samples along the reflection axis")
    first = np.take(data, [0, 1], axis=axis)
    last = np.take(data, [N - 1, N], axis=axis)
    worst = max(
        float(np.abs(np.diff(first, axis=axis)).max()),
        float(np.abs(np.diff(last, axis=axis)).max()),
    )
    if worst > _REFLECT_CONSISTENCY_TOL * _reflect_scale(data):
        raise ValueError(
            f"tangential difference {worst:.3e} across an even mirror; "
            "an even extension needs equal values there"
        )
    keep = [slice(None)] * data.ndim
    keep[axis] = slice(0, min(N + 1, 2 * N - 2))
    tail = [slice(None)] * data.ndim
    tail[axis] = slice(N - 2, 1, -1)
    return np.concatenate([data[tuple(keep)], data[tuple(tail)]], axis=axis)


def _even_reflect_integer(data: np.ndarray, axis: int = 0) -> np.ndarray:
    """2N-periodic extension even about the integer mirrors 0 and N; any
    face data extends this way, no consistency constraint."""
    data = np.asarray(data, dtype=float)
    N = data.shape[axis] - 1
    sl = [slice(None)] * data.ndim
    sl[axis] = slice(N - 1, 0, -1)
    return np.concatenate([data, data[tuple(sl)]], axis=axis)


def face_decomposition_dirichlet(u: np.ndarray, p):
    """Split a box harmonic function into d periodic strip solutions.

    Strip i reproduces the current remainder's faces x_i in {0, N}; axes
    already handled are extended oddly (so the strip vanishes where earlier
    strips matched the data), later axes evenly about the integer mirrors.
    Returns (strips, certificate); the certificate holds the reconstruction
    residual and each strip's gradient norm over the full boundary edge
    set in the l^p norm.
    """
    u = np.asarray(u, dtype=float)
    d, N = _box_dims(u)
    r = u.copy()
    strips = []
    for i in range(d):
        lo = np.take(r, 0, axis=i)
        hi = np.take(r, N, axis=i)
        for j in range(d):
            if j == i:
                continue
            ax = j if j < i else j - 1
            if j < i:
                lo = odd_reflect(lo, axis=ax)
                hi = odd_reflect(hi, axis=ax)
            else:
                lo = _even_reflect_integer(lo, axis=ax)
                hi = _even_reflect_integer(hi, axis=ax)
        strip = dirichlet_strip_solve(lo, hi, N)
        window = tuple([slice(0, N + 1)] * (d - 1) + [slice(None)])
        w = np.moveaxis(strip[window], -1, i)
        strips.append(w)
        r -= w

    residual = float(np.abs(r).max())
    scale = max(1.0, float(np.abs(u).max()))
    if residual > 1e-8 * scale:
        raise RuntimeError(
            f"face decomposition residual {residual:.3e} exceeds tolerance"
        )
    edges = lattice.full_edge_set(d, N)
    certificate = {
        "reconstruction_residual": residual,
        "gradient_norms": [
            lattice.lp_norm(lattice.edge_gradients(w, edges), p) for w in strips
        ],
    }
    return strips, certificate


def gradient_comparison(u: np.ndarray, p) -> dict:
    """Gradient norms of ``u`` over the tangential, normal, and full
    boundary edge sets, plus the two comparison ratios.

    Ratios with a zero denominator are reported as None.
    """
    u = np.asarray(u, dtype=float)
    d, N = _box_dims(u)
    tan = lattice.lp_norm(lattice.edge_gradients(u, lattice.tangential_edges(d, N)), p)
    nor = lattice.lp_norm(lattice.edge_gradients(u, lattice.normal_edges(d, N)), p)
    full = lattice.lp_norm(lattice.edge_gradients(u, lattice.full_edge_set(d, N)), p)
    return {
        "tan_norm": tan,
        "nor_norm": nor,
        "full_norm": full,
        "ratio_nor_tan": nor / tan if tan > 0 else None,
        "ratio_tan_nor": tan / nor if nor > 0 else None,
    }
