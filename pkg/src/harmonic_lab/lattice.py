"""Lattice geometry, edge sets, discrete differential operators, and norms.

Box functions live on the integer box {0,...,N}^d and are stored as dense
arrays of shape (N+1,)*d, indexed directly by coordinates.  A vertex is a
boundary vertex when at least one coordinate equals 0 or N; otherwise it is
interior.  Oriented edges are (tail, head) pairs of vertices at lattice
distance one.

Periodic (strip) functions keep the height as the last axis, so ``u[..., y]``
is the layer at height y.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

__all__ = [
    "boundary_vertices",
    "interior_vertices",
    "tangential_edges",
    "normal_edges",
    "full_edge_set",
    "discrete_laplacian",
    "laplacian_interior",
    "edge_gradient",
    "edge_gradients",
    "lp_norm",
    "normalized_lp_norm",
    "layer_mean",
]

#: accepted spellings of the maximum norm
INFINITY = "inf"


def _check_box(d, N):
    if d < 2:
        raise ValueError(f"box dimension must be at least 2, got {d}")
    if N < 2:
        raise ValueError(f"box side length must be at least 2, got {N}")


def _is_boundary(x, N):
    return any(c == 0 or c == N for c in x)


def _is_interior(x, N):
    return all(0 < c < N for c in x)


@lru_cache(maxsize=None)
def _boundary_vertices(d, N):
    _check_box(d, N)
    return tuple(
        x for x in itertools.product(range(N + 1), repeat=d) if _is_boundary(x, N)
    )


def boundary_vertices(d: int, N: int) -> list:
    """All vertices of {0..N}^d with some coordinate on a face, in
    lexicographic order."""
    return list(_boundary_vertices(d, N))


def interior_vertices(d: int, N: int) -> list:
    """All vertices of the open box {1..N-1}^d, in lexicographic order."""
    _check_box(d, N)
    return list(itertools.product(range(1, N), repeat=d))


@lru_cache(maxsize=None)
def _all_box_edges(d, N):
    # every oriented nearest-neighbour edge with both endpoints in the box
    edges = []
    for tail in itertools.product(range(N + 1), repeat=d):
        for i in range(d):
            for s in (-1, 1):
                c = tail[i] + s
                if 0 <= c <= N:
                    head = tail[:i] + (c,) + tail[i + 1 :]
                    edges.append((tail, head))
    edges.sort()
    return tuple(edges)


@lru_cache(maxsize=None)
def _tangential_edges(d, N):
    _check_box(d, N)
    return tuple(
        e
        for e in _all_box_edges(d, N)
        if _is_boundary(e[0], N) and _is_boundary(e[1], N)
    )


@lru_cache(maxsize=None)
def _normal_edges(d, N):
    _check_box(d, N)
    return tuple(
        e
        for e in _all_box_edges(d, N)
        if _is_boundary(e[0], N) and _is_interior(e[1], N)
    )


@lru_cache(maxsize=None)
def _full_edge_set(d, N):
    _check_box(d, N)
    # midpoint outside the closed inner box [1, N-1]^d; test on 2*midpoint to
    # stay in integers
    return tuple(
        (tail, head)
        for tail, head in _all_box_edges(d, N)
        if any(t + h < 2 or t + h > 2 * N - 2 for t, h in zip(tail, head))
    )


def tangential_edges(d: int, N: int) -> list:
    """Oriented edges with both endpoints on the boundary shell."""
    return list(_tangential_edges(d, N))


def normal_edges(d: int, N: int) -> list:
    """Oriented edges from a boundary vertex into the open interior."""
    return list(_normal_edges(d, N))


def full_edge_set(d: int, N: int) -> list:
    """Oriented edges whose midpoint lies outside the closed inner box.

    This is the union of the tangential edges, the normal edges, and the
    reversals of the normal edges.
    """
    return list(_full_edge_set(d, N))


def _resolve_periodic(periodic_axes, ndim):
    if periodic_axes is True:
        return tuple(range(ndim))
    if periodic_axes is False or periodic_axes is None:
        return ()
    return tuple(int(a) % ndim for a in periodic_axes)


def discrete_laplacian(u: np.ndarray, x, periodic_axes=()) -> float:
    """Neighbour sum minus 2d times the centre value at vertex ``x``.

    Axes listed in ``periodic_axes`` wrap modulo the array length; on the
    remaining axes every neighbour must exist or a ValueError names the
    missing vertex.
    """
    u = np.asarray(u)
    d = u.ndim
    x = tuple(int(c) for c in x)
    if len(x) != d:
        raise ValueError(f"vertex {x} has wrong dimension for a {d}-d grid")
    periodic = _resolve_periodic(periodic_axes, d)
    total = -2 * d * u[x]
    for i in range(d):
        for s in (-1, 1):
            c = x[i] + s
            if i in periodic:
                c %= u.shape[i]
            elif not 0 <= c < u.shape[i]:
                nbr = x[:i] + (c,) + x[i + 1 :]
                raise ValueError(f"neighbour {nbr} of {x} lies outside the domain")
            total = total + u[x[:i] + (c,) + x[i + 1 :]]
    return total


def laplacian_interior(u: np.ndarray, periodic_axes=()) -> np.ndarray:
    """Vectorized Laplacian at every vertex that is interior on the
    non-periodic axes.

    For a box array of shape (N+1,)*d the result has shape (N-1,)*d; periodic
    axes keep their full extent.
    """
    u = np.asarray(u)
    d = u.ndim
    periodic = _resolve_periodic(periodic_axes, d)
    core = tuple(
        slice(None) if ax in periodic else slice(1, -1) for ax in range(d)
    )
    acc = -2.0 * d * u[core]
    for ax in range(d):
        if ax in periodic:
            acc = acc + np.roll(u, -1, axis=ax)[core]
            acc = acc + np.roll(u, 1, axis=ax)[core]
        else:
            hi = list(core)
            hi[ax] = slice(2, None)
            lo = list(core)
            lo[ax] = slice(0, -2)
            acc = acc + u[tuple(hi)] + u[tuple(lo)]
    return acc


def edge_gradient(u: np.ndarray, e) -> float:
    """Value at the head minus value at the tail of an oriented edge."""
    tail, head = e
    u = np.asarray(u)
    for v in (tail, head):
        if any(not 0 <= c < n for c, n in zip(v, u.shape)):
            raise ValueError(f"edge endpoint {tuple(v)} lies outside the domain")
    return u[tuple(head)] - u[tuple(tail)]


def edge_gradients(u: np.ndarray, edges) -> np.ndarray:
    """Gradients of ``u`` along a list of oriented edges, as one array."""
    u = np.asarray(u)
    if len(edges) == 0:
        return np.zeros(0, dtype=u.dtype)
    tails = np.array([e[0] for e in edges])
    heads = np.array([e[1] for e in edges])
    return u[tuple(heads.T)] - u[tuple(tails.T)]


def _is_max_norm(p) -> bool:
    if isinstance(p, str):
        if p == INFINITY:
            return True
        raise ValueError(f"unknown norm exponent {p!r}")
    return math.isinf(p)


def lp_norm(values, p) -> float:
    """Unnormalized l^p norm: (sum |f|^p)^(1/p), plain max for p = "inf"."""
    v = np.abs(np.asarray(values, dtype=float))
    if v.size == 0:
        return 0.0
    if _is_max_norm(p):
        return float(v.max())
    p = float(p)
    if p < 1:
        raise ValueError(f"norm exponent must be at least 1, got {p}")
    return float((v**p).sum() ** (1.0 / p))


def normalized_lp_norm(values, p, h: float, d: int | None = None) -> float:
    """Mesh-weighted norm (h^d sum |f|^p)^(1/p) for finite p.

    ``d`` defaults to the number of array axes; ``h`` must be pi over a
    positive integer.
    """
    if _is_max_norm(p):
        raise ValueError("normalized norm is defined for finite p only")
    p = float(p)
    if p < 1:
        raise ValueError(f"norm exponent must be at least 1, got {p}")
    L = round(math.pi / h)
    if L < 1 or abs(h * L - math.pi) > 1e-9:
        raise ValueError(f"mesh size {h} is not pi over a positive integer")
    v = np.abs(np.asarray(values, dtype=float))
    if d is None:
        d = v.ndim
    return float((h**d * (v**p).sum()) ** (1.0 / p))


def layer_mean(u: np.ndarray, y: int) -> float:
    """Arithmetic mean over the layer at height ``y`` (last axis)."""
    u = np.asarray(u)
    if not 0 <= y < u.shape[-1]:
        raise ValueError(f"layer {y} out of range 0..{u.shape[-1] - 1}")
    return float(np.mean(u[..., y]))
