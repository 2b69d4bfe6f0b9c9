"""Small shared numerical helpers: Hermitian products, direction sets, nets."""

from __future__ import annotations

import numpy as np

DEFAULT_SEED = 20260809


def herm(u, v):
    """Hermitian inner product <u, v> = sum_i u_i * conj(v_i), linear in u."""
    return np.sum(np.asarray(u) * np.conj(np.asarray(v)), axis=-1)


def cnorm(u):
    return np.sqrt(np.sum(np.abs(np.asarray(u)) ** 2, axis=-1))


def as_cpoint(z, dim=None):
    """Coerce to a complex (d,) vector and sanity-check finiteness."""
    z = np.asarray(z, dtype=complex)
    if z.ndim != 1:
        raise ValueError(f"expected a 1-d point, got shape {z.shape}")
    if dim is not None and z.shape[0] != dim:
        raise ValueError(f"dimension mismatch: point has {z.shape[0]}, domain has {dim}")
    if not np.all(np.isfinite(z.view(float))):
        raise ValueError("point has non-finite components")
    return z


def real_embed(z):
    """C^d -> R^{2d} as (re_1..re_d, im_1..im_d)."""
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)


def real_lift(x):
    """R^{2d} -> C^d inverse of real_embed."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1] // 2
    return x[..., :d] + 1j * x[..., d:]


def seeded_rng(seed=None):
    return np.random.default_rng(DEFAULT_SEED if seed is None else seed)


def unit_directions(n, d, seed=None, include_axes=True):
    """n complex directions in C^d of unit Euclidean norm, deterministic for a seed.

    Includes +-e_j and +-i e_j first when include_axes is set.
    """
    rng = seeded_rng(seed)
    dirs = []
    if include_axes:
        eye = np.eye(d, dtype=complex)
        for j in range(d):
            dirs.extend([eye[j], -eye[j], 1j * eye[j], -1j * eye[j]])
    while len(dirs) < n:
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        nv = cnorm(v)
        if nv > 1e-9:
            dirs.append(v / nv)
    return np.array(dirs[:n])


def grid_sphere_net(d_real, m):
    """Normalized integer-grid net on S^{d_real-1} with a provable covering radius.

    Every unit vector is within angle asin(sqrt(d_real)/(2m)) of some net
    direction: scale u to the cube surface (sup-norm m) and round; the rounding
    error has 2-norm at most sqrt(d_real)/2 against a vector of norm >= m.
    Returns (directions, covering_radius_bound).
    """
    rng = range(-m, m + 1)
    pts = np.array(np.meshgrid(*([list(rng)] * d_real), indexing="ij"), dtype=float)
    pts = pts.reshape(d_real, -1).T
    norms = np.linalg.norm(pts, axis=1)
    keep = norms > 0.5
    # only cube-surface points are needed for coverage
    surface = np.max(np.abs(pts), axis=1) >= m - 0.5
    pts = pts[keep & surface]
    pts = pts / np.linalg.norm(pts, axis=1)[:, None]
    delta = float(np.arcsin(min(1.0, np.sqrt(d_real) / (2.0 * m))))
    return pts, delta


def phase_grid(n):
    th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return np.exp(1j * th)


def arctanh_safe(x):
    """arctanh clipped away from 1; values beyond ~18.4 are saturated."""
    x = np.clip(x, -1.0 + 1e-16, 1.0 - 1e-16)
    return np.arctanh(x)
