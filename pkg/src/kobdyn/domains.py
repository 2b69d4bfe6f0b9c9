"""Bounded convex domains in C^d and their Euclidean boundary queries.

Domains are given by analytic convex defining functions rho with
Omega = {rho < 0}.  Implemented kinds: balls, generalized ellipsoids
sum |z_i|^(2 m_i) < 1, affine images, and smooth intersections.  All types
are immutable and every operation is pure, so batch use from multiple
threads is safe.

Conventions
-----------
* Hermitian product <u, v> = sum u_i conj(v_i).
* ``gradient`` returns the complex vector g with D rho[w] = Re <w, g>;
  the inward unit normal at a boundary point is -g/|g|.
* Ray exits, boundary projections and support clouds are computed by
  vectorized bisection along rays, which convexity makes reliable: a ray
  from an interior point crosses the boundary exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .util import (as_cpoint, cnorm, herm, grid_sphere_net, phase_grid,
                   real_embed, real_lift, seeded_rng, unit_directions)

BOUNDARY_RTOL = 1e-9          # boundary tolerance, relative to diameter
HYPERPLANE_ANGLE_TOL = 1e-6   # hyperplane comparison default
GRAD_DEGENERATE = 1e-10


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class AffineMap:
    """Invertible complex affine map z -> linear @ z + offset."""

    linear: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=complex)
        off = np.asarray(self.offset, dtype=complex)
        if lin.ndim != 2 or lin.shape[0] != lin.shape[1]:
            raise DomainError("linear part must be a square matrix")
        if off.shape != (lin.shape[0],):
            raise DomainError("offset dimension mismatch")
        cond = np.linalg.cond(lin)
        if not np.isfinite(cond):
            raise DomainError("linear part is singular")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "offset", off)

    @property
    def dim(self):
        return self.linear.shape[0]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return z @ self.linear.T + self.offset

    def inverse(self) -> "AffineMap":
        inv = np.linalg.inv(self.linear)
        return AffineMap(inv, -inv @ self.offset)

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self after other: z -> self(other(z))."""
        return AffineMap(self.linear @ other.linear,
                         self.linear @ other.offset + self.offset)

    @staticmethod
    def identity(d) -> "AffineMap":
        return AffineMap(np.eye(d, dtype=complex), np.zeros(d, dtype=complex))

    def condition_number(self):
        return float(np.linalg.cond(self.linear))


@dataclass(frozen=True)
class BoundaryPoint:
    point: np.ndarray
    inward_normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", as_cpoint(self.point))
        n = as_cpoint(self.inward_normal)
        nn = cnorm(n)
        if abs(nn - 1.0) > 1e-12:
            n = n / nn
        object.__setattr__(self, "inward_normal", n)


@dataclass(frozen=True)
class ComplexHyperplane:
    """H = { z : <z - anchor, normal> = 0 } with a unit complex normal.

    The representation is equivalent under unit-modulus rescaling of the
    normal and translation of the anchor within H.
    """

    anchor: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "anchor", as_cpoint(self.anchor))
        n = as_cpoint(self.normal)
        nn = cnorm(n)
        if nn < 1e-14:
            raise DomainError("degenerate hyperplane normal")
        object.__setattr__(self, "normal", n / nn)

    def offset_of(self, z):
        """Complex defect <z - anchor, normal>; zero exactly on H."""
        return herm(np.asarray(z, dtype=complex) - self.anchor, self.normal)

    def normal_angle(self, other: "ComplexHyperplane") -> float:
        c = abs(herm(self.normal, other.normal))
        return float(np.arccos(min(1.0, c)))

    def anchor_offsets(self, other: "ComplexHyperplane"):
        return (abs(other.offset_of(self.anchor)), abs(self.offset_of(other.anchor)))

    def same_as(self, other: "ComplexHyperplane", tol=HYPERPLANE_ANGLE_TOL) -> bool:
        if self.normal_angle(other) >= tol:
            return False
        a, b = self.anchor_offsets(other)
        return a < tol and b < tol


class ConvexDomain:
    """Base class; subclasses provide value/gradient and certified bounds."""

    dim: int

    # -- defining function ------------------------------------------------

    def value(self, z):
        """rho(z), vectorized over leading axes of z with shape (..., d)."""
        raise NotImplementedError

    def gradient(self, z):
        """Complex gradient g with D rho[w] = Re <w, g>."""
        raise NotImplementedError

    def interior_point(self):
        raise NotImplementedError

    def bounding_ball(self):
        """(center, radius) of a certified Euclidean ball containing the domain."""
        raise NotImplementedError

    # -- generic machinery -------------------------------------------------

    @property
    def diameter(self):
        return 2.0 * self.bounding_ball()[1]

    @property
    def boundary_tol(self):
        return BOUNDARY_RTOL * self.diameter

    def contains(self, z, return_flag=False):
        """Membership with margin; boundary-ambiguous points report False.

        With ``return_flag`` the second return value marks points whose
        defining-function value is within tolerance of zero.
        """
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.dim:
            raise DomainError(f"dimension mismatch: {z.shape[-1]} vs {self.dim}")
        val = self.value(z)
        scale = self._value_scale()
        inside = val < -self.boundary_tol * scale
        ambiguous = np.abs(val) <= self.boundary_tol * scale
        inside = np.where(ambiguous, False, inside)
        if return_flag:
            return inside, ambiguous
        return inside

    def _value_scale(self):
        """Rough |rho| scale near the boundary, for tolerance normalization."""
        return 1.0

    def ray_exit(self, z, dirs, rtol=1e-13, certify=True):
        """Exit parameters of rays z + t*dirs, t > 0, by vectorized bisection.

        Returns (t_inner, t_outer): certified inside/outside bisection
        endpoints for each direction.  z must be interior.
        """
        z = as_cpoint(z, self.dim)
        dirs = np.asarray(dirs, dtype=complex)
        single = dirs.ndim == 1
        if single:
            dirs = dirs[None, :]
        n = dirs.shape[0]
        if self.value(z) >= 0:
            raise DomainError("ray origin is not interior")
        c, R = self.bounding_ball()
        # certified upper bound for exit parameter along each unit-ish ray
        dn = cnorm(dirs)
        if np.any(dn < 1e-14):
            raise DomainError("zero ray direction")
        t_hi = np.full(n, 1.0) * (cnorm(z - c) + R + 1.0) / dn * 1.001
        t_lo = np.zeros(n)
        # bisection: rho(z + t d) < 0 at t_lo, >= 0 at t_hi
        steps = int(np.ceil(np.log2(np.max(t_hi) / max(rtol, 1e-16)))) + 4
        steps = min(max(steps, 40), 80)
        for _ in range(steps):
            t_mid = 0.5 * (t_lo + t_hi)
            vals = self.value(z[None, :] + t_mid[:, None] * dirs)
            inside = vals < 0
            t_lo = np.where(inside, t_mid, t_lo)
            t_hi = np.where(inside, t_hi, t_mid)
        if certify and np.any(t_lo <= 0):
            # extremely thin slice; nudge with one more halving pass
            bad = t_lo <= 0
            t_lo = np.where(bad, 0.5 * t_hi, t_lo)
            vals = self.value(z[None, :] + t_lo[:, None] * dirs)
            if np.any(vals[bad] >= 0):
                raise DomainError("bisection failed to certify an interior point")
        if single:
            return float(t_lo[0]), float(t_hi[0])
        return t_lo, t_hi

    def boundary_point_along(self, z, direction):
        """Boundary point hit by the ray from z along direction."""
        t_in, t_out = self.ray_exit(z, direction)
        x = as_cpoint(z, self.dim) + 0.5 * (t_in + t_out) * np.asarray(direction)
        return x

    def inward_normal(self, x):
        """Unit inward normal -grad/|grad| at a boundary point x."""
        x = as_cpoint(x, self.dim)
        g = self.gradient(x)
        gn = cnorm(g)
        if gn < GRAD_DEGENERATE:
            raise DomainError("degenerate boundary point: gradient vanishes")
        return -g / gn

    def boundary_projection(self, z, max_iter=1000, tol=None):
        """Closest boundary point to an interior z, with distance.

        Fixed-point iteration on the outward-normal direction with an Armijo
        style damping, certified at exit by the supporting hyperplane through
        the returned point: its distance from z lower-bounds the true
        boundary distance, so the gap certifies near-optimality.
        Returns (BoundaryPoint, distance, gap).
        """
        z = as_cpoint(z, self.dim)
        if not bool(self.contains(z)):
            raise DomainError("boundary_projection requires an interior point")
        tol = tol if tol is not None else 1e-12 * self.diameter
        g = self.gradient(z)
        gn = cnorm(g)
        u = g / gn if gn > GRAD_DEGENERATE else unit_directions(1, self.dim)[0]
        x = self.boundary_point_along(z, u)
        best = None
        damping = 1.0
        for _ in range(max_iter):
            n = self.inward_normal(x)
            dist = cnorm(x - z)
            hyp = float(np.real(herm(z - x, n)))  # distance to supporting plane
            if best is None or dist < best[1]:
                best = (x, dist, dist - hyp)
            if dist - hyp <= tol:
                break
            u_new = -n
            u = u_new if damping >= 1.0 else (damping * u_new + (1 - damping) * u)
            u = u / cnorm(u)
            x_new = self.boundary_point_along(z, u)
            if cnorm(x_new - z) > dist:
                damping = max(0.25 * damping, 1e-3)
            x = x_new
        x, dist, gap = best
        bp = BoundaryPoint(x, self.inward_normal(x))
        return bp, float(dist), float(max(gap, 0.0))

    def boundary_distance_estimate(self, z, n_dirs=128, seed=None):
        """Cheap upper estimate of d_Euc(z, boundary): min ray exit over a fan."""
        dirs = unit_directions(n_dirs, self.dim, seed=seed)
        t_in, t_out = self.ray_exit(z, dirs)
        return float(np.min(t_out))

    def boundary_distance_lower(self, z, m=4):
        """Certified lower bound on d_Euc(z, boundary).

        Uses a normalized integer-grid net with covering radius delta and the
        convexity of the reciprocal radial function: the true minimum exit is
        at least (cos delta - sin delta) times the sampled minimum.
        """
        z = as_cpoint(z, self.dim)
        net, delta = grid_sphere_net(2 * self.dim, m)
        if np.cos(delta) - np.sin(delta) <= 0.0:
            raise DomainError("net too coarse for a certified bound")
        dirs = real_lift(net)
        t_in, _ = self.ray_exit(z, dirs)
        return float(np.min(t_in) * (np.cos(delta) - np.sin(delta)))

    def complex_tangent_hyperplane(self, x) -> ComplexHyperplane:
        """Complex affine hyperplane tangent to the boundary at x."""
        return ComplexHyperplane(x, -self.inward_normal(x))

    def same_complex_face(self, x, y, tol=HYPERPLANE_ANGLE_TOL) -> bool:
        hx = self.complex_tangent_hyperplane(x)
        hy = self.complex_tangent_hyperplane(y)
        return hx.same_as(hy, tol=tol)

    def sample_interior(self, n, seed=None):
        """Deterministic interior sample via rays from the interior point."""
        rng = seeded_rng(seed)
        p = self.interior_point()
        dirs = unit_directions(n, self.dim, seed=seed, include_axes=False)
        t_in, _ = self.ray_exit(p, dirs)
        radii = rng.uniform(0.0, 0.985, size=n)
        return p[None, :] + (radii * t_in)[:, None] * dirs

    def sample_boundary(self, n, seed=None):
        """Deterministic boundary sample: ray exits from the interior point."""
        p = self.interior_point()
        dirs = unit_directions(n, self.dim, seed=seed, include_axes=False)
        t_in, t_out = self.ray_exit(p, dirs)
        return p[None, :] + (0.5 * (t_in + t_out))[:, None] * dirs

    def uniform_inradius(self, n_samples=64, n_verify=512, seed=None, safety=0.9):
        """Largest certified r (with 0.9 safety) such that x + r n(x) stays inside.

        Per boundary sample x the admissible travel along the inward normal is
        capped where x stops being the nearest boundary point of x + t n(x)
        (sampled minimization of the boundary-distance estimate); the returned
        value is ``safety`` times the sampled minimum, then verified on a
        denser sample with local perturbations.
        """
        xs = self.sample_boundary(n_samples, seed=seed)
        t_star = []
        for x in xs:
            nrm = self.inward_normal(x)
            t_hi, _ = self.ray_exit(x + 1e-9 * self.diameter * nrm, nrm)
            lo, hi = 0.0, t_hi
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                p = x + mid * nrm
                if self.value(p) < 0 and \
                        self.boundary_distance_estimate(p, n_dirs=96, seed=seed) >= mid * (1 - 5e-3):
                    lo = mid
                else:
                    hi = mid
            t_star.append(lo)
        r = safety * float(np.min(t_star))
        # verification pass: dense boundary sample plus tangential perturbations
        ys = self.sample_boundary(n_verify, seed=(seed or 0) + 1)
        probes = [ys]
        rng = seeded_rng(seed)
        jitter = rng.standard_normal(ys.shape) + 1j * rng.standard_normal(ys.shape)
        p = self.interior_point()
        for eps in (1e-3, 1e-2):
            moved = ys + eps * self.diameter * jitter
            # re-project onto the boundary along rays from the interior point
            dirs = moved - p[None, :]
            dirs = dirs / cnorm(dirs)[:, None]
            t_in, t_out = self.ray_exit(p, dirs)
            probes.append(p[None, :] + (0.5 * (t_in + t_out))[:, None] * dirs)
        for batch in probes:
            normals = np.array([self.inward_normal(x) for x in batch])
            inside = self.value(batch + r * normals) < 0
            if not np.all(inside):
                raise DomainError("uniform inradius verification failed; "
                                  "inconsistent domain data")
        return r

    # hook used by the metric layer; automorphism kinds register themselves
    def slice_domain(self, p, basis):
        """Lower-dimensional slice {zeta : p + basis @ zeta in domain}."""
        return SlicedDomain(self, as_cpoint(p, self.dim), np.asarray(basis, dtype=complex))


class Ball(ConvexDomain):
    """Euclidean ball of given center and radius."""

    def __init__(self, center, radius, dim=None):
        center = np.asarray(center, dtype=complex)
        if center.ndim == 0 and dim is not None:
            center = np.full(dim, complex(center))
        self.center = as_cpoint(center)
        self.radius = float(radius)
        if self.radius <= 0:
            raise DomainError("radius must be positive")
        self.dim = self.center.shape[0]

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return np.sum(np.abs(z - self.center) ** 2, axis=-1) - self.radius ** 2

    def gradient(self, z):
        return 2.0 * (np.asarray(z, dtype=complex) - self.center)

    def interior_point(self):
        return self.center.copy()

    def bounding_ball(self):
        return self.center.copy(), self.radius

    def _value_scale(self):
        return 2.0 * self.radius  # |grad| on the boundary

    def __repr__(self):
        return f"Ball(center={self.center}, radius={self.radius})"


class GeneralizedEllipsoid(ConvexDomain):
    """Domain sum_i |z_i|^(2 m_i) < 1 for positive integer exponents m_i."""

    def __init__(self, exponents):
        exps = tuple(int(m) for m in exponents)
        if not exps or any(m < 1 for m in exps):
            raise DomainError("exponents must be positive integers")
        self.exponents = exps
        self.dim = len(exps)
        self._m = np.array(exps, dtype=float)

    @property
    def unit_block(self):
        """Indices with exponent one (the ball block)."""
        return tuple(i for i, m in enumerate(self.exponents) if m == 1)

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return np.sum(np.abs(z) ** (2.0 * self._m), axis=-1) - 1.0

    def gradient(self, z):
        z = np.asarray(z, dtype=complex)
        a = np.abs(z)
        with np.errstate(invalid="ignore"):
            pw = np.where(a > 0, a ** (2.0 * self._m - 2.0), 0.0)
        return 2.0 * self._m * pw * z

    def interior_point(self):
        return np.zeros(self.dim, dtype=complex)

    def bounding_ball(self):
        return np.zeros(self.dim, dtype=complex), float(np.sqrt(self.dim))

    def _value_scale(self):
        return 2.0

    def __repr__(self):
        return f"GeneralizedEllipsoid(exponents={self.exponents})"


class AffineImage(ConvexDomain):
    """Image A(base) of a convex domain under an invertible affine map."""

    def __init__(self, map: AffineMap, base: ConvexDomain):
        if map.dim != base.dim:
            raise DomainError("affine map and base dimension mismatch")
        self.map = map
        self.base = base
        self.dim = base.dim
        self._inv = map.inverse()
        self._inv_H = self._inv.linear.conj().T

    def value(self, z):
        return self.base.value(self._inv(np.asarray(z, dtype=complex)))

    def gradient(self, z):
        g = self.base.gradient(self._inv(np.asarray(z, dtype=complex)))
        return g @ self._inv_H.T  # (L^{-1})^H g, vectorized over rows

    def interior_point(self):
        return self.map(self.base.interior_point())

    def bounding_ball(self):
        c, R = self.base.bounding_ball()
        return self.map(c), R * float(np.linalg.norm(self.map.linear, 2))

    def _value_scale(self):
        return self.base._value_scale() / max(np.linalg.norm(self.map.linear, 2), 1e-30)

    def __repr__(self):
        return f"AffineImage({self.map.linear.tolist()}, {self.base!r})"


class SmoothIntersection(ConvexDomain):
    """Intersection of convex domains via the max of defining functions.

    The defining function is C^1 wherever a single constraint is active; a
    degenerate-gradient error is raised at corner points where two boundaries
    meet within tolerance.
    """

    def __init__(self, parts):
        parts = list(parts)
        if len(parts) < 2:
            raise DomainError("intersection needs at least two parts")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise DomainError("intersection parts have mismatched dimensions")
        self.parts = parts
        self.dim = parts[0].dim

    def value(self, z):
        vals = np.stack([p.value(z) / p._value_scale() for p in self.parts], axis=0)
        return np.max(vals, axis=0)

    def gradient(self, z):
        z = np.asarray(z, dtype=complex)
        vals = np.array([p.value(z) / p._value_scale() for p in self.parts])
        order = np.argsort(vals)[::-1]
        top, second = order[0], order[1]
        if vals[top] - vals[second] < 1e-10:
            raise DomainError("degenerate point: two constraints active")
        return self.parts[top].gradient(z) / self.parts[top]._value_scale()

    @cached_property
    def _interior(self):
        from scipy.optimize import minimize

        def f(x):
            return float(self.value(real_lift(x)))

        x0 = real_embed(np.mean([p.interior_point() for p in self.parts], axis=0))
        res = minimize(f, x0, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        z = real_lift(res.x)
        if self.value(z) >= 0:
            raise DomainError("intersection appears empty")
        return z

    def interior_point(self):
        return self._interior.copy()

    def bounding_ball(self):
        balls = [p.bounding_ball() for p in self.parts]
        best = min(balls, key=lambda cr: cr[1])
        return best

    def __repr__(self):
        return f"SmoothIntersection({self.parts!r})"


class SlicedDomain(ConvexDomain):
    """Pullback {zeta in C^k : p + basis @ zeta in parent}; basis columns in C^d."""

    def __init__(self, parent: ConvexDomain, p, basis):
        self.parent = parent
        self.p = as_cpoint(p, parent.dim)
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[0] != parent.dim:
            raise DomainError("basis must be d x k")
        self.basis = basis
        self.dim = basis.shape[1]
        if not bool(parent.contains(self.p)):
            raise DomainError("slice base point must be interior")

    def _embed(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return self.p + zeta @ self.basis.T

    def value(self, zeta):
        return self.parent.value(self._embed(zeta))

    def gradient(self, zeta):
        g = self.parent.gradient(self._embed(zeta))
        return g @ np.conj(self.basis)

    def interior_point(self):
        return np.zeros(self.dim, dtype=complex)

    def bounding_ball(self):
        c, R = self.parent.bounding_ball()
        smin = np.linalg.svd(self.basis, compute_uv=False)[-1]
        reach = (R + cnorm(self.p - c)) / max(smin, 1e-30)
        return np.zeros(self.dim, dtype=complex), float(reach)


# ---------------------------------------------------------------------------
# module-level operation aliases matching the operation contracts


def contains(domain: ConvexDomain, z, return_flag=False):
    return domain.contains(as_cpoint(z, domain.dim), return_flag=return_flag)


def boundary_projection(domain: ConvexDomain, z):
    return domain.boundary_projection(z)


def inward_normal(domain: ConvexDomain, x):
    return domain.inward_normal(x)


def complex_tangent_hyperplane(domain: ConvexDomain, x):
    return domain.complex_tangent_hyperplane(x)


def same_complex_face(domain: ConvexDomain, x, y, tol=HYPERPLANE_ANGLE_TOL):
    return domain.same_complex_face(x, y, tol=tol)


def uniform_inradius(domain: ConvexDomain, **kw):
    return domain.uniform_inradius(**kw)


def local_hausdorff_distance(domain1: ConvexDomain, domain2: ConvexDomain, R,
                             origin=None, n_rays=4096, n_support=1024, seed=None):
    """Hausdorff distance between the domains clipped to the R-ball at origin.

    Convexity reduces the Hausdorff distance to the sup-norm gap of support
    functions; supports are estimated from ray-exit boundary clouds computed
    with a shared direction fan, and the discretization error is reported by
    comparing against a half-resolution fan.
    Returns (estimate, discretization_error).
    """
    if R <= 0:
        raise DomainError("clip radius must be positive")
    d = domain1.dim
    if domain2.dim != d:
        raise DomainError("dimension mismatch")
    origin = np.zeros(d, dtype=complex) if origin is None else as_cpoint(origin, d)
    clip = Ball(origin, R)
    for dom in (domain1, domain2):
        if not (bool(dom.contains(origin)) and cnorm(origin) < R):
            raise DomainError("origin must be interior to both clipped domains")

    rays = unit_directions(n_rays, d, seed=seed, include_axes=True)
    support_dirs = unit_directions(n_support, d, seed=(seed or 0) + 7,
                                   include_axes=True)
    sd_real = real_embed(support_dirs)

    def cloud_support(dom, ray_set):
        t_dom_in, t_dom_out = dom.ray_exit(origin, ray_set)
        t_clip_in, t_clip_out = clip.ray_exit(origin, ray_set)
        t = np.minimum(0.5 * (t_dom_in + t_dom_out), 0.5 * (t_clip_in + t_clip_out))
        cloud = origin[None, :] + t[:, None] * ray_set
        return real_embed(cloud) @ sd_real.T  # (n_rays, n_support) projections

    h1 = np.max(cloud_support(domain1, rays), axis=0)
    h2 = np.max(cloud_support(domain2, rays), axis=0)
    est = float(np.max(np.abs(h1 - h2)))
    half = rays[::2]
    h1h = np.max(cloud_support(domain1, half), axis=0)
    h2h = np.max(cloud_support(domain2, half), axis=0)
    est_half = float(np.max(np.abs(h1h - h2h)))
    disc_err = abs(est - est_half) + 1e-12
    return est, disc_err
