"""Iteration dynamics of automorphisms: trichotomy classification,
attracting hyperplanes, north/south dynamics, ping-pong, orbit
quasi-isometry constants, axis shadowing, and limit-set sampling.

Classification follows the fixed-point dichotomy: a map with an interior
fixed point is elliptic; otherwise its orbit escapes to the boundary and
the forward/backward attracting hyperplanes decide parabolic (equal faces)
versus hyperbolic (distinct faces).  Orbits are driven by exact repeated
squaring of the map, so boundary convergence is reached in a logarithmic
number of steps even for the slow tangential approach of parabolics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import metric
from .automorphisms import Automorphism, compose, su_algebra_element
from .bracket import MetricBracket
from .domains import ComplexHyperplane, ConvexDomain, DomainError
from .util import as_cpoint, cnorm, herm, seeded_rng

DEFAULT_FACE_TOL = 1e-4
DEFAULT_DEEP = 1e-10


class DynamicsError(ValueError):
    pass


@dataclass
class ClassificationResult:
    tag: str  # elliptic | parabolic | hyperbolic | inconclusive
    fixed_point: np.ndarray | None = None
    h_plus: ComplexHyperplane | None = None
    h_minus: ComplexHyperplane | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def attracting_point(self):
        return None if self.h_plus is None else self.h_plus.anchor

    @property
    def repelling_point(self):
        return None if self.h_minus is None else self.h_minus.anchor


def _boundary_dist_est(domain, z):
    """First-order boundary distance -rho/|grad rho|; cheap escape detector."""
    val = float(np.real(domain.value(z)))
    g = cnorm(domain.gradient(z))
    if g < 1e-18:
        return float(domain.boundary_distance_estimate(z, n_dirs=32))
    return max(-val / g, 0.0)


def _newton_fixed_point(domain, phi, seeds, max_iter=60):
    """Newton iteration on phi(x) - x in real coordinates.

    Returns an interior fixed point or None; boundary fixed points are
    rejected by an interior-margin test.
    """
    d = domain.dim
    eye = np.eye(d, dtype=complex)
    margin = 10.0 * domain.boundary_tol
    for seed in seeds:
        x = as_cpoint(np.array(seed, dtype=complex), d)
        if not bool(domain.contains(x)):
            continue
        ok = True
        for _ in range(max_iter):
            F = phi.apply(x) - x
            if cnorm(F) < 1e-13 * domain.diameter:
                break
            A = phi.derivative(x) - eye
            Ar = np.block([[A.real, -A.imag], [A.imag, A.real]])
            Fr = np.concatenate([F.real, F.imag])
            try:
                step = np.linalg.solve(Ar, -Fr)
            except np.linalg.LinAlgError:
                ok = False
                break
            if not np.all(np.isfinite(step)):
                ok = False
                break
            x = x + step[:d] + 1j * step[d:]
            if cnorm(x) > 10.0 * domain.diameter:
                ok = False
                break
        if not ok:
            continue
        if cnorm(phi.apply(x) - x) < 1e-11 * domain.diameter and \
                bool(domain.contains(x)) and \
                float(np.real(domain.value(x))) < -margin:
            return x
    return None


def _escape_orbit(domain, phi, z0, deep=DEFAULT_DEEP, max_levels=40):
    """Drive z0 toward the boundary by exact squaring of the map.

    Stops when the orbit is at boundary depth ``deep``, or when the position
    is Cauchy under doubling while already boundary-close (the tangential
    parabolic regime, where the depth estimate saturates in floats before
    the direction does).  Returns (deep_point, n, history); the point is
    None when the orbit never leaves the interior (elliptic regime).
    """
    z0 = as_cpoint(z0, domain.dim)
    history = [(0, z0, _boundary_dist_est(domain, z0))]
    current = phi
    n = 1
    prev = None
    accepted = None
    cauchy_tol = 3e-7 * domain.diameter
    for _ in range(max_levels):
        z_new = current.apply(z0)
        if not np.all(np.isfinite(z_new.view(float))):
            break
        dist = _boundary_dist_est(domain, z_new)
        history.append((n, z_new, dist))
        if dist < 1e-4:
            accepted = (z_new, n)
            # boundary-committed; stop only once the position itself is
            # Cauchy under doubling (depth estimates saturate in floats long
            # before the tangential parabolic direction does)
            if prev is not None and cnorm(z_new - prev) < cauchy_tol:
                return z_new, n, history
        prev = z_new
        try:
            current = compose(current, current)
        except Exception:
            break
        n *= 2
    if accepted is not None:
        return accepted[0], accepted[1], history
    return None, None, history


def _tangent_at_deep(domain, z_deep):
    """Tangent hyperplane at the boundary point next to a very deep orbit
    point; ray-shooting from the interior avoids the membership margin that
    a projection from z_deep itself would violate."""
    p = domain.interior_point()
    direction = z_deep - p
    if cnorm(direction) < 1e-14:
        raise DynamicsError("deep orbit point coincides with the interior point")
    x = domain.boundary_point_along(p, direction / cnorm(direction))
    return domain.complex_tangent_hyperplane(x)


def classify(domain: ConvexDomain, phi: Automorphism, z0, max_levels=48,
             face_tol=DEFAULT_FACE_TOL, deep=DEFAULT_DEEP,
             radius_threshold=10.0) -> ClassificationResult:
    """Elliptic / parabolic / hyperbolic trichotomy of an automorphism.

    Elliptic detection is a certified interior fixed point (Newton seeded by
    the orbit); otherwise forward and backward orbits are driven to boundary
    depth ``deep`` by repeated squaring and the two attracting hyperplanes
    are compared at ``face_tol``.  An orbit that neither yields a fixed
    point nor escapes is reported honestly as inconclusive.
    """
    z0 = as_cpoint(z0, domain.dim)
    if not bool(domain.contains(z0)):
        raise DynamicsError("base point must be interior")
    fwd_deep, fwd_n, fwd_hist = _escape_orbit(domain, phi, z0, deep=deep,
                                              max_levels=max_levels)
    bwd_deep, bwd_n, bwd_hist = _escape_orbit(domain, phi.inverse(), z0,
                                              deep=deep, max_levels=max_levels)
    diagnostics = {
        "forward_levels": [(n, d) for n, _, d in fwd_hist],
        "backward_levels": [(n, d) for n, _, d in bwd_hist],
    }
    if fwd_deep is not None and bwd_deep is not None:
        # for interior base points at moderate depth an elliptic orbit cannot
        # reach this boundary depth, so escape certifies a fixed-point-free map
        h_plus = _tangent_at_deep(domain, fwd_deep)
        h_minus = _tangent_at_deep(domain, bwd_deep)
        diagnostics["forward_n"] = fwd_n
        diagnostics["backward_n"] = bwd_n
        diagnostics["face_angle"] = h_plus.normal_angle(h_minus)
        diagnostics["face_offsets"] = h_plus.anchor_offsets(h_minus)
        if h_plus.same_as(h_minus, tol=face_tol):
            return ClassificationResult("parabolic", h_plus=h_plus,
                                        h_minus=h_minus, diagnostics=diagnostics)
        return ClassificationResult("hyperbolic", h_plus=h_plus,
                                    h_minus=h_minus, diagnostics=diagnostics)
    if fwd_deep is None and bwd_deep is None:
        orbit = [z0]
        z = z0
        for _ in range(16):
            z = phi.apply(z)
            orbit.append(z)
        orbit = np.array(orbit)
        seeds = [z0, np.mean(orbit, axis=0), 0.5 * (z0 + orbit[1])]
        fp = _newton_fixed_point(domain, phi, seeds)
        if fp is not None:
            return ClassificationResult(
                "elliptic", fixed_point=fp,
                diagnostics={"fp_residual": float(cnorm(phi.apply(fp) - fp))})
        radius = metric.distance_upper_chained(domain, z0, orbit[-1])
        diagnostics["orbit_radius_upper"] = radius
        diagnostics["note"] = "bounded orbit without a certified fixed point"
        return ClassificationResult("inconclusive", diagnostics=diagnostics)
    diagnostics["note"] = "only one of the two orbits escaped; indeterminate"
    return ClassificationResult("inconclusive", diagnostics=diagnostics)


def attracting_hyperplane(domain: ConvexDomain, phi: Automorphism, z0,
                          n_iter=4096, dist_threshold=1e-5) -> ComplexHyperplane:
    """Tangent hyperplane at the boundary projection of a deep orbit point.

    Requires the orbit to be within ``dist_threshold`` of the boundary by
    ``n_iter`` and checks Cauchy stabilization against the half-depth
    iterate.
    """
    z0 = as_cpoint(z0, domain.dim)
    half = phi.power(max(1, n_iter // 2))
    z_half = half.apply(z0)
    z_full = half.apply(z_half)
    if _boundary_dist_est(domain, z_full) > dist_threshold:
        raise DynamicsError("orbit not within boundary-distance threshold; "
                            "increase n_iter or check ellipticity")
    h_full = _tangent_at_deep(domain, z_full)
    h_half = _tangent_at_deep(domain, z_half)
    if not h_full.same_as(h_half, tol=5e-2):
        raise DynamicsError("attracting hyperplane has not stabilized")
    return h_full


def north_south_check(domain: ConvexDomain, h: Automorphism, cap_U, cap_V,
                      z0=None, n_probe=1000, n_cap=64, seed=None):
    """Smallest N with h^N mapping probes outside the repelling cap into the
    attracting cap (and symmetrically for h^{-N})."""
    z0 = domain.interior_point() if z0 is None else as_cpoint(z0, domain.dim)
    cls = classify(domain, h, z0)
    if cls.tag != "hyperbolic":
        raise DynamicsError(f"north/south dynamics needs a hyperbolic map, got {cls.tag}")
    x_plus = cls.attracting_point
    x_minus = cls.repelling_point
    probes = domain.sample_interior(n_probe, seed=seed)
    out_V = probes[cnorm(probes - x_minus) > cap_V]
    out_U = probes[cnorm(probes - x_plus) > cap_U]
    fwd = out_V.copy()
    bwd = out_U.copy()
    hinv = h.inverse()
    for n in range(1, n_cap + 1):
        fwd = h.apply(fwd)
        bwd = hinv.apply(bwd)
        ok_f = np.all(cnorm(fwd - x_plus) < cap_U)
        ok_b = np.all(cnorm(bwd - x_minus) < cap_V)
        if ok_f and ok_b:
            return n
    raise DynamicsError(f"north/south inclusion not reached by N = {n_cap}")


def construct_hyperbolic(domain: ConvexDomain, phi: Automorphism,
                         psi: Automorphism, z, w, cap=64):
    """Diagonal search for a hyperbolic product phi^m psi^n.

    The escaping generators' orbit faces must be distinct; a bounded
    (elliptic) generator is allowed as the mixing factor.
    """
    z = as_cpoint(z, domain.dim)
    w = as_cpoint(w, domain.dim)
    for g, base in ((phi, z), (psi, w)):
        cls0 = classify(domain, g, base)
        if cls0.tag == "hyperbolic":
            raise DynamicsError("generators must be non-hyperbolic")
    zp, _, _ = _escape_orbit(domain, phi, z)
    wp, _, _ = _escape_orbit(domain, psi, w)
    if zp is not None and wp is not None:
        h1 = _tangent_at_deep(domain, zp)
        h2 = _tangent_at_deep(domain, wp)
        if h1.same_as(h2, tol=DEFAULT_FACE_TOL):
            raise DynamicsError("orbit faces coincide; no hyperbolic product expected")
    elif zp is None and wp is None:
        raise DynamicsError("neither generator orbit escapes to the boundary")
    for total in range(2, 2 * cap + 1):
        for m in range(max(1, total - cap), min(cap, total - 1) + 1):
            n = total - m
            cand = compose(phi.power(m), psi.power(n))
            cls = classify(domain, cand, z)
            if cls.tag == "hyperbolic":
                return cand, cls, (m, n)
    raise DynamicsError("diagonal search cap reached without a hyperbolic product")


def ping_pong_certificate(domain: ConvexDomain, h1: Automorphism,
                          h2: Automorphism, cap1, cap2, z0=None,
                          n_probe=1000, mn_cap=10, seed=None):
    """Ping-pong exponents and inclusion evidence for two hyperbolic maps.

    Verifies that the four attracting/repelling hyperplanes are pairwise
    distinct across the two maps, finds exponents whose powers satisfy the
    ping-pong inclusions on a deterministic probe set, and classifies
    h1^m h2^{-n} as hyperbolic with poles inside the prescribed caps.
    """
    z0 = domain.interior_point() if z0 is None else as_cpoint(z0, domain.dim)
    c1 = classify(domain, h1, z0)
    c2 = classify(domain, h2, z0)
    if c1.tag != "hyperbolic" or c2.tag != "hyperbolic":
        raise DynamicsError("ping-pong needs two hyperbolic maps")
    set1 = (c1.h_plus, c1.h_minus)
    set2 = (c2.h_plus, c2.h_minus)
    for a in set1:
        for b in set2:
            if a.same_as(b, tol=DEFAULT_FACE_TOL):
                raise DynamicsError("hyperplane sets intersect; ping-pong fails")

    probes = domain.sample_interior(n_probe, seed=seed)

    def inclusion_exponent(h, x_plus, x_minus, cap_att, cap_rep):
        out_rep = probes[cnorm(probes - x_minus) > cap_rep]
        fwd = out_rep.copy()
        out_att = probes[cnorm(probes - x_plus) > cap_att]
        bwd = out_att.copy()
        hinv = h.inverse()
        for n in range(1, mn_cap + 1):
            fwd = h.apply(fwd)
            bwd = hinv.apply(bwd)
            if np.all(cnorm(fwd - x_plus) < cap_att) and \
                    np.all(cnorm(bwd - x_minus) < cap_rep):
                return n
        raise DynamicsError("ping-pong inclusion exponent exceeds cap")

    m = inclusion_exponent(h1, c1.attracting_point, c1.repelling_point, cap1, cap1)
    n = inclusion_exponent(h2, c2.attracting_point, c2.repelling_point, cap2, cap2)
    g = compose(h1.power(m), h2.power(-n))
    cls = classify(domain, g, z0)
    if cls.tag != "hyperbolic":
        raise DynamicsError(f"product h1^{m} h2^{-n} classified {cls.tag}")
    evidence = {
        "H_plus_in_cap1": float(cnorm(cls.attracting_point - c1.attracting_point)),
        "H_minus_in_cap2": float(cnorm(cls.repelling_point - c2.attracting_point)),
    }
    if evidence["H_plus_in_cap1"] > cap1 or evidence["H_minus_in_cap2"] > cap2:
        raise DynamicsError("product poles missed the prescribed caps")
    return m, n, evidence, g, cls


def _recentered_power_pair(h, z0, delta):
    """Points (h^{delta-c} z0, h^{-c} z0) with c = delta//2; isometric to
    (h^delta z0, z0) but kept at moderate boundary depth."""
    c = delta // 2
    p1 = h.power(delta - c).apply(z0)
    p2 = h.power(-c).apply(z0)
    return p1, p2


def fit_sandwich(deltas, lowers, uppers, slope_floor=1.0):
    """Smallest-beta affine sandwich  d/alpha - beta <= K <= alpha d + beta.

    Scans alpha over data-driven candidates, picks the (alpha, beta) that
    satisfies both inequalities on every sample with the smallest beta, ties
    broken toward small alpha.
    """
    deltas = np.asarray(deltas, dtype=float)
    lowers = np.asarray(lowers, dtype=float)
    uppers = np.asarray(uppers, dtype=float)
    mids = 0.5 * (lowers + uppers)
    slope = max(slope_floor, float(np.polyfit(deltas, mids, 1)[0]))
    candidates = np.unique(np.concatenate([
        [slope_floor], slope * np.geomspace(0.98, 1.2, 25),
    ]))
    candidates = candidates[candidates >= slope_floor]
    best = None
    for alpha in candidates:
        beta = max(0.0, float(np.max(uppers - alpha * deltas)),
                   float(np.max(deltas / alpha - lowers)))
        if best is None or beta < best[1] - 1e-12 or \
                (abs(beta - best[1]) <= 1e-12 and alpha < best[0]):
            best = (float(alpha), float(beta))
    return best


def orbit_qi_constants(domain: ConvexDomain, h: Automorphism, z0, N,
                       check=True):
    """Quasi-isometry constants (alpha, beta) of the orbit n -> h^n z0.

    Uses isometry invariance to recenter each power gap at moderate depth,
    then fits the smallest valid sandwich over all gaps 1..N.
    """
    z0 = as_cpoint(z0, domain.dim)
    if check:
        cls = classify(domain, h, z0)
        if cls.tag != "hyperbolic":
            raise DynamicsError(f"orbit quasi-isometry needs hyperbolic, got {cls.tag}")
    deltas = np.arange(1, N + 1)
    lowers, uppers = [], []
    for delta in deltas:
        p1, p2 = _recentered_power_pair(h, z0, int(delta))
        br = metric.distance(domain, p1, p2)
        lowers.append(br.lower)
        uppers.append(br.upper)
    alpha, beta = fit_sandwich(deltas, lowers, uppers)
    data = {"deltas": deltas, "lowers": np.array(lowers), "uppers": np.array(uppers)}
    return alpha, beta, data


def axis_shadow(domain: ConvexDomain, h: Automorphism, r, z0=None,
                n_orbit=10, t_max=12.0, n_samples=25):
    """Spliced almost-geodesic axis of a hyperbolic map plus shadowing data.

    Builds the two inward-normal curves at the orbit's forward/backward
    boundary limits, joins them through the middle by an almost-geodesic,
    certifies the splice, and brackets the orbit-to-curve Kobayashi
    Hausdorff distance.
    """
    z0 = domain.interior_point() if z0 is None else as_cpoint(z0, domain.dim)
    cls = classify(domain, h, z0)
    if cls.tag != "hyperbolic":
        raise DynamicsError(f"axis shadow needs a hyperbolic map, got {cls.tag}")
    x_plus = cls.attracting_point
    x_minus = cls.repelling_point
    sig_p = metric.normal_line_curve(domain, x_plus, r, t_max,
                                     n_samples=n_samples)
    sig_m = metric.normal_line_curve(domain, x_minus, r, t_max,
                                     n_samples=n_samples)
    mid = metric.geodesic_between(domain, sig_m.points[0], sig_p.points[0])
    T = 0.5 * mid.span
    ts = np.concatenate([
        -T - sig_m.ts[::-1],
        -T + mid.ts[1:-1],
        T + sig_p.ts,
    ])
    pts = np.concatenate([
        sig_m.points[::-1],
        mid.points[1:-1],
        sig_p.points,
    ])
    kappa, diag = metric.almost_geodesic_certificate(domain, ts, pts, lam=1.0)
    curve = metric.AlmostGeodesic(ts, pts, lam=1.0, kappa=kappa,
                                  certified=np.isfinite(kappa),
                                  diagnostics=diag)
    orbit = np.array([h.power(n).apply(z0) for n in range(-n_orbit, n_orbit + 1)])
    haus = metric.orbit_hausdorff_distance(domain, orbit, pts, directional=True)
    endpoints = {"x_plus": x_plus, "x_minus": x_minus,
                 "end_gap_plus": float(cnorm(pts[-1] - x_plus)),
                 "end_gap_minus": float(cnorm(pts[0] - x_minus))}
    return curve, haus, endpoints


@dataclass
class ShadowData:
    """Shadow reparametrization tau(m, t) with its uniform bounds."""

    m_values: np.ndarray
    t_values: np.ndarray
    tau: np.ndarray  # shape (len(m_values), len(t_values))
    R: float
    bound_2R_holds: bool
    A: float
    B: float
    worst_min_distance: float

    def tau_of(self, m, t):
        i = int(np.where(self.m_values == m)[0][0])
        j = int(np.argmin(np.abs(self.t_values - t)))
        return self.tau[i, j]


def shadow_parameters(domain: ConvexDomain, h: Automorphism,
                      sigma: metric.AlmostGeodesic, m_range, t_grid,
                      R=None, z0=None, refine_steps=2) -> ShadowData:
    """Closest-point reparametrization tau(m, t) along a shadowed curve.

    tau(m, t) minimizes the distance from h^m sigma(t) to the curve over the
    curve parameter (tau(0, t) = t by convention), evaluated by grid search
    with local parabolic refinement on bracket midpoints.  The uniform 2R
    bound and the affine sandwich in m are then fitted and verified.
    """
    m_values = np.asarray(sorted(m_range), dtype=int)
    t_values = np.asarray(t_grid, dtype=float)
    ts = sigma.ts
    pts = sigma.points
    if R is None:
        z0 = domain.interior_point() if z0 is None else as_cpoint(z0, domain.dim)
        haus = metric.orbit_hausdorff_distance(
            domain, np.array([h.power(n).apply(z0) for n in range(-4, 5)]),
            pts, directional=True)
        R = haus.upper
    tau = np.zeros((len(m_values), len(t_values)))
    worst_min = 0.0
    grid_step = float(np.max(np.diff(ts)))
    for i, m in enumerate(m_values):
        hm = h.power(int(m))
        for j, t in enumerate(t_values):
            if m == 0:
                tau[i, j] = t
                continue
            q = hm.apply(sigma.point_at(t))
            lows = np.array([metric.distance_lower_cheap(domain, q, p)
                             for p in pts])
            k = int(np.argmin(lows))
            # local parabolic/golden refinement on the sampled polyline
            lo_t = ts[max(0, k - 1)]
            hi_t = ts[min(len(ts) - 1, k + 1)]
            best_t, best_d = ts[k], None
            for _ in range(refine_steps + 3):
                cand = np.linspace(lo_t, hi_t, 5)
                vals = [metric.distance_lower_cheap(domain, q,
                                                    sigma.point_at(c))
                        for c in cand]
                kk = int(np.argmin(vals))
                best_t = cand[kk]
                best_d = vals[kk]
                span = (hi_t - lo_t) * 0.3
                lo_t, hi_t = best_t - span, best_t + span
            tau[i, j] = best_t
            up = metric.distance_upper_chained(domain, q, sigma.point_at(best_t))
            worst_min = max(worst_min, up)
    bound_ok = worst_min <= 2.0 * R + grid_step + 1e-9
    # affine sandwich for tau(m, t) - tau(n, t) over m > n
    gaps, lows, ups = [], [], []
    for j in range(len(t_values)):
        for a in range(len(m_values)):
            for b in range(a):
                gaps.append(m_values[a] - m_values[b])
                diff = tau[a, j] - tau[b, j]
                lows.append(diff)
                ups.append(diff)
    A, B = fit_sandwich(np.array(gaps), np.array(lows), np.array(ups))
    return ShadowData(m_values, t_values, tau, float(R), bool(bound_ok),
                      A, B, float(worst_min))


def limit_set_sample(domain: ConvexDomain, generators, depth, z0,
                     dist_threshold=0.3, face_tol=1e-4, dedup_tol=1e-8):
    """Boundary cloud of reduced words of bounded length applied to z0.

    Returns (cloud, face_count, face_representatives); the cloud collects
    boundary projections of word images within the boundary-distance
    threshold, and faces are clustered with the complex-face test.
    """
    if not generators:
        raise DynamicsError("need at least one generator")
    z0 = as_cpoint(z0, domain.dim)
    letters = []
    for g in generators:
        letters.append(g)
        letters.append(g.inverse())
    k = len(letters)

    images = []
    frontier = [(None, z0)]
    for _ in range(depth):
        new_frontier = []
        for last, point in frontier:
            for idx, g in enumerate(letters):
                if last is not None and idx == (last ^ 1):
                    continue  # reduced words only; inverse pairs cancel
                p = g.apply(point)
                new_frontier.append((idx, p))
                images.append(p)
        frontier = new_frontier
    if not images:
        return np.zeros((0, domain.dim), dtype=complex), 0, []
    images = np.array(images)
    dists = np.array([_boundary_dist_est(domain, p) for p in images])
    near = images[dists <= dist_threshold]
    if len(near) == 0:
        return np.zeros((0, domain.dim), dtype=complex), 0, []
    # dedup before the (more expensive) projections
    rounded = np.round(near / dedup_tol) * dedup_tol
    _, idx = np.unique(rounded.view(float).reshape(len(near), -1), axis=0,
                       return_index=True)
    near = near[np.sort(idx)]
    cloud = []
    normals = []
    for p in near:
        try:
            bp, _, _ = domain.boundary_projection(p, max_iter=200)
        except DomainError:
            continue
        cloud.append(bp.point)
        normals.append(bp.inward_normal)
    cloud = np.array(cloud)
    normals = np.array(normals)
    reps = _cluster_faces(domain, cloud, normals, face_tol)
    return cloud, len(reps), reps


def _cluster_faces(domain, cloud, normals, face_tol):
    """Greedy face clustering; returns one representative per face."""
    reps = []
    for p, n in zip(cloud, normals):
        hp = ComplexHyperplane(p, n)
        found = False
        for rep in reps:
            if rep.same_as(hp, tol=face_tol):
                found = True
                break
        if not found:
            reps.append(hp)
    return reps


def stability_probe(domain: ConvexDomain, h, eps, n_probes=32, z0=None,
                    seed=None):
    """Classify small in-group perturbations h . exp(eps X); True when every
    perturbation stays hyperbolic, else reports the failing index."""
    from scipy.linalg import expm

    from .automorphisms import BallMobius

    if not isinstance(h, BallMobius):
        raise DynamicsError("stability probe supports matrix (ball) kinds only")
    z0 = domain.interior_point() if z0 is None else as_cpoint(z0, domain.dim)
    d = domain.dim
    rng_seed = seed if seed is not None else 0
    failures = []
    for i in range(n_probes):
        X = su_algebra_element(d, seed=rng_seed + i, scale=1.0)
        pert = BallMobius(h.matrix @ expm(eps * X), h.domain)
        cls = classify(domain, pert, z0)
        if cls.tag != "hyperbolic":
            failures.append((i, cls.tag))
    return len(failures) == 0, failures
