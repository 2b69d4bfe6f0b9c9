"""Concrete biholomorphic self-maps of balls and generalized ellipsoids.

Ball automorphisms are projective actions of matrices preserving the
signature-(d,1) Hermitian form; ellipsoid automorphisms combine a ball
automorphism on the exponent-one block with twisted rotations of the
remaining coordinates.  Every map carries an exact inverse and an exact
holomorphic derivative, which the metric layer uses to transport point
pairs isometrically.
"""

from __future__ import annotations

import numpy as np

from .domains import (AffineImage, AffineMap, Ball, ConvexDomain, DomainError,
                      GeneralizedEllipsoid)
from .util import as_cpoint, cnorm, herm, seeded_rng

FORM_TOL = 1e-10


class AutomorphismError(ValueError):
    pass


def signature_form(d):
    """diag(1,...,1,-1) on C^{d+1}."""
    J = np.eye(d + 1, dtype=complex)
    J[d, d] = -1.0
    return J


def check_su_form(matrix, tol=FORM_TOL):
    matrix = np.asarray(matrix, dtype=complex)
    d = matrix.shape[0] - 1
    J = signature_form(d)
    defect = np.max(np.abs(matrix.conj().T @ J @ matrix - J))
    det = np.linalg.det(matrix)
    return defect, abs(abs(det) - 1.0)


def normalize_su(matrix):
    """Rescale a form-preserving matrix to unit determinant.

    Large powers of hyperbolic elements overflow the determinant, so the
    matrix is first brought to unit max-entry; the projective action is
    scale-invariant and the det-normalization restores the group
    representative.
    """
    matrix = np.asarray(matrix, dtype=complex)
    n = matrix.shape[0]
    scale = np.max(np.abs(matrix))
    if not np.isfinite(scale) or scale == 0.0:
        raise AutomorphismError("degenerate matrix in normalization")
    m = matrix / scale
    det = np.linalg.det(m)
    if abs(det) < 1e-200:
        raise AutomorphismError("matrix numerically singular after scaling")
    return m * det ** (-1.0 / n)


_UNIT_BALLS: dict = {}


def unit_ball(d) -> Ball:
    """Shared unit-ball instance per dimension, so default-constructed maps
    compose without domain-identity friction."""
    if d not in _UNIT_BALLS:
        _UNIT_BALLS[d] = Ball(np.zeros(d), 1.0)
    return _UNIT_BALLS[d]


def same_domain(a: ConvexDomain, b: ConvexDomain) -> bool:
    if a is b:
        return True
    if isinstance(a, Ball) and isinstance(b, Ball):
        return a.dim == b.dim and a.radius == b.radius and \
            bool(np.all(a.center == b.center))
    if isinstance(a, GeneralizedEllipsoid) and isinstance(b, GeneralizedEllipsoid):
        return a.exponents == b.exponents
    return False


class Automorphism:
    """Biholomorphic self-map with exact inverse and derivative."""

    domain: ConvexDomain

    def apply(self, z):
        raise NotImplementedError

    def derivative(self, z):
        """Holomorphic Jacobian (d x d complex) at a point."""
        raise NotImplementedError

    def inverse(self) -> "Automorphism":
        raise NotImplementedError

    def power(self, n: int) -> "Automorphism":
        if n == 0:
            return Identity(self.domain)
        base = self if n > 0 else self.inverse()
        n = abs(n)
        result = None
        square = base
        while n:
            if n & 1:
                result = square if result is None else compose(square, result)
            square = compose(square, square)
            n >>= 1
        return result

    def __call__(self, z):
        return self.apply(z)

    def same_domain(self, other):
        return self.domain is other.domain

    def check_roundtrip(self, n_samples=32, seed=None):
        zs = self.domain.sample_interior(n_samples, seed=seed)
        back = self.inverse().apply(self.apply(zs))
        return float(np.max(cnorm(back - zs)))


class Identity(Automorphism):
    def __init__(self, domain):
        self.domain = domain

    def apply(self, z):
        return np.asarray(z, dtype=complex)

    def derivative(self, z):
        return np.eye(self.domain.dim, dtype=complex)

    def inverse(self):
        return self


class BallMobius(Automorphism):
    """Projective action of g in SU(d,1) on the unit ball.

    With block structure g = [[A, b], [c, e]] the action is
    z -> (A z + b) / (c.z + e); the inverse matrix is J g^H J.
    """

    def __init__(self, matrix, domain=None, validate=True):
        matrix = normalize_su(np.asarray(matrix, dtype=complex))
        d = matrix.shape[0] - 1
        if validate:
            defect, det_err = check_su_form(matrix)
            if defect > FORM_TOL or det_err > FORM_TOL:
                raise AutomorphismError(
                    f"matrix does not preserve the (d,1) form (defect {defect:.2e})")
        self.matrix = matrix
        if domain is None:
            domain = unit_ball(d)
        if not isinstance(domain, Ball) or domain.radius != 1.0 or cnorm(domain.center) != 0.0:
            raise AutomorphismError("BallMobius acts on the unit ball at the origin")
        self.domain = domain
        self._A = matrix[:d, :d]
        self._b = matrix[:d, d]
        self._c = matrix[d, :d]
        self._e = matrix[d, d]

    def apply(self, z):
        z = np.asarray(z, dtype=complex)
        num = z @ self._A.T + self._b
        den = z @ self._c + self._e
        return num / den[..., None]

    def derivative(self, z):
        z = as_cpoint(z)
        den = complex(z @ self._c + self._e)
        num = z @ self._A.T + self._b
        return self._A / den - np.outer(num, self._c) / den ** 2

    def inverse(self):
        d = self.domain.dim
        J = signature_form(d)
        return BallMobius(J @ self.matrix.conj().T @ J, self.domain, validate=False)


def compose(f: Automorphism, g: Automorphism) -> Automorphism:
    """f after g (apply g first)."""
    if not same_domain(f.domain, g.domain):
        raise AutomorphismError("cannot compose maps of different domains")
    if isinstance(f, Identity):
        return g
    if isinstance(g, Identity):
        return f
    if isinstance(f, BallMobius) and isinstance(g, BallMobius):
        return BallMobius(f.matrix @ g.matrix, f.domain, validate=False)
    if isinstance(f, EllipsoidLift) and isinstance(g, EllipsoidLift):
        return EllipsoidLift.composed(f, g)
    if isinstance(f, AffineConjugation) and isinstance(g, AffineConjugation):
        return AffineConjugation(f.domain, compose(f.inner, g.inner))
    return Composition([f, g])


class Composition(Automorphism):
    """Generic composition; maps applied right to left."""

    def __init__(self, maps):
        maps = list(maps)
        if not maps:
            raise AutomorphismError("empty composition")
        dom = maps[0].domain
        if any(not same_domain(m.domain, dom) for m in maps):
            raise AutomorphismError("composition mixes domains")
        self.maps = maps
        self.domain = dom

    def apply(self, z):
        out = np.asarray(z, dtype=complex)
        for m in reversed(self.maps):
            out = m.apply(out)
        return out

    def derivative(self, z):
        z = as_cpoint(z)
        jac = np.eye(self.domain.dim, dtype=complex)
        current = z
        for m in reversed(self.maps):
            jac = m.derivative(current) @ jac
            current = m.apply(current)
        return jac

    def inverse(self):
        return Composition([m.inverse() for m in reversed(self.maps)])


class EllipsoidLift(Automorphism):
    """Automorphism of a generalized ellipsoid with a single exponent-one slot.

    For E with exponents (1, m_2, ..., m_d): the first coordinate moves by a
    disc automorphism phi given by an SU(1,1) matrix [[alpha, beta],
    [gamma, delta]], and each twisted coordinate picks up the cocycle factor
    (gamma z_1 + delta)^(-1/m_j) times a unit twist, which keeps the defining
    function invariant.  The principal branch of the root is fixed; branch
    continuity along orbits is the caller's check (`branch_ok`).
    """

    def __init__(self, domain: GeneralizedEllipsoid, disc_matrix, twists=None,
                 block_unitary=None, validate=True):
        if not isinstance(domain, GeneralizedEllipsoid):
            raise AutomorphismError("EllipsoidLift acts on a generalized ellipsoid")
        if domain.unit_block != (0,):
            raise AutomorphismError(
                "lift implemented for exponents (1, m_2, ..., m_d) with a single "
                "exponent-one coordinate first")
        self.domain = domain
        M = normalize_su(np.asarray(disc_matrix, dtype=complex))
        if validate:
            defect, det_err = check_su_form(M)
            if defect > FORM_TOL or det_err > FORM_TOL:
                raise AutomorphismError("disc matrix does not preserve the (1,1) form")
        self.disc_matrix = M
        k = domain.dim - 1
        if twists is None:
            twists = np.ones(k, dtype=complex)
        twists = np.asarray(twists, dtype=complex)
        if twists.shape != (k,) or np.max(np.abs(np.abs(twists) - 1.0)) > 1e-10:
            raise AutomorphismError("twists must be unit-modulus, one per twisted slot")
        if block_unitary is None:
            block_unitary = np.eye(k, dtype=complex)
        U = np.asarray(block_unitary, dtype=complex)
        if np.max(np.abs(U.conj().T @ U - np.eye(k))) > 1e-10:
            raise AutomorphismError("block part must be unitary")
        # the unitary must preserve the twisted-exponent pattern; only
        # permutations/diagonals between equal exponents do, so restrict to
        # block-diagonal across distinct exponents
        exps = np.array(domain.exponents[1:])
        mask = (exps[:, None] != exps[None, :]) & (np.abs(U) > 1e-12)
        if np.any(mask):
            raise AutomorphismError("block unitary mixes slots of different exponents")
        self.twists = twists
        self.block_unitary = U
        self._mj = exps.astype(float)

    def _cocycle(self, z1):
        g = self.disc_matrix
        return g[1, 0] * np.asarray(z1, dtype=complex) + g[1, 1]

    def branch_ok(self, z, prev=None):
        """Principal branch is continuous when the cocycle avoids the negative axis."""
        c = self._cocycle(np.asarray(z, dtype=complex)[..., 0])
        return bool(np.all((c.real > 0) | (np.abs(c.imag) > 1e-14)))

    def apply(self, z):
        z = np.asarray(z, dtype=complex)
        g = self.disc_matrix
        z1 = z[..., 0]
        den = self._cocycle(z1)
        w1 = (g[0, 0] * z1 + g[0, 1]) / den
        factors = np.exp(-np.log(den)[..., None] / self._mj)
        rest = z[..., 1:] @ self.block_unitary.T
        wrest = rest * factors * self.twists
        return np.concatenate([w1[..., None], wrest], axis=-1)

    def derivative(self, z):
        z = as_cpoint(z, self.domain.dim)
        g = self.disc_matrix
        z1 = z[0]
        den = complex(self._cocycle(z1))
        d = self.domain.dim
        jac = np.zeros((d, d), dtype=complex)
        jac[0, 0] = (g[0, 0] * den - (g[0, 0] * z1 + g[0, 1]) * g[1, 0]) / den ** 2
        factors = np.exp(-np.log(den) / self._mj)
        rest = z[1:] @ self.block_unitary.T
        jac[1:, 1:] = (factors * self.twists)[:, None] * self.block_unitary
        # d/dz1 of the cocycle factor
        dfac = factors * (-1.0 / self._mj) * g[1, 0] / den
        jac[1:, 0] = dfac * self.twists * rest
        return jac

    def inverse(self):
        g_inv = np.linalg.inv(self.disc_matrix)
        U_inv = self.block_unitary.conj().T
        cand = EllipsoidLift(self.domain, g_inv,
                             twists=np.conj(self.twists),
                             block_unitary=U_inv, validate=False)
        return _twist_correct(cand, self, target="inverse")

    @staticmethod
    def composed(f: "EllipsoidLift", g: "EllipsoidLift") -> "EllipsoidLift":
        cand = EllipsoidLift(f.domain, f.disc_matrix @ g.disc_matrix,
                             twists=f.twists * g.twists,
                             block_unitary=f.block_unitary @ g.block_unitary,
                             validate=False)
        return _twist_correct(cand, (f, g), target="compose")


def _twist_correct(candidate: EllipsoidLift, reference, target):
    """Fix the root-of-unity twist ambiguity of lift composition at the center.

    The cocycle roots multiply only up to an m_j-th root of unity; evaluating
    both sides at a probe point pins the correct twist.
    """
    dom = candidate.domain
    probe = np.zeros(dom.dim, dtype=complex)
    probe[1:] = 0.3  # generic point with nonzero twisted slots
    probe[0] = 0.2
    got = candidate.apply(probe)
    if target == "inverse":
        ref: EllipsoidLift = reference
        want_src = ref.apply(probe)
        # candidate should send ref(probe) back to probe; compare on that point
        got = candidate.apply(want_src)
        want = probe
    else:
        f, g = reference
        want = f.apply(g.apply(probe))
    ratio = want[1:] / got[1:]
    phases = ratio / np.abs(ratio)
    # snap to exact roots of unity of order m_j
    mj = np.array(candidate.domain.exponents[1:], dtype=float)
    ang = np.angle(phases) * mj / (2 * np.pi)
    snapped = np.exp(2j * np.pi * np.round(ang) / mj)
    if np.max(np.abs(snapped - phases)) > 1e-6:
        snapped = phases / np.abs(phases)  # fall back to measured phase
    return EllipsoidLift(candidate.domain, candidate.disc_matrix,
                         twists=candidate.twists * snapped,
                         block_unitary=candidate.block_unitary, validate=False)


class AffineConjugation(Automorphism):
    """Automorphism A o f o A^{-1} of an affine image domain."""

    def __init__(self, domain: AffineImage, inner: Automorphism):
        if not isinstance(domain, AffineImage):
            raise AutomorphismError("AffineConjugation acts on an affine image")
        if inner.domain is not domain.base and not _same_base(inner.domain, domain.base):
            raise AutomorphismError("inner map must act on the base domain")
        self.domain = domain
        self.inner = inner

    def apply(self, z):
        z = np.asarray(z, dtype=complex)
        return self.domain.map(self.inner.apply(self.domain._inv(z)))

    def derivative(self, z):
        z = as_cpoint(z)
        zin = self.domain._inv(z)
        return self.domain.map.linear @ self.inner.derivative(zin) @ self.domain._inv.linear

    def inverse(self):
        return AffineConjugation(self.domain, self.inner.inverse())


def _same_base(a, b):
    return type(a) is type(b) and a.dim == b.dim


# ---------------------------------------------------------------------------
# standard families on the unit ball


def ball_identity(d):
    return BallMobius(np.eye(d + 1, dtype=complex))


def ball_rotation(U, domain=None):
    """Rotation z -> (U z) * phase from the block-unitary diag(U, 1)."""
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    M = np.eye(d + 1, dtype=complex)
    M[:d, :d] = U
    return BallMobius(M, domain=domain)


def ball_dilation(s, d=2, axis=0, domain=None):
    """One-parameter dilation along a coordinate axis; maps 0 to tanh(s) e_axis.

    Translation length along the axis geodesic equals |s|.
    """
    M = np.eye(d + 1, dtype=complex)
    M[axis, axis] = np.cosh(s)
    M[axis, d] = np.sinh(s)
    M[d, axis] = np.sinh(s)
    M[d, d] = np.cosh(s)
    return BallMobius(M, domain=domain)


def ball_parabolic(t, d=2, domain=None):
    """Parabolic one-parameter family fixing the boundary point e_1.

    Built from the nilpotent N = t * [[i, -i], [i, -i]] acting on the
    (z_1, last) block; exp(N) = I + N since N^2 = 0.
    """
    M = np.eye(d + 1, dtype=complex)
    M[0, 0] += 1j * t
    M[0, d] += -1j * t
    M[d, 0] += 1j * t
    M[d, d] += -1j * t
    return BallMobius(M, domain=domain)


def mobius_translation(a, domain=None):
    """Transvection of the unit ball sending 0 to the interior point a."""
    a = as_cpoint(a)
    d = a.shape[0]
    na2 = float(np.real(herm(a, a)))
    if na2 >= 1.0:
        raise AutomorphismError("translation target must be interior")
    gamma = 1.0 / np.sqrt(1.0 - na2)
    M = np.zeros((d + 1, d + 1), dtype=complex)
    if na2 < 1e-30:
        return ball_identity(d) if domain is None else BallMobius(
            np.eye(d + 1, dtype=complex), domain)
    P = np.outer(a, np.conj(a)) / na2
    M[:d, :d] = np.eye(d) + (gamma - 1.0) * P
    M[:d, d] = gamma * a
    M[d, :d] = gamma * np.conj(a)
    M[d, d] = gamma
    return BallMobius(M, domain=domain)


def random_su_element(d, scale=1.0, seed=None):
    """Seeded element of SU(d,1) via the exponential of a random algebra element.

    The Lie algebra is {X : X^H J + J X = 0, tr X = 0}; it is parametrized by
    anti-Hermitian Y through X = J Y, projected to trace zero.
    """
    from scipy.linalg import expm

    rng = seeded_rng(seed)
    n = d + 1
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Y = 0.5 * (A - A.conj().T)
    J = signature_form(d)
    X = J @ Y * scale
    X = X - np.trace(X) / n * np.eye(n)
    return normalize_su(expm(X))


def su_algebra_element(d, seed=None, scale=1.0):
    from scipy.linalg import expm  # noqa: F401  (kept with the generator above)

    rng = seeded_rng(seed)
    n = d + 1
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Y = 0.5 * (A - A.conj().T)
    J = signature_form(d)
    X = J @ Y * scale
    return X - np.trace(X) / n * np.eye(n)


# ---------------------------------------------------------------------------
# recentering hooks used by the metric layer


def centering_automorphism(domain: ConvexDomain, z):
    """Exact automorphism moving z to the domain's distinguished center.

    Returns None when the domain kind provides no transitive family; the
    metric layer then falls back to untransported bounds.
    """
    z = as_cpoint(z, domain.dim)
    if isinstance(domain, Ball):
        if cnorm(domain.center) == 0.0 and domain.radius == 1.0:
            return mobius_translation(z, domain).inverse()
        # conjugate through the exact affine normalization of the ball
        norm_map = AffineMap(np.eye(domain.dim, dtype=complex) / domain.radius,
                             -domain.center / domain.radius)
        unit = unit_ball(domain.dim)
        inner = mobius_translation(norm_map(z), unit).inverse()
        return _BallChart(domain, norm_map, inner, unit)
    if isinstance(domain, AffineImage) and isinstance(domain.base, Ball):
        inner = centering_automorphism(domain.base, domain._inv(z))
        if inner is None:
            return None
        return AffineConjugation(domain, inner)
    if isinstance(domain, GeneralizedEllipsoid) and domain.unit_block == (0,):
        a = complex(z[0])
        if abs(a) < 1e-15:
            return None
        M = np.array([[1.0, -a], [-np.conj(a), 1.0]], dtype=complex)
        M = M / np.sqrt(1.0 - abs(a) ** 2)
        return EllipsoidLift(domain, M)
    return None


class _BallChart(Automorphism):
    """Centering map of a general ball through its affine unit-ball chart."""

    def __init__(self, domain, norm_map, inner, unit):
        self.domain = domain
        self.norm_map = norm_map
        self.inner = inner
        self.unit = unit
        self._inv_map = norm_map.inverse()

    def apply(self, z):
        return self._inv_map(self.inner.apply(self.norm_map(np.asarray(z, dtype=complex))))

    def derivative(self, z):
        z = as_cpoint(z)
        zin = self.norm_map(z)
        return self._inv_map.linear @ self.inner.derivative(zin) @ self.norm_map.linear

    def inverse(self):
        return _BallChart(self.domain, self.norm_map, self.inner.inverse(), self.unit)
