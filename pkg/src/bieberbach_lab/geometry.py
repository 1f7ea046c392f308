"""Embedded-surface calculus for chart-parametrized discs in R^n.

A SurfacePatch wraps an immersion of a disc evaluable to 2-jets.  From those
jets this module derives the induced metric, pointwise adapted frames, the
second fundamental form, Christoffel symbols, covariant derivatives of
tangent fields and the covariant Hessian, together with the complex-bilinear
extensions used by the estimate module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import DegenerateImmersion, NotConformal
from .jets import ComplexJet, ComplexVec, Jet2Scalar, Jet2Vector, lift_chart

__all__ = [
    "SurfacePatch",
    "FrameAtPoint",
    "SecondFundamentalValue",
    "HessianValue",
    "metric",
    "frame_at",
    "second_fundamental",
    "second_fundamental_complex",
    "christoffels",
    "christoffel_derivatives",
    "covariant_derivative",
    "covariant_hessian",
    "covariant_hessian_complex",
    "conformality_residual",
    "frame_smoothness",
    "is_planar",
    "SURFACE_BUILDERS",
    "build_surface",
    "mobius_recentered",
    "dilated",
]

# Degeneracy tolerance on the smallest singular value of [f_x f_y],
# scaled by ||f_x||.
_DEGENERACY_TOL = 1e-10
_CONFORMAL_TOL = 1e-9


class SurfacePatch:
    """An immersion of the disc of radius `domain_radius` into R^n.

    `immersion` maps two chart jets to a sequence of n jets.  The patch is
    immutable after construction; when `conformal` is set the conformality
    certificate is verified on the sample grid and NotConformal is raised on
    failure.
    """

    def __init__(self, immersion, ambient_dim: int, domain_radius: float = 1.0,
                 conformal: bool = False, name: str = "custom", params=None,
                 validate: bool = True):
        if not 2 <= ambient_dim <= 8:
            raise ValueError("ambient dimension must lie in [2, 8]")
        self.immersion = immersion
        self.ambient_dim = ambient_dim
        self.domain_radius = float(domain_radius)
        self.conformal_flag = bool(conformal)
        self.name = name
        self.params = dict(params or {})
        if validate:
            self._validate()

    # -- evaluation ---------------------------------------------------------

    def jet(self, x: float, y: float) -> Jet2Vector:
        xj, yj = lift_chart(x, y)
        comps = self.immersion(xj, yj)
        jv = Jet2Vector(comps)
        if jv.n != self.ambient_dim:
            raise ValueError("immersion returned a vector of the wrong dimension")
        return jv

    def point(self, x: float, y: float) -> np.ndarray:
        return self.jet(x, y).value

    def basepoint(self) -> np.ndarray:
        return self.point(0.0, 0.0)

    def sample_grid(self, count: int = 7) -> list[tuple[float, float]]:
        """Deterministic cartesian grid staying inside radius 0.6 * rho."""
        span = 0.42 * self.domain_radius
        axis = np.linspace(-span, span, count)
        return [(float(x), float(y)) for x in axis for y in axis]

    # -- certificates ---------------------------------------------------------

    def _validate(self):
        for (x, y) in self.sample_grid():
            jv = self.jet(x, y)
            _check_immersion(jv)
            if self.conformal_flag:
                res = _conformality_residual_at(jv)
                if res > _CONFORMAL_TOL:
                    raise NotConformal(
                        f"surface {self.name!r} fails conformality at "
                        f"({x:.3f}, {y:.3f}): residual {res:.3e}")


def _check_immersion(jv: Jet2Vector):
    jac = jv.jac
    sv = np.linalg.svd(jac, compute_uv=False)
    scale = np.linalg.norm(jac[:, 0])
    if sv[-1] <= _DEGENERACY_TOL * max(scale, 1e-300):
        raise DegenerateImmersion(
            f"chart derivatives dependent: smallest singular value {sv[-1]:.3e}")


def _conformality_residual_at(jv: Jet2Vector) -> float:
    fx = jv.jac[:, 0]
    fy = jv.jac[:, 1]
    nx = np.linalg.norm(fx)
    ny = np.linalg.norm(fy)
    return max(abs(float(fx @ fy)) / (nx * ny), abs(nx - ny) / nx)


def conformality_residual(S: SurfacePatch) -> float:
    """Worst conformality defect of the patch over its sample grid."""
    return max(_conformality_residual_at(S.jet(x, y)) for (x, y) in S.sample_grid())


@dataclass(frozen=True)
class FrameAtPoint:
    """Adapted frame: tangent rows f_x, f_y plus an orthonormal normal basis."""

    point: np.ndarray
    tangent: np.ndarray   # shape (2, n), rows f_x, f_y
    normal: np.ndarray    # shape (n - 2, n), orthonormal rows


def metric(S: SurfacePatch, x: float, y: float) -> np.ndarray:
    jac = S.jet(x, y).jac
    return jac.T @ jac


def _tangent_projector(jac: np.ndarray) -> np.ndarray:
    g = jac.T @ jac
    return jac @ np.linalg.solve(g, jac.T)


def frame_at(S: SurfacePatch, x: float, y: float) -> FrameAtPoint:
    """Tangent rows f_x, f_y; normals by deterministic pivoted orthonormalization.

    Ambient basis vectors are projected off the tangent plane and off the
    normals already chosen; the largest residual wins each round, ties going
    to the lowest index.
    """
    jv = S.jet(x, y)
    _check_immersion(jv)
    jac = jv.jac
    n = jv.n
    proj = _tangent_projector(jac)
    chosen: list[np.ndarray] = []
    for _ in range(n - 2):
        residuals = []
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            r = e - proj @ e
            for nu in chosen:
                r = r - (nu @ r) * nu
            residuals.append(r)
        norms = np.array([np.linalg.norm(r) for r in residuals])
        k_star = int(np.argmax(norms))
        chosen.append(residuals[k_star] / norms[k_star])
    normal = np.array(chosen) if chosen else np.zeros((0, n))
    return FrameAtPoint(point=jv.value, tangent=jac.T.copy(), normal=normal)


def frame_smoothness(S: SurfacePatch, path) -> float:
    """Largest operator-norm jump of the normal frame between consecutive points."""
    frames = [frame_at(S, x, y).normal for (x, y) in path]
    worst = 0.0
    for a, b in zip(frames, frames[1:]):
        worst = max(worst, float(np.linalg.norm(a - b, 2)))
    return worst


@dataclass(frozen=True)
class SecondFundamentalValue:
    """Normal-valued symmetric bilinear form evaluated on one pair of arguments."""

    value: np.ndarray


@dataclass(frozen=True)
class HessianValue:
    """Second covariant derivative of a tangent field on one pair of arguments."""

    value: np.ndarray                 # ambient components of the tangent vector
    chart: np.ndarray = field(default=None, repr=False)


def second_fundamental(S: SurfacePatch, at, v, w) -> SecondFundamentalValue:
    """sigma(df v, df w): normal projection of sum v_i w_j d_i d_j f."""
    x, y = at
    jv = S.jet(x, y)
    _check_immersion(jv)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    amb = (v[0] * w[0] * jv.second(0, 0)
           + (v[0] * w[1] + v[1] * w[0]) * jv.second(0, 1)
           + v[1] * w[1] * jv.second(1, 1))
    proj = _tangent_projector(jv.jac)
    return SecondFundamentalValue(amb - proj @ amb)


def second_fundamental_complex(S: SurfacePatch, at) -> ComplexVec:
    """sigma(f_z, f_z) = (sigma(f_x,f_x) - sigma(f_y,f_y) - 2i sigma(f_x,f_y)) / 4."""
    sxx = second_fundamental(S, at, (1.0, 0.0), (1.0, 0.0)).value
    syy = second_fundamental(S, at, (0.0, 1.0), (0.0, 1.0)).value
    sxy = second_fundamental(S, at, (1.0, 0.0), (0.0, 1.0)).value
    return ComplexVec(0.25 * (sxx - syy), -0.5 * sxy)


def christoffels(S: SurfacePatch, at) -> np.ndarray:
    """Gamma[k, i, j] of the induced metric, metric derivatives from 2-jets."""
    x, y = at
    jv = S.jet(x, y)
    _check_immersion(jv)
    jac = jv.jac
    g = jac.T @ jac
    ginv = np.linalg.inv(g)
    # dg[m, i, j] = d_m g_ij = <f_im, f_j> + <f_i, f_jm>
    dg = np.empty((2, 2, 2))
    for m in range(2):
        for i in range(2):
            for j in range(2):
                dg[m, i, j] = jv.second(i, m) @ jac[:, j] + jac[:, i] @ jv.second(j, m)
    gamma = np.empty((2, 2, 2))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                gamma[k, i, j] = 0.5 * sum(
                    ginv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                    for l in range(2))
    return gamma


def christoffel_derivatives(S: SurfacePatch, at, step: float = 1e-4) -> np.ndarray:
    """dGamma[m, k, i, j] = d_m Gamma^k_ij by central differences of the jet values."""
    x, y = at
    out = np.empty((2, 2, 2, 2))
    out[0] = (christoffels(S, (x + step, y)) - christoffels(S, (x - step, y))) / (2 * step)
    out[1] = (christoffels(S, (x, y + step)) - christoffels(S, (x, y - step))) / (2 * step)
    return out


def _chart_field_data(X, x: float, y: float):
    """Chart field values and derivatives as arrays a[k], da[k,j], dda[k,packed]."""
    a_jets = X.chart_jet(x, y)
    a = np.array([j.val for j in a_jets])
    da = np.array([[j.dx, j.dy] for j in a_jets])
    dda = np.array([[j.dxx, j.dxy, j.dyy] for j in a_jets])
    return a, da, dda


def covariant_derivative(S: SurfacePatch, X, at, v) -> np.ndarray:
    """nabla_v X: tangential projection of the ambient directional derivative.

    X is any object exposing chart_jet(x, y); v is a chart vector.  Returns
    the ambient components of the resulting tangent vector.
    """
    x, y = at
    jv = S.jet(x, y)
    _check_immersion(jv)
    jac = jv.jac
    a, da, _ = _chart_field_data(X, x, y)
    v = np.asarray(v, dtype=float)
    amb = np.zeros(jv.n)
    for j in range(2):
        col = np.zeros(jv.n)
        for i in range(2):
            col += da[i, j] * jac[:, i] + a[i] * jv.second(i, j)
        amb += v[j] * col
    proj = _tangent_projector(jac)
    return proj @ amb


def covariant_hessian(S: SurfacePatch, X, at, v, w) -> HessianValue:
    """(nabla^2 X)(v, w) = (nabla_w nabla X)(v), computed intrinsically.

    Assembled from the chart field jets and the Christoffel symbols of the
    induced metric.  The term carrying Christoffel derivatives is weighted by
    the field value, so it vanishes identically at the field's zero; away
    from the zero it is supplied by finite differences of the jet-computed
    symbols (third immersion derivatives are outside the 2-jet budget).
    """
    x, y = at
    jv = S.jet(x, y)
    _check_immersion(jv)
    a, da, dda = _chart_field_data(X, x, y)
    gamma = christoffels(S, at)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)

    # T[k, j] = (nabla X)^k_j
    T = da.copy()
    for k in range(2):
        for j in range(2):
            T[k, j] += gamma[k, j, :] @ a

    if a @ a == 0.0:
        dgamma_a = np.zeros((2, 2, 2))
    else:
        dgam = christoffel_derivatives(S, at)
        dgamma_a = np.einsum("mkji,i->mkj", dgam, a)

    pack = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}
    H = np.zeros(2)
    for k in range(2):
        acc = 0.0
        for j in range(2):
            for m in range(2):
                dT = dda[k, pack[(j, m)]] + dgamma_a[m, k, j] + gamma[k, j, :] @ da[:, m]
                corr = gamma[k, m, :] @ T[:, j] - gamma[:, m, j] @ T[k, :]
                acc += v[j] * w[m] * (dT + corr)
        H[k] = acc
    ambient = jv.jac @ H
    return HessianValue(value=ambient, chart=H)


def covariant_hessian_complex(S: SurfacePatch, X, at) -> ComplexVec:
    """(nabla^2 X)(f_z, f_z) by the quarter expansion over the chart basis."""
    e1 = (1.0, 0.0)
    e2 = (0.0, 1.0)
    h11 = covariant_hessian(S, X, at, e1, e1).value
    h22 = covariant_hessian(S, X, at, e2, e2).value
    h12 = covariant_hessian(S, X, at, e1, e2).value
    return ComplexVec(0.25 * (h11 - h22), -0.5 * h12)


def is_planar(S: SurfacePatch) -> bool:
    """True when the sampled second fundamental form vanishes identically."""
    worst = 0.0
    scale = 1.0
    pairs = [((1.0, 0.0), (1.0, 0.0)), ((0.0, 1.0), (0.0, 1.0)), ((1.0, 0.0), (0.0, 1.0))]
    for (x, y) in S.sample_grid():
        jv = S.jet(x, y)
        scale = max(scale, float(np.max(np.abs(jv.hess))))
        for v, w in pairs:
            worst = max(worst, float(np.linalg.norm(second_fundamental(S, (x, y), v, w).value)))
    return worst <= 1e-9 * scale


# -- surface registry -------------------------------------------------------


def _plane_immersion(xj, yj):
    return (xj, yj, jets.constant(0.0))


def plane() -> SurfacePatch:
    """Identity chart of the flat coordinate plane in R^3."""
    return SurfacePatch(_plane_immersion, ambient_dim=3, conformal=True,
                        name="plane")


def koebe_plane(c: float = 0.5) -> SurfacePatch:
    """Planar image of z / (1 - c z)^2, the extremal coefficient family."""
    c = float(c)

    def immersion(xj, yj):
        z = ComplexJet(xj, yj)
        den = 1.0 - c * z
        w = z / (den * den)
        return (w.re, w.im, jets.constant(0.0))

    return SurfacePatch(immersion, ambient_dim=3, conformal=True,
                        name="koebe_plane", params={"c": c})


def helicoid(r: float = 0.5) -> SurfacePatch:
    """Helicoid (sinh x cos y, sinh x sin y, y) precomposed with z -> r z."""
    r = float(r)

    def immersion(xj, yj):
        u = r * xj
        v = r * yj
        return (jets.sinh(u) * jets.cos(v), jets.sinh(u) * jets.sin(v), v)

    return SurfacePatch(immersion, ambient_dim=3, conformal=True,
                        name="helicoid", params={"r": r})


def graph(a: float = 1.0, b: float = 0.0, c: float = 1.0) -> SurfacePatch:
    """Non-conformal test patch (x, y, a x^2 + b x y + c y^2)."""
    a, b, c = float(a), float(b), float(c)

    def immersion(xj, yj):
        h = a * xj * xj + b * xj * yj + c * yj * yj
        return (xj, yj, h)

    return SurfacePatch(immersion, ambient_dim=3, conformal=False,
                        name="graph", params={"a": a, "b": b, "c": c})


def catenoid_patch(r: float = 0.5) -> SurfacePatch:
    """Catenoid patch (cosh rx cos ry, cosh rx sin ry, rx)."""
    r = float(r)

    def immersion(xj, yj):
        u = r * xj
        v = r * yj
        return (jets.cosh(u) * jets.cos(v), jets.cosh(u) * jets.sin(v), u)

    return SurfacePatch(immersion, ambient_dim=3, conformal=True,
                        name="catenoid_patch", params={"r": r})


SURFACE_BUILDERS = {
    "plane": plane,
    "koebe_plane": koebe_plane,
    "helicoid": helicoid,
    "graph": graph,
    "catenoid_patch": catenoid_patch,
}


def build_surface(key: str, **params) -> SurfacePatch:
    """Instantiate a registered surface; unknown keys or params raise ValueError."""
    try:
        builder = SURFACE_BUILDERS[key]
    except KeyError:
        raise ValueError(f"unknown surface {key!r}; known: {sorted(SURFACE_BUILDERS)}")
    try:
        return builder(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for surface {key!r}: {exc}")


def mobius_recentered(S: SurfacePatch, a: complex, theta: float = 0.0) -> SurfacePatch:
    """Precompose with the disc automorphism z -> ((e^{i theta} z) + a) / (1 + conj(a) e^{i theta} z).

    Moves the basepoint to the former chart point `a` while keeping the unit
    disc domain, so the estimate hypotheses are preserved exactly.
    """
    a = complex(a)
    if abs(a) >= 1.0:
        raise ValueError("recentering parameter must satisfy |a| < 1")
    rot = complex(math.cos(theta), math.sin(theta))

    def immersion(xj, yj):
        z = ComplexJet(xj, yj)
        u = z * rot
        w = (u + a) / (ComplexJet.const(1.0) + u * a.conjugate())
        return S.immersion(w.re, w.im)

    return SurfacePatch(immersion, ambient_dim=S.ambient_dim,
                        domain_radius=S.domain_radius,
                        conformal=S.conformal_flag,
                        name=f"{S.name}+mobius",
                        params={**S.params, "a": a, "theta": theta})


def dilated(S: SurfacePatch, scale: float) -> SurfacePatch:
    """Precompose with z -> scale * z (scale in (0, 1] keeps the domain)."""
    scale = float(scale)

    def immersion(xj, yj):
        return S.immersion(scale * xj, scale * yj)

    return SurfacePatch(immersion, ambient_dim=S.ambient_dim,
                        domain_radius=S.domain_radius,
                        conformal=S.conformal_flag,
                        name=f"{S.name}+dilation",
                        params={**S.params, "scale": scale})
