"""Normalized attractor fields on surface patches and their ambient extensions.

Two constructions are provided.  `conformal_attractor` builds the canonical
member of the normalized conformal family on a conformally parametrized
patch: the pushforward of the chart field (-x, -y), except on planar patches
where the ambient translation field toward the basepoint is used instead
(it is the conformal pushforward through the flat isometric chart, and it
reproduces the classical coefficient estimate exactly).  `tangential_attractor`
builds the projection field -Proj(q - p), which needs no conformality and
exists on every patch.

`extend_normal` realizes the ambient extension that subtracts the normal
offset in the pointwise orthonormal normal frame, with a projected-Newton
decomposition of ambient queries into (surface point, normal coefficients).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateImmersion, FrameDiscontinuity, NotConformal,
                     OutsideTube)
from .geometry import (SurfacePatch, covariant_derivative, frame_at,
                       frame_smoothness, is_planar, second_fundamental)
from .jets import Jet2Scalar

__all__ = [
    "TangentAttractor",
    "AmbientExtension",
    "conformal_attractor",
    "tangential_attractor",
    "extend_normal",
    "ambient_second_derivative",
]

_NORMALIZATION_TOL = 1e-8


class TangentAttractor:
    """A vector field on a patch given by chart components with 2-jet access.

    Invariants enforced at construction: the field vanishes exactly at the
    chart origin and its covariant derivative there is minus the identity.
    Instances are immutable and safe to share between threads.
    """

    def __init__(self, host: SurfacePatch, kind: str, chart_jet_fn, validate=True):
        self.host = host
        self.kind = kind
        self._chart_jet_fn = chart_jet_fn
        if validate:
            _verify_normalization(self)

    def chart_jet(self, x: float, y: float) -> tuple[Jet2Scalar, Jet2Scalar]:
        """Both chart components of the field as 2-jets at (x, y)."""
        return self._chart_jet_fn(x, y)

    def chart_value(self, x: float, y: float) -> np.ndarray:
        j1, j2 = self.chart_jet(x, y)
        return np.array([j1.val, j2.val])

    def ambient_value(self, x: float, y: float) -> np.ndarray:
        """Pushforward of the chart components through the immersion."""
        a = self.chart_value(x, y)
        jac = self.host.jet(x, y).jac
        return jac @ a


def _verify_normalization(X: TangentAttractor):
    a0 = X.chart_value(0.0, 0.0)
    if not (a0[0] == 0.0 and a0[1] == 0.0):
        raise ValueError("attractor chart field must vanish exactly at the basepoint")
    jac = X.host.jet(0.0, 0.0).jac
    for j in range(2):
        v = np.zeros(2)
        v[j] = 1.0
        dv = covariant_derivative(X.host, X, (0.0, 0.0), v)
        ref = jac[:, j]
        if np.linalg.norm(dv + ref) > _NORMALIZATION_TOL * np.linalg.norm(ref):
            raise ValueError("attractor fails the (nabla X)_p = -I certificate")


def _pushforward_chart_jet(x: float, y: float) -> tuple[Jet2Scalar, Jet2Scalar]:
    return (Jet2Scalar(-x, -1.0, 0.0), Jet2Scalar(-y, 0.0, -1.0))


class _ProjectionFieldJets:
    """Chart jets of the field q -> -Proj_{T_q}(q - p) on a fixed patch.

    Values and first chart derivatives are exact consequences of the 2-jets
    of the immersion.  Second chart derivatives would require third immersion
    derivatives in general; at the basepoint the missing terms carry a factor
    that vanishes there, so an exact closed form is used, while elsewhere they
    are taken by central differences of the exact gradient.
    """

    _FD_STEP = 1e-5

    def __init__(self, host: SurfacePatch):
        self.host = host
        self.p0 = host.basepoint()

    def _value_and_gradient(self, x: float, y: float):
        jv = self.host.jet(x, y)
        jac = jv.jac
        g = jac.T @ jac
        ginv = np.linalg.inv(g)
        u = self.p0 - jv.value
        m = jac.T @ u
        a = ginv @ m
        # dg[r] = d_r g, dm[r, l] = d_r m_l
        da = np.empty((2, 2))
        dg = []
        for r in range(2):
            dgr = np.empty((2, 2))
            for i in range(2):
                for j in range(2):
                    dgr[i, j] = jv.second(i, r) @ jac[:, j] + jac[:, i] @ jv.second(j, r)
            dg.append(dgr)
            dm = np.array([-g[r, 0] + u @ jv.second(0, r),
                           -g[r, 1] + u @ jv.second(1, r)])
            da[:, r] = -ginv @ dgr @ a + ginv @ dm
        return jv, ginv, g, dg, a, da

    def __call__(self, x: float, y: float) -> tuple[Jet2Scalar, Jet2Scalar]:
        jv, ginv, g, dg, a, da = self._value_and_gradient(x, y)
        if x == 0.0 and y == 0.0:
            # u = 0 and m = 0 kill every term needing third immersion derivatives
            jac = jv.jac
            dda = np.empty((2, 2, 2))  # [r, s, component]
            for r in range(2):
                for s in range(2):
                    ddm = np.array([
                        -(jv.second(r, s) @ jac[:, 0]) - jv.second(r, 0) @ jac[:, s]
                        - jv.second(s, 0) @ jac[:, r],
                        -(jv.second(r, s) @ jac[:, 1]) - jv.second(r, 1) @ jac[:, s]
                        - jv.second(s, 1) @ jac[:, r],
                    ])
                    dda[r, s] = ginv @ (dg[r][:, s] + dg[s][:, r] + ddm)
            d2 = np.stack([
                [dda[0, 0, k], 0.5 * (dda[0, 1, k] + dda[1, 0, k]), dda[1, 1, k]]
                for k in range(2)])
        else:
            h = self._FD_STEP
            gxp = self._value_and_gradient(x + h, y)[5]
            gxm = self._value_and_gradient(x - h, y)[5]
            gyp = self._value_and_gradient(x, y + h)[5]
            gym = self._value_and_gradient(x, y - h)[5]
            ddx = (gxp - gxm) / (2 * h)   # d/dx of da -> columns are d_r a
            ddy = (gyp - gym) / (2 * h)
            d2 = np.stack([
                [ddx[k, 0], 0.5 * (ddx[k, 1] + ddy[k, 0]), ddy[k, 1]]
                for k in range(2)])
        return (Jet2Scalar(a[0], da[0, 0], da[0, 1], d2[0, 0], d2[0, 1], d2[0, 2]),
                Jet2Scalar(a[1], da[1, 0], da[1, 1], d2[1, 0], d2[1, 1], d2[1, 2]))


def conformal_attractor(S: SurfacePatch) -> TangentAttractor:
    """The canonical normalized conformal attractor on a conformal patch.

    Planar patches get the ambient translation field toward the basepoint;
    all other patches get the pushforward of the chart field (-x, -y).
    Raises NotConformal when the patch is not conformally parametrized.
    """
    if not S.conformal_flag:
        raise NotConformal(f"surface {S.name!r} is not conformally parametrized")
    if is_planar(S):
        return TangentAttractor(S, "conformal_pushforward", _ProjectionFieldJets(S))
    return TangentAttractor(S, "conformal_pushforward", _pushforward_chart_jet)


def tangential_attractor(S: SurfacePatch) -> TangentAttractor:
    """The projection field -Proj_{T_q}(q - p); no conformality required."""
    return TangentAttractor(S, "tangential_projection", _ProjectionFieldJets(S))


@dataclass(frozen=True)
class AmbientExtension:
    """Ambient extension X~(q + sum s_i xi_i(q)) = X(q) - sum s_i xi_i(q).

    `tube_radius` bounds the admissible normal coefficients; queries outside
    the tube, or that projected Newton cannot resolve, raise OutsideTube.
    `reach_estimate` is the sampled curvature bound the tube was derived
    from; it also sets the scale of difference stencils.  Evaluator calls
    are pure.
    """

    base: TangentAttractor
    tube_radius: float
    reach_estimate: float = 1.0

    _NEWTON_TOL = 1e-12
    _MAX_ITER = 50

    def resolve(self, point, seed=None) -> tuple[np.ndarray, np.ndarray]:
        """Split an ambient point into chart coordinates and normal coefficients."""
        S = self.base.host
        target = np.asarray(point, dtype=float)
        seeds = [np.asarray(seed, dtype=float)] if seed is not None else []
        seeds.append(np.zeros(2))
        span = 0.6 * S.domain_radius
        grid = np.linspace(-span, span, 5)
        seeds.extend(np.array([gx, gy]) for gx in grid for gy in grid)
        for q0 in seeds:
            q = self._newton(target, q0)
            if q is not None:
                fr = frame_at(S, q[0], q[1])
                s = fr.normal @ (target - fr.point)
                if np.any(np.abs(s) >= self.tube_radius):
                    raise OutsideTube(
                        f"normal offset {np.max(np.abs(s)):.3e} exceeds tube "
                        f"radius {self.tube_radius:.3e}")
                return q, s
        raise OutsideTube("projected Newton failed to resolve the query point")

    def _newton(self, target, q0):
        S = self.base.host
        q = q0.copy()
        bound = 1.5 * S.domain_radius
        converged = False
        for _ in range(self._MAX_ITER):
            jv = S.jet(q[0], q[1])
            jac = jv.jac
            r = target - jv.value
            G = jac.T @ r
            scale = max(float(np.trace(jac.T @ jac)), 1e-30)
            if np.linalg.norm(G) <= self._NEWTON_TOL * scale:
                if converged:
                    return q
                converged = True   # one polishing step after first hit
            dG = np.array([[r @ jv.second(i, m) for m in range(2)] for i in range(2)])
            dG -= jac.T @ jac
            try:
                delta = np.linalg.solve(dG, -G)
            except np.linalg.LinAlgError:
                return None
            step = float(np.linalg.norm(delta))
            if step > 0.5 * S.domain_radius:
                delta *= 0.5 * S.domain_radius / step
            q = q + delta
            if np.linalg.norm(q) > bound or not np.all(np.isfinite(q)):
                return None
        return q if converged else None

    def evaluate(self, point, seed=None) -> np.ndarray:
        q, s = self.resolve(point, seed=seed)
        fr = frame_at(self.base.host, q[0], q[1])
        return self.base.ambient_value(q[0], q[1]) - fr.normal.T @ s

    def __call__(self, point) -> np.ndarray:
        return self.evaluate(point)


def _max_curvature(S: SurfacePatch, directions: int = 16) -> float:
    """Sampled bound on ||sigma(u, u)|| over metric-unit tangent directions."""
    worst = 0.0
    angles = np.linspace(0.0, math.pi, directions, endpoint=False)
    for (x, y) in S.sample_grid():
        g = S.jet(x, y).jac
        gram = g.T @ g
        # metric-orthonormal chart basis by Gram-Schmidt
        e1 = np.array([1.0, 0.0]) / math.sqrt(gram[0, 0])
        b = np.array([0.0, 1.0]) - (gram[0, 1] / gram[0, 0]) * np.array([1.0, 0.0])
        e2 = b / math.sqrt(b @ gram @ b)
        for t in angles:
            u = math.cos(t) * e1 + math.sin(t) * e2
            sig = second_fundamental(S, (x, y), u, u).value
            worst = max(worst, float(np.linalg.norm(sig)))
    return worst


def extend_normal(X: TangentAttractor, check_radius: float | None = None) -> AmbientExtension:
    """Build the normal-frame ambient extension of a normalized attractor.

    The tube radius is 0.05 times a sampled reach estimate, the estimate
    being lower-bounded by the reciprocal of the largest sampled curvature.
    The pointwise frames are certified pivot-flip free along radial paths
    out to `check_radius` (default a quarter of the domain radius; callers
    that evaluate along long orbits should certify the wider region).
    """
    S = X.host
    kappa = _max_curvature(S)
    reach_estimate = 1.0 / max(kappa, 1e-8)
    tube = 0.05 * reach_estimate
    span = 0.25 * S.domain_radius if check_radius is None else float(check_radius)
    steps = np.linspace(0.0, span, 13)
    for k in range(8):
        ang = math.pi * k / 4.0
        path = [(r * math.cos(ang), r * math.sin(ang)) for r in steps]
        jump = frame_smoothness(S, path)
        if jump > 0.1:
            raise FrameDiscontinuity(
                f"normal frame jumps by {jump:.3f} along a radial path")
    return AmbientExtension(base=X, tube_radius=tube, reach_estimate=reach_estimate)


def ambient_second_derivative(E: AmbientExtension, v, w, step: float | None = None) -> np.ndarray:
    """(d2 X~)_p(v, w) by a centered 4-point stencil on the extension evaluator.

    The default step is 1e-3 times the local geometry scale (half the reach
    estimate, capped at one).  Directions are normalized before differencing
    and the bilinear scaling is restored afterwards; the stencil is symmetric
    in (v, w) by construction.
    """
    if step is None:
        step = 1e-3 * min(1.0, 0.5 * E.reach_estimate)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    nv = np.linalg.norm(v)
    nw = np.linalg.norm(w)
    if nv == 0.0 or nw == 0.0:
        return np.zeros_like(v)
    u = v / nv
    z = w / nw
    p = E.base.host.basepoint()
    f_pp = E.evaluate(p + step * (u + z))
    f_pm = E.evaluate(p + step * (u - z))
    f_mp = E.evaluate(p - step * (u - z))
    f_mm = E.evaluate(p - step * (u + z))
    return nv * nw * (f_pp - f_pm - f_mp + f_mm) / (4.0 * step * step)
