"""Evaluation of the generalized coefficient estimate and its supporting checks.

For a conformal patch with basepoint p = f(0) the headline inequality reads

    || f_zz(0) - sigma(f_z, f_z) + (nabla^2 X)_p(f_z, f_z) ||  <=  4 || f_z(0) ||

with X the normalized conformal attractor constructed on the patch.  This
module assembles every term, the independent cross-pipeline residual for the
ambient-vs-intrinsic Hessian identity, the classical second-coefficient
bound with its composition form, and the helicoid scaling scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attractor import (TangentAttractor, ambient_second_derivative,
                        conformal_attractor, extend_normal,
                        tangential_attractor)
from .errors import ZeroDerivative
from .geometry import (SurfacePatch, build_surface, covariant_hessian,
                       covariant_hessian_complex, helicoid, mobius_recentered,
                       second_fundamental, second_fundamental_complex)
from .jets import ComplexJet, ComplexVec, complex_z_derivatives

__all__ = [
    "EstimateReport",
    "HolomorphicGerm",
    "Lemma22Report",
    "ScanRow",
    "evaluate_theorem",
    "lemma24_residual",
    "classical_bieberbach",
    "lemma22_check",
    "helicoid_scan",
    "theorem_battery",
    "lemma24_battery",
    "GERM_BUILDERS",
    "build_germ",
]


@dataclass(frozen=True)
class EstimateReport:
    """All terms of the estimate at the basepoint, plus slack = rhs - lhs."""

    surface: str
    attractor_kind: str
    fz0: ComplexVec
    fzz0: ComplexVec
    sigma_zz: ComplexVec
    hess_zz: ComplexVec
    lhs: float
    rhs: float
    slack: float


def evaluate_theorem(S: SurfacePatch) -> EstimateReport:
    """Evaluate every term of the inequality for the constructed attractor."""
    at = (0.0, 0.0)
    fz, fzz = complex_z_derivatives(S.jet(0.0, 0.0))
    sigma_zz = second_fundamental_complex(S, at)
    X = conformal_attractor(S)
    hess_zz = covariant_hessian_complex(S, X, at)
    lhs = (fzz - sigma_zz + hess_zz).norm()
    rhs = 4.0 * fz.norm()
    return EstimateReport(surface=S.name, attractor_kind=X.kind,
                          fz0=fz, fzz0=fzz, sigma_zz=sigma_zz,
                          hess_zz=hess_zz, lhs=lhs, rhs=rhs, slack=rhs - lhs)


def lemma24_residual(S: SurfacePatch, X: TangentAttractor, v, w,
                     extension=None) -> float:
    """Cross-pipeline residual of the ambient-vs-intrinsic Hessian identity.

    The ambient side differentiates the normal-frame extension by finite
    differences; the intrinsic side combines the jet-computed covariant
    Hessian with the second fundamental form.  The two pipelines share no
    differentiation machinery.
    """
    E = extension if extension is not None else extend_normal(X)
    jac = S.jet(0.0, 0.0).jac
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    amb = ambient_second_derivative(E, jac @ v, jac @ w)
    at = (0.0, 0.0)
    intr = covariant_hessian(S, X, at, v, w).value - second_fundamental(S, at, v, w).value
    return float(np.linalg.norm(amb - intr))


@dataclass(frozen=True)
class HolomorphicGerm:
    """Taylor coefficients (a1, a2, ...) of a holomorphic germ vanishing at 0.

    Univalence on the disc is declared by the caller; only families that are
    univalent by construction ship with the lab.
    """

    taylor: tuple
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "taylor", tuple(complex(c) for c in self.taylor))

    @property
    def a1(self) -> complex:
        return self.taylor[0] if self.taylor else 0j

    @property
    def a2(self) -> complex:
        return self.taylor[1] if len(self.taylor) > 1 else 0j

    def eval_jet(self, z: ComplexJet) -> ComplexJet:
        """Horner evaluation of the polynomial truncation on a complex jet."""
        acc = ComplexJet.const(0.0)
        for c in reversed(self.taylor):
            acc = acc * z + c
        return acc * z


GERM_BUILDERS = {
    "identity": lambda: HolomorphicGerm((1.0,)),
    "half": lambda: HolomorphicGerm((0.5,)),
    "scaled": lambda c=0.5: HolomorphicGerm((complex(c),)),
    "koebe": lambda c=1.0: HolomorphicGerm(tuple((k + 1) * complex(c) ** k
                                                 for k in range(6))),
}


def build_germ(key: str, **params) -> HolomorphicGerm:
    try:
        builder = GERM_BUILDERS[key]
    except KeyError:
        raise ValueError(f"unknown germ {key!r}; known: {sorted(GERM_BUILDERS)}")
    try:
        return builder(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for germ {key!r}: {exc}")


def classical_bieberbach(h: HolomorphicGerm) -> tuple[float, bool]:
    """|h''(0)| / |h'(0)| = 2 |a2 / a1| and whether it clears the bound 4."""
    if h.a1 == 0:
        raise ZeroDerivative("germ has vanishing first derivative")
    ratio = 2.0 * abs(h.a2 / h.a1)
    return ratio, ratio <= 4.0 + 1e-12


@dataclass(frozen=True)
class Lemma22Report:
    """Both sides of the composition estimate and the unimodular factor."""

    lhs: float
    rhs: float
    margin: float
    zeta: complex
    grid_gap: float = float("nan")


def _composed_patch(S: SurfacePatch, phi: HolomorphicGerm) -> SurfacePatch:
    def immersion(xj, yj):
        w = phi.eval_jet(ComplexJet(xj, yj))
        return S.immersion(w.re, w.im)

    return SurfacePatch(immersion, ambient_dim=S.ambient_dim,
                        domain_radius=S.domain_radius,
                        conformal=S.conformal_flag,
                        name=f"{S.name}+germ", params=S.params, validate=False)


def lemma22_check(S: SurfacePatch, phi: HolomorphicGerm, center: complex = 0j,
                  grid_check: bool = False) -> Lemma22Report:
    """Composition estimate for g = f ∘ (recentring ∘ phi).

    `phi` vanishes at 0; a nonzero `center` moves the comparison basepoint by
    the disc automorphism taking 0 to `center`, and the base embedding is
    recentred accordingly so both maps share the basepoint exactly.  The
    unimodular factor is phi'(0)^2 / |phi'(0)|^2; with `grid_check` the factor
    is also minimized over 3600 unimodular candidates and the gap reported.
    """
    if phi.a1 == 0:
        raise ZeroDerivative("composition germ has vanishing first derivative")
    base = mobius_recentered(S, center) if complex(center) != 0j else S
    comp = _composed_patch(base, phi)

    fz, fzz = complex_z_derivatives(base.jet(0.0, 0.0))
    gz, gzz = complex_z_derivatives(comp.jet(0.0, 0.0))
    if fz.norm() == 0.0 or gz.norm() == 0.0:
        raise ZeroDerivative("degenerate first derivative at the basepoint")

    zeta = phi.a1 ** 2 / abs(phi.a1) ** 2
    g_term = gzz.scale(1.0 / gz.norm() ** 2)
    f_term = fzz.scale(1.0 / fz.norm() ** 2)
    lhs = (g_term - f_term.scale(zeta)).norm()
    rhs = 4.0 / gz.norm()

    grid_gap = float("nan")
    if grid_check:
        best = min(
            (g_term - f_term.scale(complex(math.cos(t), math.sin(t)))).norm()
            for t in np.linspace(0.0, 2.0 * math.pi, 3600, endpoint=False))
        grid_gap = lhs - best
    return Lemma22Report(lhs=lhs, rhs=rhs, margin=rhs - lhs, zeta=zeta,
                         grid_gap=grid_gap)


@dataclass(frozen=True)
class ScanRow:
    """One row of the helicoid scaling experiment."""

    R: float
    naive_ratio: float       # ||f_zz(0)|| / ||f_z(0)||, f = g(R .)
    geometric_ratio: float   # ||f_zz - sigma(f_z,f_z)|| / ||f_z|| at the basepoint
    slack: float             # full-estimate slack at the (possibly recentred) basepoint


def helicoid_scan(R_values, basepoint_x: float = 0.0) -> list[ScanRow]:
    """Scaling experiment f(z) = g(R z) on the helicoid.

    The naive column shows the unbounded growth of the raw coefficient ratio;
    the geometric column evaluates the curvature-corrected ratio at the chart
    point whose surface x-coordinate is `basepoint_x` (0 keeps the axis); the
    slack column evaluates the full estimate, recentred by the matching disc
    automorphism when the basepoint is moved.
    """
    rows = []
    for R in R_values:
        R = float(R)
        if R <= 0.0:
            raise ValueError("scan scales must be positive")
        S = helicoid(r=R)
        fz0, fzz0 = complex_z_derivatives(S.jet(0.0, 0.0))
        naive = fzz0.norm() / fz0.norm()

        x0 = basepoint_x / R
        fz, fzz = complex_z_derivatives(S.jet(x0, 0.0))
        sig = second_fundamental_complex(S, (x0, 0.0))
        geometric = (fzz - sig).norm() / fz.norm()

        target = mobius_recentered(S, x0) if x0 != 0.0 else S
        slack = evaluate_theorem(target).slack
        rows.append(ScanRow(R=R, naive_ratio=naive,
                            geometric_ratio=geometric, slack=slack))
    return rows


# -- batteries ----------------------------------------------------------------


@dataclass(frozen=True)
class TheoremCase:
    case_id: str
    surface_key: str
    params: dict
    mobius_a: complex
    mobius_theta: float
    report: EstimateReport


def theorem_battery_descriptors(count: int = 108, seed: int = 0) -> list[dict]:
    """Deterministic, seed-fixed case descriptors for the estimate battery."""
    rng = np.random.default_rng(seed)
    families = ("plane", "koebe_plane", "helicoid")
    descriptors = []
    for i in range(int(count)):
        key = families[i % len(families)]
        if key == "koebe_plane":
            params = {"c": float(rng.uniform(-1.0, 1.0))}
        elif key == "helicoid":
            params = {"r": float(rng.uniform(0.1, 0.8))}
        else:
            params = {}
        radius = 0.8 * math.sqrt(float(rng.uniform(0.0, 1.0)))
        angle = float(rng.uniform(0.0, 2.0 * math.pi))
        descriptors.append({
            "case_id": f"theorem-{i:04d}",
            "surface_key": key,
            "params": params,
            "mobius_a": complex(radius * math.cos(angle), radius * math.sin(angle)),
            "mobius_theta": float(rng.uniform(0.0, 2.0 * math.pi)),
        })
    return descriptors


def evaluate_theorem_case(desc: dict) -> TheoremCase:
    """Build and evaluate one battery case; pure, safe to run concurrently."""
    S = build_surface(desc["surface_key"], **desc["params"])
    a = desc["mobius_a"]
    theta = desc["mobius_theta"]
    if a != 0j or theta != 0.0:
        S = mobius_recentered(S, a, theta)
    return TheoremCase(case_id=desc["case_id"], surface_key=desc["surface_key"],
                       params=desc["params"], mobius_a=a, mobius_theta=theta,
                       report=evaluate_theorem(S))


def theorem_battery(count: int = 108, seed: int = 0, mapper=None) -> list[TheoremCase]:
    """Randomized conformal cases: surface families times disc automorphisms.

    Every random draw happens while descriptors are built, so an order
    preserving concurrent `mapper` cannot change the results.
    """
    descriptors = theorem_battery_descriptors(count, seed)
    return list((mapper or map)(evaluate_theorem_case, descriptors))


@dataclass(frozen=True)
class Lemma24Case:
    case_id: str
    surface: str
    attractor_kind: str
    v: tuple
    w: tuple
    residual: float
    residual_scaled: float


_LEMMA24_SURFACES = (
    ("plane", {}, "conformal"),
    ("helicoid", {"r": 0.5}, "conformal"),
    ("catenoid_patch", {"r": 0.5}, "conformal"),
    ("graph", {"a": 1.0, "b": 0.0, "c": 1.0}, "tangential"),
    ("graph", {"a": 0.3, "b": 0.1, "c": 0.0}, "tangential"),
)


def lemma24_battery(seed: int = 0, pairs: int = 10, surfaces=None) -> list[Lemma24Case]:
    """Cross-pipeline identity check over surfaces and random direction pairs."""
    rng = np.random.default_rng(seed)
    cases = []
    specs = surfaces if surfaces is not None else _LEMMA24_SURFACES
    for idx, (key, params, role) in enumerate(specs):
        S = build_surface(key, **params)
        X = conformal_attractor(S) if role == "conformal" else tangential_attractor(S)
        E = extend_normal(X)
        label = key + (repr(sorted(params.items())) if params else "")
        for k in range(int(pairs)):
            v = rng.uniform(-1.0, 1.0, size=2)
            w = rng.uniform(-1.0, 1.0, size=2)
            res = lemma24_residual(S, X, v, w, extension=E)
            jac = S.jet(0.0, 0.0).jac
            amb = ambient_second_derivative(E, jac @ v, jac @ w)
            scaled = res / (1.0 + float(np.linalg.norm(amb)))
            cases.append(Lemma24Case(
                case_id=f"lemma24-{idx}-{k:02d}", surface=label,
                attractor_kind=X.kind, v=tuple(v), w=tuple(w),
                residual=res, residual_scaled=scaled))
    return cases
