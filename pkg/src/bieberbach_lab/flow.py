"""Ambient flows with first and second variational equations.

The integrated system couples the trajectory with the linearization M and
the second variation V applied to a fixed direction pair (v, w):

    x' = F(x)
    M' = dF(x) M,                      M(0) = I
    V' = d2F(x)(M v, M w) + dF(x) V,   V(0) = 0

Derivatives of closed-form fields come from directional jets and are exact;
extension-backed fields fall back to centered differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import geometry
from .attractor import AmbientExtension, conformal_attractor, extend_normal
from .errors import LeftDomain, OutsideTube, StepFailure
from .jets import Jet2Scalar

__all__ = [
    "AmbientField",
    "FlowTrajectory",
    "Lemma21Report",
    "integrate_flow",
    "check_lemma21",
    "trajectory_records",
    "FIELD_BUILDERS",
    "build_field",
]


class AmbientField:
    """A twice differentiable vector field on an open subset of R^n.

    Construction validates the fixed-point normalization: the field vanishes
    at `fixed_point` to 1e-12 and its Jacobian there is -I to 1e-8.
    """

    def __init__(self, value_fn, jacobian_fn, second_fn, dim: int,
                 fixed_point, name: str = "field", validate: bool = True):
        self.dim = int(dim)
        self.fixed_point = np.asarray(fixed_point, dtype=float)
        self._value_fn = value_fn
        self._jacobian_fn = jacobian_fn
        self._second_fn = second_fn
        self.name = name
        if validate:
            self._validate()

    def value(self, x) -> np.ndarray:
        return np.asarray(self._value_fn(np.asarray(x, dtype=float)), dtype=float)

    def jacobian(self, x) -> np.ndarray:
        return self._jacobian_fn(np.asarray(x, dtype=float))

    def second_directional(self, x, u, v) -> np.ndarray:
        """Bilinear second derivative d2F_x(u, v)."""
        return self._second_fn(np.asarray(x, dtype=float),
                               np.asarray(u, dtype=float),
                               np.asarray(v, dtype=float))

    def _validate(self):
        p = self.fixed_point
        if np.linalg.norm(self.value(p)) > 1e-12:
            raise ValueError(f"field {self.name!r} does not vanish at its fixed point")
        if np.linalg.norm(self.jacobian(p) + np.eye(self.dim), 2) > 1e-8:
            raise ValueError(f"field {self.name!r} fails the -I linearization certificate")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def closed_form(cls, fn, dim: int, fixed_point, name: str = "field") -> "AmbientField":
        """Wrap a generic callable evaluable on floats and on 2-jets.

        `fn` maps a length-n sequence of scalars to a length-n sequence and
        must be written with arithmetic that also accepts Jet2Scalar inputs.
        """

        def value_fn(x):
            return [float(c) for c in fn(list(x))]

        def jacobian_fn(x):
            jac = np.empty((dim, dim))
            for j in range(dim):
                coords = [Jet2Scalar(x[k], 1.0 if k == j else 0.0, 0.0)
                          for k in range(dim)]
                out = fn(coords)
                jac[:, j] = [_dx(c) for c in out]
            return jac

        def second_fn(x, u, v):
            coords = [Jet2Scalar(x[k], u[k], v[k]) for k in range(dim)]
            out = fn(coords)
            return np.array([_dxy(c) for c in out])

        return cls(value_fn, jacobian_fn, second_fn, dim, fixed_point, name)

    @classmethod
    def from_extension(cls, E: AmbientExtension, name: str = "extension",
                       jac_step: float = 1e-5, second_step: float = 1e-3) -> "AmbientField":
        """Wrap a normal-frame extension; derivatives by centered differences.

        A warm-start chart seed is threaded through consecutive evaluations to
        keep projected Newton cheap; it never changes results, only iteration
        counts, so evaluator purity is preserved.
        """
        host = E.base.host
        n = host.ambient_dim
        hint = {"q": np.zeros(2)}

        def evaluate(pt):
            q, s = E.resolve(pt, seed=hint["q"])
            hint["q"] = q
            fr = geometry.frame_at(host, q[0], q[1])
            return E.base.ambient_value(q[0], q[1]) - fr.normal.T @ s

        def value_fn(x):
            return evaluate(x)

        def jacobian_fn(x):
            jac = np.empty((n, n))
            for j in range(n):
                e = np.zeros(n)
                e[j] = jac_step
                jac[:, j] = (evaluate(x + e) - evaluate(x - e)) / (2.0 * jac_step)
            return jac

        def second_fn(x, u, v):
            nu = np.linalg.norm(u)
            nv = np.linalg.norm(v)
            if nu == 0.0 or nv == 0.0:
                return np.zeros(n)
            a = u / nu
            b = v / nv
            h = second_step
            out = (evaluate(x + h * (a + b)) - evaluate(x + h * (a - b))
                   - evaluate(x - h * (a - b)) + evaluate(x - h * (a + b)))
            return nu * nv * out / (4.0 * h * h)

        return cls(value_fn, jacobian_fn, second_fn, n,
                   host.basepoint(), name)


def _dx(c) -> float:
    return c.dx if isinstance(c, Jet2Scalar) else 0.0


def _dxy(c) -> float:
    return c.dxy if isinstance(c, Jet2Scalar) else 0.0


@dataclass(frozen=True)
class FlowTrajectory:
    """Time-indexed flow state: points, first variation, second variation."""

    times: np.ndarray
    points: np.ndarray        # (len, n)
    first_var: np.ndarray     # (len, n, n)
    second_var: np.ndarray    # (len, n) for a fixed pair, or (len, n, n, n)
    v: np.ndarray
    w: np.ndarray
    full_tensor: bool = False


def integrate_flow(F: AmbientField, x0, T: float, v, w, *, times=None,
                   rtol: float = 1e-10, atol: float = 1e-12,
                   full_tensor: bool = False,
                   max_evals: int = 10 ** 6) -> FlowTrajectory:
    """Integrate the coupled variational system up to time T.

    Output is reported at `times` (default: 61 equispaced instants).  Raises
    LeftDomain when the field's domain is exited and StepFailure when the
    step controller underflows or the evaluation budget is exhausted.
    """
    n = F.dim
    x0 = np.asarray(x0, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if times is None:
        times = np.linspace(0.0, T, 61)
    times = np.asarray(times, dtype=float)

    sec_size = n * n * n if full_tensor else n
    y0 = np.concatenate([x0, np.eye(n).ravel(), np.zeros(sec_size)])
    evals = [0]

    def rhs(t, y):
        evals[0] += 1
        if evals[0] > max_evals:
            raise StepFailure(f"evaluation budget {max_evals} exhausted")
        x = y[:n]
        M = y[n:n + n * n].reshape(n, n)
        Fx = F.value(x)
        Jx = F.jacobian(x)
        dM = Jx @ M
        if full_tensor:
            V = y[n + n * n:].reshape(n, n, n)
            dV = np.einsum("kl,lij->kij", Jx, V)
            for i in range(n):
                for j in range(n):
                    dV[:, i, j] += F.second_directional(x, M[:, i], M[:, j])
        else:
            V = y[n + n * n:]
            dV = F.second_directional(x, M @ v, M @ w) + Jx @ V
        return np.concatenate([Fx, dM.ravel(), dV.ravel()])

    try:
        sol = solve_ivp(rhs, (0.0, float(T)), y0, method="DOP853",
                        t_eval=times, rtol=rtol, atol=atol)
    except OutsideTube as exc:
        raise LeftDomain(str(exc)) from exc
    if not sol.success:
        raise StepFailure(sol.message)

    k = sol.t.size
    points = sol.y[:n].T
    first = sol.y[n:n + n * n].T.reshape(k, n, n)
    if full_tensor:
        second = sol.y[n + n * n:].T.reshape(k, n, n, n)
    else:
        second = sol.y[n + n * n:].T
    return FlowTrajectory(times=sol.t, points=points, first_var=first,
                          second_var=second, v=v, w=w, full_tensor=full_tensor)


@dataclass(frozen=True)
class Lemma21Report:
    """Residuals of the exponential-contraction law and its second-order form."""

    times: np.ndarray
    first_var_sup: float       # sup_t || M(t) - e^{-t} I ||
    din8_sup: float            # sup_t || e^t V(t) - W (1 - e^{-t}) ||
    din8_relative: float       # same, scaled by ||W||
    tail: float                # || e^T V(T) - W ||
    W: np.ndarray
    trajectory: FlowTrajectory = field(repr=False, default=None)


def check_lemma21(F: AmbientField, v, w, T: float = 15.0, *, times=None,
                  rtol: float = 1e-10, atol: float = 1e-12) -> Lemma21Report:
    """Exercise the contraction identities of a normalized field at its zero."""
    p = F.fixed_point
    n = F.dim
    if times is None:
        times = np.linspace(0.0, T, 151)
    traj = integrate_flow(F, p, T, v, w, times=times, rtol=rtol, atol=atol)
    W = F.second_directional(p, v, w)
    eye = np.eye(n)
    first_res = max(
        float(np.linalg.norm(traj.first_var[i] - math.exp(-t) * eye, 2))
        for i, t in enumerate(traj.times))
    din8 = [np.linalg.norm(math.exp(t) * traj.second_var[i]
                           - W * (1.0 - math.exp(-t)))
            for i, t in enumerate(traj.times)]
    din8_sup = float(max(din8))
    wnorm = float(np.linalg.norm(W))
    tail = float(np.linalg.norm(math.exp(traj.times[-1]) * traj.second_var[-1] - W))
    return Lemma21Report(times=traj.times, first_var_sup=first_res,
                         din8_sup=din8_sup,
                         din8_relative=din8_sup / max(wnorm, 1e-300),
                         tail=tail, W=W, trajectory=traj)


def trajectory_records(traj: FlowTrajectory) -> list[dict]:
    """Flatten a trajectory into ordered report records."""
    rows = []
    for i, t in enumerate(traj.times):
        rows.append({
            "t": float(t),
            "point": [float(c) for c in traj.points[i]],
            "first_var": [float(c) for c in traj.first_var[i].ravel()],
            "second_var": [float(c) for c in np.ravel(traj.second_var[i])],
        })
    return rows


# -- field registry ----------------------------------------------------------


def linear_field(n: int = 3) -> AmbientField:
    """F(x) = -x on R^n."""
    n = int(n)
    return AmbientField.closed_form(lambda x: [-c for c in x], n,
                                    np.zeros(n), name="linear")


def bernoulli_field(a: float = 0.3) -> AmbientField:
    """One-dimensional F(x) = -x + a x^2 with closed-form flow."""
    a = float(a)
    return AmbientField.closed_form(lambda x: [-x[0] + a * x[0] * x[0]], 1,
                                    np.zeros(1), name="bernoulli")


def helicoid_extension_field(r: float = 0.5) -> AmbientField:
    """Normal-frame extension of the helicoid's conformal attractor.

    Flow trajectories wander across a large chart region, so the frame
    certificate covers most of the domain rather than the default quarter.
    """
    S = geometry.helicoid(r=r)
    E = extend_normal(conformal_attractor(S), check_radius=0.7 * S.domain_radius)
    return AmbientField.from_extension(E, name="helicoid_extension")


FIELD_BUILDERS = {
    "linear": linear_field,
    "bernoulli": bernoulli_field,
    "helicoid_extension": helicoid_extension_field,
}


def build_field(key: str, **params) -> AmbientField:
    try:
        builder = FIELD_BUILDERS[key]
    except KeyError:
        raise ValueError(f"unknown field {key!r}; known: {sorted(FIELD_BUILDERS)}")
    try:
        return builder(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for field {key!r}: {exc}")
