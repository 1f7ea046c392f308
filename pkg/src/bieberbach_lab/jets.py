"""Exact second-order forward differentiation in two chart variables.

Every smooth quantity in the lab is evaluated through 2-jets: a value
together with its gradient and packed symmetric Hessian with respect to the
two chart variables.  The chain rules below are exact, so geometric
residuals downstream are limited only by rounding.  Finite differences are
reserved for test oracles and for maps that are only available pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "Jet2Scalar",
    "Jet2Vector",
    "ComplexJet",
    "ComplexVec",
    "lift_chart",
    "constant",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "exp",
    "sqrt",
    "complex_z_derivatives",
]


class Jet2Scalar:
    """Value, gradient and packed symmetric Hessian (xx, xy, yy) of a scalar.

    Instances are immutable by convention; all operations return new jets.
    The single xy slot stores both mixed partials, so equality of mixed
    partials holds by construction.
    """

    __slots__ = ("val", "dx", "dy", "dxx", "dxy", "dyy")

    def __init__(self, val, dx=0.0, dy=0.0, dxx=0.0, dxy=0.0, dyy=0.0):
        self.val = float(val)
        self.dx = float(dx)
        self.dy = float(dy)
        self.dxx = float(dxx)
        self.dxy = float(dxy)
        self.dyy = float(dyy)

    @property
    def d(self) -> np.ndarray:
        """First partials (d/dx, d/dy)."""
        return np.array([self.dx, self.dy])

    @property
    def d2(self) -> np.ndarray:
        """Packed Hessian (d2/dxx, d2/dxdy, d2/dyy)."""
        return np.array([self.dxx, self.dxy, self.dyy])

    def __repr__(self):
        return (f"Jet2Scalar({self.val!r}, d=({self.dx!r}, {self.dy!r}), "
                f"d2=({self.dxx!r}, {self.dxy!r}, {self.dyy!r}))")

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet2Scalar):
            return Jet2Scalar(self.val + other.val, self.dx + other.dx,
                              self.dy + other.dy, self.dxx + other.dxx,
                              self.dxy + other.dxy, self.dyy + other.dyy)
        return Jet2Scalar(self.val + other, self.dx, self.dy,
                          self.dxx, self.dxy, self.dyy)

    __radd__ = __add__

    def __neg__(self):
        return Jet2Scalar(-self.val, -self.dx, -self.dy,
                          -self.dxx, -self.dxy, -self.dyy)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet2Scalar) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet2Scalar):
            a, b = self, other
            return Jet2Scalar(
                a.val * b.val,
                a.dx * b.val + a.val * b.dx,
                a.dy * b.val + a.val * b.dy,
                a.dxx * b.val + 2.0 * a.dx * b.dx + a.val * b.dxx,
                a.dxy * b.val + a.dx * b.dy + a.dy * b.dx + a.val * b.dxy,
                a.dyy * b.val + 2.0 * a.dy * b.dy + a.val * b.dyy,
            )
        c = float(other)
        return Jet2Scalar(self.val * c, self.dx * c, self.dy * c,
                          self.dxx * c, self.dxy * c, self.dyy * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet2Scalar):
            return self * _reciprocal(other)
        return self * (1.0 / float(other))

    def __rtruediv__(self, other):
        return _reciprocal(self) * other

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise DomainError("jet powers are limited to nonnegative integers")
        out = constant(1.0)
        for _ in range(k):
            out = out * self
        return out


def constant(c) -> Jet2Scalar:
    """Jet of a constant: zero gradient, zero Hessian."""
    return Jet2Scalar(float(c))


def lift_chart(x: float, y: float) -> tuple[Jet2Scalar, Jet2Scalar]:
    """Coordinate jets at (x, y): unit first derivatives, zero Hessians."""
    return (Jet2Scalar(x, 1.0, 0.0), Jet2Scalar(y, 0.0, 1.0))


def _compose(f: Jet2Scalar, u0: float, u1: float, u2: float) -> Jet2Scalar:
    """Second-order chain rule for a scalar function u applied to jet f."""
    return Jet2Scalar(
        u0,
        u1 * f.dx,
        u1 * f.dy,
        u1 * f.dxx + u2 * f.dx * f.dx,
        u1 * f.dxy + u2 * f.dx * f.dy,
        u1 * f.dyy + u2 * f.dy * f.dy,
    )


def _reciprocal(f: Jet2Scalar) -> Jet2Scalar:
    if f.val == 0.0:
        raise DomainError("division by a jet with zero value")
    inv = 1.0 / f.val
    return _compose(f, inv, -inv * inv, 2.0 * inv * inv * inv)


def sin(f: Jet2Scalar) -> Jet2Scalar:
    s, c = math.sin(f.val), math.cos(f.val)
    return _compose(f, s, c, -s)


def cos(f: Jet2Scalar) -> Jet2Scalar:
    s, c = math.sin(f.val), math.cos(f.val)
    return _compose(f, c, -s, -c)


def sinh(f: Jet2Scalar) -> Jet2Scalar:
    s, c = math.sinh(f.val), math.cosh(f.val)
    return _compose(f, s, c, s)


def cosh(f: Jet2Scalar) -> Jet2Scalar:
    s, c = math.sinh(f.val), math.cosh(f.val)
    return _compose(f, c, s, c)


def exp(f: Jet2Scalar) -> Jet2Scalar:
    e = math.exp(f.val)
    return _compose(f, e, e, e)


def sqrt(f: Jet2Scalar) -> Jet2Scalar:
    if f.val <= 0.0:
        raise DomainError("sqrt of a jet with nonpositive value")
    s = math.sqrt(f.val)
    return _compose(f, s, 0.5 / s, -0.25 / (s * f.val))


class Jet2Vector:
    """Components of a map into R^n evaluated as 2-jets of the same chart."""

    __slots__ = ("components",)

    def __init__(self, components):
        components = tuple(components)
        if not 2 <= len(components) <= 8:
            raise ValueError("ambient dimension must lie in [2, 8]")
        self.components = components

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def value(self) -> np.ndarray:
        return np.array([c.val for c in self.components])

    @property
    def jac(self) -> np.ndarray:
        """Chart Jacobian, shape (n, 2): columns are f_x, f_y."""
        return np.array([[c.dx, c.dy] for c in self.components])

    @property
    def hess(self) -> np.ndarray:
        """Packed chart Hessians, shape (n, 3): columns f_xx, f_xy, f_yy."""
        return np.array([[c.dxx, c.dxy, c.dyy] for c in self.components])

    def second(self, i: int, j: int) -> np.ndarray:
        """Unpacked second partial d2 f / dx_i dx_j as an ambient vector."""
        idx = 0 if (i, j) == (0, 0) else 2 if (i, j) == (1, 1) else 1
        return self.hess[:, idx]


class ComplexJet:
    """A pair of jets carrying the real and imaginary parts of a complex map."""

    __slots__ = ("re", "im")

    def __init__(self, re: Jet2Scalar, im: Jet2Scalar):
        self.re = re
        self.im = im

    @classmethod
    def variable(cls, x: float, y: float) -> "ComplexJet":
        """The jet of z = x + iy itself."""
        xj, yj = lift_chart(x, y)
        return cls(xj, yj)

    @classmethod
    def const(cls, z: complex) -> "ComplexJet":
        z = complex(z)
        return cls(constant(z.real), constant(z.imag))

    def __add__(self, other):
        other = _as_cjet(other)
        return ComplexJet(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return ComplexJet(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-_as_cjet(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_cjet(other)
        return ComplexJet(self.re * other.re - self.im * other.im,
                          self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_cjet(other)
        den = other.re * other.re + other.im * other.im
        return ComplexJet((self.re * other.re + self.im * other.im) / den,
                          (self.im * other.re - self.re * other.im) / den)

    def conj(self):
        return ComplexJet(self.re, -self.im)


def _as_cjet(z) -> ComplexJet:
    if isinstance(z, ComplexJet):
        return z
    if isinstance(z, Jet2Scalar):
        return ComplexJet(z, constant(0.0))
    return ComplexJet.const(complex(z))


@dataclass(frozen=True)
class ComplexVec:
    """A vector in C^n stored as real and imaginary parts.

    The Hermitian norm sqrt(sum re_k^2 + im_k^2) is the norm used in every
    estimate comparison in the lab.
    """

    re: np.ndarray
    im: np.ndarray

    @classmethod
    def zero(cls, n: int) -> "ComplexVec":
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def from_real(cls, v: np.ndarray) -> "ComplexVec":
        v = np.asarray(v, dtype=float)
        return cls(v, np.zeros_like(v))

    def __add__(self, other: "ComplexVec") -> "ComplexVec":
        return ComplexVec(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexVec") -> "ComplexVec":
        return ComplexVec(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ComplexVec":
        return ComplexVec(-self.re, -self.im)

    def scale(self, z: complex) -> "ComplexVec":
        z = complex(z)
        return ComplexVec(z.real * self.re - z.imag * self.im,
                          z.imag * self.re + z.real * self.im)

    def norm(self) -> float:
        return float(math.hypot(np.linalg.norm(self.re), np.linalg.norm(self.im)))

    def to_complex(self) -> np.ndarray:
        return self.re + 1j * self.im


def complex_z_derivatives(j: Jet2Vector) -> tuple[ComplexVec, ComplexVec]:
    """First and second Wirtinger-type derivatives of a chart map.

    fz  = (f_x - i f_y) / 2
    fzz = (f_xx - 2i f_xy - f_yy) / 4
    """
    jac = j.jac
    hess = j.hess
    fz = ComplexVec(0.5 * jac[:, 0], -0.5 * jac[:, 1])
    fzz = ComplexVec(0.25 * (hess[:, 0] - hess[:, 2]), -0.5 * hess[:, 1])
    return fz, fzz
