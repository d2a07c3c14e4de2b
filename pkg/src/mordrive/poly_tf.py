"""Polynomial and rational transfer-function kernel.

Coefficients are stored in ascending powers of s everywhere in this
package: ``coeffs[i]`` multiplies ``s**i``.  All values are immutable
after construction and every operation is a pure function, so the types
are safe to share between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateLoop,
    NonConvergence,
    NotFactorable,
    NotNormalized,
    PoleAtOrigin,
    ValidationError,
    ZeroConstantTerm,
)

# Leading coefficients at or below this relative size are trimmed.
_TRIM_REL = 1e-14

# Root finder: simultaneous iteration over all roots at once.
_ROOT_UPDATE_TOL = 1e-12
_ROOT_ITER_BUDGET = 500
_ROOT_RESIDUAL_REL = 1e-10
_ROOT_SEED = 181090

# Imaginary parts below this (relative) size count as zero when a real
# root is required.
_REAL_IMAG_TOL = 1e-8


def _trimmed(coeffs: Iterable[float], exact: bool) -> tuple[float, ...]:
    vals = [float(c) for c in coeffs]
    if not vals:
        raise ValidationError("polynomial needs at least one coefficient")
    top = max(abs(c) for c in vals)
    if top == 0.0:
        return (0.0,)
    cutoff = 0.0 if exact else _TRIM_REL * top
    while len(vals) > 1 and abs(vals[-1]) <= cutoff:
        vals.pop()
    return tuple(vals)


@dataclass(frozen=True)
class Polynomial:
    """Real-coefficient polynomial in ascending powers of s.

    Construction trims leading coefficients at or below 1e-14 of the
    largest magnitude; such values are additive-cancellation residue.
    Operations whose leading coefficient is exact by construction
    (products, scaling) bypass the relative trim, since a tiny leading
    product coefficient is meaningful, not junk.
    """

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Sequence[float], exact: bool = False):
        object.__setattr__(self, "coeffs", _trimmed(coeffs, exact))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def coeff(self, power: int) -> float:
        """Coefficient of s**power, zero beyond the stored degree."""
        if 0 <= power < len(self.coeffs):
            return self.coeffs[power]
        return 0.0

    def scaled(self, factor: float) -> "Polynomial":
        return Polynomial([factor * c for c in self.coeffs], exact=True)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        return poly_mul(self, other)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return poly_add(self, other)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return poly_add(self, other.scaled(-1.0))


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Product polynomial (coefficient convolution)."""
    out = [0.0] * (len(a.coeffs) + len(b.coeffs) - 1)
    for i, ca in enumerate(a.coeffs):
        for j, cb in enumerate(b.coeffs):
            out[i + j] += ca * cb
    return Polynomial(out, exact=True)


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    n = max(len(a.coeffs), len(b.coeffs))
    return Polynomial([a.coeff(i) + b.coeff(i) for i in range(n)])


def poly_eval(p: Polynomial, s: complex) -> complex:
    """Horner evaluation; exact for degree 0."""
    acc: complex = 0.0
    for c in reversed(p.coeffs):
        acc = acc * s + c
    return complex(acc)


def poly_from_roots(roots: Sequence[complex], leading: float = 1.0) -> Polynomial:
    """Real polynomial with the given roots (imaginary residue dropped)."""
    acc = np.array([1.0 + 0.0j])
    for r in roots:
        acc = np.convolve(acc, np.array([-r, 1.0 + 0.0j]))
    return Polynomial([leading * c.real for c in acc], exact=True)


def _eval_many(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(z)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def poly_roots(p: Polynomial) -> list[complex]:
    """All complex roots, found by simultaneous iteration.

    Every root of the returned multiset satisfies
    ``|p(root)| <= 1e-10 * max|coeff|``; otherwise ``NonConvergence``
    is raised.  The iteration starts from perturbed points on a circle
    of radius ``1 + max|coeff ratio|`` of a root-scale-balanced copy of
    the polynomial, with a fixed seed so results are reproducible.
    """
    if p.degree < 1:
        raise ValidationError("root finding needs degree >= 1")
    n = p.degree
    orig = np.array(p.coeffs, dtype=float)

    # Balance the root scale so the starting circle is close to the
    # actual root magnitudes; roots are mapped back afterwards.
    scale = 1.0
    if orig[0] != 0.0:
        scale = abs(orig[0] / orig[-1]) ** (1.0 / n)
        if not (np.isfinite(scale) and scale > 0.0):
            scale = 1.0
    balanced = orig * scale ** np.arange(n + 1)
    monic = (balanced / balanced[-1]).astype(complex)

    radius = 1.0 + float(np.max(np.abs(monic[:-1])))
    rng = np.random.default_rng(_ROOT_SEED)
    angles = 2.0 * np.pi * np.arange(n) / n + 0.4 + 0.05 * rng.random(n)
    z = radius * np.exp(1j * angles)

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(_ROOT_ITER_BUDGET):
            pv = _eval_many(monic, z)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            w = pv / diff.prod(axis=1)
            z = z - w
            if not np.all(np.isfinite(z.view(float))):
                raise NonConvergence("root iteration produced non-finite values")
            if np.all(np.abs(w) <= _ROOT_UPDATE_TOL * (1.0 + np.abs(z))):
                break
        else:
            raise NonConvergence(
                f"root iteration did not converge within {_ROOT_ITER_BUDGET} steps"
            )

        # A couple of Newton polish steps sharpen simple roots.
        deriv = monic[1:] * np.arange(1, n + 1)
        for _ in range(2):
            pv = _eval_many(monic, z)
            dv = _eval_many(deriv, z)
            step = np.where(np.abs(dv) > 0.0, pv / np.where(dv == 0.0, 1.0, dv), 0.0)
            z_new = z - step
            ok = np.abs(_eval_many(monic, z_new)) <= np.abs(pv)
            z = np.where(ok, z_new, z)

    roots = [complex(r) for r in z * scale]

    # Primary acceptance bound, with the per-root evaluation rounding
    # floor as the only relaxation: |p(z)| below eps * sum|c_i||z|^i is
    # indistinguishable from zero in double precision.
    bound = _ROOT_RESIDUAL_REL * float(np.max(np.abs(orig)))
    eps = np.finfo(float).eps
    for r in roots:
        residual = abs(poly_eval(p, r))
        floor = 4.0 * n * eps * sum(
            abs(c) * abs(r) ** i for i, c in enumerate(orig))
        if residual > max(bound, floor):
            raise NonConvergence(
                f"root residual {residual:.3e} exceeds {max(bound, floor):.3e}"
            )
    roots.sort(key=lambda r: (r.real, r.imag))
    return roots


def is_stable(p: Polynomial) -> bool:
    """True iff every root lies strictly in the left half-plane."""
    if p.degree < 1:
        raise ValidationError("stability test needs degree >= 1")
    return all(r.real < 0.0 for r in poly_roots(p))


@dataclass(frozen=True)
class StabilityFactorization:
    """Even/odd split of a Hurwitz polynomial into quadratic factors.

    The even part is ``e0 * prod(1 + s^2/z_sq[i])`` and the odd part
    ``e1 * s * prod(1 + s^2/p_sq[i])``.  Both lists are ascending and
    strictly interlaced: z1^2 < p1^2 < z2^2 < ...
    """

    e0: float
    e1: float
    z_sq: tuple[float, ...]
    p_sq: tuple[float, ...]


def _positive_real_neg_roots(poly_in_x: Polynomial, what: str) -> tuple[float, ...]:
    """Roots of a polynomial in x = s^2, returned as ascending -x > 0."""
    if poly_in_x.degree < 1:
        return ()
    out = []
    for r in poly_roots(poly_in_x):
        if abs(r.imag) > _REAL_IMAG_TOL * (1.0 + abs(r.real)):
            raise NotFactorable(f"{what} has a complex squared-root magnitude: {r}")
        if r.real >= 0.0:
            raise NotFactorable(f"{what} has a non-positive squared magnitude: {r.real}")
        out.append(-r.real)
    out.sort()
    return tuple(out)


def even_odd_factor(d: Polynomial) -> StabilityFactorization:
    """Split a Hurwitz polynomial into interlaced even/odd factors.

    Raises ``ZeroConstantTerm`` when d(0) = 0 (a pole at the origin is
    outside the method) and ``NotFactorable`` for any input that fails
    the even/odd interlacing test, which is exactly the class of
    non-Hurwitz or degenerate polynomials.
    """
    c = d.coeffs
    if d.degree < 1:
        raise ValidationError("factorization needs degree >= 1")
    if c[0] == 0.0:
        raise ZeroConstantTerm("constant term is zero (pole at the origin)")
    if c[1] == 0.0:
        raise NotFactorable("s-coefficient is zero; odd part degenerate")
    sign = math.copysign(1.0, c[0])
    if any(ci == 0.0 or math.copysign(1.0, ci) != sign for ci in c):
        # Hurwitz polynomials have all coefficients of one strict sign.
        raise NotFactorable("mixed-sign or zero coefficients; not Hurwitz")

    even_x = Polynomial(c[0::2], exact=True)
    odd_x = Polynomial(c[1::2], exact=True)
    z_sq = _positive_real_neg_roots(even_x, "even part")
    p_sq = _positive_real_neg_roots(odd_x, "odd part")

    if len(z_sq) not in (len(p_sq), len(p_sq) + 1):
        raise NotFactorable("even/odd factor counts are inconsistent")
    for i, pv in enumerate(p_sq):
        if not z_sq[i] < pv:
            raise NotFactorable(f"interlacing broken: z{i + 1}^2 >= p{i + 1}^2")
        if i + 1 < len(z_sq) and not pv < z_sq[i + 1]:
            raise NotFactorable(f"interlacing broken: p{i + 1}^2 >= z{i + 2}^2")

    return StabilityFactorization(e0=c[0], e1=c[1], z_sq=z_sq, p_sq=p_sq)


def combine_stability_parts(e0: float, e1: float,
                            z_sq: Sequence[float],
                            p_sq: Sequence[float]) -> Polynomial:
    """Rebuild ``e0*prod(1+s^2/z^2) + e1*s*prod(1+s^2/p^2)``."""
    even = Polynomial([e0])
    for z2 in z_sq:
        even = poly_mul(even, Polynomial([1.0, 0.0, 1.0 / z2]))
    odd = Polynomial([e1])
    for p2 in p_sq:
        odd = poly_mul(odd, Polynomial([1.0, 0.0, 1.0 / p2]))
    odd = poly_mul(odd, Polynomial([0.0, 1.0]))
    n = max(len(even.coeffs), len(odd.coeffs))
    return Polynomial([even.coeff(i) + odd.coeff(i) for i in range(n)],
                      exact=True)


def spectral_square(p: Polynomial) -> Polynomial:
    """Coefficients of p(s)·p(-s), which has only even powers.

    The input must have unit constant term.  The result is returned as
    a polynomial in s^2: ``result.coeff(x)`` is the coefficient of
    ``s**(2x)``, built from the closed-form sum
    ``sum_i (-1)^i 2 m_i m_{2x-i} + (-1)^x m_x^2``.
    """
    if p.coeffs[0] != 1.0:
        raise NotNormalized("spectral square expects unit constant term")
    m = p.coeff
    u = p.degree
    out = [1.0]
    for x in range(1, u + 1):
        acc = (-1.0) ** x * m(x) ** 2
        for i in range(x):
            acc += (-1.0) ** i * 2.0 * m(i) * m(2 * x - i)
        out.append(acc)
    return Polynomial(out, exact=True)


@dataclass(frozen=True)
class TransferFunction:
    """Proper rational function num(s)/den(s)."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.den.is_zero:
            raise ValidationError("denominator must not be the zero polynomial")
        if self.num.degree > self.den.degree:
            raise ValidationError(
                f"improper transfer function: numerator degree {self.num.degree} "
                f"exceeds denominator degree {self.den.degree}"
            )

    @classmethod
    def from_coeffs(cls, num: Sequence[float], den: Sequence[float]) -> "TransferFunction":
        return cls(Polynomial(num), Polynomial(den))

    def __call__(self, s: complex) -> complex:
        return poly_eval(self.num, s) / poly_eval(self.den, s)


def series(g1: TransferFunction, g2: TransferFunction) -> TransferFunction:
    """Cascade connection; no pole-zero cancellation is attempted."""
    return TransferFunction(poly_mul(g1.num, g2.num), poly_mul(g1.den, g2.den))


def close_loop(g: TransferFunction, h: TransferFunction) -> TransferFunction:
    """Negative-feedback closure G/(1 + GH)."""
    num = poly_mul(g.num, h.den)
    den = poly_add(poly_mul(g.den, h.den), poly_mul(g.num, h.num))
    if den.is_zero:
        raise DegenerateLoop("1 + GH is identically zero")
    return TransferFunction(num, den)


def dc_gain(g: TransferFunction) -> float:
    """Transfer-function value at s = 0."""
    if g.den.coeffs[0] == 0.0:
        raise PoleAtOrigin("DC gain undefined: pole at the origin")
    return g.num.coeffs[0] / g.den.coeffs[0]


UNITY = TransferFunction(Polynomial([1.0]), Polynomial([1.0]))
