"""Sparse polynomial algebra over the three velocity components.

Polynomials are stored as a mapping from exponent triples ``(a1, a2, a3)``
to real coefficients.  The algebra stays exact (rational-free but closed
under +, *, d/dv_i) up to a global degree cap, which is all the moment
closure machinery needs.
"""

from __future__ import annotations

from math import comb

import numpy as np

#: Largest total degree any polynomial in the package is allowed to reach.
MAX_DEGREE = 8

Term = tuple[int, int, int]

_ZERO_TOL = 0.0  # coefficients are dropped only when exactly zero


class DegreeOverflowError(ValueError):
    """Raised when an operation would exceed :data:`MAX_DEGREE`."""


def _check_term(term: Term) -> None:
    if len(term) != 3 or any(e < 0 for e in term):
        raise ValueError(f"invalid exponent triple {term!r}")
    if sum(term) > MAX_DEGREE:
        raise DegreeOverflowError(
            f"term {term!r} exceeds the degree cap {MAX_DEGREE}"
        )


class Polynomial:
    """Immutable sparse polynomial in the velocity components.

    Parameters
    ----------
    terms
        Mapping from exponent triples to coefficients.  Zero coefficients
        are dropped.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Term, float] | None = None):
        clean: dict[Term, float] = {}
        for term, coeff in (terms or {}).items():
            term = tuple(int(e) for e in term)  # type: ignore[assignment]
            _check_term(term)
            if coeff != _ZERO_TOL:
                clean[term] = clean.get(term, 0.0) + float(coeff)
                if clean[term] == 0.0:
                    del clean[term]
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, value: float) -> "Polynomial":
        return cls({(0, 0, 0): value})

    @classmethod
    def monomial(cls, term: Term, coeff: float = 1.0) -> "Polynomial":
        return cls({tuple(term): coeff})  # type: ignore[arg-type]

    @classmethod
    def variable(cls, axis: int) -> "Polynomial":
        term = [0, 0, 0]
        term[axis] = 1
        return cls({tuple(term): 1.0})  # type: ignore[arg-type]

    # -- algebra ------------------------------------------------------
    def __add__(self, other: "Polynomial | float") -> "Polynomial":
        other = _coerce(other)
        merged = dict(self.terms)
        for term, coeff in other.terms.items():
            merged[term] = merged.get(term, 0.0) + coeff
        return Polynomial(merged)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial({t: -c for t, c in self.terms.items()})

    def __sub__(self, other: "Polynomial | float") -> "Polynomial":
        return self + (-_coerce(other))

    def __rsub__(self, other: "Polynomial | float") -> "Polynomial":
        return _coerce(other) + (-self)

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if isinstance(other, (int, float)):
            return Polynomial({t: c * other for t, c in self.terms.items()})
        prod: dict[Term, float] = {}
        for t1, c1 in self.terms.items():
            for t2, c2 in other.terms.items():
                t = (t1[0] + t2[0], t1[1] + t2[1], t1[2] + t2[2])
                prod[t] = prod.get(t, 0.0) + c1 * c2
        return Polynomial(prod)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, float)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return "Polynomial(0)"
        parts = [
            f"{coeff:+g}*v1^{t[0]}v2^{t[1]}v3^{t[2]}"
            for t, coeff in sorted(self.terms.items())
        ]
        return "Polynomial(" + " ".join(parts) + ")"

    # -- calculus -----------------------------------------------------
    @property
    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(t) for t in self.terms)

    def diff(self, axis: int) -> "Polynomial":
        """Partial derivative with respect to velocity component ``axis``."""
        out: dict[Term, float] = {}
        for term, coeff in self.terms.items():
            e = term[axis]
            if e == 0:
                continue
            lowered = list(term)
            lowered[axis] = e - 1
            key = tuple(lowered)
            out[key] = out.get(key, 0.0) + coeff * e  # type: ignore[index]
        return Polynomial(out)  # type: ignore[arg-type]

    def gradient(self) -> tuple["Polynomial", "Polynomial", "Polynomial"]:
        return (self.diff(0), self.diff(1), self.diff(2))

    def laplacian(self) -> "Polynomial":
        out = Polynomial()
        for axis in range(3):
            out = out + self.diff(axis).diff(axis)
        return out

    def shift(self, offset) -> "Polynomial":
        """Substitute ``v -> v + offset`` (binomial expansion per axis)."""
        offset = np.asarray(offset, dtype=float)
        out: dict[Term, float] = {}
        for term, coeff in self.terms.items():
            for e1 in range(term[0] + 1):
                b1 = comb(term[0], e1) * offset[0] ** (term[0] - e1)
                for e2 in range(term[1] + 1):
                    b2 = comb(term[1], e2) * offset[1] ** (term[1] - e2)
                    for e3 in range(term[2] + 1):
                        b3 = comb(term[2], e3) * offset[2] ** (term[2] - e3)
                        key = (e1, e2, e3)
                        out[key] = out.get(key, 0.0) + coeff * b1 * b2 * b3
        return Polynomial(out)

    # -- evaluation ---------------------------------------------------
    def __call__(self, points) -> np.ndarray:
        """Evaluate at ``points`` of shape ``(..., 3)``."""
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        values = np.zeros(pts.shape[:-1], dtype=float)
        for term, coeff in self.terms.items():
            mono = np.full(pts.shape[:-1], coeff)
            for axis in range(3):
                if term[axis]:
                    mono = mono * pts[..., axis] ** term[axis]
            values += mono
        return values[0] if scalar else values


def _coerce(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    return Polynomial.constant(float(value))


def grad_dot(p: Polynomial, q: Polynomial) -> Polynomial:
    """Return ``sum_i (dp/dv_i)(dq/dv_i)``."""
    out = Polynomial()
    for axis in range(3):
        out = out + p.diff(axis) * q.diff(axis)
    return out


def norm_power(power: int) -> Polynomial:
    """Return ``(v1^2 + v2^2 + v3^2)^(power/2)`` for even ``power``."""
    if power % 2 or power < 0:
        raise ValueError("norm_power needs a nonnegative even power")
    base = Polynomial({(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0})
    out = Polynomial.constant(1.0)
    for _ in range(power // 2):
        out = out * base
    return out


def multi_indices(max_order: int) -> list[Term]:
    """All exponent triples with total degree at most ``max_order``."""
    out = []
    for total in range(max_order + 1):
        for a in range(total + 1):
            for b in range(total - a + 1):
                out.append((a, b, total - a - b))
    return out
