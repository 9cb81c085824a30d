"""
Exact univariate polynomials and the moment/covariance polynomial families.

A polynomial is stored densely as a tuple of :class:`fractions.Fraction`
coefficients, index = power of x, with trailing zeros stripped.  The families
built here (``p_k``, ``q_k``, ``pi_k``, ``hp_{k,l}``, ``r_m``, ``px_k``) all
end up with integer coefficients and every constructor checks that before the
value is cached.  ``py_k`` is the exception: it is the antiderivative of an
integer polynomial and keeps exact rational coefficients.
"""

from __future__ import annotations

import json
from fractions import Fraction
from math import comb
from typing import Iterable

__all__ = [
    "Polynomial",
    "PolyFamilyCache",
    "DEFAULT_MAX_INDEX",
    "poly_eval",
    "compute_p",
    "compute_q",
    "compute_pi",
    "compute_hp",
    "compute_r",
    "compute_px",
    "compute_py",
    "double_factorial",
    "leading_constant_c",
    "conjecture_report",
    "STATED_QM",
]

DEFAULT_MAX_INDEX = 64


class Polynomial:
    """Dense polynomial with exact rational coefficients.

    Parameters
    ----------
    coeffs : iterable of int or Fraction
        Coefficients from degree 0 upward.  Trailing zeros are removed, so
        the zero polynomial has an empty coefficient tuple.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable = ()):
        c = [Fraction(a) for a in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self._c: tuple[Fraction, ...] = tuple(c)

    @classmethod
    def monomial(cls, power: int, coeff=1) -> "Polynomial":
        return cls([0] * power + [coeff])

    @classmethod
    def x(cls) -> "Polynomial":
        return cls((0, 1))

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self._c

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self._c) - 1

    @property
    def leading(self) -> Fraction:
        return self._c[-1] if self._c else Fraction(0)

    def lowest_term(self) -> tuple[int, Fraction]:
        """(power, coefficient) of the lowest nonzero term."""
        for i, a in enumerate(self._c):
            if a:
                return i, a
        raise ValueError("zero polynomial has no nonzero term")

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self._c)

    def int_coeffs(self) -> list[int]:
        if not self.is_integral():
            raise ValueError(f"non-integer coefficients in {self!r}")
        return [a.numerator for a in self._c]

    # arithmetic -----------------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        a, b = self._c, other._c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] += v
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial(-a for a in self._c)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            a, b = self._c, other._c
            if not a or not b:
                return Polynomial()
            out = [Fraction(0)] * (len(a) + len(b) - 1)
            for i, u in enumerate(a):
                if not u:
                    continue
                for j, v in enumerate(b):
                    out[i + j] += u * v
            return Polynomial(out)
        if isinstance(other, (int, Fraction)):
            return Polynomial(a * other for a in self._c)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self._c == other._c
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._c)

    def shift(self, power: int) -> "Polynomial":
        """Multiply by ``x**power``."""
        if not self._c:
            return self
        return Polynomial([0] * power + list(self._c))

    def divide_by_x(self, power: int = 1) -> "Polynomial":
        """Exact division by ``x**power``; raises if there is a remainder."""
        if any(self._c[:power]):
            raise ArithmeticError(
                f"division by x^{power} is not exact for {self.render()}"
            )
        return Polynomial(self._c[power:])

    def derivative(self) -> "Polynomial":
        return Polynomial(i * a for i, a in enumerate(self._c) if i > 0)

    def antiderivative(self, anchor_x=1, anchor_value=0) -> "Polynomial":
        """Antiderivative with the constant fixed by ``P(anchor_x) = anchor_value``."""
        body = Polynomial([0] + [a / (i + 1) for i, a in enumerate(self._c)])
        shift = Fraction(anchor_value) - body(Fraction(anchor_x))
        return body + Polynomial([shift])

    # evaluation -----------------------------------------------------------

    def __call__(self, x):
        return poly_eval(self, x)

    # rendering ------------------------------------------------------------

    def render(self) -> str:
        """Descending powers with explicit signs, e.g. ``3x^5 - 2x^4``."""
        if not self._c:
            return "0"
        parts = []
        for i in range(len(self._c) - 1, -1, -1):
            a = self._c[i]
            if not a:
                continue
            mag = abs(a)
            if mag.denominator == 1:
                mag_s = str(mag.numerator)
            else:
                mag_s = f"({mag.numerator}/{mag.denominator})"
            if i == 0:
                term = mag_s
            else:
                var = "x" if i == 1 else f"x^{i}"
                term = var if mag == 1 else mag_s + var
            if not parts:
                parts.append(term if a > 0 else "-" + term)
            else:
                parts.append(("+ " if a > 0 else "- ") + term)
        return " ".join(parts)

    def to_json(self) -> str:
        """JSON array of decimal coefficient strings from degree 0 upward."""
        return json.dumps(self.coeff_strings())

    def coeff_strings(self) -> list[str]:
        return [str(a) for a in self._c]

    @classmethod
    def from_json(cls, text: str) -> "Polynomial":
        return cls(Fraction(s) for s in json.loads(text))

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"Polynomial({self.render()!r})"


def poly_eval(p: Polynomial, x):
    """Horner evaluation.

    Rational ``x`` gives an exact :class:`Fraction` (or ``int`` when the
    result is integral and ``x`` is an int).  Float ``x`` is converted to its
    exact binary value, evaluated exactly and rounded once, which avoids the
    cancellation the alternating coefficients would otherwise cause.
    """
    if isinstance(x, float):
        return float(poly_eval(p, Fraction(x)))
    acc = Fraction(0)
    for a in reversed(p.coeffs):
        acc = acc * x + a
    if isinstance(x, int) and acc.denominator == 1:
        return acc.numerator
    return acc


# ---------------------------------------------------------------------------
# polynomial families
# ---------------------------------------------------------------------------

X = Polynomial.x()
X3_MINUS_X2 = Polynomial((0, 0, -1, 1))
X2_MINUS_X = Polynomial((0, -1, 1))


def _finish(poly: Polynomial, name: str, degree: int | None = None,
            integral: bool = True) -> Polynomial:
    if integral and not poly.is_integral():
        raise ArithmeticError(f"{name} has non-integer coefficients: {poly}")
    if degree is not None and poly.degree != degree:
        raise ArithmeticError(f"{name} has degree {poly.degree}, expected {degree}")
    return poly


class PolyFamilyCache:
    """Memoized construction of every polynomial family.

    Entries are inserted once and never mutated.  ``max_index`` bounds the
    largest family index that will be built (coefficients grow like
    ``(2k-5)!!``).
    """

    def __init__(self, max_index: int = DEFAULT_MAX_INDEX):
        self.max_index = max_index
        self._p: dict[int, Polynomial] = {2: X}
        self._q: dict[int, Polynomial] = {3: Polynomial((1,))}
        self._r: dict[int, Polynomial] = {0: Polynomial((1,))}
        self._pi: dict[int, Polynomial] = {}
        self._hp: dict[tuple[int, int], Polynomial] = {}
        self._px: dict[int, Polynomial] = {}
        self._py: dict[int, Polynomial] = {}

    def _guard(self, *indices: int) -> None:
        for i in indices:
            if i > self.max_index:
                raise ValueError(
                    f"index {i} exceeds max_index={self.max_index}; "
                    "raise it explicitly if you really want this"
                )

    def p(self, k: int) -> Polynomial:
        if k < 2:
            raise ValueError(f"p_k needs k >= 2, got {k}")
        self._guard(k)
        top = max(self._p)
        while top < k:
            prev = self._p[top]
            nxt = X * prev + X3_MINUS_X2 * prev.derivative()
            top += 1
            self._p[top] = _finish(nxt, f"p_{top}", 2 * top - 3)
        return self._p[k]

    def q(self, k: int) -> Polynomial:
        if k < 3:
            raise ValueError(f"q_k needs k >= 3, got {k}")
        self._guard(k)
        for j in range(max(self._q) + 1, k + 1):
            rhs = Polynomial()
            for l in range(2, j - 1):
                rhs = rhs + comb(j, l) * (self._q[l + 1] * self._q[j + 1 - l])
            qj = (rhs * Fraction(1, 2)).antiderivative(anchor_x=1, anchor_value=1)
            self._q[j] = _finish(qj, f"q_{j}", j - 3)
        return self._q[k]

    def r(self, m: int) -> Polynomial:
        if m < 0:
            raise ValueError(f"r_m needs m >= 0, got {m}")
        self._guard(m)
        for j in range(max(self._r) + 1, m + 1):
            prev = self._r[j - 1]
            self._r[j] = _finish(
                X * prev + X3_MINUS_X2 * prev.derivative(), f"r_{j}", 2 * j - 1
            )
        return self._r[m]

    def pi(self, k: int) -> Polynomial:
        if k < 2:
            raise ValueError(f"pi_k needs k >= 2, got {k}")
        if k not in self._pi:
            pk = self.p(k)
            direct = pk + X2_MINUS_X * pk.derivative()
            via_next = self.p(k + 1).divide_by_x()
            if direct != via_next:
                raise ArithmeticError(f"pi_{k}: the two constructions disagree")
            self._pi[k] = _finish(direct, f"pi_{k}", 2 * k - 2)
        return self._pi[k]

    def hp(self, k: int, l: int) -> Polynomial:
        if k < 2 or l < 2:
            raise ValueError(f"hp_(k,l) needs k, l >= 2, got ({k}, {l})")
        key = (max(k, l), min(k, l))
        if key not in self._hp:
            prod = (self.p(k + 1) * self.p(l + 1)).divide_by_x()
            self._hp[key] = _finish(
                self.p(k + l) - prod, f"hp_{k},{l}", 2 * k + 2 * l - 3
            )
        return self._hp[key]

    def px(self, k: int) -> Polynomial:
        if k < 2:
            raise ValueError(f"px_k needs k >= 2, got {k}")
        if k not in self._px:
            self._guard(2 * k - 1)
            acc = Polynomial()
            for l in range(1, k):
                for m in range(1, k):
                    w = comb(k, l) * comb(k, m)
                    acc = acc + w * (self.q(l + m + 1) * self.q(2 * k + 1 - l - m))
            self._px[k] = _finish(
                (acc * Fraction(1, 2)).shift(2), f"px_{k}", 2 * k - 2
            )
        return self._px[k]

    def py(self, k: int) -> Polynomial:
        if k < 2:
            raise ValueError(f"py_k needs k >= 2, got {k}")
        if k not in self._py:
            deriv = self.px(k).divide_by_x(2)
            # the anchored antiderivative keeps denominators (py_4 has thirds)
            self._py[k] = _finish(
                deriv.antiderivative(anchor_x=1, anchor_value=0), f"py_{k}", 2 * k - 3,
                integral=False,
            )
        return self._py[k]


_CACHE = PolyFamilyCache()


def default_cache() -> PolyFamilyCache:
    return _CACHE


def compute_p(k: int) -> Polynomial:
    """``p_k`` from the linear recursion ``p_{k+1} = x p_k + (x^3 - x^2) p_k'``."""
    return _CACHE.p(k)


def compute_q(k: int) -> Polynomial:
    """``q_k`` from its quadratic derivative recursion, anchored by ``q_k(1) = 1``."""
    return _CACHE.q(k)


def compute_pi(k: int) -> Polynomial:
    return _CACHE.pi(k)


def compute_hp(k: int, l: int) -> Polynomial:
    """Covariance polynomial ``p_{k+l} - p_{k+1} p_{l+1} / x``."""
    return _CACHE.hp(k, l)


def compute_r(m: int) -> Polynomial:
    return _CACHE.r(m)


def compute_px(k: int) -> Polynomial:
    return _CACHE.px(k)


def compute_py(k: int) -> Polynomial:
    return _CACHE.py(k)


def double_factorial(n: int) -> int:
    """``n!!`` with ``(-1)!! = 0!! = 1``."""
    if n < -1:
        raise ValueError(f"double factorial undefined for {n}")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def leading_constant_c(k: int, l: int) -> int:
    if k < 2 or l < 2:
        raise ValueError(f"need k, l >= 2, got ({k}, {l})")
    return double_factorial(2 * k + 2 * l - 5) - double_factorial(
        2 * k - 3
    ) * double_factorial(2 * l - 3)


# Variance/covariance polynomials as printed alongside the normality conjecture.
# Kept verbatim, including the (2, 2) entry that lacks the -2x^4 term.
STATED_QM: dict[tuple[int, int], Polynomial] = {
    (2, 2): Polynomial.monomial(5, 2),
    (3, 3): Polynomial((0, 0, 0, 0, 0, 0, -24, 126, -198, 96)),
    (2, 3): Polynomial((0, 0, 0, 0, 0, 6, -18, 12)),
}


def conjecture_report() -> list[dict]:
    """Stated conjectural polynomials next to ``hp_{k,l}``, coefficient by coefficient.

    No verdict is attached; ``identical`` is a plain equality flag.
    """
    rows = []
    for (k, l), stated in STATED_QM.items():
        computed = compute_hp(k, l)
        width = max(len(stated.coeffs), len(computed.coeffs))
        diffs = []
        for i in range(width):
            a = stated.coeffs[i] if i < len(stated.coeffs) else Fraction(0)
            b = computed.coeffs[i] if i < len(computed.coeffs) else Fraction(0)
            if a != b:
                diffs.append({"power": i, "stated": str(a), "computed": str(b)})
        rows.append(
            {
                "k": k,
                "l": l,
                "stated": stated.render(),
                "computed": computed.render(),
                "identical": not diffs,
                "leading_agrees": stated.degree == computed.degree
                and stated.leading == computed.leading,
                "differences": diffs,
            }
        )
    return rows

