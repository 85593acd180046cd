"""Exact arithmetic in cyclotomic fields Q(zeta_N).

Elements are represented by their coordinate vector in the power basis
1, zeta, ..., zeta^(phi(N)-1) of Q[x]/Phi_N(x), with zeta = exp(2*pi*i/N).
The representation is canonical (fully reduced mod Phi_N), so equality of
values at a common order is component-wise equality of coordinates.

Everything here is scalar work (eigenvalue bookkeeping, character values);
series coefficients in the hot paths of this package are plain rationals.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd


class RationalityError(ValueError):
    """A value expected to be rational has nonzero non-constant coordinates."""


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Exact division of integer polynomials, den monic; coefficient lists low-to-high."""
    num = list(num)
    dden = len(den) - 1
    quot = [0] * max(len(num) - dden, 1)
    for k in range(len(num) - dden - 1, -1, -1):
        c = num[k + dden]
        if c:
            quot[k] = c
            for j, d in enumerate(den):
                num[k + j] -= c * d
    while num and num[-1] == 0:
        num.pop()
    return quot, num


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients (low to high) of Phi_n(x), computed by recursive division
    of x^n - 1 by the Phi_d for proper divisors d."""
    if n < 1:
        raise ValueError("order must be positive")
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            quot, rem = _poly_divmod(poly, list(cyclotomic_polynomial(d)))
            assert not rem, f"Phi_{d} should divide x^{n}-1 exactly"
            poly = quot
    return tuple(poly)


@lru_cache(maxsize=None)
def _reduction_rows(n: int) -> tuple[tuple[Fraction, ...], ...]:
    """Row m gives the coordinates of zeta_n^(deg+m) in the power basis."""
    phi = list(cyclotomic_polynomial(n))
    deg = len(phi) - 1
    rows: list[tuple[Fraction, ...]] = []
    # zeta^deg = -(phi_0 + phi_1 zeta + ...)/1  (Phi monic)
    cur = [Fraction(-c) for c in phi[:deg]]
    for _ in range(max(deg, n)):  # powers deg .. deg+n-1 cover products and Galois maps
        rows.append(tuple(cur))
        nxt = [Fraction(0)] + cur[:-1]
        top = cur[-1]
        if top:
            for j in range(deg):
                nxt[j] += top * rows[0][j]
        cur = nxt
    return tuple(rows)


class Cyclotomic:
    """An element of Q(zeta_N) in canonical reduced form.

    The element order N is fixed per value; mixed-order arithmetic embeds both
    operands into Q(zeta_lcm) first.  Use ``Cyclotomic.zeta(N, k)`` for roots
    of unity and ``Cyclotomic.rational(q, N)`` for rational values.
    """

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs) -> None:
        deg = len(cyclotomic_polynomial(order)) - 1
        vec = [Fraction(c) for c in coeffs]
        if len(vec) > deg:
            rows = _reduction_rows(order)
            red = vec[:deg]
            for m, c in enumerate(vec[deg:]):
                if c:
                    row = rows[m]
                    for j in range(deg):
                        red[j] += c * row[j]
            vec = red
        else:
            vec = vec + [Fraction(0)] * (deg - len(vec))
        self.order = order
        self.coeffs = tuple(vec)

    # ---------------------------------------------------------------- basics

    @classmethod
    def rational(cls, value, order: int = 1) -> "Cyclotomic":
        return cls(order, [Fraction(value)])

    @classmethod
    def zeta(cls, order: int, power: int = 1) -> "Cyclotomic":
        """zeta_order^power, reduced canonically."""
        power %= order
        vec = [Fraction(0)] * (power + 1)
        vec[power] = Fraction(1)
        return cls(order, vec)  # constructor reduces high powers

    def embed(self, order: int) -> "Cyclotomic":
        """Embed into Q(zeta_order); requires self.order | order."""
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError(f"cannot embed order {self.order} into {order}")
        step = order // self.order
        deg_new = len(cyclotomic_polynomial(order)) - 1
        vec = [Fraction(0)] * max(deg_new, step * (len(self.coeffs) - 1) + 1)
        for k, c in enumerate(self.coeffs):
            if c:
                vec[k * step] += c
        return Cyclotomic(order, vec)

    @staticmethod
    def _common(a: "Cyclotomic", b: "Cyclotomic") -> tuple["Cyclotomic", "Cyclotomic"]:
        if a.order == b.order:
            return a, b
        m = a.order * b.order // gcd(a.order, b.order)
        return a.embed(m), b.embed(m)

    @staticmethod
    def coerce(value, order: int = 1) -> "Cyclotomic":
        if isinstance(value, Cyclotomic):
            return value
        return Cyclotomic.rational(value, order)

    # ------------------------------------------------------------ arithmetic

    def __add__(self, other) -> "Cyclotomic":
        a, b = self._common(self, Cyclotomic.coerce(other))
        return Cyclotomic(a.order, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> "Cyclotomic":
        return Cyclotomic(self.order, [-c for c in self.coeffs])

    def __sub__(self, other) -> "Cyclotomic":
        return self + (-Cyclotomic.coerce(other))

    def __rsub__(self, other) -> "Cyclotomic":
        return (-self) + other

    def __mul__(self, other) -> "Cyclotomic":
        a, b = self._common(self, Cyclotomic.coerce(other))
        n = a.order
        av, bv = a.coeffs, b.coeffs
        prod = [Fraction(0)] * (2 * len(av) - 1)
        for i, x in enumerate(av):
            if x:
                for j, y in enumerate(bv):
                    if y:
                        prod[i + j] += x * y
        return Cyclotomic(n, prod)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Cyclotomic":
        if k < 0:
            raise ValueError("negative powers: use conj for roots of unity")
        result = Cyclotomic.rational(1, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Cyclotomic.rational(other)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._common(self, other)
        return a.coeffs == b.coeffs

    def __hash__(self) -> int:
        r = self.rational_or_none()
        if r is not None:
            return hash(r)
        return hash((self.order, self.coeffs))

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __repr__(self) -> str:
        r = self.rational_or_none()
        if r is not None:
            return f"Cyclotomic({r})"
        terms = [f"{c}*z{self.order}^{k}" for k, c in enumerate(self.coeffs) if c]
        return "Cyclotomic(" + " + ".join(terms) + ")"

    # --------------------------------------------------------------- queries

    def galois(self, j: int) -> "Cyclotomic":
        """Apply zeta |-> zeta^j (j coprime to the order)."""
        n = self.order
        if gcd(j % n if n > 1 else 1, n) != 1:
            raise ValueError(f"{j} not coprime to {n}")
        vec = [Fraction(0)] * n
        for k, c in enumerate(self.coeffs):
            if c:
                vec[(k * j) % n] += c
        return Cyclotomic(n, vec)

    def conj(self) -> "Cyclotomic":
        """Complex conjugation, the Galois map zeta |-> zeta^(-1)."""
        if self.order == 1:
            return self
        return self.galois(self.order - 1)

    def rational_or_none(self):
        """The Fraction value if all non-constant coordinates vanish, else None."""
        if any(self.coeffs[1:]):
            return None
        return self.coeffs[0]

    def rational_value(self) -> Fraction:
        r = self.rational_or_none()
        if r is None:
            raise RationalityError(f"not rational: residual coordinates {self.coeffs[1:]}")
        return r

    def is_zero(self) -> bool:
        return not any(self.coeffs)


def rationality_check(value) -> Fraction:
    """Return the rational value of ``value`` (Cyclotomic, Fraction or int).

    Raises RationalityError when a Cyclotomic has nonzero non-constant
    coordinates; used to validate trace scalars that the construction
    requires to be rational.
    """
    if isinstance(value, Cyclotomic):
        return value.rational_value()
    return Fraction(value)
