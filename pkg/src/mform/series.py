"""Truncated exact series in q^(1/24) and y with sound window tracking.

A QYSeries stores coefficients c(n24, r) of q^(n24/24) * y^r.  Exactness is
guaranteed on the window n24 <= qmax24, r >= ylow; everything outside is
unknown (not zero).  The structural bound `ybound` records
max(r - ceil(n24/24)) over stored entries; it is what makes finite lower
y-windows sound under multiplication: a factor's truncated y-tail (r < ylow)
can only reach a product coefficient at height r' <= r + ceil(qmax/24) + B of
the partner, so widening the product window by that margin excludes all
contamination.

Coefficients are python ints / Fractions (the common case) or Cyclotomic
values.  Rational multiplication runs on Kronecker-packed big integers, one
per q-level, which keeps the full verification suite fast without leaving
exact arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .cyclotomic import Cyclotomic


# Lower y-window claimed by series with no y-dependence at all: their
# coefficients below any finite floor are genuinely zero, so the exactness
# claim extends arbitrarily far down without widening any allocation.
Y_FLOOR = -(1 << 30)


class WindowError(ValueError):
    """A coefficient outside the guaranteed exactness window was requested."""


class DomainError(ValueError):
    """A factor configuration does not converge in 0 < -Im(z) < Im(tau)."""


class CapacityError(ValueError):
    """Exponent or size limits exceeded."""


class YDependenceError(ValueError):
    """A series expected to be y-free has a nonzero mixed coefficient."""

    def __init__(self, n24: int, r: int, value) -> None:
        super().__init__(f"nonzero y-dependent coefficient {value} at (n24={n24}, r={r})")
        self.n24 = n24
        self.r = r
        self.value = value


def ceil_div24(n: int) -> int:
    return -((-n) // 24)


def _as_coeff(v):
    """Normalize a coefficient: ints stay ints, integral Fractions collapse."""
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return int(v)
        return v
    return v


def _is_rational(v) -> bool:
    return isinstance(v, (int, Fraction))


class QYSeries:
    """Exact truncated series sum c(n24, r) q^(n24/24) y^r.

    Treat instances as immutable; all operations return new series.
    """

    __slots__ = ("levels", "qmax24", "ylow", "ybound", "order")

    def __init__(self, levels: dict, qmax24: int, ylow: int, order: int = 1) -> None:
        clean: dict[int, dict[int, object]] = {}
        bound = 0
        for n, row in levels.items():
            if n > qmax24:
                continue
            out = {}
            for r, c in row.items():
                if r < ylow:
                    continue
                c = _as_coeff(c)
                if isinstance(c, Cyclotomic):
                    if c.is_zero():
                        continue
                elif not c:
                    continue
                out[r] = c
                h = r - ceil_div24(n)
                if h > bound:
                    bound = h
            if out:
                clean[n] = out
        self.levels = clean
        self.qmax24 = qmax24
        self.ylow = ylow
        self.ybound = bound
        self.order = order

    # ------------------------------------------------------------- builders

    @classmethod
    def zero(cls, qmax24: int, ylow: int) -> "QYSeries":
        return cls({}, qmax24, ylow)

    @classmethod
    def one(cls, qmax24: int, ylow: int) -> "QYSeries":
        return cls({0: {0: 1}}, qmax24, ylow)

    @classmethod
    def monomial(cls, coeff, n24: int, r: int, qmax24: int, ylow: int) -> "QYSeries":
        order = coeff.order if isinstance(coeff, Cyclotomic) else 1
        return cls({n24: {r: coeff}}, qmax24, ylow, order)

    # -------------------------------------------------------------- queries

    def coeff(self, n24: int, r: int):
        """Exact coefficient of q^(n24/24) y^r; WindowError outside the window."""
        if n24 > self.qmax24 or r < self.ylow:
            raise WindowError(
                f"(n24={n24}, r={r}) outside window qmax24={self.qmax24}, ylow={self.ylow}"
            )
        v = self.levels.get(n24, {}).get(r, 0)
        if isinstance(v, Cyclotomic):
            return v
        return Fraction(v)

    def qcoeff(self, n24: int):
        """Coefficient at (n24, 0); convenience for y-free series."""
        return self.coeff(n24, 0)

    def slice_at(self, n24: int) -> dict[int, Fraction]:
        """The y-polynomial at one q-level, as {r: coefficient}."""
        if n24 > self.qmax24:
            raise WindowError(f"n24={n24} beyond qmax24={self.qmax24}")
        row = self.levels.get(n24, {})
        return {r: (v if isinstance(v, Cyclotomic) else Fraction(v)) for r, v in row.items()}

    def support(self):
        for n in sorted(self.levels):
            for r in sorted(self.levels[n]):
                yield n, r

    def min_n24(self):
        return min(self.levels) if self.levels else None

    def is_zero(self) -> bool:
        return not self.levels

    def __eq__(self, other) -> bool:
        if not isinstance(other, QYSeries):
            return NotImplemented
        return (
            self.levels == other.levels
            and self.qmax24 == other.qmax24
            and self.ylow == other.ylow
        )

    def __hash__(self):
        return id(self)

    def __repr__(self) -> str:
        terms = []
        for n, r in self.support():
            terms.append(f"{self.levels[n][r]}*q^({n}/24)*y^{r}")
            if len(terms) >= 6:
                terms.append("...")
                break
        body = " + ".join(terms) if terms else "0"
        return f"QYSeries({body}; qmax24={self.qmax24}, ylow={self.ylow})"

    def equal_on_common_window(self, other: "QYSeries") -> bool:
        """Coefficient-wise equality on the intersection of the two windows."""
        qmax = min(self.qmax24, other.qmax24)
        ylow = max(self.ylow, other.ylow)
        keys = set()
        for s in (self, other):
            for n, row in s.levels.items():
                if n <= qmax:
                    keys.update((n, r) for r in row if r >= ylow)
        return all(self.coeff(n, r) == other.coeff(n, r) for n, r in keys)

    # ------------------------------------------------------- ring operations

    def add(self, other: "QYSeries") -> "QYSeries":
        qmax = min(self.qmax24, other.qmax24)
        ylow = max(self.ylow, other.ylow)
        order = _merge_order(self.order, other.order)
        out: dict[int, dict[int, object]] = {}
        for s in (self, other):
            for n, row in s.levels.items():
                if n > qmax:
                    continue
                dst = out.setdefault(n, {})
                for r, c in row.items():
                    if r < ylow:
                        continue
                    dst[r] = dst.get(r, 0) + c
        return QYSeries(out, qmax, ylow, order)

    def sub(self, other: "QYSeries") -> "QYSeries":
        return self.add(other.negate())

    def scale(self, c) -> "QYSeries":
        if _is_rational(c):
            if not c:
                return QYSeries.zero(self.qmax24, self.ylow)
            order = self.order
        else:
            order = _merge_order(self.order, c.order)
        out = {
            n: {r: v * c for r, v in row.items()} for n, row in self.levels.items()
        }
        return QYSeries(out, self.qmax24, self.ylow, order)

    def negate(self) -> "QYSeries":
        return self.scale(-1)

    def shift(self, dn24: int = 0, dr: int = 0) -> "QYSeries":
        """Multiply by q^(dn24/24) y^dr, adjusting the window accordingly."""
        out = {
            n + dn24: {r + dr: v for r, v in row.items()}
            for n, row in self.levels.items()
        }
        return QYSeries(out, self.qmax24 + dn24, self.ylow + dr, self.order)

    def mul(self, other: "QYSeries") -> "QYSeries":
        """Product, exact on the provable window.

        Result q-bound: min(Q1 + v2, Q2 + v1) where v is the partner's
        valuation (its stored minimum is the true one, by window exactness);
        this reduces to min(Q1, Q2) for series supported in q >= 0.  The
        lower y-bound widens by ceil(n_max/24) + partner ybound + 1 on each
        side, which excludes any contribution involving a truncated tail
        (see module docstring).
        """
        if self.is_zero() or other.is_zero():
            qmax = min(self.qmax24, other.qmax24)
            return QYSeries.zero(qmax, max(self.ylow, other.ylow))
        v1 = min(self.levels)
        v2 = min(other.levels)
        qmax = min(self.qmax24 + min(v2, 0), other.qmax24 + min(v1, 0))
        n1max = min(self.qmax24, qmax - v2)
        n2max = min(other.qmax24, qmax - v1)
        ylow = max(
            self.ylow + ceil_div24(n2max) + other.ybound + 1,
            other.ylow + ceil_div24(n1max) + self.ybound + 1,
        )
        order = _merge_order(self.order, other.order)
        if order == 1:
            levels = _mul_packed(self.levels, other.levels, qmax, ylow)
        else:
            levels = _mul_generic(self.levels, other.levels, qmax, ylow, order)
        return QYSeries(levels, qmax, ylow, order)

    # ------------------------------------------------------- specializations

    def specialize_y_one(self, guard: int = 2) -> "QYSeries":
        """Sum coefficients over r at each q-order (the y -> 1 specialization).

        Only valid when the y-support at each order is a polynomial whose
        support lies inside the window; a nonzero coefficient within `guard`
        of the lower window edge is treated as evidence of a truncated tail.
        """
        out: dict[int, dict[int, object]] = {}
        for n, row in self.levels.items():
            for r, c in row.items():
                if r < self.ylow + guard:
                    raise WindowError(
                        f"y tail not provably zero at (n24={n}, r={r}); "
                        f"coefficient {c} too close to ylow={self.ylow}"
                    )
            total = sum(row.values())
            total = _as_coeff(total)
            if isinstance(total, Cyclotomic):
                if not total.is_zero():
                    out[n] = {0: total}
            elif total:
                out[n] = {0: total}
        return QYSeries(out, self.qmax24, Y_FLOOR, self.order)

    def assert_y_free(self) -> "QYSeries":
        """Check every in-window coefficient with r != 0 vanishes; return the
        r = 0 slice as a pure q-series.  Raises YDependenceError naming the
        first offender.  The returned series claims the full y-free window:
        the check certifies freeness in-window, and callers invoke this
        exactly where the object is a function of tau alone."""
        out: dict[int, dict[int, object]] = {}
        for n in sorted(self.levels):
            for r in sorted(self.levels[n]):
                if r != 0:
                    raise YDependenceError(n, r, self.levels[n][r])
            c = self.levels[n].get(0)
            if c is not None:
                out[n] = {0: c}
        return QYSeries(out, self.qmax24, Y_FLOOR, self.order)

    # --------------------------------------------------------- serialization

    def coeff_list(self) -> list:
        """Sorted [[n24, r, value-string], ...] with exact rational strings."""
        items = []
        for n, r in self.support():
            v = self.levels[n][r]
            if isinstance(v, Cyclotomic):
                q = v.rational_or_none()
                if q is None:
                    items.append([n, r, {"order": v.order, "coeffs": [str(c) for c in v.coeffs]}])
                    continue
                v = q
            items.append([n, r, str(Fraction(v))])
        return items


def _merge_order(a: int, b: int) -> int:
    return a * b // gcd(a, b)


# ----------------------------------------------------------------- multiply


def _mul_generic(la: dict, lb: dict, qmax: int, ylow: int, order: int) -> dict:
    out: dict[int, dict[int, object]] = {}
    for n1, row1 in la.items():
        for n2, row2 in lb.items():
            n = n1 + n2
            if n > qmax:
                continue
            dst = out.setdefault(n, {})
            for r1, c1 in row1.items():
                for r2, c2 in row2.items():
                    r = r1 + r2
                    if r < ylow:
                        continue
                    dst[r] = dst.get(r, 0) + c1 * c2
    return out


def _content_scale(levels: dict) -> tuple[dict, int]:
    """Scale all coefficients to ints; return (int-levels, denominator)."""
    den = 1
    for row in levels.values():
        for c in row.values():
            if isinstance(c, Fraction):
                d = c.denominator
                den = den * d // gcd(den, d)
    if den == 1:
        return levels, 1
    out = {
        n: {
            r: (c.numerator * (den // c.denominator) if isinstance(c, Fraction) else c * den)
            for r, c in row.items()
        }
        for n, row in levels.items()
    }
    return out, den


def pack_row(row: dict, hi: int, slot: int) -> tuple[int, int]:
    """Pack {r: int} into a big integer with slot index (hi - r); also return
    the L1 norm.  Slot order is descending in r so that truncating low
    y-exponents is an exact high-bit mask."""
    acc = 0
    norm = 0
    for r, c in row.items():
        acc += c << (slot * (hi - r))
        norm += c if c >= 0 else -c
    return acc, norm


def unpack_row(acc: int, hi: int, slot: int, width: int) -> dict:
    """Inverse of pack_row over `width` slots (balanced signed decode)."""
    out = {}
    half = 1 << (slot - 1)
    full = 1 << slot
    mask = full - 1
    j = 0
    while acc and j < width:
        s = acc & mask
        if s >= half:
            s -= full
        if s:
            out[hi - j] = s
        acc = (acc - s) >> slot
        j += 1
    return out


def _mul_packed(la: dict, lb: dict, qmax: int, ylow: int) -> dict:
    la, da = _content_scale(la)
    lb, db = _content_scale(lb)
    hia = max(max(r for r in row) for row in la.values())
    hib = max(max(r for r in row) for row in lb.values())
    loa = min(min(r for r in row) for row in la.values())
    lob = min(min(r for r in row) for row in lb.values())
    # the product has no support below the sum of the operand floors
    ylow = max(ylow, loa + lob)
    # slot width from the exact convolution norm bound
    norm_a = {n: sum(abs(c) for c in row.values()) for n, row in la.items()}
    norm_b = {n: sum(abs(c) for c in row.values()) for n, row in lb.items()}
    nbs = sorted(norm_b)
    sums: dict[int, int] = {}
    for n1, v in norm_a.items():
        for n2 in nbs:
            if n1 + n2 > qmax:
                break
            sums[n1 + n2] = sums.get(n1 + n2, 0) + v * norm_b[n2]
    if not sums:
        return {}
    slot = max(sums.values()).bit_length() + 2
    packed_a = {n: pack_row(row, hia, slot)[0] for n, row in la.items()}
    packed_b = {n: pack_row(row, hib, slot)[0] for n, row in lb.items()}
    hi = hia + hib
    width = hi - ylow + 1
    if width <= 0:
        return {}
    acc: dict[int, int] = {}
    nb_sorted = sorted(packed_b)
    for n1, p1 in packed_a.items():
        for n2 in nb_sorted:
            n = n1 + n2
            if n > qmax:
                break
            prod = p1 * packed_b[n2]
            if n in acc:
                acc[n] += prod
            else:
                acc[n] = prod
    den = da * db
    out: dict[int, dict[int, object]] = {}
    for n, p in acc.items():
        row = unpack_row(p, hi, slot, width)
        if not row:
            continue
        if den != 1:
            row = {r: Fraction(c, den) for r, c in row.items()}
        out[n] = row
    return out
