"""Symbolic infinite products and their domain-aware expansion.

A FactorProduct is a monomial prefactor times a multiset of factor families

    prod_{n >= 1} (1 - c * gamma^g * y^a * q^((b0 + step*n)/24))^e

(`step = 0` with `single=True` marks one factor at exponent b0/24).  This is
the lossless form of every eta/theta/trace object in the package: keeping
products symbolic until expansion lets matching zero/pole pairs cancel
exactly, which is what makes the gamma -> -1 limit of the twisted traces
well defined.

Expansion convention (the fixed domain |q| < |y^-1| < 1): inverse factors
with a < 0 expand as geometric series in y^-1, truncated at the requested
ylow; inverse factors with a >= 0 require b > 0.  Factors that raise y are
applied before any y-lowering factor, so the ylow truncation never loses
mass that could climb back into the window.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd

from .cyclotomic import Cyclotomic
from .series import (
    CapacityError,
    DomainError,
    QYSeries,
    Y_FLOOR,
    pack_row,
    unpack_row,
)

_MAX_WIDTH = 1 << 16


def _coeff_key(c):
    if isinstance(c, Cyclotomic):
        q = c.rational_or_none()
        if q is not None:
            return q
        return (c.order, c.coeffs)
    return Fraction(c)


@dataclass(frozen=True)
class Factor:
    """One family (1 - c*gamma^gpow*y^a*q^(b(n)/24))^e with b(n) = b0 + step*n."""

    c: object
    a: int
    b0: int
    step: int
    e: int
    gpow: int = 0
    single: bool = False

    def key(self):
        return (_coeff_key(self.c), self.a, self.b0, self.step, self.gpow, self.single)

    def exponents(self, bmax: int):
        """The q-exponents (units of 1/24) of the family members that can
        contribute below the truncation order."""
        if self.single:
            if self.b0 <= bmax:
                yield self.b0
            return
        if self.step <= 0:
            raise CapacityError(f"factor family with step {self.step} never terminates")
        n = 1
        while self.b0 + self.step * n <= bmax:
            yield self.b0 + self.step * n
            n += 1


class FactorProduct:
    """prefactor * product of factor families; construction merges and cancels
    identical families symbolically (summing exponents, dropping e = 0)."""

    __slots__ = ("scalar", "gpow", "a0", "b0", "factors")

    def __init__(self, scalar=1, a0: int = 0, b0: int = 0, factors=(), gpow: int = 0) -> None:
        merged: dict = {}
        for f in factors:
            k = f.key()
            if k in merged:
                prev = merged[k]
                merged[k] = Factor(prev.c, prev.a, prev.b0, prev.step,
                                   prev.e + f.e, prev.gpow, prev.single)
            else:
                merged[k] = f
        self.scalar = scalar
        self.gpow = gpow
        self.a0 = a0
        self.b0 = b0
        self.factors = tuple(
            sorted((f for f in merged.values() if f.e != 0),
                   key=lambda f: (f.single, f.b0, f.step, f.a, f.e, repr(f.key())))
        )

    def mul(self, other: "FactorProduct") -> "FactorProduct":
        return FactorProduct(
            _scalar_mul(self.scalar, other.scalar),
            self.a0 + other.a0,
            self.b0 + other.b0,
            self.factors + other.factors,
            self.gpow + other.gpow,
        )

    def scaled(self, c) -> "FactorProduct":
        return FactorProduct(_scalar_mul(self.scalar, c), self.a0, self.b0,
                             self.factors, self.gpow)

    def has_gamma(self) -> bool:
        return self.gpow != 0 or any(f.gpow for f in self.factors)

    def substitute_gamma(self) -> "FactorProduct":
        """Specialize the formal gamma marker to -1.

        Substitution happens factor-wise; the constructor's symbolic merge
        then cancels matching zero/pole pairs, after which the limit is a
        plain evaluation.
        """
        scalar = _scalar_mul(self.scalar, (-1) ** (self.gpow % 2))
        new = []
        for f in self.factors:
            if f.gpow:
                c = _scalar_mul(f.c, (-1) ** (f.gpow % 2))
                new.append(Factor(c, f.a, f.b0, f.step, f.e, 0, f.single))
            else:
                new.append(f)
        return FactorProduct(scalar, self.a0, self.b0, tuple(new), 0)

    def __repr__(self) -> str:
        parts = [f"{self.scalar}*y^{self.a0}*q^({self.b0}/24)"]
        if self.gpow:
            parts[0] += f"*gamma^{self.gpow}"
        for f in self.factors:
            g = f"*gamma^{f.gpow}" if f.gpow else ""
            if f.single:
                parts.append(f"(1 - {f.c}{g} y^{f.a} q^({f.b0}/24))^{f.e}")
            else:
                parts.append(f"(1 - {f.c}{g} y^{f.a} q^(({f.b0}+{f.step}n)/24))^{f.e}")
        return "FactorProduct[" + " ".join(parts) + "]"


def _scalar_mul(x, y):
    if isinstance(x, Cyclotomic) or isinstance(y, Cyclotomic):
        return Cyclotomic.coerce(x) * Cyclotomic.coerce(y)
    return x * y


def _is_one_scalar(c) -> bool:
    if isinstance(c, Cyclotomic):
        return c.rational_or_none() == 1
    return c == 1


# ------------------------------------------------------------------ expand


def expand(fp: FactorProduct, qmax24: int, ylow: int) -> QYSeries:
    """Expand a factor product into its exact Fourier coefficients on the
    window n24 <= qmax24, r >= ylow, in the domain 0 < -Im(z) < Im(tau).

    Raises DomainError for non-convergent configurations (an uncancelled
    factor with b = 0, e < 0 and a >= 0) and CapacityError when exponent
    bookkeeping exceeds sane limits.
    """
    if fp.has_gamma():
        raise DomainError("factor product retains a formal gamma marker; "
                          "take the gamma limit first")
    yfree = fp.a0 == 0 and all(f.a == 0 for f in fp.factors)
    if yfree:
        ylow = Y_FLOOR  # y-free products are exact at every y-height
    if qmax24 < fp.b0:
        return QYSeries.zero(qmax24, ylow)

    scalar = fp.scalar
    up: list[tuple[object, int, int, int]] = []    # a > 0 or a == 0 (y never drops)
    down: list[tuple[object, int, int, int]] = []  # a < 0
    zero_series = False
    bspan = qmax24 - fp.b0
    for f in fp.factors:
        for b in f.exponents(bspan):
            if b < 0:
                raise DomainError(f"factor member with negative q-exponent {b}/24 in {f}")
            if b == 0:
                if f.a == 0:
                    one_minus = 1 - Cyclotomic.coerce(f.c) if isinstance(f.c, Cyclotomic) \
                        else 1 - Fraction(f.c)
                    if not one_minus:
                        if f.e < 0:
                            raise DomainError("uncancelled pole: (1 - q^0)^e with e < 0 "
                                              f"from {f}")
                        zero_series = True
                        continue
                    scalar = _scalar_mul(scalar, _scalar_ipow(one_minus, f.e))
                    continue
                if f.a > 0:
                    raise DomainError(f"factor (1 - c y^{f.a})^{f.e} with b = 0 "
                                      "does not converge in the domain")
            if f.a < 0:
                down.append((f.c, f.a, b, f.e))
            else:
                up.append((f.c, f.a, b, f.e))
    if zero_series:
        return QYSeries.zero(qmax24, ylow)

    # structural top of the y-range over the whole computation; the working
    # floor covers the prefactor so pre-lowering content is never clipped
    hi = fp.a0
    for c, a, b, e in up:
        if a > 0:
            kmax = bspan // b
            hi += a * (min(e, kmax) if e > 0 else kmax)
    lo_work = fp.a0 if yfree else min(ylow, fp.a0)
    if hi < lo_work:
        hi = lo_work
    if hi - lo_work + 1 > _MAX_WIDTH:
        raise CapacityError(f"y-window width {hi - lo_work + 1} exceeds capacity")

    members = up + down
    if all(_int_or_none(c) is not None for c, _, _, _ in members):
        levels = _expand_packed(members, fp.a0, fp.b0, qmax24, lo_work, hi)
        order = 1
    else:
        levels = _expand_generic(members, fp.a0, fp.b0, qmax24, lo_work, hi)
        order = 1
        for c, _, _, _ in members:
            if isinstance(c, Cyclotomic) and c.rational_or_none() is None:
                order = order * c.order // gcd(order, c.order)

    series = QYSeries(levels, qmax24, ylow, order)
    if not _is_one_scalar(scalar):
        series = series.scale(scalar)
    return series


def _int_or_none(c):
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    if isinstance(c, Cyclotomic):
        q = c.rational_or_none()
        if q is not None and q.denominator == 1:
            return q.numerator
    return None


def _scalar_ipow(c, e: int):
    if e >= 0:
        return c ** e
    if isinstance(c, Cyclotomic):
        raise CapacityError("cyclotomic scalar inversion not supported")
    return Fraction(c) ** e


# --------------------------------------------------------- packed expansion


def _expand_packed(members, a0: int, b0: int, qmax24: int, ylow: int, hi: int) -> dict:
    """Sequential factor application on Kronecker-packed levels.

    A first pass simulates L1-norm growth through the identical recurrences
    to fix a sound slot width; the second pass runs on packed integers.
    Once the y-lowering members start, values are reduced mod 2^(slot*width)
    (dropping y-exponents below ylow) which is exact because no later member
    raises y.
    """
    cs = [_int_or_none(c) for c, _, _, _ in members]
    width = hi - ylow + 1

    # --- pass 1: L1 norms
    norms: dict[int, int] = {b0: 1}
    for (c, a, b, e), cn in zip(members, cs):
        w = abs(cn)
        if w == 0:
            continue
        if b == 0:
            fnorm = sum(abs(v) for v in _factor_series_row(cn, a, e, width).values())
            norms = {n: v * fnorm for n, v in norms.items()}
        elif e > 0:
            for _ in range(e):
                new = dict(norms)
                for n, v in norms.items():
                    if n + b <= qmax24:
                        new[n + b] = new.get(n + b, 0) + w * v
                norms = new
        else:
            for _ in range(-e):
                new: dict[int, int] = {}
                for n in range(b0, qmax24 + 1):
                    v = norms.get(n, 0)
                    p = new.get(n - b, 0)
                    if p:
                        v += w * p
                    if v:
                        new[n] = v
                norms = new
    bound = max(norms.values()) if norms else 1
    slot = max(bound.bit_length() + 3, 8)
    mask = (1 << (slot * width)) - 1

    # --- pass 2: packed evaluation
    levels: dict[int, int] = {b0: 1 << (slot * (hi - a0))}
    lowering = False

    def shift_up(v: int, a: int) -> int:
        return v >> (slot * a)

    def shift_down(v: int, a: int) -> int:
        return (v << (slot * (-a))) & mask

    for (c, a, b, e), cn in zip(members, cs):
        if cn == 0:
            continue
        if a < 0:
            lowering = True
        if b == 0:
            row = _factor_series_row(cn, a, e, width)
            packed_f = pack_row(row, 0, slot)[0]
            levels = {n: (v * packed_f) & mask for n, v in levels.items()}
        elif e > 0:
            for _ in range(e):
                new = dict(levels)
                for n, v in levels.items():
                    if n + b > qmax24:
                        continue
                    t = cn * (shift_down(v, a) if a < 0 else shift_up(v, a))
                    nb = n + b
                    if nb in new:
                        new[nb] = (new[nb] - t) & mask if lowering else new[nb] - t
                    else:
                        new[nb] = (-t) & mask if lowering else -t
                levels = new
        else:
            for _ in range(-e):
                new2: dict[int, int] = {}
                for n in range(b0, qmax24 + 1):
                    v = levels.get(n, 0)
                    p = new2.get(n - b, 0)
                    if p:
                        t = cn * (shift_down(p, a) if a < 0 else shift_up(p, a))
                        v = (v + t) & mask if lowering else v + t
                    if v:
                        new2[n] = v
                levels = new2

    out: dict[int, dict[int, int]] = {}
    for n, v in levels.items():
        if n > qmax24 or not v:
            continue
        row = unpack_row(v & mask, hi, slot, width)
        if row:
            out[n] = row
    return out


def _factor_series_row(c: int, a: int, e: int, width: int) -> dict:
    """y-expansion of (1 - c*y^a)^e as {r: int}, truncated to `width` slots
    below 0 when a < 0 (sound in the lowering phase)."""
    row: dict[int, int] = {}
    if e > 0:
        for k in range(e + 1):
            if a < 0 and -k * a >= width:
                break
            row[k * a] = comb(e, k) * (-c) ** k
    else:
        if a >= 0:
            raise DomainError("b = 0 inverse factor requires a < 0")
        m = -e
        kmax = (width - 1) // (-a)
        for k in range(kmax + 1):
            row[k * a] = comb(k + m - 1, m - 1) * c ** k
    return row


# --------------------------------------------------------- generic expansion


def _expand_generic(members, a0: int, b0: int, qmax24: int, ylow: int, hi: int) -> dict:
    """Reference expansion on plain dicts; used for cyclotomic coefficients
    and as an oracle for the packed path in tests."""
    levels: dict[int, dict[int, object]] = {b0: {a0: 1}}

    def clip(levels_in, allow_drop):
        if not allow_drop:
            return levels_in
        return {
            n: {r: v for r, v in row.items() if r >= ylow}
            for n, row in levels_in.items()
        }

    lowering = False
    for c, a, b, e in members:
        if a < 0:
            lowering = True
        if e > 0:
            for _ in range(e):
                new = {n: dict(row) for n, row in levels.items()}
                for n, row in levels.items():
                    if b and n + b > qmax24:
                        continue
                    dst = new.setdefault(n + b, {})
                    for r, v in row.items():
                        rr = r + a
                        if lowering and rr < ylow:
                            continue
                        dst[rr] = dst.get(rr, 0) - c * v
                levels = clip(new, lowering)
        elif b > 0:
            for _ in range(-e):
                new2: dict[int, dict[int, object]] = {}
                for n in range(b0, qmax24 + 1):
                    row = dict(levels.get(n, {}))
                    prev = new2.get(n - b)
                    if prev:
                        for r, v in prev.items():
                            rr = r + a
                            if lowering and rr < ylow:
                                continue
                            row[rr] = row.get(rr, 0) + c * v
                    if row:
                        new2[n] = row
                levels = new2
        else:
            # b == 0, a < 0: per-level truncated geometric series
            kmax = (hi - ylow) // (-a) + 1
            for _ in range(-e):
                new3: dict[int, dict[int, object]] = {}
                for n, row in levels.items():
                    dst: dict[int, object] = {}
                    for r, v in row.items():
                        term = v
                        for k in range(kmax + 1):
                            rr = r + a * k
                            if rr < ylow:
                                break
                            dst[rr] = dst.get(rr, 0) + term
                            term = term * c
                    new3[n] = dst
                levels = new3

    out: dict[int, dict[int, object]] = {}
    for n, row in levels.items():
        if n > qmax24:
            continue
        clean = {}
        for r, v in row.items():
            if isinstance(v, Cyclotomic):
                if not v.is_zero():
                    clean[r] = v
            elif v:
                clean[r] = v
        if clean:
            out[n] = clean
    return out
