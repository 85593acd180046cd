"""Builders for the classical series: eta powers, theta quotients, the
Appell-Lerch sum mu, and the lacunary weight-two generating function F2.

Every object lives on the q^(1/24) lattice with integer y-exponents.
theta_1 is never exposed un-squared: its -i and y^(1/2) prefactors only occur
in combinations where they cancel (theta_1^2, and -i y^(1/2)/theta_1 inside
mu), so all public series have integer exponents and rational coefficients.

Products are kept in factor form (see factors.FactorProduct) as long as
possible; the expanded builders here request exactly the window the caller
asked for and fail loudly if the sound window falls short.
"""

from __future__ import annotations

from fractions import Fraction

from .factors import Factor, FactorProduct, expand
from .series import CapacityError, QYSeries, ceil_div24

# ------------------------------------------------------------ factor forms


def eta_pow_fp(k: int) -> FactorProduct:
    """q^(k/24) prod_(n>0) (1-q^n)^k; k may be negative (y-free, domain safe)."""
    if k == 0:
        return FactorProduct()
    return FactorProduct(b0=k, factors=(Factor(1, 0, 0, 24, k),))


def theta1_sq_fp() -> FactorProduct:
    """theta_1^2 = -q^(1/4) y prod (1-y^-1 q^(n-1))^2 (1-y q^n)^2 (1-q^n)^2."""
    return FactorProduct(scalar=-1, a0=1, b0=6, factors=(
        Factor(1, -1, -24, 24, 2),
        Factor(1, 1, 0, 24, 2),
        Factor(1, 0, 0, 24, 2),
    ))


def theta1_sq_inv_fp() -> FactorProduct:
    """1/theta_1^2 in factor form; the n=1 inverse factor (1-y^-1)^-2 is the
    domain-defining geometric tail."""
    return FactorProduct(scalar=-1, a0=-1, b0=-6, factors=(
        Factor(1, -1, -24, 24, -2),
        Factor(1, 1, 0, 24, -2),
        Factor(1, 0, 0, 24, -2),
    ))


def theta_quot_fp(j: int) -> FactorProduct:
    """theta_j^2(tau,z)/theta_j^2(tau,0) for j in {2,3,4}, as one factor
    product (numerator over y-free denominator; the (1-q^n) factors cancel).

    For j = 2 the n=1 denominator factor (1+q^0)^2 is the scalar 4, folded
    into the prefactor so every remaining factor has b > 0.
    """
    if j == 2:
        return FactorProduct(scalar=Fraction(1, 4), a0=1, factors=(
            Factor(-1, -1, -24, 24, 2),
            Factor(-1, 1, 0, 24, 2),
            Factor(-1, 0, 0, 24, -4),
        ))
    if j == 3:
        return FactorProduct(factors=(
            Factor(-1, -1, -12, 24, 2),
            Factor(-1, 1, -12, 24, 2),
            Factor(-1, 0, -12, 24, -4),
        ))
    if j == 4:
        return FactorProduct(factors=(
            Factor(1, -1, -12, 24, 2),
            Factor(1, 1, -12, 24, 2),
            Factor(1, 0, -12, 24, -4),
        ))
    raise ValueError(f"theta quotient defined for j in 2..4, got {j}")


def mu_inv_product_fp() -> FactorProduct:
    """[prod (1-y^-1 q^(n-1))(1-y q^n)(1-q^n)]^-1, the -i y^(1/2)/theta_1
    prefactor of mu with the half powers already cancelled."""
    return FactorProduct(factors=(
        Factor(1, -1, -24, 24, -1),
        Factor(1, 1, 0, 24, -1),
        Factor(1, 0, 0, 24, -1),
    ))


# --------------------------------------------------------------- expansions


def _ensure_window(s: QYSeries, qmax24: int, ylow: int, what: str) -> QYSeries:
    if s.qmax24 < qmax24 or s.ylow > ylow:
        raise CapacityError(
            f"{what}: achieved window (qmax24={s.qmax24}, ylow={s.ylow}) "
            f"does not cover requested ({qmax24}, {ylow})"
        )
    return QYSeries(
        {n: row for n, row in s.levels.items() if n <= qmax24},
        qmax24, ylow, s.order,
    )


def eta_pow(k: int, qmax24: int) -> QYSeries:
    """The expanded series of eta(tau)^k."""
    return expand(eta_pow_fp(k), qmax24, 0)


def theta1_sq(qmax24: int, ylow: int) -> QYSeries:
    return expand(theta1_sq_fp(), qmax24, ylow)


def theta_quot(j: int, qmax24: int, ylow: int) -> QYSeries:
    return expand(theta_quot_fp(j), qmax24, ylow)


def theta_quot_half(j: int, qmax24: int, ylow: int) -> QYSeries:
    """The j in {3,4} quotients as they enter the twisted-trace bracket: they
    already live on the half-integer q-lattice, so this is the same series."""
    if j not in (3, 4):
        raise ValueError("half-lattice theta quotient defined for j in {3, 4}")
    return theta_quot(j, qmax24, ylow)


def appell_mu(qmax24: int, ylow: int) -> QYSeries:
    """The Appell-Lerch sum mu(tau, z), expanded in 0 < -Im(z) < Im(tau).

    mu = q^(-1/8) * [prod (1-y^-1 q^(n-1))(1-y q^n)(1-q^n)]^(-1)
         * sum_(n in Z) (-1)^n y^n q^(n(n+1)/2) / (1 - y q^n),

    with each summand expanded in-domain: the n = 0 term 1/(1-y) as
    -sum_(k>=1) y^-k, negative-n terms rewritten to nonnegative q-exponents
    before their geometric expansion.
    """
    # padding so the product window still covers the request
    qpad = qmax24 + 48
    ypad = ylow - ceil_div24(qpad) - 3
    levels: dict[int, dict[int, int]] = {0: {}}
    for k in range(1, -ypad + 1):
        levels[0][-k] = -1
    n = 1
    while 12 * n * (n + 1) <= qpad:
        sign = -1 if n % 2 else 1
        k = 0
        while 12 * n * (n + 1) + 24 * n * k <= qpad:
            lvl = levels.setdefault(12 * n * (n + 1) + 24 * n * k, {})
            r = n + k
            lvl[r] = lvl.get(r, 0) + sign
            k += 1
        n += 1
    m = 1
    while 12 * m * (m + 1) <= qpad:
        sign = 1 if m % 2 else -1  # (-1)^(m+1)
        k = 0
        while 12 * m * (m + 1) + 24 * m * k <= qpad:
            r = -m - 1 - k
            if r >= ypad:
                lvl = levels.setdefault(12 * m * (m + 1) + 24 * m * k, {})
                lvl[r] = lvl.get(r, 0) + sign
            k += 1
        m += 1
    appell_sum = QYSeries(levels, qpad, ypad)
    invprod = expand(mu_inv_product_fp(), qpad, ypad)
    mu = appell_sum.mul(invprod).shift(dn24=-3)
    return _ensure_window(mu, qmax24, ylow, "appell_mu")


def eta3_mu(qmax24: int, ylow: int) -> QYSeries:
    """eta^3 * mu, the polar building block with integer coefficients."""
    qpad = qmax24 + 24
    s = appell_mu(qpad, ylow - ceil_div24(qpad + 24) - 2)
    out = s.mul(eta_pow(3, qpad + 3))
    return _ensure_window(out, qmax24, ylow, "eta3_mu")


def f2(qmax24: int) -> QYSeries:
    """F2 = sum over r > s > 0 with r - s odd of s*q^(rs/2), enumerated
    exactly (r ascending, then s ascending; rs/2 is integral since rs is even)."""
    levels: dict[int, dict[int, int]] = {}
    r = 2
    while 12 * r <= qmax24:  # smallest contribution of r is 12*r*s with s >= 1
        for s in range(1, r):
            if (r - s) % 2 == 1:
                n24 = 12 * r * s
                if n24 <= qmax24:
                    lvl = levels.setdefault(n24, {})
                    lvl[0] = lvl.get(0, 0) + s
        r += 1
    return QYSeries(levels, qmax24, 0)


_NAMED_FP = {
    "theta1_sq": theta1_sq_fp,
    "theta_quot_2": lambda: theta_quot_fp(2),
    "theta_quot_3": lambda: theta_quot_fp(3),
    "theta_quot_4": lambda: theta_quot_fp(4),
}


def named_form_fp(tag: str, **params) -> FactorProduct:
    """FactorProduct constructions for the purely multiplicative named forms
    (F2 and mu are explicit summations; see f2 / appell_mu)."""
    if tag == "eta_pow":
        return eta_pow_fp(params["k"])
    try:
        return _NAMED_FP[tag]()
    except KeyError:
        raise ValueError(f"no factor-product form for tag {tag!r}") from None
