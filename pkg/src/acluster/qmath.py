"""Exact and asymptotic complexity mathematics for chordality-preserving runs.

The number of queries a chordality-preserving strategy needs on a uniformly
random partition of n items has an exact distribution with integer counts
a_i (number of partitions needing exactly i queries).  Its generating
polynomial obeys

    P_{m+1}(q) = q^m * sum_{a=0}^{m} C(m,a) P_a(q),   P_0 = 1,

which this module re-derives coefficients from, along with q-analog special
functions, two closed forms of the normalized generating function, exact
factorial moments, and Lambert-W asymptotics of the mean and spread.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Union

Numeric = Union[float, Fraction]

_bell_cache: list[int] = [1]          # B_n
_deriv1_cache: list[int] = [0]        # P_n'(1)
_deriv2_cache: list[int] = [0]        # P_n''(1)
_poly_cache: list[dict[int, int]] = [{0: 1}]


def _extend_moment_caches(n: int) -> None:
    while len(_bell_cache) <= n:
        m = len(_bell_cache) - 1
        b_next = sum(comb(m, a) * _bell_cache[a] for a in range(m + 1))
        m1_sum = sum(comb(m, a) * _deriv1_cache[a] for a in range(m + 1))
        m1_next = m * b_next + m1_sum
        m2_sum = sum(comb(m, a) * _deriv2_cache[a] for a in range(m + 1))
        m2_next = m * (m - 1) * b_next + 2 * m * m1_sum + m2_sum
        _bell_cache.append(b_next)
        _deriv1_cache.append(m1_next)
        _deriv2_cache.append(m2_next)


def bell(n: int) -> int:
    """Exact Bell number: partitions of an n-set."""
    if n < 0:
        raise ValueError("n must be non-negative")
    _extend_moment_caches(n)
    return _bell_cache[n]


@dataclass(frozen=True)
class ComplexityPolynomial:
    """Exact counts a_i of partitions needing exactly i queries."""

    n: int
    coeffs: dict[int, int]

    def evaluate(self, q: Numeric) -> Numeric:
        return sum(c * q**i for i, c in sorted(self.coeffs.items()))

    def pgf(self, q: Numeric) -> Numeric:
        """Normalized value E[q^X] = P_n(q)/B_n."""
        total = bell(self.n)
        value = self.evaluate(q)
        if isinstance(value, Fraction):
            return value / total
        return value / float(total)

    @property
    def min_queries(self) -> int:
        return min(self.coeffs) if self.coeffs else 0

    @property
    def max_queries(self) -> int:
        return max(self.coeffs) if self.coeffs else 0


def complexity_polynomial(n: int) -> ComplexityPolynomial:
    """Coefficients of P_n via the binomial recurrence, exact integers."""
    if n < 0:
        raise ValueError("n must be non-negative")
    while len(_poly_cache) <= n:
        m = len(_poly_cache) - 1
        acc: dict[int, int] = {}
        for a in range(m + 1):
            c = comb(m, a)
            for power, coef in _poly_cache[a].items():
                key = power + m  # the q^m prefactor shifts every term
                acc[key] = acc.get(key, 0) + c * coef
        _poly_cache.append(acc)
    return ComplexityPolynomial(n, dict(_poly_cache[n]))


def exact_moments(n: int) -> tuple[Fraction, Fraction]:
    """Exact (mean, variance) of the query count on uniform partitions.

    Uses integer recurrences for P_n(1), P_n'(1), P_n''(1) obtained by
    differentiating the coefficient recurrence, so n in the hundreds stays
    cheap; no full polynomial is materialized.
    """
    if n < 1:
        raise ValueError("n must be positive")
    _extend_moment_caches(n)
    b = _bell_cache[n]
    mean = Fraction(_deriv1_cache[n], b)
    second_factorial = Fraction(_deriv2_cache[n], b)
    variance = second_factorial + mean - mean * mean
    return mean, variance


# ---------------------------------------------------------------------------
# q-analogs


def q_int(n: int, q: Numeric) -> Numeric:
    """[n]_q = 1 + q + ... + q^(n-1)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    total = q * 0
    power = q**0
    for _ in range(n):
        total += power
        power *= q
    return total


def q_factorial(n: int, q: Numeric) -> Numeric:
    """[n]_q! = [1]_q [2]_q ... [n]_q."""
    result = q**0
    for k in range(1, n + 1):
        result *= q_int(k, q)
    return result


def q_pochhammer(a: Numeric, q: Numeric, k: int) -> Numeric:
    """(a; q)_k = product over j < k of (1 - a q^j)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    one = q**0
    result = one
    power = one
    for _ in range(k):
        result *= one - a * power
        power *= q
    return result


def q_pochhammer_inf(a: float, q: float, tol: float = 1e-18) -> float:
    """(a; q)_infinity for |q| < 1, truncated once factors are 1 to tol."""
    if not 0 <= q < 1:
        raise ValueError("infinite product needs 0 <= q < 1")
    result = 1.0
    term = a
    for _ in range(100000):
        result *= 1.0 - term
        term *= q
        if abs(term) < tol:
            break
    return result


def q_exp(z: float, q: float, tol: float = 1e-15) -> float:
    """e_q(z) = sum z^m/[m]_q!, truncated adaptively.

    The series converges iff |z|(1-q) < 1; outside that disc a divergence
    error is raised rather than returning a partial sum.
    """
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    if q < 1 and abs(z) * (1.0 - q) >= 1.0 - 1e-12:
        raise ValueError("q-exponential series diverges for this argument")
    total = 0.0
    term = 1.0
    m = 0
    while True:
        total += term
        m += 1
        term *= z / float(q_int(m, q))
        if m > 4 and abs(term) <= tol * abs(total):
            break
        if m > 100000:
            raise RuntimeError("q_exp failed to converge")
    return total


# ---------------------------------------------------------------------------
# Closed forms of the normalized generating function


def evaluate_pgf(n: int, q: float, exact: bool = True) -> float:
    """Direct reference value P_n(q)/B_n from the exact coefficients."""
    poly = complexity_polynomial(n)
    if exact:
        return float(poly.pgf(Fraction(q)))
    return float(poly.pgf(float(q)))


def pgf_closed_form_1(n: int, q: float, exact: bool | None = None) -> float:
    """Alternating-sum closed form of E[q^X].

    (q/(1-q))^n * sum_k C(n,k) (-1)^k ((1-q)/q; q)_k, divided by B_n.
    The sum cancels catastrophically as q -> 1, so by default the evaluation
    escalates to exact rational arithmetic when float64 would lose more than
    ~4 digits; pass exact=False to force the float path (it warns instead).
    """
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    if q == 1.0:
        return 1.0
    if exact:
        return float(_closed_form_1_fraction(n, Fraction(q)))
    a = (1.0 - q) / q
    total = 0.0
    abs_total = 0.0
    poch = 1.0
    power = 1.0
    for k in range(n + 1):
        term = comb(n, k) * poch * (-1 if k % 2 else 1)
        total += term
        abs_total += abs(term)
        poch *= 1.0 - a * power
        power *= q
    scale = (q / (1.0 - q)) ** n / float(bell(n))
    cancellation = abs_total / max(abs(total), 5e-324)
    if exact is None and cancellation > 1e4:
        return float(_closed_form_1_fraction(n, Fraction(q)))
    if cancellation > 1e15:
        warnings.warn(
            f"catastrophic cancellation in closed form 1 at n={n}, q={q}",
            stacklevel=2,
        )
    return total * scale


def _closed_form_1_fraction(n: int, q: Fraction) -> Fraction:
    one = Fraction(1)
    a = (one - q) / q
    total = Fraction(0)
    poch = one
    power = one
    for k in range(n + 1):
        total += comb(n, k) * poch * (-1 if k % 2 else 1)
        poch *= one - a * power
        power *= q
    return total * (q / (one - q)) ** n / bell(n)


def pgf_closed_form_2(n: int, q: float, tol: float = 1e-12) -> float:
    """Dobinski-style series closed form of E[q^X].

    (1/e_q(1/q)) * sum_m [m]_q^n/[m]_q! * q^(n-m), divided by B_n.
    Converges only for q above 1/2 (term ratio tends to (1-q)/q).
    """
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    if q == 1.0:
        return 1.0
    if q <= 0.5 + 0.05:
        raise ValueError("series diverges for q <= 1/2 (plus safety margin)")
    total = 0.0
    q_fact = 1.0
    q_m = 0.0  # [m]_q
    q_pow = 1.0  # q^m
    m = 0
    while True:
        term = q_m**n / q_fact / q_pow if m else (1.0 if n == 0 else 0.0)
        total += term
        m += 1
        q_m += q_pow
        q_pow *= q
        q_fact *= q_m
        if m > n and term <= tol * total:
            break
        if m > 100000:
            raise RuntimeError("closed form 2 failed to converge")
    return total * q**n / q_exp(1.0 / q, q) / float(bell(n))


# ---------------------------------------------------------------------------
# Lambert W and asymptotic moments


def lambert_w(x: float) -> float:
    """Principal-branch W(x) for x >= 0 with |We^W - x| <= 1e-12 max(1, x).

    Halley iteration seeded by log(x) - log(log(x)) for large x (the same
    expansion that drives the asymptotic mean), log1p below e.
    """
    if x < 0:
        raise ValueError("only the non-negative real branch is supported")
    if x == 0.0:
        return 0.0
    if x > math.e:
        log_x = math.log(x)
        w = log_x - math.log(log_x)
    else:
        w = x / (1.0 + x)  # first-order accurate near 0, inside the basin
    target = 1e-13 * max(1.0, x)
    for _ in range(60):
        e_w = math.exp(w)
        f = w * e_w - x
        if abs(f) <= target:
            break
        denom = e_w * (w + 1.0) - (w + 2.0) * f / (2.0 * (w + 1.0))
        w -= f / denom
    return w


@dataclass(frozen=True)
class AsymptoticMoments:
    n: float
    w: float
    mean: float
    sigma: float


def asymptotic_moments(n: float) -> AsymptoticMoments:
    """Leading-order mean and spread of the query count at size n.

    mean  = (1/4)(2W - 1) e^{2W}
    sigma = (1/3) sqrt((3W^2 - 4W + 2)/(W + 1) * e^{3W})
    with W = W(n).  Convergence of the true moments to these values is slow,
    so validators pair them with loose tolerances.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    w = lambert_w(float(n))
    mean = 0.25 * (2.0 * w - 1.0) * math.exp(2.0 * w)
    sigma = (1.0 / 3.0) * math.sqrt(
        (3.0 * w * w - 4.0 * w + 2.0) / (w + 1.0) * math.exp(3.0 * w)
    )
    return AsymptoticMoments(float(n), w, mean, sigma)


# ---------------------------------------------------------------------------
# Identity verification


def verify_q_identities(q: float, n: int, tol: float = 1e-10) -> dict:
    """Numerically check the classic q-identities used by the closed forms.

    Returns a report dict; identities are evaluated with adaptive truncation.
    Values of q too close to 1 are skipped (1/(1-q) blows up) with a notice.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    if 1.0 - q < 1e-9:
        return {"skipped": True, "reason": "near-singular: 1/(1-q) overflow risk"}
    report: dict = {"skipped": False, "q": q, "n": n, "tol": tol, "identities": {}}

    def record(name: str, lhs: float, rhs: float) -> None:
        scale = max(abs(lhs), abs(rhs), 1.0)
        ok = abs(lhs - rhs) <= tol * scale
        report["identities"][name] = {
            "lhs": lhs, "rhs": rhs, "abs_diff": abs(lhs - rhs), "pass": ok,
        }

    record(
        "q_factorial_vs_pochhammer",
        q_factorial(n, q),
        q_pochhammer(q, q, n) / (1.0 - q) ** n,
    )
    x = q  # |x| < 1 keeps both sides convergent
    series = 0.0
    term = 1.0  # x^m/(q;q)_m, built factor by factor
    for m in range(0, 100000):
        series += term
        term *= x / (1.0 - q ** (m + 1))
        if abs(term) < 1e-18 * abs(series):
            break
    record("euler_inverse_product", 1.0 / q_pochhammer_inf(x, q), series)
    z = 1.0
    record(
        "q_exp_as_product",
        q_exp(z, q),
        1.0 / q_pochhammer_inf((1.0 - q) * z, q),
    )
    report["pass"] = all(v["pass"] for v in report["identities"].values())
    return report
