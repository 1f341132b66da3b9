"""Scalar formulas for the hardcore model in the tree-uniqueness regime.

Critical fugacity, the d-ary tree recurrence and its fixed point, the
l-infinity spectral independence constants, the functions used to bound the
influence sum on trees, and the mixing-time bound exponents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

# relative slack when comparing a fugacity against the (rounded) critical value
CRITICAL_RTOL = 1e-12
BISECTION_TOL = 1e-14
THETA = Fraction(23, 24)


def critical_fugacity(max_degree: int) -> float:
    """``(D-1)**(D-1) / (D-2)**D`` for maximum degree ``D >= 3``."""
    if int(max_degree) != max_degree or max_degree < 3:
        raise ValueError(f"maximum degree must be an integer >= 3, got {max_degree}")
    D = int(max_degree)
    return float(Fraction((D - 1) ** (D - 1), (D - 2) ** D))


def _check_branching(d: int) -> None:
    if int(d) != d or d < 2:
        raise ValueError(f"branching number d must be an integer >= 2, got {d}")


def _check_subcritical(d: int, lam: float) -> None:
    if not lam > 0:
        raise ValueError(f"fugacity must be positive, got {lam}")
    lc = critical_fugacity(d + 1)
    if lam > lc * (1 + CRITICAL_RTOL):
        raise ValueError(f"fugacity {lam} exceeds the critical value {lc} for degree {d + 1}")


@dataclass(frozen=True)
class HardcoreParams:
    max_degree: int
    delta: float

    def __post_init__(self):
        critical_fugacity(self.max_degree)
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"slack delta must lie in [0, 1], got {self.delta}")

    @classmethod
    def from_fugacity(cls, max_degree: int, lam: float) -> "HardcoreParams":
        lc = critical_fugacity(max_degree)
        if not 0 <= lam <= lc * (1 + CRITICAL_RTOL):
            raise ValueError(f"fugacity {lam} outside [0, lambda_c={lc}]")
        return cls(max_degree, max(0.0, 1.0 - lam / lc))

    @property
    def d(self) -> int:
        return self.max_degree - 1

    @property
    def lambda_c(self) -> float:
        return critical_fugacity(self.max_degree)

    @property
    def lam(self) -> float:
        return (1.0 - self.delta) * self.lambda_c


def tree_recurrence(d: int, lam: float, x: float) -> float:
    """One step of the occupation recurrence ``lam(1-x)^d / (1 + lam(1-x)^d)``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    w = lam * (1.0 - x) ** d
    return w / (1.0 + w)


def iterate_recurrence(d: int, lam: float, x0: float, t: int) -> float:
    if t < 0:
        raise ValueError("number of iterations must be non-negative")
    x = x0
    for _ in range(t):
        x = tree_recurrence(d, lam, x)
    return x


def recurrence_orbit(d: int, lam: float, x0: float, t: int) -> list[float]:
    """``[F^(0)(x0), F^(1)(x0), ..., F^(t)(x0)]``."""
    out = [x0]
    for _ in range(t):
        out.append(tree_recurrence(d, lam, out[-1]))
    return out


@dataclass(frozen=True)
class FixedPointResult:
    x_hat: float
    residual: float
    iterations: int


def fixed_point_gap(d: int, lam: float, x: float) -> float:
    """``x / (1-x)^(d+1) - lam``: increasing in x, zero exactly at the fixed point."""
    if x >= 1.0:
        return math.inf
    return x / (1.0 - x) ** (d + 1) - lam


def fixed_point(d: int, lam: float) -> FixedPointResult:
    """Unique fixed point of the recurrence, by bisection on ``fixed_point_gap``.

    For ``lam <= lambda_c(d+1)`` the root lies in ``[0, 1/d]``; at the
    critical fugacity it is exactly ``1/d``.
    """
    _check_branching(d)
    _check_subcritical(d, lam)
    lo, hi = 0.0, 1.0 / d
    if fixed_point_gap(d, lam, hi) <= 0.0:
        # lam rounds to (or just above) lambda_c
        x = hi
        return FixedPointResult(x, abs(tree_recurrence(d, lam, x) - x), 0)
    steps = 0
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if fixed_point_gap(d, lam, mid) < 0.0:
            lo = mid
        else:
            hi = mid
        steps += 1
    x = 0.5 * (lo + hi)
    return FixedPointResult(x, abs(tree_recurrence(d, lam, x) - x), steps)


def si_upper_constant(params: HardcoreParams) -> tuple[float, float]:
    """``((1+x)/(1-d x), (2/delta)(1 + 2/(d-1)))`` with x the fixed point."""
    if not 0.0 < params.delta:
        raise ValueError("the constant diverges at delta = 0; need delta > 0")
    d = params.d
    x = fixed_point(d, params.lam).x_hat
    exact = (1.0 + x) / (1.0 - d * x)
    closed = (2.0 / params.delta) * (1.0 + 2.0 / (d - 1))
    return exact, closed


def tree_si_constant(d: int, lam: float) -> float:
    """``1/(1 - d x)``: the bound for trees whose vertices have at most d children."""
    x = fixed_point(d, lam).x_hat
    return 1.0 / (1.0 - d * x)


def fixed_point_upper_bound(d: int, delta: float) -> float:
    """Linear upper bound ``(1/d)(1 - (d-1) delta / (2d))`` on the fixed point."""
    _check_branching(d)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return (1.0 - (d - 1) * delta / (2.0 * d)) / d


def slack_of_fixed_point(d: int, x_hat: float) -> float:
    """Slack delta whose fixed point is ``x_hat``: inverse of the fixed-point map."""
    _check_branching(d)
    if not 0.0 <= x_hat <= 1.0 / d:
        raise ValueError(f"x_hat must lie in [0, 1/d], got {x_hat}")
    return 1.0 - x_hat / (1.0 - x_hat) ** (d + 1) / critical_fugacity(d + 1)


@dataclass(frozen=True)
class ProofFunctions:
    f: float
    g: float
    h: float
    a: float
    validity_lhs: float


def validity_term(d: int, lam: float, x):
    """``(d^2 x - 1) lam (1-x)^d``; accepts scalars or arrays. f is finite iff it is below 1."""
    x = np.asarray(x, dtype=float)
    out = (d * d * x - 1.0) * lam * (1.0 - x) ** d
    return float(out) if out.ndim == 0 else out


def proof_functions(d: int, lam: float, x: float, phi_star: float | None = None) -> ProofFunctions:
    """Evaluate the auxiliary functions of the tree influence bound at ``x``.

    ``a`` needs the supremum of the influence sum over trees with at most d
    children per vertex; it defaults to the proven value ``1/(1 - d x_hat)``.
    """
    _check_branching(d)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    w = lam * (1.0 - x) ** d
    validity = (d * d * x - 1.0) * w
    if validity >= 1.0:
        raise ZeroDivisionError(
            f"(d^2 x - 1) lam (1-x)^d = {validity} >= 1: f is unbounded (lam at or above critical?)")
    f = (1.0 + (d + 1) * w) / (1.0 - validity)
    g = math.inf if x == 1.0 else ((1.0 - x) ** (-d) + (d + 1) * lam) / (1.0 + d * x)
    h = fixed_point_gap(d, lam, x)
    if phi_star is None:
        phi_star = tree_si_constant(d, lam)
    occ = w / (1.0 + w)
    a = occ + d * x * occ * phi_star
    return ProofFunctions(f=f, g=g, h=h, a=a, validity_lhs=validity)


def inverse_f_identity_residual(d: int, lam: float, x: float) -> float:
    """``|1/f(x) - (1 - d lam / g(x))|``, zero up to rounding."""
    pf = proof_functions(d, lam, x, phi_star=0.0)
    return abs(1.0 / pf.f - (1.0 - d * lam / pf.g))


@dataclass(frozen=True)
class MixingBound:
    max_degree: int
    n: int
    rho: Fraction
    exponent: Fraction
    theta: Fraction
    log_integral: float             # log exp(int_0^theta K/(1-delta)), closed form
    log_integral_quadrature: float  # same, by numerical quadrature
    log_simplified_bound: float     # 24 rho + rho log 23 + rho log(n / rho)

    @property
    def integral_factor(self) -> float:
        return math.exp(self.log_integral)

    @property
    def quadrature_rel_error(self) -> float:
        return abs(math.expm1(self.log_integral_quadrature - self.log_integral))


def mixing_rho(max_degree: int) -> Fraction:
    """SI constant numerator: SI holds with ``rho/delta``, ``rho = 2(1 + 2/(D-2))``."""
    critical_fugacity(max_degree)
    return 2 * (1 + Fraction(2, max_degree - 2))


def mixing_exponent(max_degree: int) -> Fraction:
    """Polynomial exponent ``2 + rho = 4 + 4/(D-2)`` of the critical mixing bound."""
    return 2 + mixing_rho(max_degree)


def min_vertices_for_bound(max_degree: int) -> float:
    return float(mixing_rho(max_degree) / THETA)


def _si_profile(rho: float, n: int):
    def k_over(delta: float) -> float:
        k = n if delta <= 0 else min(rho / delta, n)
        return k / (1.0 - delta)
    return k_over


def mixing_bound(max_degree: int, n: int) -> MixingBound:
    """Exponent and integral factor of the critical mixing-time bound.

    With ``K(delta) = min(rho/delta, n)`` and ``theta = 23/24``, the integral
    ``int_0^theta K(delta)/(1-delta) d delta`` splits at ``rho/n`` into
    ``n log(n/(n-rho)) + rho log(theta/(1-theta)) + rho log((n-rho)/rho)``.
    Requires ``n >= rho/theta``.
    """
    rho = mixing_rho(max_degree)
    if n < rho / THETA:
        raise ValueError(f"n={n} is below the threshold rho/theta={float(rho / THETA):.4f}")
    r = float(rho)
    th = float(THETA)
    closed = n * math.log(n / (n - r)) + r * math.log(th / (1 - th)) + r * math.log((n - r) / r)
    simplified = 24 * r + r * math.log(23) + r * math.log(n / r)
    return MixingBound(max_degree=max_degree, n=n, rho=rho, exponent=2 + rho, theta=THETA,
                       log_integral=closed, log_integral_quadrature=mixing_integral_quadrature(max_degree, n),
                       log_simplified_bound=simplified)


def mixing_integral_quadrature(max_degree: int, n: int) -> float:
    """``int_0^theta min(rho/delta, n)/(1-delta)`` by adaptive quadrature of the raw integrand."""
    r = float(mixing_rho(max_degree))
    val, _ = integrate.quad(_si_profile(r, n), 0.0, float(THETA), points=[r / n],
                            epsabs=0, epsrel=1e-12, limit=500)
    return val
