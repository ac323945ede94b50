"""Chernoff-Hellinger divergence, recovery regimes and the block-parameter solver."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from itertools import product

import numpy as np

from .generator import ModelParams
from .geometry import REL_TOL, unit_ball_volume

SAFETY = 0.99
ROOT_TOL = 1e-12
_GOLDEN = (math.sqrt(5) - 1) / 2


class InfeasibleParameters(ValueError):
    """No positive chi/delta satisfies the block conditions for these parameters."""


class Regime(enum.Enum):
    ACHIEVABLE = "Achievable"
    IMPOSSIBLE_DIVERGENCE = "ImpossibleDivergence"
    IMPOSSIBLE_SPARSE_D1 = "ImpossibleSparseD1"
    BOUNDARY = "Boundary"


def ch_gap(a: float, b: float) -> float:
    """``1 - sqrt(ab) - sqrt((1-a)(1-b))``; symmetric in (a, b) bit for bit."""
    return 1.0 - math.sqrt(a * b) - math.sqrt((1.0 - a) * (1.0 - b))


def ch_value(params: ModelParams) -> float:
    """``lambda * nu_d * ch_gap(a, b)``: the exact-recovery margin in units of log n."""
    return params.lam * unit_ball_volume(params.d) * ch_gap(params.a, params.b)


def profile_intensities(lam: float, a: float, b: float, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-log-n Poisson means of the degree profile given label +1 (x) and -1 (y)."""
    c = lam * unit_ball_volume(d) / 2
    x = c * np.array([a, 1 - a, b, 1 - b])
    y = c * np.array([b, 1 - b, a, 1 - a])
    return x, y


def ch_divergence_t(x, y, t: float) -> float:
    """``D_t(x||y) = sum(t x + (1-t) y - x^t y^(1-t))``.

    A product term vanishes when its base is 0 and its exponent is positive;
    ``0**0`` is taken as 1.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("intensity vectors must be nonnegative")
    with np.errstate(divide="ignore", invalid="ignore"):
        prod = np.power(x, t) * np.power(y, 1.0 - t)
    prod = np.where(((x == 0) & (t > 0)) | ((y == 0) & (t < 1)), 0.0, prod)
    return float(np.sum(t * x + (1.0 - t) * y - prod))


def ch_divergence_plus(x, y, tol: float = ROOT_TOL) -> tuple[float, float]:
    """``max_t D_t(x||y)`` by golden-section search (D_t is concave in t).

    Returns ``(value, argmax)``. When ``D_t`` is flat (``x == y``, or equal up
    to rounding so that the maximum is below float noise) the argmax is
    reported as 1/2.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.array_equal(x, y):
        return 0.0, 0.5
    noise = 1e-12 * max(1.0, float(np.sum(x) + np.sum(y)))
    f = lambda t: ch_divergence_t(x, y, t)  # noqa: E731
    lo, hi = 0.0, 1.0
    c = hi - _GOLDEN * (hi - lo)
    e = lo + _GOLDEN * (hi - lo)
    fc, fe = f(c), f(e)
    while hi - lo > tol:
        if fc >= fe:
            hi, e, fe = e, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, e, fe
            e = lo + _GOLDEN * (hi - lo)
            fe = f(e)
    t = (lo + hi) / 2
    best = (f(t), t)
    for end in (0.0, 1.0):
        fe = f(end)
        if fe > best[0] + noise:
            best = (fe, end)
    if best[0] <= noise:
        return max(best[0], 0.0), 0.5
    return best


def classify_regime(params: ModelParams) -> Regime:
    if params.d == 1 and params.lam < 1:
        return Regime.IMPOSSIBLE_SPARSE_D1
    value = ch_value(params)
    if abs(value - 1.0) <= 1e-12:
        return Regime.BOUNDARY
    if value < 1.0:
        return Regime.IMPOSSIBLE_DIVERGENCE
    if params.d >= 2 or params.lam > 1:
        return Regime.ACHIEVABLE
    return Regime.BOUNDARY


@dataclass(frozen=True)
class Threshold:
    lambda_star: float
    effective: float  # includes the lambda > 1 requirement when d == 1


def threshold_curve(a: float, b: float, d: int) -> Threshold:
    """Smallest intensity above which exact recovery is achievable."""
    gap = ch_gap(a, b)
    if a == b or gap <= 0:
        return Threshold(math.inf, math.inf)
    star = 1.0 / (unit_ball_volume(d) * gap)
    return Threshold(star, max(star, 1.0) if d == 1 else star)


def _bisect(f, lo: float, hi: float, tol: float = ROOT_TOL) -> float:
    """Root of ``f`` on ``[lo, hi]`` given ``f(lo)`` and ``f(hi)`` of opposite sign (or zero)."""
    flo = f(lo)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def occupancy_gamma(mass: float) -> float:
    """Root ``gamma`` in ``(0, mass)`` of ``g(x) = x (log x - log mass) + mass - x = (1 + mass) / 2``.

    ``mass`` is the expected count per log n of the region in question. ``g``
    decreases from ``mass`` to 0 on the interval, so a root exists iff
    ``mass > 1``.
    """
    if mass <= 1:
        raise InfeasibleParameters(f"expected count per log n must exceed 1, got {mass}")
    target = (1 + mass) / 2

    def h(x):
        return x * (math.log(x) - math.log(mass)) + mass - x - target

    return _bisect(h, 1e-300, mass)


def chi_upper_bounds(lam: float, d: int) -> tuple[float, float]:
    """Suprema of chi allowed by the two block-size conditions.

    First: ``nu_d (1 - 3 sqrt(d) chi^(1/d) / 2)^d >= (nu_d + 1/lam) / 2``, found
    by bisection. Second: ``chi < (base - 1/lam) / 2`` with ``base`` 1 for d = 1
    and ``nu_d`` otherwise.
    """
    nu = unit_ball_volume(d)
    rhs = (nu + 1 / lam) / 2

    def lhs(chi):
        return nu * max(0.0, 1 - 3 * math.sqrt(d) * chi ** (1 / d) / 2) ** d - rhs

    if lhs(0.0) <= 0:
        first = 0.0
    else:
        hi = (2 / (3 * math.sqrt(d))) ** d  # lhs(hi) = -rhs < 0
        first = _bisect(lhs, 0.0, hi)
    base = 1.0 if d == 1 else nu
    second = (base - 1 / lam) / 2
    return first, second


def containment_count(chi: float, d: int) -> int:
    """Blocks other than the centre fully inside the ball of radius ``R_d (log n)^(1/d)``.

    In units of the block side the ball radius is ``R_d / chi^(1/d)`` and a
    block at offset ``o`` is inside iff its far corner ``|o| + 1/2`` is.
    """
    s = chi ** (1 / d)
    radius = (1 - math.sqrt(d) * s / 2) / s
    if radius <= 0:
        return 0
    reach = int(math.floor(radius))
    count = 0
    for o in product(range(-reach, reach + 1), repeat=d):
        if any(o) and math.sqrt(sum((abs(k) + 0.5) ** 2 for k in o)) <= radius * (1 + REL_TOL):
            count += 1
    return count


def rho_coefficient(a: float, b: float) -> float:
    """``2 (|log(a/b)| + |log((1-a)/(1-b))|)`` with the tau clamp applied to a and b."""
    from .phase2 import clamp_prob

    a, b = clamp_prob(a), clamp_prob(b)
    return 2 * (abs(math.log(a / b)) + abs(math.log((1 - a) / (1 - b))))


@dataclass(frozen=True)
class DerivedParams:
    chi: float
    delta: float
    M: float
    eta: float
    rho: float
    kappa: float
    gamma_prime: float
    R_d: float
    K: int
    chi_practical: float
    ch_value: float

    def as_dict(self) -> dict:
        return asdict(self)


def kappa_bound(chi: float, d: int) -> float:
    return unit_ball_volume(d) * (1 + math.sqrt(d) * chi ** (1 / d)) ** d / chi


def delta_bound(lam: float, d: int, chi: float) -> tuple[float, float]:
    """``(bound, gamma)``: delta must stay below ``bound`` for visibility connectivity.

    d = 1 uses the mass of the visible blocks to the left, ``(floor(1/chi) - 1) chi``;
    d >= 2 uses the lower bound ``nu_d R'^d - chi`` on the mass of the blocks
    around a block, with ``R' = 1 - 3 sqrt(d) chi^(1/d) / 2``.
    """
    nu = unit_ball_volume(d)
    if d == 1:
        mass = (math.floor(1 / chi + REL_TOL) - 1) * chi
        gamma = occupancy_gamma(lam * mass)
        return gamma * chi, gamma
    r_inner = 1 - 3 * math.sqrt(d) * chi ** (1 / d) / 2
    mass = nu * r_inner**d - chi
    gamma = occupancy_gamma(lam * mass)
    r_d = 1 - math.sqrt(d) * chi ** (1 / d) / 2
    return gamma * chi / (nu * r_d**d), gamma


def solve_parameters(params: ModelParams, n: float | None = None) -> DerivedParams:
    """Concrete (chi, delta, M, ...) satisfying the block conditions with 0.99 safety.

    Raises ``InfeasibleParameters`` when no positive chi or delta exists (for
    instance below the threshold, where the error budget eta is not positive).
    """
    n = params.n if n is None else n
    lam, d = params.lam, params.d
    first, second = chi_upper_bounds(lam, d)
    if first <= 0 or second <= 0:
        raise InfeasibleParameters(f"no positive chi for lambda={lam}, d={d}")
    chi = SAFETY * min(first, second)
    bound, gamma = delta_bound(lam, d, chi)
    value = ch_value(params)
    rho = rho_coefficient(params.a, params.b)
    eta = (value - 1) / rho if rho > 0 else 0.0
    kappa = kappa_bound(chi, d)
    if eta <= 0 or bound <= 0:
        raise InfeasibleParameters(f"no positive delta: eta={eta}, occupancy bound={bound}")
    delta = SAFETY * min(bound, eta / kappa)
    M = 5 / ((params.a - params.b) ** 2 * delta)
    r_d = 1 - math.sqrt(d) * chi ** (1 / d) / 2
    return DerivedParams(
        chi=chi,
        delta=delta,
        M=M,
        eta=eta,
        rho=rho,
        kappa=kappa,
        gamma_prime=gamma,
        R_d=r_d,
        K=containment_count(chi, d),
        chi_practical=practical_chi(params, n, delta),
        ch_value=value,
    )


def _disconnect_expectation(lam: float, n: float, d: int, chi: float, delta: float) -> float:
    """Rough count of occupancy gaps that would cut the block visibility graph.

    d = 1: windows of ``floor(1/chi) - 1`` consecutive unoccupied blocks.
    d >= 2: occupied blocks whose every visible block is unoccupied.
    """
    from scipy.stats import poisson

    from .geometry import visible_offsets

    logn = math.log(n)
    blocks = n / (chi * logn)
    p_un = float(poisson.cdf(math.floor(delta * logn), lam * chi * logn))
    if d == 1:
        reach = math.floor(1 / chi + REL_TOL) - 1
        if reach < 1:
            return math.inf
        return blocks * p_un**reach
    k = len(visible_offsets(chi, d))
    if k == 0:
        return math.inf
    return blocks * (1 - p_un) * p_un**k


def practical_chi(params: ModelParams, n: float | None = None, delta: float = 1e-9, budget: float = 0.01) -> float:
    """Largest block factor whose expected number of occupancy gaps stays under ``budget``.

    Candidates are ``1/k`` (d = 1, k >= 2) or a geometric ladder starting at
    the largest chi that keeps corner-adjacent blocks visible (d >= 2). Falls
    back to the candidate with the fewest expected gaps.
    """
    n = params.n if n is None else n
    d = params.d
    if d == 1:
        candidates = [1 / k for k in range(2, 65)]
    else:
        top = (2 * math.sqrt(d)) ** (-d)
        candidates = [top * 0.9**i for i in range(60)]
    scored = [(c, _disconnect_expectation(params.lam, n, d, c, delta)) for c in candidates]
    for c, e in scored:
        if e <= budget:
            return c
    return min(scored, key=lambda ce: ce[1])[0]
