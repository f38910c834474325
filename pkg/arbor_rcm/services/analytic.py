"""Fixed points, thresholds and critical curves of the branching quantities.

Every root here is found the same way: a monotone iteration brackets it and
``scipy.optimize.bisect`` polishes it. All maps involved are monotone or
convex on their brackets, so the bracket always holds a sign change.
"""

import logging
from collections.abc import Callable, Iterable

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from arbor_rcm.config import get_settings
from arbor_rcm.errors import ConvergenceError, InvalidInputError
from arbor_rcm.models.law import OffspringLaw
from arbor_rcm.models.results import AttachmentResult, CriticalCurvePoint, FixedPointResult, UniquenessRegime
from arbor_rcm.services import pgf
from arbor_rcm.services.reduction import series_reduce

logger = logging.getLogger(__name__)

# iterations only bracket a root; bisection does the rest
ITERATION_CAP = 1000
# p grid used to bracket the double-root condition of the wired threshold
P_SCAN = np.linspace(1e-3, 1 - 1e-3, 999)
# G'(1 - p theta) within this of 1 counts as the threshold itself
THRESHOLD_SLACK = 1e-9
# theta accuracy inside f_p and the p_G search
THETA_POLISH_TOL = 1e-14
# p_G is bisected at least this finely whatever critical_tol says
P_G_XTOL = 1e-12


def _value_tol(tol: float | None) -> float:
    return get_settings().value_tol if tol is None else tol


def _critical_tol(tol: float | None) -> float:
    return get_settings().critical_tol if tol is None else tol


def _check_p(p: float, upper_open: bool = False) -> None:
    if not 0.0 <= p <= 1.0 or (upper_open and p >= 1.0):
        bound = "[0,1)" if upper_open else "[0,1]"
        raise InvalidInputError(f"p={p} is not in {bound}")


def _check_q(q: float, minimum: float = 0.0) -> None:
    if minimum > 0.0 and q < minimum:
        raise InvalidInputError(f"q={q} must be at least {minimum}")
    if q <= 0.0:
        raise InvalidInputError(f"q={q} must be positive")


def _check_m(m: int) -> None:
    if m < 2:
        raise InvalidInputError(f"m={m} must be at least 2")


def _bracket_below(h: Callable[[float], float], hi: float, step: float) -> float:
    """Find lo < hi with h(lo) >= 0, given h(hi) <= 0 and h > 0 just above the root.

    The step below ``hi`` doubles; once it would cross 0, ``hi`` is halved
    instead, so a root close to 0 is never jumped over.
    """
    lo = hi - step
    while lo > 0.0 and h(lo) < 0.0:
        step *= 2.0
        lo = hi - step
    if lo > 0.0:
        return lo
    lo = hi
    for _ in range(1100):
        lo /= 2.0
        if h(lo) > 0.0:
            return lo
    return 0.0


def _polish(h: Callable[[float], float], lo: float, hi: float, xtol: float) -> float:
    """Bisect a sign change of h on [lo, hi]."""
    flo, fhi = h(lo), h(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ConvergenceError(f"no sign change on [{lo}, {hi}]")
    return bisect(h, lo, hi, xtol=max(xtol, 4 * np.finfo(float).eps), maxiter=500)


def survival_theta(law: OffspringLaw, p: float, tol: float | None = None) -> FixedPointResult:
    """Largest root of theta = 1 - G(1 - p theta): the probability of an infinite open path."""
    pgf.require_valid(law)
    _check_p(p)
    tol = _value_tol(tol)

    mu = law.mean
    if p * mu <= 1.0:
        return FixedPointResult(value=0.0, iterations=0, residual=0.0, bracket=(0.0, 0.0))

    def step(t: float) -> float:
        return 1.0 - pgf.eval(law, 1.0 - p * t)

    current = 1.0
    change = 1.0
    iterations = 0
    while iterations < ITERATION_CAP:
        nxt = step(current)
        iterations += 1
        change = current - nxt
        current = nxt
        if change < tol:
            break

    def h(t: float) -> float:
        return step(t) - t

    hi = current
    if h(hi) >= 0.0:
        # converged onto the root up to rounding
        return FixedPointResult(value=hi, iterations=iterations, residual=abs(h(hi)), bracket=(hi, hi))
    lo = _bracket_below(h, hi, max(change, tol))
    value = _polish(h, lo, hi, tol / (2.0 * (1.0 + p * mu)))
    logger.debug(f"theta(p={p}) = {value} after {iterations} iteration(s), bracket [{lo}, {hi}]")
    return FixedPointResult(value=value, iterations=iterations, residual=abs(h(value)), bracket=(lo, hi))


def theta(law: OffspringLaw, p: float, tol: float | None = None) -> float:
    return survival_theta(law, p, tol).value


def extinction_eta(law: OffspringLaw, p: float, tol: float | None = None) -> float:
    """eta = 1 - theta, the smallest root of eta = G(1 - p + p eta)."""
    return 1.0 - theta(law, p, tol)


def f_p(law: OffspringLaw, p: float, alpha: float, theta_value: float | None = None) -> float:
    """The map alpha -> theta + G(alpha - p theta) on [p theta, 1], clipped to [0, 1]."""
    t = theta(law, p, THETA_POLISH_TOL) if theta_value is None else theta_value
    return min(1.0, max(0.0, t + pgf.eval(law, min(1.0, max(0.0, alpha - p * t)))))


def beta(law: OffspringLaw, tol: float | None = None) -> float:
    """Unique beta in (0,1) with G'(beta) = 1."""
    pgf.require_valid(law)
    return _polish(lambda x: pgf.eval(law, x, 1) - 1.0, 0.0, 1.0, _value_tol(tol))


def _gamma_is_one(law: OffspringLaw, p: float, t: float) -> bool:
    # theta carries an error of order value_tol; the slack absorbs it at p = p_G
    return pgf.eval(law, 1.0 - p * t, 1) <= 1.0 + THRESHOLD_SLACK


def black_gamma(law: OffspringLaw, p: float, tol: float | None = None) -> FixedPointResult:
    """Smallest root of gamma = theta + G(gamma - p theta) in [p theta, 1]."""
    pgf.require_valid(law)
    _check_p(p, upper_open=True)
    tol = _value_tol(tol)
    t = theta(law, p, tol)

    if _gamma_is_one(law, p, t):
        return FixedPointResult(value=1.0, iterations=0, residual=0.0, bracket=(1.0, 1.0))

    def g(alpha: float) -> float:
        return f_p(law, p, alpha, t) - alpha

    gamma = t
    iterations = 0
    while iterations < ITERATION_CAP:
        nxt = f_p(law, p, gamma, t)
        iterations += 1
        change = nxt - gamma
        gamma = nxt
        if change < tol:
            break
    else:
        logger.warning(f"gamma iteration at p={p} hit its cap; near the threshold convergence is slow")

    lo = gamma
    hi = beta(law) + p * t
    value = lo if g(lo) <= 0.0 else _polish(g, lo, hi, tol / 2.0)
    value = max(value, t)
    logger.debug(f"gamma(p={p}) = {value} after {iterations} iteration(s)")
    return FixedPointResult(value=value, iterations=iterations, residual=abs(g(value)), bracket=(lo, hi))


def gamma_k(law: OffspringLaw, p: float, k: int) -> float:
    """k-th iterate of f_p started at gamma(0) = theta."""
    pgf.require_valid(law)
    _check_p(p)
    if k < 0:
        raise InvalidInputError(f"k={k} must be non-negative")
    t = theta(law, p, THETA_POLISH_TOL)
    value = t
    for _ in range(k):
        value = f_p(law, p, value, t)
    return value


def fp_roots(law: OffspringLaw, p: float, tol: float | None = None) -> list[float]:
    """Roots of alpha = f_p(alpha) in [p theta, 1]: {1} or {gamma, 1}."""
    gamma = black_gamma(law, p, tol).value
    return [1.0] if gamma >= 1.0 else [gamma, 1.0]


def p_G(law: OffspringLaw, tol: float | None = None) -> float:  # noqa: N802
    """The p at which G'(1 - p theta(p)) = 1, i.e. the least p with gamma = 1."""
    pgf.require_valid(law, strict=True)
    xtol = min(_critical_tol(tol), P_G_XTOL)

    def h(p: float) -> float:
        return pgf.eval(law, 1.0 - p * theta(law, p, THETA_POLISH_TOL), 1) - 1.0

    return _polish(h, 1.0 / law.mean, 1.0, xtol)


def maximize_one_minus_p_theta(law: OffspringLaw, tol: float | None = None) -> float:
    """Maximizer of (1 - p) theta(p); coincides with p_G."""
    pgf.require_valid(law, strict=True)
    result = minimize_scalar(
        lambda p: -(1.0 - p) * theta(law, p),
        bounds=(1.0 / law.mean, 1.0),
        method="bounded",
        options={"xatol": _critical_tol(tol)},
    )
    return float(result.x)


def p_b(m: int) -> float:
    """Closed form of p_G for the m-ary tree."""
    _check_m(m)
    return (1.0 - m ** (-1.0 / (m - 1))) / (1.0 - m ** (-m / (m - 1)))


def pi(p: float, q: float) -> float:
    """Density of the product measure matching single-edge conditionals."""
    _check_p(p)
    _check_q(q)
    return p / (p + q * (1.0 - p))


def p_c0(m: int, q: float) -> float:
    """Free critical point: pi(p, q) = 1/m."""
    _check_m(m)
    _check_q(q)
    return q / (m + q - 1.0)


def _double_root_margin(m: int, q: float, p: float) -> float:
    """F at its first interior critical point, or -1 when F has none in (0,1).

    F(x) = (q-1)x^(m+1) + c x^m + x/(1-p) - 1 with c = 1 - p/(1-p) - q has
    F(0) = -1 and F(1) = 0; F' starts positive, decreases until the
    inflection x0 and increases after it.
    """
    a = 1.0 / (1.0 - p)
    c = 1.0 - p * a - q

    def F(x: float) -> float:  # noqa: N802
        return (q - 1.0) * x ** (m + 1) + c * x**m + a * x - 1.0

    def dF(x: float) -> float:  # noqa: N802
        return (m + 1) * (q - 1.0) * x**m + m * c * x ** (m - 1) + a

    x0 = -(m - 1) * c / ((m + 1) * (q - 1.0))
    right = min(x0, 1.0)
    if right <= 0.0 or dF(right) >= 0.0:
        return -1.0
    x1 = bisect(dF, 0.0, right, xtol=1e-15, maxiter=500)
    return F(x1)


def p_c1(m: int, q: float, tol: float | None = None) -> float:
    """Wired critical point: p_c0 for q <= 2, else the double-root value U_q."""
    _check_m(m)
    _check_q(q, minimum=1.0)
    tol = _critical_tol(tol)
    if q <= 2.0:
        return p_c0(m, q)

    margins = [_double_root_margin(m, q, p) for p in P_SCAN]
    for i in range(1, len(P_SCAN)):
        if margins[i - 1] <= 0.0 < margins[i]:
            value = _polish(lambda p: _double_root_margin(m, q, p), P_SCAN[i - 1], P_SCAN[i], tol / 4.0)
            logger.debug(f"U_q for m={m}, q={q}: {value}")
            return float(value)
    raise ConvergenceError(f"no double root of the wired polynomial bracketed for m={m}, q={q}")


def finite_depth_theta(law: OffspringLaw, p: float, D: int) -> float:  # noqa: N803
    """Probability of an open path from a vertex down D generations."""
    pgf.require_valid(law)
    _check_p(p)
    if D < 0:
        raise InvalidInputError(f"D={D} must be non-negative")
    value = 1.0
    for _ in range(D):
        value = 1.0 - pgf.eval(law, 1.0 - p * value)
    return value


def _attachment_step(m: int, p: float, q: float, r: float) -> float:
    return 1.0 - (1.0 - series_reduce(p, r, q)) ** m


def effective_attachment(m: int, p: float, q: float, levels: int = 1, tol: float = 1e-12) -> AttachmentResult:
    """Effective parameter of a vertex joined to a wired boundary j levels below.

    r(1) = 1 - (1-p)^m, r(j+1) = 1 - (1 - series(p, r(j), q))^m; the
    sequence decreases to the largest fixed point p_inf.
    """
    _check_m(m)
    _check_q(q, minimum=1.0)
    if not 0.0 < p < 1.0:
        raise InvalidInputError(f"p={p} is not in (0,1)")
    if levels < 1:
        raise InvalidInputError(f"levels={levels} must be at least 1")

    sequence = []
    r = 1.0
    for _ in range(levels):
        r = _attachment_step(m, p, q, r)
        sequence.append(r)

    r = sequence[0]
    change = 1.0
    iterations = 1
    while iterations < ITERATION_CAP:
        nxt = _attachment_step(m, p, q, r)
        iterations += 1
        change = r - nxt
        r = nxt
        if change < tol:
            break

    def g(x: float) -> float:
        return _attachment_step(m, p, q, x) - x

    if g(r) >= 0.0:
        p_inf = r
    else:
        p_inf = _polish(g, _bracket_below(g, r, max(change, tol)), r, tol)
    logger.debug(f"p_inf(m={m}, p={p}, q={q}) = {p_inf} after {iterations} iteration(s)")
    return AttachmentResult(m=m, p=p, q=q, sequence=sequence, p_inf=p_inf, iterations=iterations)


def attachment_parameter(m: int, p: float, q: float, levels: int) -> float:
    """r(levels), with r(0) = 1 (an edge straight into the boundary)."""
    if levels == 0:
        return 1.0
    return effective_attachment(m, p, q, levels).sequence[-1]


def _two_point(m: int, p: float, q: float, r: float) -> float:
    s = series_reduce(p, r, q)
    closed = (1.0 - s) ** (m + 1)
    joined = 1.0 - closed
    return joined / (joined + q * closed)


def theta1_finite(m: int, p: float, q: float, n: int) -> float:
    """P(root joined to the wired boundary of the depth-n box)."""
    _check_m(m)
    _check_q(q, minimum=1.0)
    _check_p(p)
    if n < 1:
        raise InvalidInputError(f"n={n} must be at least 1")
    if p in (0.0, 1.0):
        return p
    return _two_point(m, p, q, attachment_parameter(m, p, q, n - 1))


def theta_wired(m: int, p: float, q: float) -> float:
    """Large-box limit of theta1_finite."""
    _check_p(p)
    if p in (0.0, 1.0):
        return p
    return _two_point(m, p, q, effective_attachment(m, p, q).p_inf)


def theta_free(m: int, p: float, q: float) -> float:
    """Survival of the root cluster under the product measure of density pi."""
    _check_m(m)
    density = pi(p, q)
    # below the root the open cluster is a Galton-Watson tree with bin(m, pi) offspring
    t = theta(pgf.binomial(m, density), 1.0)
    return 1.0 - (1.0 - density * t) ** (m + 1)


def critical_curve(m: int, qs: Iterable[float], tol: float | None = None) -> list[CriticalCurvePoint]:
    """p_c0, p_c1, p_b and p_G of the m-ary tree for every q."""
    tol = _critical_tol(tol)
    pb = p_b(m)
    pg = p_G(pgf.deterministic(m), tol)
    points = []
    for q in qs:
        points.append(CriticalCurvePoint(q=q, m=m, p=p_c0(m, q), kind="pc0", tol=0.0))
        points.append(CriticalCurvePoint(q=q, m=m, p=p_c1(m, q, tol), kind="pc1", tol=tol))
        points.append(CriticalCurvePoint(q=q, m=m, p=pb, kind="pb", tol=0.0))
        points.append(CriticalCurvePoint(q=q, m=m, p=pg, kind="pG", tol=tol))
    return points


def uniqueness_regime(m: int, p: float, q: float) -> UniquenessRegime:
    """Which uniqueness criteria hold at (p, q)."""
    _check_q(q, minimum=1.0)
    density = pi(p, q)
    pb = p_b(m)
    wired_theta = theta_wired(m, p, q)
    pc1 = p_c1(m, q)
    wired_percolates = p > pc1 if q <= 2.0 else p >= pc1
    return UniquenessRegime(
        m=m,
        p=p,
        q=q,
        pi=density,
        p_b=pb,
        open_relations_unique=density >= pb,
        theta_wired=wired_theta,
        product_measure_unique=not wired_percolates,
    )
