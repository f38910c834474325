"""Offspring laws and their probability generating functions."""

import logging
import math
from typing import Any

from pydantic import TypeAdapter, ValidationError

from arbor_rcm.errors import InvalidInputError
from arbor_rcm.models.law import LawSpec, OffspringLaw, ValidationReport

logger = logging.getLogger(__name__)

_law_spec_adapter: TypeAdapter = TypeAdapter(LawSpec)


def table(probs: list[float] | tuple[float, ...]) -> OffspringLaw:
    """Law from an explicit table, index = family size."""
    try:
        return OffspringLaw(probs=tuple(probs))
    except ValidationError as e:
        raise InvalidInputError(f"Invalid offspring law: {e.errors()[0]['msg']}") from e


def deterministic(m: int) -> OffspringLaw:
    """Every individual has exactly ``m`` children, G(x) = x^m."""
    if m < 1:
        raise InvalidInputError(f"m must be at least 1, got {m}")
    return table([0.0] * m + [1.0])


def binomial(m: int, p: float) -> OffspringLaw:
    """bin(m, p) family sizes: the open children of an m-ary vertex."""
    if m < 1 or not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"binomial law needs m >= 1 and p in [0,1], got m={m}, p={p}")
    return table([math.comb(m, k) * p**k * (1 - p) ** (m - k) for k in range(m + 1)])


def parse_law(data: dict[str, Any] | str) -> OffspringLaw:
    """Build a law from its JSON form (dict or JSON text)."""
    try:
        if isinstance(data, str):
            spec = _law_spec_adapter.validate_json(data)
        else:
            spec = _law_spec_adapter.validate_python(data)
    except ValidationError as e:
        raise InvalidInputError(f"Malformed law: {e.errors()[0]['msg']}") from e
    if spec.kind == "deterministic":
        return deterministic(spec.m)
    return table(spec.probs)


def eval(law: OffspringLaw, x: float, order: int = 0) -> float:  # noqa: A001
    """G(x), G'(x) or G''(x) by Horner's scheme."""
    if not 0.0 <= x <= 1.0:
        raise InvalidInputError(f"x={x} outside [0,1]")
    if order not in (0, 1, 2):
        raise InvalidInputError(f"order must be 0, 1 or 2, got {order}")

    probs = law.probs
    acc = 0.0
    for k in range(len(probs) - 1, order - 1, -1):
        coef = probs[k]
        if order == 1:
            coef *= k
        elif order == 2:
            coef *= k * (k - 1)
        acc = acc * x + coef
    return acc


def mean(law: OffspringLaw) -> float:
    return law.mean


def validate(law: OffspringLaw, strict: bool = True) -> ValidationReport:
    """Check the standing assumptions: G(0) = 0 (strict only) and 1 < G'(1) < inf."""
    violations = []
    total = math.fsum(law.probs)
    if abs(total - 1.0) > 1e-12:
        violations.append(f"probabilities sum to {total}, not 1")
    if strict and law.probs[0] > 0.0:
        violations.append(f"G(0) = p_0 = {law.probs[0]} is not 0")
    mu = law.mean
    if not math.isfinite(mu):
        violations.append("mean family size is not finite")
    elif mu <= 1.0:
        violations.append(f"mean family size {mu} is not > 1")
    return ValidationReport(ok=not violations, violations=violations)


def require_valid(law: OffspringLaw, strict: bool = False) -> None:
    """Raise InvalidInputError when ``validate`` reports a violation."""
    report = validate(law, strict=strict)
    if not report.ok:
        raise InvalidInputError(f"Invalid offspring law: {'; '.join(report.violations)}")


def extinction_probability(law: OffspringLaw, tol: float = 1e-12) -> float:
    """Smallest root of eta = G(eta) in [0,1]; 0 for strict laws."""
    if law.probs[0] == 0.0:
        return 0.0
    if law.mean <= 1.0:
        return 1.0
    # increasing iteration from 0 converges to the smallest fixed point
    eta = 0.0
    for _ in range(100_000):
        nxt = eval(law, eta)
        if nxt - eta < tol:
            return nxt
        eta = nxt
    logger.warning(f"Extinction iteration hit its cap, last change above {tol}")
    return eta
