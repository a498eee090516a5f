"""Return probabilities of simple random walk and the closed-form bounds built on them.

p_{2n} is read at the root from exact integer walk counts divided by Delta^{2n}.
Since the sequence p_{2n} is log-convex, rho_n = p_{2n}^{1/(2n)} is nondecreasing and
every rho_n is a lower bound on the spectral radius rho; 1 - rho_n is an upper bound
on the spectral bottom lambda. Nothing computed from a finite ball bounds lambda below.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

import numpy as np
import sympy

from .cayley import Ball
from .errors import InsufficientRadiusError, InvalidParameterError

logger = logging.getLogger(__name__)

PRECISION = 50
STATUS_EXACT = "exact"
STATUS_CONDITIONAL = "conditional"
STATUS_CONJECTURAL = "conjectural"
STATUS_UPPER_BOUND = "upper-bound"

Number = Union[int, float, Fraction, sympy.Expr]


def _log(p: Union[Fraction, float]) -> float:
    if isinstance(p, Fraction):
        return math.log(p.numerator) - math.log(p.denominator)
    return math.log(p)


@dataclass
class ReturnProbSeries:
    degree: int
    probabilities: List[Union[Fraction, float]]
    exact: List[bool]
    error_bounds: List[float]
    source: str = "ball"

    @property
    def max_half_time(self) -> int:
        return len(self.probabilities) - 1

    def rho(self, n: int) -> float:
        if n < 1:
            raise InvalidParameterError("rho_n needs n >= 1")
        return math.exp(_log(self.probabilities[n]) / (2 * n))

    def rho_estimates(self) -> List[float]:
        return [self.rho(n) for n in range(1, self.max_half_time + 1)]

    def lambda_upper_bounds(self) -> List[float]:
        return [1 - r for r in self.rho_estimates()]

    def rho_ratio_estimate(self) -> float:
        """sqrt(p_{2N} / p_{2N-2}); converges to rho faster than rho_N but certifies nothing."""
        N = self.max_half_time
        if N < 1:
            raise InvalidParameterError("ratio estimate needs N >= 1")
        return math.exp((_log(self.probabilities[N]) - _log(self.probabilities[N - 1])) / 2)

    def to_dict(self) -> Dict[str, Any]:
        rows = []
        for n, p in enumerate(self.probabilities):
            row = {"n": n, "p_2n": float(p), "exact": self.exact[n], "error_bound": self.error_bounds[n]}
            if isinstance(p, Fraction):
                row["p_2n_exact"] = f"{p.numerator}/{p.denominator}"
            if n >= 1:
                row["rho_n"] = self.rho(n)
                row["lambda_upper"] = 1 - row["rho_n"]
            rows.append(row)
        data = {"degree": self.degree, "source": self.source, "series": rows}
        if self.max_half_time >= 1:
            data["rho_lower_bound"] = self.rho(self.max_half_time)
            data["rho_ratio_estimate"] = self.rho_ratio_estimate()
        return data


def return_probabilities(b: Ball, N: int, exact_limit: int = 60) -> ReturnProbSeries:
    if N < 0:
        raise InvalidParameterError(f"N must be >= 0, got {N}")
    if b.radius < N:
        raise InsufficientRadiusError(f"Ball radius {b.radius} < N = {N}", {"radius": b.radius, "N": N})
    delta = b.degree
    counts = [0] * b.vertex_count
    counts[0] = 1
    probabilities: List[Union[Fraction, float]] = [Fraction(1)]
    exact = [True]
    errors = [0.0]

    t_exact = 2 * min(N, exact_limit)
    for t in range(1, t_exact + 1):
        reach = min(t, 2 * N - t)
        step = [0] * b.vertex_count
        for v in b.bfs_order:
            if b.distance[v] > reach:
                break
            step[v] = sum(counts[w] for w in b.nbrs[v])
        counts = step
        if t % 2 == 0:
            probabilities.append(Fraction(counts[0], delta ** t))
            exact.append(True)
            errors.append(0.0)

    if t_exact < 2 * N:
        scale = delta ** t_exact
        width = max(len(nb) for nb in b.nbrs)
        nbr_matrix = np.full((b.vertex_count, width), b.vertex_count, dtype=np.int64)
        for v, nb in enumerate(b.nbrs):
            nbr_matrix[v, :len(nb)] = nb
        current = np.array([c / scale for c in counts] + [0.0])
        eps = np.finfo(float).eps
        for t in range(t_exact + 1, 2 * N + 1):
            current[:-1] = current[nbr_matrix].sum(axis=1) / delta
            if t % 2 == 0:
                p = float(current[0])
                probabilities.append(p)
                exact.append(False)
                errors.append(p * (t - t_exact) * width * eps)
        logger.debug(f"Float continuation from t={t_exact} to t={2 * N}")
    return ReturnProbSeries(delta, probabilities, exact, errors, "ball")


def return_probabilities_tree(delta: int, N: int) -> ReturnProbSeries:
    """Exact p_{2n} on the Delta-regular tree through the distance-from-root chain."""
    if delta < 3:
        raise InvalidParameterError(f"tree degree must be >= 3, got {delta}")
    if N < 0:
        raise InvalidParameterError(f"N must be >= 0, got {N}")
    walks = [1]
    probabilities: List[Union[Fraction, float]] = [Fraction(1)]
    for t in range(1, 2 * N + 1):
        reach = min(t, 2 * N - t)
        step = [0] * (reach + 1)
        for d, w in enumerate(walks):
            if w == 0:
                continue
            if d == 0:
                if reach >= 1:
                    step[1] += w * delta
                continue
            if d - 1 <= reach:
                step[d - 1] += w
            if d + 1 <= reach:
                step[d + 1] += w * (delta - 1)
        walks = step
        if t % 2 == 0:
            probabilities.append(Fraction(walks[0], delta ** t))
    n = len(probabilities)
    return ReturnProbSeries(delta, probabilities, [True] * n, [0.0] * n, "tree-chain")


@dataclass
class LambdaEstimate:
    value: float
    half_time: int
    label: str = STATUS_UPPER_BOUND

    def to_dict(self) -> Dict[str, Any]:
        return {"lambda": self.value, "half_time": self.half_time, "label": self.label}


def lambda_estimate_from_ball(series: ReturnProbSeries) -> LambdaEstimate:
    N = series.max_half_time
    if N < 1:
        raise InvalidParameterError("Need N >= 1 to estimate lambda")
    return LambdaEstimate(1 - series.rho(N), N)


@dataclass
class ClosedForm:
    expr: sympy.Expr
    status: str = STATUS_EXACT
    inputs: Dict[str, Any] = field(default_factory=dict)

    @property
    def value(self) -> float:
        return float(sympy.N(self.expr, PRECISION))

    def to_dict(self) -> Dict[str, Any]:
        return {"expr": str(self.expr), "value": self.value, "status": self.status, "inputs": self.inputs}


def _sym(x: Number) -> sympy.Expr:
    if isinstance(x, Fraction):
        return sympy.Rational(x.numerator, x.denominator)
    return sympy.sympify(x)


def _require_delta(delta: int) -> None:
    if int(delta) != delta or delta < 3:
        raise InvalidParameterError(f"Delta must be an integer >= 3, got {delta}")


def lambda_tree(delta: int) -> ClosedForm:
    _require_delta(delta)
    d = sympy.Integer(delta)
    return ClosedForm(1 - 2 * sympy.sqrt(d - 1) / d, STATUS_EXACT, {"delta": delta})


def nonamenable_constant(delta: int) -> sympy.Rational:
    """c = Delta (Delta - 1) / (Delta - 2)^2."""
    if int(delta) != delta or delta <= 2:
        raise InvalidParameterError(f"c is undefined for Delta = {delta}")
    return sympy.Rational(delta * (delta - 1), (delta - 2) ** 2)


def girth_lambda_bound(delta: int, g: Optional[int]) -> ClosedForm:
    _require_delta(delta)
    if g is None or g == math.inf:
        raise InvalidParameterError("girth bound degenerates to lambda(T_Delta) for infinite girth")
    if int(g) != g or g < 3:
        raise InvalidParameterError(f"girth must be an integer >= 3, got {g}")
    d = sympy.Integer(delta)
    expr = lambda_tree(delta).expr - (d - 2) / (d * (d - 1) ** (int(g) + 2))
    return ClosedForm(expr, STATUS_EXACT, {"delta": delta, "girth": int(g)})


@dataclass
class SandwichReport:
    phi: float
    lam: float
    half_phi_squared: float
    cheeger_lower: float
    slacks: Dict[str, float]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(s >= -self.tolerance for s in self.slacks.values())

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "phi": self.phi, "lambda": self.lam,
                "half_phi_squared": self.half_phi_squared, "cheeger_lower": self.cheeger_lower,
                "slacks": self.slacks, "tolerance": self.tolerance}


def check_lambda_sandwich(phi: Number, lam: Number, tol: float = 1e-12) -> SandwichReport:
    """Evaluate phi^2 / 2 <= 1 - sqrt(1 - phi^2) <= lambda <= phi."""
    phi_s, lam_s = _sym(phi), _sym(lam)
    for name, x in (("phi", phi_s), ("lambda", lam_s)):
        value = float(sympy.N(x, PRECISION))
        if not 0 <= value <= 1:
            raise InvalidParameterError(f"{name} must lie in [0, 1], got {value}")
    half_sq = phi_s ** 2 / 2
    cheeger = 1 - sympy.sqrt(1 - phi_s ** 2)

    def slack(lo, hi) -> float:
        return float(sympy.N(hi - lo, PRECISION))

    slacks = {
        "half_phi_squared <= cheeger_lower": slack(half_sq, cheeger),
        "cheeger_lower <= lambda": slack(cheeger, lam_s),
        "lambda <= phi": slack(lam_s, phi_s),
    }
    return SandwichReport(float(sympy.N(phi_s, PRECISION)), float(sympy.N(lam_s, PRECISION)),
                          float(sympy.N(half_sq, PRECISION)), float(sympy.N(cheeger, PRECISION)), slacks, tol)


@dataclass
class BoundParams:
    delta: int
    lam: Number
    girth: Optional[int] = None
    const_c: Number = 1
    lam_status: str = STATUS_EXACT

    def validate(self) -> bool:
        try:
            assert int(self.delta) == self.delta and self.delta >= 3, "Delta must be an integer >= 3"
            lam = float(sympy.N(_sym(self.lam), PRECISION))
            assert 0 <= lam <= 1, "lambda must lie in [0, 1]"
            assert self.girth is None or self.girth >= 3, "girth must be >= 3"
            assert float(self.const_c) > 0, "C must be > 0"
            assert self.lam_status in (STATUS_EXACT, STATUS_CONDITIONAL, STATUS_CONJECTURAL), \
                "unknown lambda status"
            return True
        except AssertionError as e:
            logger.error(f"Bound parameters invalid: {e}")
            return False

    def to_dict(self) -> Dict[str, Any]:
        return {"delta": self.delta, "lambda": str(self.lam), "girth": self.girth,
                "const_c": str(self.const_c), "lambda_status": self.lam_status}


def _require_params(p: BoundParams) -> None:
    if not p.validate():
        raise InvalidParameterError("Invalid bound parameters", p.to_dict())


def mu_lower_nonamenable(p: BoundParams) -> ClosedForm:
    """(Delta - 1)^((1 + c lambda) / 2)."""
    _require_params(p)
    d = sympy.Integer(p.delta)
    c = nonamenable_constant(p.delta)
    expr = (d - 1) ** ((1 + c * _sym(p.lam)) / 2)
    if p.lam_status == STATUS_EXACT:
        status = STATUS_EXACT
    elif p.lam_status == STATUS_CONJECTURAL:
        status = STATUS_CONJECTURAL
        logger.warning("Lower bound on mu evaluated with an estimated lambda")
    else:
        status = STATUS_CONDITIONAL
    return ClosedForm(expr, status, {**p.to_dict(), "c": str(c)})


def mu_lower_girth(p: BoundParams) -> ClosedForm:
    """[1/(Delta - 1) + C log(1 + lambda^-2) / (g Delta)]^-1; the constant C is unspecified."""
    _require_params(p)
    lam = _sym(p.lam)
    if lam == 0:
        raise InvalidParameterError("lambda = 0 (amenable case): log(1 + lambda^-2) diverges")
    d = sympy.Integer(p.delta)
    if p.girth is None:
        expr = d - 1
    else:
        expr = 1 / (1 / (d - 1) + _sym(p.const_c) * sympy.log(1 + lam ** -2) / (sympy.Integer(p.girth) * d))
    status = STATUS_CONJECTURAL if p.lam_status == STATUS_CONJECTURAL else STATUS_CONDITIONAL
    return ClosedForm(expr, status, p.to_dict())


def mu_basic_bounds(delta: int) -> Dict[str, ClosedForm]:
    _require_delta(delta)
    d = sympy.Integer(delta)
    return {"lower": ClosedForm(sympy.sqrt(d - 1), STATUS_EXACT, {"delta": delta}),
            "upper": ClosedForm(d - 1, STATUS_EXACT, {"delta": delta})}
