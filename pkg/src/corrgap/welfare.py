"""Welfare of partitioning n goods among K players with one shared utility:
the exact optimum over all assignments, the upper bound K * (worst-case
expectation at marginals 1/K), and the exact expected welfare of assigning
each good independently and uniformly at random."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SetFunction, SizeCapError, ValidationError
from .distributions import independent_expectation_exact
from .worst_case import worst_case_lp
from .core import Instance

ASSIGNMENT_CAP = 10**7  # cap on K^n


def welfare_ip_optimum(f: SetFunction, k: int) -> float:
    """Maximum of sum_j f(block_j) over assignments of every good to exactly
    one of k players (blocks may be empty). Exhaustive via subset DP."""
    if k < 1:
        raise ValidationError("need at least one player")
    if k**f.n > ASSIGNMENT_CAP:
        raise SizeCapError(f"{k}^{f.n} assignments exceed cap {ASSIGNMENT_CAP}")
    values = f.values()
    best = values.copy()  # one player: the block is the whole ground subset
    for _ in range(k - 1):
        nxt = np.empty_like(best)
        for s in range(len(values)):
            acc = best[0] + values[s]  # give the new player everything in s
            t = s
            while t:
                acc = max(acc, best[t] + values[s & ~t])
                t = (t - 1) & s
            nxt[s] = acc
        best = nxt
    return float(best[-1])


def welfare_upper_bound(f: SetFunction, k: int) -> float:
    """k times the worst-case expectation at uniform marginals 1/k; an upper
    bound on the optimal welfare."""
    if k < 1:
        raise ValidationError("need at least one player")
    inst = Instance(f, [1.0 / k] * f.n)
    return k * worst_case_lp(inst).value


def rounding_value(f: SetFunction, k: int) -> float:
    """Exact expected welfare of assigning goods independently uniformly at
    random: each player's bundle is product-Bernoulli(1/k), so the total is
    k * E[f(S)] at marginals 1/k."""
    if k < 1:
        raise ValidationError("need at least one player")
    return k * independent_expectation_exact(f, [1.0 / k] * f.n)


@dataclass(frozen=True)
class WelfareReport:
    opt_ip: float
    upper_bound: float
    rounding_value: float
    ratio_rounding_over_opt: float
    ratio_opt_over_upper: float

    def to_json(self) -> dict:
        return {
            "opt_ip": self.opt_ip,
            "upper_bound": self.upper_bound,
            "rounding_value": self.rounding_value,
            "ratio_rounding_over_opt": self.ratio_rounding_over_opt,
            "ratio_opt_over_upper": self.ratio_opt_over_upper,
        }


def welfare_report(f: SetFunction, k: int) -> WelfareReport:
    opt = welfare_ip_optimum(f, k)
    upper = welfare_upper_bound(f, k)
    rounding = rounding_value(f, k)
    return WelfareReport(
        opt_ip=opt,
        upper_bound=upper,
        rounding_value=rounding,
        ratio_rounding_over_opt=rounding / opt if opt else float("nan"),
        ratio_opt_over_upper=opt / upper if upper else float("nan"),
    )
