"""Correlation gap kappa = (worst-case expectation) / (independent expectation)
for an instance, with the cost-sharing bound eta * beta * e/(e-1)."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Instance, ValidationError
from .distributions import independent_expectation_exact
from .worst_case import LP_TOL, worst_case_lp

GAP_BOUND_CONSTANT = math.e / (math.e - 1.0)
_ZERO_EPS = 1e-12
BOUND_TOL = 1e-6


@dataclass(frozen=True)
class GapReport:
    worst_value: float
    independent_value: float
    kappa: float | None
    undefined: bool = False
    bound: float | None = None
    bound_satisfied: bool | None = None

    def to_json(self) -> dict:
        return {
            "worst_value": self.worst_value,
            "independent_value": self.independent_value,
            "kappa": self.kappa,
            "undefined": self.undefined,
            "bound": self.bound,
            "bound_satisfied": self.bound_satisfied,
        }

    CSV_FIELDS = ("worst_value", "independent_value", "kappa", "undefined", "bound", "bound_satisfied")

    @staticmethod
    def csv_header() -> str:
        return ",".join(GapReport.CSV_FIELDS)

    def csv_row(self) -> str:
        def cell(v):
            return "" if v is None else repr(v) if isinstance(v, float) else str(v)

        return ",".join(cell(getattr(self, name)) for name in self.CSV_FIELDS)


def theoretical_bound(eta: float, beta: float) -> float:
    """The gap bound eta * beta * e/(e-1) for an (eta, beta) cost-sharing scheme."""
    if eta < 1.0 or beta < 1.0:
        raise ValidationError("eta and beta must both be >= 1")
    return eta * beta * GAP_BOUND_CONSTANT


def correlation_gap(
    inst: Instance,
    eta: float | None = None,
    beta: float | None = None,
    lp_tol: float = LP_TOL,
) -> GapReport:
    """kappa = L/I with L from the scenario LP and I by exact enumeration.

    When I is zero the ratio has no value: for the all-zero case (L also zero)
    kappa is reported as 1, otherwise as undefined -- never as NaN.
    """
    worst = worst_case_lp(inst, tol=lp_tol).value
    indep = independent_expectation_exact(inst.function, inst.marginals)

    if indep > _ZERO_EPS or indep < -_ZERO_EPS:
        kappa, undefined = worst / indep, False
    elif abs(worst) <= _ZERO_EPS:
        kappa, undefined = 1.0, False
    else:
        kappa, undefined = None, True

    bound = None
    bound_satisfied = None
    if eta is not None or beta is not None:
        bound = theoretical_bound(eta if eta is not None else 1.0, beta if beta is not None else 1.0)
        bound_satisfied = None if kappa is None else kappa <= bound + BOUND_TOL

    return GapReport(worst, indep, kappa, undefined, bound, bound_satisfied)
