"""Worst-case expectation of a set function over all joint distributions with
fixed marginals: the exact scenario LP

    max  sum_S alpha_S f(S)
    s.t. sum_{S : i in S} alpha_S = p_i   for each element i
         sum_S alpha_S = 1,  alpha >= 0

solved by primal simplex over all 2^n columns, plus the closed-form optimum
for supermodular f supported on the nested prefix sets of the p-descending
order. Both report the dual (gamma, lambda), machine-checkable via
verify_certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MAX_EXACT, Instance, SizeCapError
from .distributions import ScenarioDistribution, expectation_under, marginals_of

LP_TOL = 1e-9          # pivot / reduced-cost tolerance
CERT_TOL = 1e-6
_BLAND_AFTER = 25      # consecutive degenerate pivots before switching pricing
_REFACTOR_EVERY = 100


class SimplexStallError(RuntimeError):
    """Iteration cap hit: numerical trouble, never infeasibility (the product
    distribution is always feasible)."""


@dataclass(frozen=True)
class WorstCaseResult:
    value: float
    distribution: ScenarioDistribution
    dual_gamma: float
    dual_lambda: tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "distribution": self.distribution.to_json(),
            "gamma": self.dual_gamma,
            "lambda": list(self.dual_lambda),
        }


def descending_order(p) -> list[int]:
    """Element order by descending marginal, ties by ascending index."""
    return sorted(range(len(p)), key=lambda i: (-p[i], i))


def prefix_masks(order) -> list[int]:
    masks = []
    m = 0
    for i in order:
        m |= 1 << i
        masks.append(m)
    return masks


def _basis_matrix(basis: list[int], n: int) -> np.ndarray:
    cols = np.empty((n + 1, len(basis)))
    for k, mask in enumerate(basis):
        for i in range(n):
            cols[i, k] = mask >> i & 1
        cols[n, k] = 1.0
    return cols


def _simplex_max(values: np.ndarray, p: np.ndarray, tol: float, max_iter: int):
    """Maximise values @ alpha over the marginal polytope; returns
    (basis masks, basic solution, duals y) at optimality."""
    n = len(p)
    ncols = 1 << n
    masks = np.arange(ncols)
    rows = [((masks >> i) & 1).astype(np.float64) for i in range(n)]
    rows.append(np.ones(ncols))
    A = np.vstack(rows)
    b = np.append(p, 1.0)

    # The nested prefix sets of the p-descending order plus the empty set form
    # a (possibly degenerate) feasible basis for any marginals, so no phase 1.
    basis = [0] + prefix_masks(descending_order(p))
    binv = np.linalg.inv(_basis_matrix(basis, n))
    x_b = binv @ b
    x_b[x_b < 0] = 0.0

    bland = False
    degenerate_streak = 0
    since_refactor = 0
    iterations = 0

    def refactor():
        nonlocal binv, x_b, since_refactor
        binv = np.linalg.inv(_basis_matrix(basis, n))
        x_b = binv @ b
        x_b[x_b < 0] = 0.0
        since_refactor = 0

    while True:
        if iterations > max_iter:
            raise SimplexStallError(f"no optimum within {max_iter} pivots")
        c_b = values[basis]
        y = c_b @ binv
        reduced = values - y @ A
        if bland:
            candidates = np.nonzero(reduced > tol)[0]
            entering = int(candidates[0]) if len(candidates) else -1
        else:
            entering = int(np.argmax(reduced))
            if reduced[entering] <= tol:
                entering = -1
        if entering < 0:
            if since_refactor:
                refactor()
                continue  # confirm optimality against a fresh factorisation
            break
        d = binv @ A[:, entering]
        positive = d > tol
        if not positive.any():
            raise SimplexStallError("no pivot row found; tableau has drifted")
        ratios = x_b[positive] / d[positive]
        rows_pos = np.nonzero(positive)[0]
        theta = ratios.min()
        near = rows_pos[ratios <= theta + tol]
        leave = int(min(near, key=lambda r: basis[r]))  # Bland tie-break
        theta = x_b[leave] / d[leave]

        pivot_row = binv[leave] / d[leave]
        binv = binv - np.outer(d, pivot_row)
        binv[leave] = pivot_row
        x_b = x_b - theta * d
        x_b[leave] = theta
        x_b[x_b < 0] = 0.0
        basis[leave] = entering

        iterations += 1
        since_refactor += 1
        if theta <= tol:
            degenerate_streak += 1
            if degenerate_streak >= _BLAND_AFTER:
                bland = True
        else:
            degenerate_streak = 0
        if since_refactor >= _REFACTOR_EVERY:
            refactor()

    # Final values and duals from a fresh factorisation.
    B = _basis_matrix(basis, n)
    x_b = np.linalg.solve(B, b)
    x_b[x_b < 0] = 0.0
    y = np.linalg.solve(B.T, values[basis])
    return basis, x_b, y


def worst_case_lp(inst: Instance, tol: float = LP_TOL, max_iter: int | None = None) -> WorstCaseResult:
    """Optimal value, an optimal basic distribution (support <= n+1), and the
    optimal dual of the scenario LP."""
    n = inst.n
    if n > MAX_EXACT:
        raise SizeCapError(f"scenario LP needs n <= {MAX_EXACT}, got {n}")
    values = inst.function.values()
    p = np.asarray(inst.marginals)
    if max_iter is None:
        max_iter = 50 * (1 << n)
    basis, x_b, y = _simplex_max(values, p, tol, max_iter)
    dist = ScenarioDistribution(n, list(zip(basis, x_b.tolist())))
    value = float(values[basis] @ x_b)
    return WorstCaseResult(value, dist, float(y[n]), tuple(float(v) for v in y[:n]))


def supermodular_worst_case(inst: Instance) -> WorstCaseResult:
    """Closed-form optimum for supermodular f: sort elements by descending
    marginal (ties by index) with prefix sets S_1 c S_2 c ... c S_n; then

        Pr(S_n) = p_(n),  Pr(S_i) = p_(i) - p_(i+1),  Pr(empty) = 1 - p_(1)

    with greedy dual gamma = f(empty), lambda mapped to prefix marginals.
    The caller asserts supermodularity; the arithmetic itself is unchecked.
    """
    n = inst.n
    f = inst.function
    p = inst.marginals
    order = descending_order(p)
    prefixes = prefix_masks(order)
    sorted_p = [p[i] for i in order]

    support = [(0, 1.0 - sorted_p[0])]
    for k in range(n - 1):
        support.append((prefixes[k], sorted_p[k] - sorted_p[k + 1]))
    support.append((prefixes[-1], sorted_p[-1]))

    f_empty = f.value(0)
    prefix_values = [f.value(m) for m in prefixes]
    value = (1.0 - sorted_p[0]) * f_empty
    for k in range(n - 1):
        value += (sorted_p[k] - sorted_p[k + 1]) * prefix_values[k]
    value += sorted_p[-1] * prefix_values[-1]

    lam = [0.0] * n
    previous = f_empty
    for k, i in enumerate(order):
        lam[i] = prefix_values[k] - previous
        previous = prefix_values[k]

    dist = ScenarioDistribution(n, support)
    return WorstCaseResult(float(value), dist, float(f_empty), tuple(lam))


def verify_certificate(inst: Instance, result: WorstCaseResult, tol: float = CERT_TOL) -> bool:
    """Primal feasibility, dual feasibility over all 2^n scenarios, and
    primal-dual objective equality, each within tol."""
    n = inst.n
    if n > MAX_EXACT:
        raise SizeCapError(f"certificate scan needs n <= {MAX_EXACT}, got {n}")
    p = np.asarray(inst.marginals)
    lam = np.asarray(result.dual_lambda)

    if np.max(np.abs(marginals_of(result.distribution) - p)) > tol:
        return False
    if abs(sum(prob for _, prob in result.distribution.support) - 1.0) > tol:
        return False
    if abs(expectation_under(result.distribution, inst.function) - result.value) > tol:
        return False

    values = inst.function.values()
    masks = np.arange(1 << n)
    lam_sum = np.zeros(1 << n)
    for i in range(n):
        lam_sum[(masks >> i & 1) == 1] += lam[i]
    if np.max(values - lam_sum - result.dual_gamma) > tol:
        return False

    return abs(result.dual_gamma + float(p @ lam) - result.value) <= tol
