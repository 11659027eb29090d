"""Ordered cost-sharing schemes chi(i, S, sigma_S): the incremental scheme for
a set function, exhaustive certification of budget balance, cross-monotonicity
and weak summability constants, and the lift of a scheme through a split map
(the first-appearing copy of an element carries its whole share).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Callable

from .core import SetFunction, SizeCapError, ValidationError, elements_of
from .split import SplitMap

CERTIFY_CAP = 6  # enumerates all subsets and all orderings of each
SHARE_TOL = 1e-9


@dataclass(frozen=True)
class OrderedSet:
    """A subset together with an ordering of exactly its elements."""

    mask: int
    order: tuple[int, ...]

    def __post_init__(self):
        seen = 0
        for i in self.order:
            bit = 1 << i
            if seen & bit or not self.mask & bit:
                raise ValidationError("ordering must list each element of the set exactly once")
            seen |= bit
        if seen != self.mask:
            raise ValidationError("ordering does not cover the set")

    @classmethod
    def from_order(cls, order) -> "OrderedSet":
        mask = 0
        for i in order:
            mask |= 1 << i
        return cls(mask, tuple(order))

    def restrict(self, mask: int) -> "OrderedSet":
        if mask & ~self.mask:
            raise ValidationError("restriction target is not a subset")
        return OrderedSet(mask, tuple(i for i in self.order if mask >> i & 1))


@dataclass(frozen=True)
class CostShareScheme:
    """Share oracle chi(i, ordered set containing i) with declared constants."""

    share: Callable[[int, OrderedSet], float]
    declared_eta: float = 1.0
    declared_beta: float = 1.0
    label: str = ""


def incremental_scheme(f: SetFunction) -> CostShareScheme:
    """chi(i, S, sigma) = f(first j elements) - f(first j-1) where i is j-th in
    sigma. Shares telescope to f(S) - f(empty); for submodular f this is a
    (1, 1) cross-monotone scheme."""

    def share(i: int, oset: OrderedSet) -> float:
        prefix = 0
        for j in oset.order:
            if j == i:
                return f.value(prefix | 1 << i) - f.value(prefix)
            prefix |= 1 << j
        raise ValidationError(f"element {i} not in the ordered set")

    return CostShareScheme(share, 1.0, 1.0, "incremental")


@dataclass(frozen=True)
class CertificationResult:
    """Exact constants of a scheme on a function, from full enumeration.

    eta_star / beta_star are the smallest constants making weak summability /
    budget balance hold over every subset and every ordering; math.inf marks an
    unbounded constant (e.g. positive shares on a zero-cost set). eta_star_chain
    is the weaker summability constant quantified only over orderings of the
    full ground set.
    """

    eta_star: float
    beta_star: float
    cross_monotone: bool
    eta_star_chain: float
    budget_upper_ok: bool

    def to_json(self) -> dict:
        def enc(v: float):
            return "unbounded" if math.isinf(v) else v

        return {
            "eta_star": enc(self.eta_star),
            "beta_star": enc(self.beta_star),
            "cross_monotone": self.cross_monotone,
            "eta_star_chain": enc(self.eta_star_chain),
            "budget_upper_ok": self.budget_upper_ok,
        }


def _guard_certify(n: int):
    if n > CERTIFY_CAP:
        raise SizeCapError(f"certification enumerates all orderings; needs n <= {CERTIFY_CAP}")


def certify(scheme: CostShareScheme, f: SetFunction, tol: float = SHARE_TOL) -> CertificationResult:
    """Smallest budget-balance and weak-summability constants of the scheme on
    f, plus exhaustive cross-monotonicity, over all subsets and orderings."""
    _guard_certify(f.n)
    n = f.n
    full = (1 << n) - 1
    values = [f.value(m) for m in range(1 << n)]

    share_cache: dict[tuple[int, tuple[int, ...]], float] = {}

    def cached_share(i: int, order: tuple[int, ...]) -> float:
        key = (i, order)
        got = share_cache.get(key)
        if got is None:
            got = share_cache[key] = scheme.share(i, OrderedSet.from_order(order))
        return got

    eta_star = 0.0
    eta_chain = 0.0
    beta_star = 1.0
    budget_upper_ok = True

    for s in range(1, 1 << n):
        f_s = values[s]
        members = elements_of(s)
        for order in permutations(members):
            total = 0.0
            prefix_total = 0.0
            for j in range(len(order)):
                total += cached_share(order[j], order)
                prefix_total += cached_share(order[j], order[: j + 1])
            if total > f_s + tol:
                budget_upper_ok = False
                beta_star = math.inf
            if f_s > tol:
                beta_star = math.inf if total <= tol else max(beta_star, f_s / total)
                ratio = prefix_total / f_s
                eta_star = max(eta_star, ratio)
                if s == full:
                    eta_chain = max(eta_chain, ratio)
            else:
                if abs(total) > tol:
                    beta_star = math.inf
                if prefix_total > tol:
                    eta_star = math.inf
                    if s == full:
                        eta_chain = math.inf

    cross = True
    for t in range(1, 1 << n):
        t_members = elements_of(t)
        for t_order in permutations(t_members):
            shares_t = {i: cached_share(i, t_order) for i in t_members}
            sub = (t - 1) & t
            while sub and cross:
                s_order = tuple(i for i in t_order if sub >> i & 1)
                for i in s_order:
                    if cached_share(i, s_order) < shares_t[i] - tol:
                        cross = False
                        break
                sub = (sub - 1) & t
            if not cross:
                break
        if not cross:
            break

    return CertificationResult(eta_star, beta_star, cross, eta_chain, budget_upper_ok)


def lift_scheme(scheme: CostShareScheme, split_map: SplitMap) -> CostShareScheme:
    """Scheme on the split ground set: the first-appearing copy of each
    original element (by the set's ordering) receives the original share,
    computed on the projected set ordered by first appearance; every other
    copy receives zero."""
    orig_of = split_map.original_of

    def share(copy: int, oset: OrderedSet) -> float:
        first_copy: dict[int, int] = {}
        projected_order: list[int] = []
        for c in oset.order:
            o = orig_of[c]
            if o not in first_copy:
                first_copy[o] = c
                projected_order.append(o)
        target = orig_of[copy]
        if first_copy.get(target) != copy:
            return 0.0
        return scheme.share(target, OrderedSet.from_order(projected_order))

    return CostShareScheme(
        share, scheme.declared_eta, scheme.declared_beta, f"lifted({scheme.label})"
    )


def _block_respecting_orderings(members: list[int], labels) -> list[tuple[int, ...]]:
    """All orderings of the members that list higher labels strictly first."""
    by_label: dict[int, list[int]] = {}
    for c in members:
        by_label.setdefault(labels[c], []).append(c)
    groups = [by_label[lbl] for lbl in sorted(by_label, reverse=True)]

    orderings: list[tuple[int, ...]] = [()]
    for group in groups:
        orderings = [head + perm for head in orderings for perm in permutations(group)]
    return orderings


def partial_prefix_cross_monotone(
    scheme: CostShareScheme, split_map: SplitMap, tol: float = SHARE_TOL
) -> bool:
    """Cross-monotonicity of a lifted scheme restricted to the orderings that
    respect the split's block order (higher labels first) and to pairs
    S' <= T' where S' sits in the early blocks and the added elements in the
    late ones (S' a partial prefix of T')."""
    n = split_map.n_new
    _guard_certify(n)
    labels = split_map.labels

    for t in range(1, 1 << n):
        t_members = elements_of(t)
        for t_order in _block_respecting_orderings(t_members, labels):
            t_oset = OrderedSet(t, t_order)
            shares_t = {i: scheme.share(i, t_oset) for i in t_members}
            sub = (t - 1) & t
            while True:
                if sub:
                    added = t & ~sub
                    min_kept = min(labels[i] for i in elements_of(sub))
                    max_added = max(labels[i] for i in elements_of(added))
                    if min_kept >= max_added:
                        s_oset = t_oset.restrict(sub)
                        for i in s_oset.order:
                            if scheme.share(i, s_oset) < shares_t[i] - tol:
                                return False
                if sub == 0:
                    break
                sub = (sub - 1) & t
    return True
