"""Ground sets, subsets as bitmasks, set-function oracles, and exhaustive
structure checks (monotone / submodular / supermodular / subadditive).

Subsets of a ground set {0..n-1} are unsigned ints with bit i set iff element
i is in the subset; explicit tables are indexed by that mask value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_GROUND = 24        # oracle evaluation cap
MAX_EXACT = 16         # full-enumeration engines work on at most 2^16 scenarios
MAX_SUBADDITIVE = 12   # subadditivity scans all pairs of subsets
MAX_FACILITIES = 12    # facility-location evaluation brute-forces open subsets
CHECK_TOL = 1e-9


class ValidationError(ValueError):
    """Malformed input: bad mask, marginal, table, or JSON payload."""


class SizeCapError(RuntimeError):
    """Request exceeds the hard cap of an exact engine."""


@dataclass(frozen=True)
class GroundSet:
    """The ground set {0..n-1}."""

    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_GROUND:
            raise ValidationError(f"ground set size must be in [1, {MAX_GROUND}], got {self.n}")

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def contains(self, mask: int) -> bool:
        return 0 <= mask <= self.full_mask


def mask_of(elements: Sequence[int], n: int) -> int:
    mask = 0
    for i in elements:
        if not 0 <= i < n:
            raise ValidationError(f"element {i} outside ground set of size {n}")
        mask |= 1 << i
    return mask


def elements_of(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcounts(masks: np.ndarray) -> np.ndarray:
    return np.bitwise_count(masks.astype(np.uint64)).astype(np.int64)


class SetFunction:
    """Deterministic oracle f: 2^{0..n-1} -> R, addressed by bitmask.

    `value` answers single masks for any n <= MAX_GROUND; `values` materialises
    the full table (n <= MAX_EXACT) for the enumeration and LP engines.
    Instances are immutable after construction apart from the value cache.
    """

    kind = "abstract"

    def __init__(self, n: int):
        self.ground = GroundSet(n)
        self.n = n
        self._table: np.ndarray | None = None

    def value(self, mask: int) -> float:
        raise NotImplementedError

    def values(self) -> np.ndarray:
        """All 2^n values, indexed by mask. Cached, read-only."""
        if self.n > MAX_EXACT:
            raise SizeCapError(f"cannot enumerate 2^{self.n} scenarios (cap {MAX_EXACT})")
        if self._table is None:
            table = np.asarray(self._materialize(), dtype=np.float64)
            table.flags.writeable = False
            self._table = table
        return self._table

    def values_at(self, masks: np.ndarray) -> np.ndarray:
        """Vectorised evaluation at an array of masks."""
        if self.n <= MAX_EXACT:
            return self.values()[masks]
        return self._values_at_large(masks)

    def _materialize(self) -> np.ndarray:
        return np.array([self.value(m) for m in range(1 << self.n)], dtype=np.float64)

    def _values_at_large(self, masks: np.ndarray) -> np.ndarray:
        cache: dict[int, float] = {}
        out = np.empty(len(masks), dtype=np.float64)
        for j, m in enumerate(masks):
            m = int(m)
            v = cache.get(m)
            if v is None:
                v = cache[m] = self.value(m)
            out[j] = v
        return out

    def _check_mask(self, mask: int):
        if not self.ground.contains(mask):
            raise ValidationError(f"mask {mask} out of range for n={self.n}")

    def to_json(self) -> dict:
        raise NotImplementedError


class TableFunction(SetFunction):
    """Explicit table of 2^n values indexed by mask."""

    kind = "explicit"

    def __init__(self, table: Sequence[float]):
        size = len(table)
        n = size.bit_length() - 1
        if size != 1 << n or n < 1:
            raise ValidationError(f"explicit table length {size} is not 2^n for n >= 1")
        super().__init__(n)
        arr = np.asarray(table, dtype=np.float64)
        arr.flags.writeable = False
        self._table = arr

    def value(self, mask: int) -> float:
        self._check_mask(mask)
        return float(self._table[mask])

    def to_json(self) -> dict:
        return {"type": "explicit", "n": self.n, "values": [float(v) for v in self._table]}


class CoverageMax(SetFunction):
    """f(S) = max_k |S intersect A_k| over a partition A_1..A_K of the ground set."""

    kind = "coverage_max"

    def __init__(self, n: int, partition: Sequence[Sequence[int]]):
        super().__init__(n)
        blocks = []
        union = 0
        for block in partition:
            bm = mask_of(block, n)
            if bm == 0:
                raise ValidationError("partition blocks must be nonempty")
            if bm & union:
                raise ValidationError("partition blocks overlap")
            union |= bm
            blocks.append(bm)
        if union != self.ground.full_mask:
            raise ValidationError("partition does not cover the ground set")
        self.blocks = tuple(blocks)

    def value(self, mask: int) -> float:
        self._check_mask(mask)
        return float(max((mask & bm).bit_count() for bm in self.blocks))

    def _materialize(self) -> np.ndarray:
        masks = np.arange(1 << self.n, dtype=np.uint64)
        per_block = [popcounts(masks & np.uint64(bm)) for bm in self.blocks]
        return np.maximum.reduce(per_block).astype(np.float64)

    def values_at(self, masks: np.ndarray) -> np.ndarray:
        arr = masks.astype(np.uint64)
        per_block = [popcounts(arr & np.uint64(bm)) for bm in self.blocks]
        return np.maximum.reduce(per_block).astype(np.float64)

    def to_json(self) -> dict:
        return {
            "type": "coverage_max",
            "n": self.n,
            "partition": [elements_of(bm) for bm in self.blocks],
        }


class TwoStageFlow(SetFunction):
    """Two-stage flow cost with first-stage capacity x: build cost plus a
    2^n-per-unit penalty on demand exceeding the capacity.

    f(S) = c(x) + 2^n * max(|S| - x, 0), with c(x) = x for x <= n-1 and
    c(n) = n + 2.
    """

    kind = "two_stage_flow"

    def __init__(self, n: int, x: int):
        super().__init__(n)
        if not 0 <= x <= n:
            raise ValidationError(f"capacity x={x} outside 0..{n}")
        self.x = x
        self.build_cost = float(x if x <= n - 1 else n + 2)
        self.penalty = float(2**n)

    def value(self, mask: int) -> float:
        self._check_mask(mask)
        return self.build_cost + self.penalty * max(mask.bit_count() - self.x, 0)

    def _materialize(self) -> np.ndarray:
        sizes = popcounts(np.arange(1 << self.n, dtype=np.uint64))
        return self.build_cost + self.penalty * np.maximum(sizes - self.x, 0)

    def values_at(self, masks: np.ndarray) -> np.ndarray:
        sizes = popcounts(masks.astype(np.uint64))
        return self.build_cost + self.penalty * np.maximum(sizes - self.x, 0)

    def to_json(self) -> dict:
        return {"type": "two_stage_flow", "n": self.n, "x": self.x}


class FacilityLocationCost(SetFunction):
    """Exact cost of serving a demand set of clients from facilities.

    f(S) = base_cost + min over facility subsets G of
           (sum of open costs of G minus pre-opened)
         + (sum over clients i in S of the distance to the nearest facility
            in G union pre-opened).

    Ground-set elements are the clients; distances[i][j] is client i to
    facility j. Evaluation brute-forces the not-yet-open facility subsets, so
    the facility count is capped at MAX_FACILITIES.
    """

    kind = "facility_location"

    def __init__(
        self,
        open_costs: Sequence[float],
        distances: Sequence[Sequence[float]],
        pre_open: Sequence[int] = (),
        base_cost: float = 0.0,
    ):
        n = len(distances)
        super().__init__(n)
        m = len(open_costs)
        if m < 1:
            raise ValidationError("need at least one facility")
        if m > MAX_FACILITIES:
            raise SizeCapError(f"{m} facilities exceeds brute-force cap {MAX_FACILITIES}")
        dist = np.asarray(distances, dtype=np.float64)
        if dist.shape != (n, m):
            raise ValidationError(f"distances must be {n} clients x {m} facilities")
        if np.any(dist < 0) or np.any(np.asarray(open_costs) < 0):
            raise ValidationError("costs and distances must be nonnegative")
        pre = frozenset(int(j) for j in pre_open)
        if any(not 0 <= j < m for j in pre):
            raise ValidationError("pre_open facility index out of range")
        self.open_costs = tuple(float(c) for c in open_costs)
        self.distances = dist
        self.distances.flags.writeable = False
        self.pre_open = pre
        self.base_cost = float(base_cost)
        self._closed = tuple(j for j in range(m) if j not in pre)

    def value(self, mask: int) -> float:
        self._check_mask(mask)
        if mask == 0:
            return self.base_cost
        clients = elements_of(mask)
        best = np.inf
        for g in range(1 << len(self._closed)):
            opened = set(self.pre_open)
            open_cost = 0.0
            for k, j in enumerate(self._closed):
                if g >> k & 1:
                    opened.add(j)
                    open_cost += self.open_costs[j]
            if not opened:
                continue
            cols = sorted(opened)
            cost = open_cost + float(self.distances[np.ix_(clients, cols)].min(axis=1).sum())
            best = min(best, cost)
        return self.base_cost + best

    def _materialize(self) -> np.ndarray:
        best = np.full(1 << self.n, np.inf)
        for g in range(1 << len(self._closed)):
            opened = set(self.pre_open)
            open_cost = 0.0
            for k, j in enumerate(self._closed):
                if g >> k & 1:
                    opened.add(j)
                    open_cost += self.open_costs[j]
            if not opened:
                continue
            nearest = self.distances[:, sorted(opened)].min(axis=1)
            # subset sums of per-client costs, built one client bit at a time
            sums = np.zeros(1)
            for i in range(self.n):
                sums = np.concatenate([sums, sums + nearest[i]])
            np.minimum(best, open_cost + sums, out=best)
        best[0] = 0.0  # serving nobody opens nothing
        return self.base_cost + best

    def to_json(self) -> dict:
        data = {
            "type": "facility_location",
            "open_costs": list(self.open_costs),
            "distances": [[float(d) for d in row] for row in self.distances],
            "pre_open": sorted(self.pre_open),
        }
        if self.base_cost:
            data["base_cost"] = self.base_cost
        return data


def function_from_json(data: dict) -> SetFunction:
    try:
        kind = data["type"]
    except (TypeError, KeyError):
        raise ValidationError("set-function JSON needs a 'type' field") from None
    try:
        if kind == "explicit":
            return TableFunction(data["values"])
        if kind == "coverage_max":
            return CoverageMax(int(data["n"]), data["partition"])
        if kind == "two_stage_flow":
            return TwoStageFlow(int(data["n"]), int(data["x"]))
        if kind == "facility_location":
            return FacilityLocationCost(
                data["open_costs"],
                data["distances"],
                data.get("pre_open", ()),
                float(data.get("base_cost", 0.0)),
            )
    except KeyError as exc:
        raise ValidationError(f"set-function JSON missing field {exc}") from None
    raise ValidationError(f"unknown set-function type {kind!r}")


def evaluate(f: SetFunction, mask: int) -> float:
    """Oracle access f(S) with range checking."""
    return f.value(mask)


def _checker_table(f: SetFunction, cap: int) -> np.ndarray:
    if f.n > cap:
        raise SizeCapError(f"exhaustive check needs n <= {cap}, got {f.n}")
    return f.values()


def is_monotone(f: SetFunction, tol: float = CHECK_TOL) -> bool:
    """f(S) <= f(S + i) + tol for every S and i not in S."""
    v = _checker_table(f, MAX_EXACT)
    masks = np.arange(1 << f.n)
    for i in range(f.n):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        if np.any(v[without | bit] < v[without] - tol):
            return False
    return True


def is_submodular(f: SetFunction, tol: float = CHECK_TOL) -> bool:
    """Diminishing marginals: f(S+i) + f(S+j) >= f(S+i+j) + f(S) for i != j, S avoiding both."""
    v = _checker_table(f, MAX_EXACT)
    masks = np.arange(1 << f.n)
    for i in range(f.n):
        bi = 1 << i
        for j in range(i + 1, f.n):
            bj = 1 << j
            base = masks[(masks & (bi | bj)) == 0]
            if np.any(v[base | bi] + v[base | bj] < v[base | bi | bj] + v[base] - tol):
                return False
    return True


def is_supermodular(f: SetFunction, tol: float = CHECK_TOL) -> bool:
    """Increasing marginals (the reversed inequality of is_submodular)."""
    v = _checker_table(f, MAX_EXACT)
    masks = np.arange(1 << f.n)
    for i in range(f.n):
        bi = 1 << i
        for j in range(i + 1, f.n):
            bj = 1 << j
            base = masks[(masks & (bi | bj)) == 0]
            if np.any(v[base | bi] + v[base | bj] > v[base | bi | bj] + v[base] + tol):
                return False
    return True


def is_subadditive(f: SetFunction, tol: float = CHECK_TOL) -> bool:
    """f(S | T) <= f(S) + f(T) + tol over all pairs of subsets."""
    v = _checker_table(f, MAX_SUBADDITIVE)
    masks = np.arange(1 << f.n)
    for s in range(1 << f.n):
        if np.any(v[masks | s] > v[s] + v[masks] + tol):
            return False
    return True


class Instance:
    """A set function together with per-element marginal probabilities."""

    def __init__(self, function: SetFunction, marginals: Sequence[float]):
        p = tuple(float(x) for x in marginals)
        if len(p) != function.n:
            raise ValidationError(f"{len(p)} marginals for ground set of size {function.n}")
        for x in p:
            if not 0.0 <= x <= 1.0:
                raise ValidationError(f"marginal {x} outside [0, 1]")
        self.function = function
        self.marginals = p

    @property
    def n(self) -> int:
        return self.function.n

    def to_json(self) -> dict:
        return {"function": self.function.to_json(), "marginals": list(self.marginals)}

    @classmethod
    def from_json(cls, data: dict) -> "Instance":
        try:
            return cls(function_from_json(data["function"]), data["marginals"])
        except (TypeError, KeyError) as exc:
            raise ValidationError(f"instance JSON missing field: {exc}") from None
