"""Finite scenario distributions over subsets, and expectations under the
independent (product-Bernoulli) distribution -- exact by enumeration for
n <= 16, Monte Carlo with a seeded counter RNG beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import MAX_EXACT, Instance, SetFunction, SizeCapError, ValidationError
from .rng import counter_uniforms

NEG_PROB_EPS = 1e-12   # clamp floor for simplex output hygiene
DROP_EPS = 1e-12       # support entries below this are dropped after clamping
SUM_TOL = 1e-9


class ScenarioDistribution:
    """Distribution with finite support {(mask, probability)} over subsets of
    a ground set of size n. Probabilities are clamped at -1e-12, entries below
    1e-12 dropped, duplicates merged; the total must be 1 within 1e-9."""

    def __init__(self, n: int, support: Iterable[tuple[int, float]]):
        if not 1 <= n:
            raise ValidationError("ground set size must be >= 1")
        self.n = n
        full = (1 << n) - 1
        merged: dict[int, float] = {}
        total = 0.0
        for mask, prob in support:
            mask = int(mask)
            prob = float(prob)
            if not 0 <= mask <= full:
                raise ValidationError(f"mask {mask} out of range for n={n}")
            if prob < -NEG_PROB_EPS:
                raise ValidationError(f"negative probability {prob} for mask {mask}")
            prob = max(prob, 0.0)
            total += prob
            merged[mask] = merged.get(mask, 0.0) + prob
        if abs(total - 1.0) > SUM_TOL:
            raise ValidationError(f"support probabilities sum to {total}, not 1")
        self.support = tuple(
            (mask, merged[mask]) for mask in sorted(merged) if merged[mask] >= DROP_EPS
        )

    def marginals(self) -> np.ndarray:
        p = np.zeros(self.n)
        for mask, prob in self.support:
            for i in range(self.n):
                if mask >> i & 1:
                    p[i] += prob
        return p

    def expectation(self, f: SetFunction) -> float:
        if f.n != self.n:
            raise ValidationError("distribution and function ground sets differ")
        return float(sum(prob * f.value(mask) for mask, prob in self.support))

    def to_json(self) -> dict:
        return {"support": [{"mask": mask, "p": prob} for mask, prob in self.support]}

    @classmethod
    def from_json(cls, data: dict, n: int) -> "ScenarioDistribution":
        try:
            pairs = [(entry["mask"], entry["p"]) for entry in data["support"]]
        except (TypeError, KeyError) as exc:
            raise ValidationError(f"distribution JSON missing field: {exc}") from None
        return cls(n, pairs)


def marginals_of(dist: ScenarioDistribution) -> np.ndarray:
    """Per-element inclusion probabilities of a scenario distribution."""
    return dist.marginals()


def expectation_under(dist: ScenarioDistribution, f: SetFunction) -> float:
    """E[f(S)] with S drawn from the scenario distribution."""
    return dist.expectation(f)


def _product_weights(n: int, p: Sequence[float]) -> np.ndarray:
    weights = np.ones(1 << n)
    masks = np.arange(1 << n)
    for i, pi in enumerate(p):
        has = (masks >> i & 1).astype(bool)
        weights[has] *= pi
        weights[~has] *= 1.0 - pi
    return weights


def independent_expectation_exact(f: SetFunction, p: Sequence[float]) -> float:
    """E[f(S)] under independent inclusion, by full enumeration (n <= 16)."""
    p = tuple(float(x) for x in p)
    if len(p) != f.n:
        raise ValidationError(f"{len(p)} marginals for ground set of size {f.n}")
    if f.n > MAX_EXACT:
        raise SizeCapError(f"exact enumeration needs n <= {MAX_EXACT}, got {f.n}")
    return float(np.dot(_product_weights(f.n, p), f.values()))


def product_distribution(n: int, p: Sequence[float]) -> ScenarioDistribution:
    """The independent distribution materialised over all 2^n scenarios."""
    if n > MAX_EXACT:
        raise SizeCapError(f"cannot materialise 2^{n} scenarios")
    weights = _product_weights(n, p)
    return ScenarioDistribution(n, list(enumerate(weights.tolist())))


def independent_expectation(inst: Instance) -> float:
    return independent_expectation_exact(inst.function, inst.marginals)


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
        }


_MC_CHUNK = 1 << 15


def independent_expectation_mc(
    f: SetFunction, p: Sequence[float], samples: int, seed: int
) -> MCEstimate:
    """Sample mean of f(S) under independent inclusion, with its standard error.

    Sample j consumes counter positions j*n..j*n+n-1 of the seed's stream, so
    the estimate is a pure function of (seed, samples) and shards merge exactly.
    """
    p = np.asarray(p, dtype=np.float64)
    if len(p) != f.n:
        raise ValidationError(f"{len(p)} marginals for ground set of size {f.n}")
    if samples < 1:
        raise ValidationError("need at least one sample")
    n = f.n
    powers = (1 << np.arange(n, dtype=np.int64)).astype(np.int64)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        chunk = min(_MC_CHUNK, samples - done)
        u = counter_uniforms(seed, done * n, chunk * n).reshape(chunk, n)
        masks = ((u < p).astype(np.int64) * powers).sum(axis=1)
        vals = f.values_at(masks)
        total += float(vals.sum())
        total_sq += float(np.dot(vals, vals))
        done += chunk
    mean = total / samples
    if samples > 1:
        var = max(total_sq - samples * mean * mean, 0.0) / (samples - 1)
        stderr = float(np.sqrt(var / samples))
    else:
        stderr = 0.0
    return MCEstimate(mean, stderr, samples, seed)
