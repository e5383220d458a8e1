"""Continuous-time simulation of the multi-species exclusion dynamics.

Configurations are sparse: only occupied sites are stored.  A jump onto an
occupied site forms a hidden state that is resolved immediately by sampling
the matching column of the interaction matrix.
"""

from __future__ import annotations

import json
import math
import random
from bisect import bisect_right
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import algebra
from .catalog import InteractionMatrix
from .scattering import Rule

CHUNK_TRIALS = 10_000
CASCADE_CAP = 1_000_000


class NonStochasticMatrix(ValueError):
    pass


@dataclass(frozen=True)
class Configuration:
    positions: tuple[int, ...]
    species: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(x) for x in self.positions))
        object.__setattr__(self, "species", tuple(int(s) for s in self.species))
        if len(self.positions) != len(self.species):
            raise ValueError("positions and species must have equal length")
        if any(a >= b for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError(f"positions {self.positions} are not strictly increasing")

    def key(self) -> str:
        return ",".join(map(str, self.positions)) + "|" + "".join(map(str, self.species))

    @classmethod
    def from_key(cls, key: str) -> "Configuration":
        pos, spec = key.split("|")
        return cls(tuple(int(x) for x in pos.split(",")), tuple(int(c) for c in spec))


class ColumnSampler:
    """Draws resolved species pairs from the columns of a column-stochastic matrix."""

    def __init__(self, B):
        entries = B.entries if isinstance(B, InteractionMatrix) else B
        D = entries.shape[0]
        self.N = int(round(math.sqrt(D)))
        self.words = algebra.all_words(2, self.N)
        self.columns = []
        for c in range(D):
            col = [entries[r, c] for r in range(D)]
            if any(not (0 <= v <= 1) for v in col):
                raise NonStochasticMatrix(f"column {algebra.word_label(self.words[c])} has entries outside [0, 1]")
            total = sum(col)
            if abs(float(total) - 1) > 1e-12:
                raise NonStochasticMatrix(f"column {algebra.word_label(self.words[c])} sums to {total}")
            support = [(r, float(v)) for r, v in enumerate(col) if v != 0]
            if len(support) == 1:
                self.columns.append((None, self.words[support[0][0]]))
                continue
            cum, acc = [], 0.0
            for _, v in support:
                acc += v
                cum.append(acc)
            cum[-1] = 1.0
            self.columns.append((cum, [self.words[r] for r, _ in support]))

    def sample(self, jumper: int, occupant: int, rng: random.Random) -> tuple[int, int]:
        cum, out = self.columns[(jumper - 1) * self.N + (occupant - 1)]
        if cum is None:
            return out
        return out[min(bisect_right(cum, rng.random()), len(out) - 1)]


def _sampler(B) -> ColumnSampler:
    return B if isinstance(B, ColumnSampler) else ColumnSampler(B)


def _advance(pos: list[int], spec: list[int], k: int, sampler: ColumnSampler, rule: Rule,
             rng: random.Random) -> None:
    """Move particle k one site right, resolving collisions in place."""
    n = len(pos)
    target = pos[k] + 1
    if k + 1 >= n or pos[k + 1] != target:
        pos[k] = target
        return
    if rule is Rule.BACKWARD:
        spec[k], spec[k + 1] = sampler.sample(spec[k], spec[k + 1], rng)
        return
    depth = 0
    incoming = spec[k]
    j = k
    # the incoming particle drops onto site pos[j+1]; the occupant is pushed one step on
    while True:
        depth += 1
        if depth > CASCADE_CAP:
            raise RuntimeError("push cascade exceeded its depth cap")
        left, right = sampler.sample(incoming, spec[j + 1], rng)
        pos[j] = pos[j + 1]
        spec[j] = left
        nxt = pos[j + 1] + 1
        j += 1
        if j + 1 < n and pos[j + 1] == nxt:
            incoming = right
            continue
        pos[j] = nxt
        spec[j] = right
        return


def step(config: Configuration, jumper: int, B, rule=Rule.BACKWARD,
         rng: random.Random | None = None) -> Configuration:
    """One jump attempt of particle ``jumper`` (0-based, left to right)."""
    rule = Rule.parse(rule)
    if not 0 <= jumper < len(config.positions):
        raise IndexError(f"no particle {jumper}")
    pos, spec = list(config.positions), list(config.species)
    _advance(pos, spec, jumper, _sampler(B), rule, rng or random.Random(0))
    return Configuration(tuple(pos), tuple(spec))


def _run_chunk(args) -> dict[str, int]:
    positions, species, sampler, rule, t, trials, state = args
    rng = random.Random(state)
    n = len(positions)
    counts: Counter = Counter()
    for _ in range(trials):
        pos, spec = list(positions), list(species)
        clock = rng.expovariate(n)
        while clock <= t:
            _advance(pos, spec, rng.randrange(n), sampler, rule, rng)
            clock += rng.expovariate(n)
        counts[",".join(map(str, pos)) + "|" + "".join(map(str, spec))] += 1
    return dict(counts)


def _chunk_seeds(seed: int, chunks: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(chunks)
    return [int.from_bytes(c.generate_state(4, dtype=np.uint32).tobytes(), "little") for c in children]


@dataclass
class SimOutcome:
    initial: Configuration
    histogram: dict[str, int]
    trials: int
    t: float
    rule: Rule
    seed: int
    matrix_label: str = ""

    def __post_init__(self):
        if sum(self.histogram.values()) != self.trials:
            raise ValueError("histogram counts must sum to trials")

    def probability(self, final: Configuration) -> float:
        return self.histogram.get(final.key(), 0) / self.trials

    def to_dict(self) -> dict:
        return {
            "initial": self.initial.key(),
            "histogram": dict(sorted(self.histogram.items())),
            "trials": self.trials,
            "t": self.t,
            "rule": self.rule.value,
            "seed": self.seed,
            "matrix_label": self.matrix_label,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def simulate(initial: Configuration, B, rule=Rule.BACKWARD, t: float = 1.0, trials: int = 10_000,
             seed: int = 0, workers: int = 1) -> SimOutcome:
    """Gillespie simulation: total rate n, uniformly chosen jumper, until time t.

    Trials are split into fixed-size chunks with seeds spawned from ``seed``,
    so the histogram does not depend on ``workers``.
    """
    rule = Rule.parse(rule)
    if t < 0 or trials < 1:
        raise ValueError("need t >= 0 and trials >= 1")
    sampler = _sampler(B)
    sizes = [CHUNK_TRIALS] * (trials // CHUNK_TRIALS)
    if trials % CHUNK_TRIALS:
        sizes.append(trials % CHUNK_TRIALS)
    seeds = _chunk_seeds(seed, len(sizes))
    jobs = [(initial.positions, initial.species, sampler, rule, float(t), s, st) for s, st in zip(sizes, seeds)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    total: Counter = Counter()
    for p in parts:
        total.update(p)
    label = getattr(B, "provenance", "")
    return SimOutcome(initial, dict(sorted(total.items())), trials, float(t), rule, seed, label)


def estimate_kernel_entry(initial: Configuration, final: Configuration, B, rule=Rule.BACKWARD,
                          t: float = 1.0, trials: int = 10_000, seed: int = 0,
                          workers: int = 1) -> tuple[float, float]:
    """Monte-Carlo estimate of one transition probability with its Wald standard error."""
    out = simulate(initial, B, rule, t, trials, seed, workers)
    p = out.probability(final)
    return p, math.sqrt(p * (1 - p) / trials)


@dataclass
class ComparisonRow:
    state: str
    kernel: float
    estimate: float
    stderr_null: float
    stderr_wald: float
    z: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def z_score(p_kernel: float, p_mc: float, trials: int) -> tuple[float, float, float]:
    """(z, null stderr, Wald stderr); the null stderr uses the kernel probability."""
    q = min(max(p_kernel, 0.0), 1.0)
    # quadrature noise around a certain or impossible outcome
    if q < 1e-12:
        q = 0.0
    elif q > 1 - 1e-12:
        q = 1.0
    se0 = math.sqrt(q * (1 - q) / trials)
    se_w = math.sqrt(p_mc * (1 - p_mc) / trials)
    diff = p_mc - p_kernel
    if se0 == 0:
        z = 0.0 if abs(diff) < 1e-9 else math.copysign(math.inf, diff)
    else:
        z = diff / se0
    return z, se0, se_w


def compare(kernel_probs: dict[str, float], outcome: SimOutcome, top: int = 20) -> list[ComparisonRow]:
    """z-scores for the ``top`` final states ranked by kernel probability."""
    ranked = sorted(kernel_probs.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
    rows = []
    for key, pk in ranked:
        pm = outcome.histogram.get(key, 0) / outcome.trials
        z, se0, sew = z_score(pk, pm, outcome.trials)
        rows.append(ComparisonRow(key, pk, pm, se0, sew, z))
    return rows
