"""Exact sampling certificates for the braid-type relations of scattering matrices.

A relation between rational functions of the spectral parameters is checked
at several random rational points in exact arithmetic.  Exactness rules out
false failures; several generic points make a false pass practically
impossible.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import algebra, catalog
from .catalog import InteractionMatrix
from .scattering import Rule, SingularResolvent, scattering

DEFAULT_SEED = 20250101
DEFAULT_SAMPLES = 5
SAMPLE_BOUND = 64
MAX_REJECTIONS = 1000

EXPECTED_NATURAL = frozenset(catalog.NATURAL_INDICES)
EXPECTED_CONVEX = frozenset(
    [(1, j) for j in catalog.NATURAL_INDICES] + [(3, 4), (3, 5), (4, 5), (4, 11)]
)
EXPECTED_ASYMMETRIC = EXPECTED_NATURAL | frozenset({6, 7, 8, 9, 12, 14, 17, 19})
PARAM_GRID_VALUES = tuple(Fraction(k, 4) for k in range(5))


def _fmt(x) -> str:
    return str(x)


def random_rational(rng: random.Random, bound: int = SAMPLE_BOUND) -> Fraction:
    while True:
        num = rng.randint(-bound, bound)
        if num:
            return Fraction(num, rng.randint(1, bound))


def spectral_sample(rng: random.Random, k: int, bound: int = SAMPLE_BOUND) -> tuple[Fraction, ...]:
    """k distinct nonzero rationals with numerators and denominators bounded by ``bound``."""
    out: list[Fraction] = []
    while len(out) < k:
        x = random_rational(rng, bound)
        if x not in out:
            out.append(x)
    return tuple(out)


@dataclass
class Witness:
    relation: str
    sample_index: int
    seed: int
    xi: tuple
    row: str
    col: str
    lhs: Fraction
    rhs: Fraction

    @property
    def violation(self) -> Fraction:
        return self.lhs - self.rhs

    def to_dict(self) -> dict:
        return {
            "relation": self.relation,
            "sample_index": self.sample_index,
            "seed": self.seed,
            "xi": [_fmt(x) for x in self.xi],
            "entry": [self.row, self.col],
            "lhs": _fmt(self.lhs),
            "rhs": _fmt(self.rhs),
            "violation": _fmt(self.violation),
        }


@dataclass
class IntegrabilityVerdict:
    subject: str
    N: int
    rule: Rule
    passes_a: bool = True
    passes_b: bool = True
    passes_c: bool = True
    samples: int = 0
    seed: int = DEFAULT_SEED
    witnesses: list[Witness] = field(default_factory=list)
    note: str = ""

    @property
    def passes(self) -> bool:
        return self.passes_a and self.passes_b and self.passes_c

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "N": self.N,
            "rule": self.rule.value,
            "passes": self.passes,
            "passes_a": self.passes_a,
            "passes_b": self.passes_b,
            "passes_c": self.passes_c,
            "samples": self.samples,
            "seed": self.seed,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "note": self.note,
        }


def _labels(n: int, N: int) -> list[str]:
    return [algebra.word_label(w) for w in algebra.all_words(n, N)]


def _witness(relation, lhs, rhs, n, N, k, seed, xi) -> Witness | None:
    diff = lhs - rhs
    if not any(v != 0 for v in diff.flat):
        return None
    (r, c), _ = algebra.max_abs_entry(diff)
    names = _labels(n, N)
    return Witness(relation, k, seed, tuple(xi), names[r], names[c], lhs[r, c], rhs[r, c])


def _scattering_set(B, xi, rule):
    xa, xb, xg, xd = xi
    # R_{yx} is scattering(B, xi_x, xi_y)
    return {
        "ba": scattering(B, xa, xb, rule).entries,
        "ab": scattering(B, xb, xa, rule).entries,
        "gb": scattering(B, xb, xg, rule).entries,
        "ga": scattering(B, xa, xg, rule).entries,
        "gd": scattering(B, xd, xg, rule).entries,
    }


def relation_products(R: dict, N: int, include_b: bool = True) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Left- and right-hand sides of relations (a), (b) at n=4 and (c) at n=3."""
    emb = algebra.embed_at_site
    out = {"a": (algebra.matmul(R["ab"], R["ba"]), algebra.identity(N * N))}
    if include_b:
        t1 = emb(R["ba"], 1, 4, N)
        t3 = emb(R["gd"], 3, 4, N)
        out["b"] = (algebra.matmul(t1, t3), algebra.matmul(t3, t1))
    lhs = algebra.matmul(emb(R["gb"], 1, 3, N), emb(R["ga"], 2, 3, N), emb(R["ba"], 1, 3, N))
    rhs = algebra.matmul(emb(R["ba"], 2, 3, N), emb(R["ga"], 1, 3, N), emb(R["gb"], 2, 3, N))
    out["c"] = (lhs, rhs)
    return out


def draw_admissible(B, rule, rng: random.Random):
    """Spectral sample (alpha, beta, gamma, delta) with every needed resolvent invertible."""
    for _ in range(MAX_REJECTIONS):
        xi = spectral_sample(rng, 4)
        try:
            return xi, _scattering_set(B, xi, rule)
        except SingularResolvent:
            continue
    raise SingularResolvent("xi", "no admissible sample found")


def check_yang_baxter(B: InteractionMatrix, samples: int = DEFAULT_SAMPLES, rule=Rule.BACKWARD,
                      seed: int = DEFAULT_SEED, subject: str | None = None,
                      check_b: bool = True) -> IntegrabilityVerdict:
    """Check relations (a), (b) at n=4 and the Yang-Baxter relation (c) at n=3."""
    rule = Rule.parse(rule)
    N = B.N
    verdict = IntegrabilityVerdict(subject or B.provenance, N, rule, samples=samples, seed=seed)
    rng = random.Random(seed)
    for k in range(samples):
        xi, R = draw_admissible(B, rule, rng)
        sides = relation_products(R, N, include_b=check_b)
        for rel, (lhs, rhs) in sides.items():
            n = {"a": 2, "b": 4, "c": 3}[rel]
            w = _witness(rel, lhs, rhs, n, N, k, seed, xi)
            if w is not None:
                if getattr(verdict, f"passes_{rel}"):
                    verdict.witnesses.append(w)
                setattr(verdict, f"passes_{rel}", False)
    return verdict


def recheck_witness(B: InteractionMatrix, w: Witness, rule) -> Fraction:
    """Re-evaluate a witness from its stored spectral values; returns the violation."""
    R = _scattering_set(B, w.xi, Rule.parse(rule))
    lhs, rhs = relation_products(R, B.N)[w.relation]
    n = {"a": 2, "b": 4, "c": 3}[w.relation]
    names = _labels(n, B.N)
    r, c = names.index(w.row), names.index(w.col)
    return lhs[r, c] - rhs[r, c]


# --- classification sweeps -------------------------------------------------

def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("MTASEP_THREADS", "1")))
    except ValueError:
        return 1


def _run(jobs: Sequence[tuple], workers: int) -> list[IntegrabilityVerdict]:
    if workers <= 1 or len(jobs) <= 1:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_job, jobs))


def _job(job) -> IntegrabilityVerdict:
    B, samples, rule, seed, subject = job
    return check_yang_baxter(B, samples, rule, seed, subject)


@dataclass
class Classification:
    kind: str
    rule: Rule
    found: set
    expected: frozenset
    verdicts: dict = field(default_factory=dict)
    excluded: dict = field(default_factory=dict)

    @property
    def matches(self) -> bool:
        return set(self.found) == set(self.expected)

    def to_dict(self) -> dict:
        def key(k):
            return ",".join(map(str, k)) if isinstance(k, tuple) else str(k)
        return {
            "kind": self.kind,
            "rule": self.rule.value,
            "found": sorted(key(k) for k in self.found),
            "expected": sorted(key(k) for k in self.expected),
            "matches": self.matches,
            "verdicts": {key(k): [v.to_dict() for v in vs] for k, vs in sorted(self.verdicts.items())},
            "excluded": {key(k): v for k, v in sorted(self.excluded.items())},
        }


def classify_natural_extensions(rule=Rule.BACKWARD, samples: int = DEFAULT_SAMPLES,
                                seed: int = DEFAULT_SEED, N: int = 3,
                                workers: int | None = None) -> Classification:
    rule = Rule.parse(rule)
    result = Classification("natural", rule, set(), EXPECTED_NATURAL)
    jobs, keys = [], []
    for k in range(1, 29):
        try:
            B = catalog.extend_natural(catalog.get(k), N)
        except catalog.InconsistentExtension as e:
            result.excluded[k] = f"inconsistent: {e}"
            continue
        jobs.append((B, samples, rule, seed, f"natural(b{k:02d})"))
        keys.append(k)
    for k, v in zip(keys, _run(jobs, workers or default_workers())):
        result.verdicts[k] = [v]
        if v.passes:
            result.found.add(k)
        else:
            result.excluded[k] = "fails relations"
    return result


def convex_pairs() -> list[tuple[int, int]]:
    idx = catalog.NATURAL_INDICES
    return [(1, 1)] + [(i, j) for n, i in enumerate(idx) for j in idx[n + 1:]]


def classify_convex_mixtures(a_values: Iterable = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)),
                             rule=Rule.BACKWARD, samples: int = DEFAULT_SAMPLES,
                             seed: int = DEFAULT_SEED, N: int = 3,
                             pairs: Sequence[tuple[int, int]] | None = None,
                             workers: int | None = None) -> Classification:
    """A pair is integrable iff its mixture passes at every tested weight ``a``."""
    rule = Rule.parse(rule)
    a_values = [Fraction(a) for a in a_values]
    result = Classification("convex", rule, set(), EXPECTED_CONVEX)
    pairs = list(pairs or convex_pairs())
    jobs = []
    for i, j in pairs:
        for a in a_values:
            B = catalog.extend_natural(catalog.convex_mix(i, j, a), N)
            jobs.append((B, samples, rule, seed, f"mix({i},{j},{a})"))
    verdicts = _run(jobs, workers or default_workers())
    per = len(a_values)
    for n, pair in enumerate(pairs):
        vs = verdicts[n * per:(n + 1) * per]
        result.verdicts[pair] = vs
        if all(v.passes for v in vs):
            result.found.add(pair)
        else:
            result.excluded[pair] = "fails relations"
    return result


def classify_param_family(grid: Iterable[tuple] | None = None, rule=Rule.BACKWARD,
                          samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED, N: int = 3,
                          workers: int | None = None) -> list[IntegrabilityVerdict]:
    rule = Rule.parse(rule)
    if grid is None:
        grid = [(l1, l2) for l1 in PARAM_GRID_VALUES for l2 in PARAM_GRID_VALUES]
    jobs = []
    for lam, lp in grid:
        B = catalog.param_extension(lam, lp, N)
        jobs.append((B, samples, rule, seed, f"param({Fraction(lam)},{Fraction(lp)})"))
    return _run(jobs, workers or default_workers())


def classify_asymmetric_extensions(rule=Rule.BACKWARD, samples: int = DEFAULT_SAMPLES,
                                   seed: int = DEFAULT_SEED, N: int = 3,
                                   workers: int | None = None) -> Classification:
    rule = Rule.parse(rule)
    result = Classification("asymmetric", rule, set(), EXPECTED_ASYMMETRIC)
    jobs, keys = [], []
    for k in range(1, 29):
        try:
            B = catalog.asymmetric_extend(k, N)
        except catalog.NotApplicable as e:
            result.excluded[k] = f"not applicable: {e}"
            continue
        jobs.append((B, samples, rule, seed, f"asym(b{k:02d})"))
        keys.append(k)
    for k, v in zip(keys, _run(jobs, workers or default_workers())):
        result.verdicts[k] = [v]
        if v.passes:
            result.found.add(k)
        else:
            result.excluded[k] = "fails relations"
    return result


def modified_matches_natural(label) -> bool:
    """True iff c^(l) equals some b^(k) or its species-swapped form, k natural."""
    c = catalog.modified(catalog.get(label))
    for k in catalog.NATURAL_INDICES:
        b = catalog.get(k)
        if c == b or c == catalog.bar(b):
            return True
    return False
