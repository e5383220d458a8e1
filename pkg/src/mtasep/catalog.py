"""The two-species interaction rules and their N-species extensions.

A two-species rule is a 4x4 column-stochastic-like matrix whose rows and
columns are labelled 11, 12, 21, 22: entry (ij, kl) is the rate-weight of the
hidden state ``kl`` (left species k, right species l) resolving to ``ij``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import algebra
from .algebra import ONE, ZERO, as_fraction

PAIR_LABELS = ("11", "12", "21", "22")

# Two-species integrable rules, rows 11,12,21,22.
_RAW = {
    1: [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
    2: [[1, 0, 0, 0], [0, 0, 0, 0], [0, 1, 1, 0], [0, 0, 0, 1]],
    3: [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 1, 1]],
    4: [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 1]],
    5: [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 1, 1, 1]],
    6: [[0, 0, 0, 0], [0, 0, 0, 0], [0, 1, 1, 0], [1, 0, 0, 1]],
    7: [[0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1]],
    8: [[0, 0, 0, 0], [0, 0, 0, 0], [1, 1, 1, 0], [0, 0, 0, 1]],
    9: [[0, 0, 0, 0], [0, 1, 1, 0], [0, 0, 0, 0], [1, 0, 0, 1]],
    10: [[0, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 0, 0]],
    11: [[1, 0, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 1, 0, 1]],
    12: [[0, 0, 0, 0], [1, 1, 1, 0], [0, 0, 0, 0], [0, 0, 0, 1]],
    13: [[1, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 1]],
    14: [[0, 0, 0, 0], [1, 1, 0, 0], [0, 0, 0, 0], [0, 0, 1, 1]],
    15: [[0, 0, 0, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 0, 0, 0]],
    16: [[1, 0, 0, 0], [0, -1, 0, 0], [0, 1, 1, 1], [0, 1, 0, 0]],
    17: [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [1, 1, 1, 1]],
    18: [[0, 0, 0, 0], [1, 0, 1, 0], [0, 0, 0, 0], [0, 1, 0, 1]],
    19: [[-1, 0, 0, 0], [1, 0, 0, 0], [1, 0, 0, 0], [0, 1, 1, 1]],
    20: [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]],
    21: [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    22: [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
    23: [[0, 0, 1, 0], [1, -1, 1, 0], [0, 1, -1, 1], [0, 1, 0, 0]],
    24: [[-1, 1, 0, 1], [0, 0, 0, 1], [1, 0, 0, 0], [1, 0, 1, -1]],
    25: [[-1, 0, 1, 1], [0, -1, 1, 1], [1, 1, -1, 0], [1, 1, 0, -1]],
    26: [[-1, 1, 0, 1], [1, -1, 1, 0], [0, 1, -1, 1], [1, 0, 1, -1]],
    27: [[-1, 1, 1, 0], [1, -1, 0, 1], [1, 0, -1, 1], [0, 1, 1, -1]],
    28: [[-2, 1, 1, 1], [1, -2, 1, 1], [1, 1, -2, 1], [1, 1, 1, -2]],
}

# The classical multispecies TASEP rule (faster species carries the larger label).
_MTASEP = [[1, 0, 0, 0], [0, 1, 1, 0], [0, 0, 0, 0], [0, 0, 0, 1]]

NATURAL_INDICES = (1, 2, 3, 4, 5, 11, 13)

# species relabelling 1<->2 acting on the pair labels 11,12,21,22
_BAR = (3, 2, 1, 0)


class UnknownLabel(KeyError):
    pass


class ColumnSumError(ValueError):
    pass


class InconsistentExtension(ValueError):
    """Two species pairs write different values into the same cell."""

    def __init__(self, cell: tuple[str, str], first: Fraction, second: Fraction,
                 first_pair: tuple[int, int], second_pair: tuple[int, int]):
        self.cell = cell
        self.first = first
        self.second = second
        self.first_pair = first_pair
        self.second_pair = second_pair
        super().__init__(
            f"cell ({cell[0]},{cell[1]}): value {first} from pair {first_pair} "
            f"vs {second} from pair {second_pair}"
        )


class NotApplicable(ValueError):
    pass


def column_sums(m: np.ndarray) -> list[Fraction]:
    return [sum(m[:, j], ZERO) for j in range(m.shape[1])]


def check_column_sums(m: np.ndarray, label: str = "") -> None:
    for j, s in enumerate(column_sums(m)):
        if s != ONE:
            raise ColumnSumError(f"{label or 'matrix'}: column {j} sums to {s}, expected 1")


@dataclass(frozen=True)
class TwoSpeciesMatrix:
    label: str
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.entries.shape != (4, 4):
            raise algebra.DimensionError("two-species rule must be 4x4")
        check_column_sums(self.entries, self.label)

    @property
    def stochastic(self) -> bool:
        return all(ZERO <= v <= ONE for v in self.entries.flat)

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(self.entries[:, j])

    def __eq__(self, other):
        if not isinstance(other, TwoSpeciesMatrix):
            return NotImplemented
        return algebra.equal(self.entries, other.entries)

    def __hash__(self):
        return hash(tuple(self.entries.flat))


@dataclass(frozen=True)
class InteractionMatrix:
    """An N^2 x N^2 two-particle rule indexed lexicographically 11..NN."""

    N: int
    entries: np.ndarray = field(repr=False)
    provenance: str = ""

    def __post_init__(self):
        if self.entries.shape != (self.N ** 2, self.N ** 2):
            raise algebra.DimensionError(f"expected {self.N ** 2}x{self.N ** 2} matrix")
        check_column_sums(self.entries, self.provenance)

    @property
    def stochastic(self) -> bool:
        return all(ZERO <= v <= ONE for v in self.entries.flat)

    def entry(self, row: str, col: str) -> Fraction:
        r = algebra.word_rank([int(c) for c in row], self.N)
        c = algebra.word_rank([int(c) for c in col], self.N)
        return self.entries[r, c]


def _build_catalog() -> dict[str, TwoSpeciesMatrix]:
    out = {f"b{k:02d}": TwoSpeciesMatrix(f"b{k:02d}", algebra.exact(rows)) for k, rows in _RAW.items()}
    out["mtasep"] = TwoSpeciesMatrix("mtasep", algebra.exact(_MTASEP))
    return out


# column sums are validated here, at import time
CATALOG: dict[str, TwoSpeciesMatrix] = _build_catalog()


def labels() -> list[str]:
    return [f"b{k:02d}" for k in range(1, 29)]


def normalize_label(label) -> str:
    if isinstance(label, int):
        return f"b{label:02d}"
    s = str(label).strip().lower()
    m = re.fullmatch(r"b\(?0*(\d+)\)?", s)
    if m:
        return f"b{int(m.group(1)):02d}"
    if s.isdigit():
        return f"b{int(s):02d}"
    return s


def get(label) -> TwoSpeciesMatrix:
    """Look up ``b01``..``b28`` (also accepts ints and ``bbar07``-style labels)."""
    key = normalize_label(label)
    m = re.fullmatch(r"bbar0*(\d+)", key)
    if m:
        return bar(get(int(m.group(1))))
    if key not in CATALOG:
        raise UnknownLabel(label)
    return CATALOG[key]


def index_of(label) -> int:
    key = normalize_label(label)
    m = re.fullmatch(r"b(\d+)", key)
    if not m:
        raise UnknownLabel(label)
    return int(m.group(1))


def bar(m: TwoSpeciesMatrix) -> TwoSpeciesMatrix:
    """Interchange species 1 and 2 in both row and column labels."""
    out = algebra.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            out[_BAR[i], _BAR[j]] = m.entries[i, j]
    if m.label.startswith("bbar"):
        label = "b" + m.label[4:]
    elif re.fullmatch(r"b\d+", m.label):
        label = "bbar" + m.label[1:]
    else:
        label = f"bar({m.label})"
    return TwoSpeciesMatrix(label, out)


def _pair_cells(i: int, j: int, N: int) -> list[int]:
    """Lexicographic ranks of ii, ij, ji, jj for species i<j."""
    return [algebra.word_rank(w, N) for w in ((i, i), (i, j), (j, i), (j, j))]


def _label_of(rank: int, N: int) -> str:
    return algebra.word_label(algebra.word_unrank(rank, 2, N))


def _place_blocks(b: np.ndarray, N: int) -> tuple[np.ndarray, list]:
    """Write-once placement of ``b`` on every pair block; returns grid and clashes.

    Block cells are written first so that a clash on a shared diagonal cell is
    reported before a clash between a block value and another pair's implied
    zero.  Each pair then asserts zeros on the rest of the columns it owns.
    """
    size = N * N
    grid: dict[tuple[int, int], tuple[Fraction, tuple[int, int]]] = {}
    clashes = []

    pairs = [(i, j) for i in range(1, N + 1) for j in range(i + 1, N + 1)]

    def write(cell, value, pair, phase):
        prev = grid.get(cell)
        if prev is None:
            grid[cell] = (value, pair)
        elif prev[0] != value:
            key = (phase, pairs.index(prev[1]), cell)
            clashes.append((key, cell, prev[0], value, prev[1], pair))

    for pair in pairs:
        cells = _pair_cells(*pair, N)
        for a in range(4):
            for c in range(4):
                write((cells[a], cells[c]), b[a, c], pair, 0)
    for pair in pairs:
        cells = _pair_cells(*pair, N)
        for c in cells:
            for r in range(size):
                if r not in cells:
                    write((r, c), ZERO, pair, 1)
    clashes = [c[1:] for c in sorted(clashes, key=lambda c: c[0])]

    out = algebra.zeros((size, size))
    for (r, c), (v, _) in grid.items():
        out[r, c] = v
    return out, clashes


def extend_natural(m: TwoSpeciesMatrix, N: int) -> InteractionMatrix:
    """Read the labels 11,12,21,22 as ii,ij,ji,jj for every pair i<j.

    Raises :class:`InconsistentExtension` at the first conflicting cell.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    grid, clashes = _place_blocks(m.entries, N)
    if clashes:
        (r, c), v1, v2, p1, p2 = clashes[0]
        raise InconsistentExtension((_label_of(r, N), _label_of(c, N)), v1, v2, p1, p2)
    return InteractionMatrix(N, grid, f"natural({m.label},N={N})")


def _check_unit(a, name):
    a = as_fraction(a)
    if not ZERO <= a <= ONE:
        raise ValueError(f"{name}={a} outside [0,1]")
    return a


def convex_mix(i, j, a) -> TwoSpeciesMatrix:
    """Entrywise ``a*b_i + (1-a)*b_j``."""
    a = _check_unit(a, "a")
    bi, bj = get(i), get(j)
    entries = a * bi.entries + (ONE - a) * bj.entries
    return TwoSpeciesMatrix(f"mix({index_of(bi.label)},{index_of(bj.label)},{a})", entries)


def param_family(lam, lam_prime) -> TwoSpeciesMatrix:
    """The two-parameter infection rule with survival probabilities lam, lam_prime."""
    lam = _check_unit(lam, "lambda")
    lp = _check_unit(lam_prime, "lambda'")
    rows = [
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, lam, ZERO, ZERO],
        [ZERO, ZERO, lp, ZERO],
        [ZERO, ONE - lam, ONE - lp, ONE],
    ]
    return TwoSpeciesMatrix(f"param({lam},{lp})", algebra.exact(rows))


def param_extension(lam, lam_prime, N: int) -> InteractionMatrix:
    m = param_family(lam, lam_prime)
    ext = extend_natural(m, N)
    return InteractionMatrix(N, ext.entries, f"{m.label},N={N}")


# Convex mixtures of catalog rules that are members of the two-parameter family:
# a*b_i + (1-a)*b_j == param(lam(a), lam'(a)).
PARAM_MIXTURES = {
    (1, 1): lambda a: (ONE, ONE),
    (1, 3): lambda a: (ONE, a),
    (1, 4): lambda a: (a, ONE),
    (1, 5): lambda a: (a, a),
    (3, 4): lambda a: (a, ONE - a),
    (3, 5): lambda a: (a, ZERO),
    (4, 5): lambda a: (ZERO, a),
}


def modified(m: TwoSpeciesMatrix) -> TwoSpeciesMatrix:
    """Replace the first column by (1,0,0,0)^t; needs fourth column (0,0,0,1)^t."""
    if m.column(3) != (ZERO, ZERO, ZERO, ONE):
        raise NotApplicable(f"{m.label}: fourth column is {tuple(str(v) for v in m.column(3))}, not (0,0,0,1)")
    out = m.entries.copy()
    out[:, 0] = [ONE, ZERO, ZERO, ZERO]
    label = "c" + m.label[1:] if re.fullmatch(r"b\d+", m.label) else f"c({m.label})"
    return TwoSpeciesMatrix(label, out)


def asymmetric_extend(label, N: int) -> InteractionMatrix:
    """Species-1 pairs keep ``b``'s first column; every other interaction uses ``c``.

    The hidden state 11 resolves through b's first column read on the pair
    (1,2) labels; all remaining columns come from the natural extension of c.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    b = get(label)
    c = modified(b)
    base = extend_natural(c, N).entries.copy()
    cells = _pair_cells(1, 2, N)
    base[:, cells[0]] = ZERO
    for a in range(4):
        base[cells[a], cells[0]] = b.entries[a, 0]
    return InteractionMatrix(N, base, f"asym({b.label},N={N})")


def identity_rule(N: int) -> InteractionMatrix:
    return InteractionMatrix(N, algebra.identity(N * N), f"identity,N={N}")


def from_two_species(m: TwoSpeciesMatrix, N: int) -> InteractionMatrix:
    if N == 2:
        return InteractionMatrix(2, m.entries.copy(), m.label)
    return extend_natural(m, N)


def resolve(selector: str, N: int) -> InteractionMatrix:
    """Parse a matrix selector.

    Accepted forms: ``b02``, ``bbar02``, ``mtasep``, ``c14`` (natural extension
    of the modified matrix), ``mix(i,j,a)``, ``param(l,l')``, ``asym(l)``.
    """
    s = selector.strip().lower().replace(" ", "")
    m = re.fullmatch(r"mix\(b?(\d+),b?(\d+),([^)]+)\)", s)
    if m:
        return from_two_species(convex_mix(int(m.group(1)), int(m.group(2)), Fraction(m.group(3))), N)
    m = re.fullmatch(r"param\(([^,]+),([^)]+)\)", s)
    if m:
        return param_extension(Fraction(m.group(1)), Fraction(m.group(2)), N)
    m = re.fullmatch(r"asym\(b?(\d+)\)", s)
    if m:
        return asymmetric_extend(int(m.group(1)), N)
    m = re.fullmatch(r"c0*(\d+)", s)
    if m:
        return from_two_species(modified(get(int(m.group(1)))), N)
    return from_two_species(get(s), N)
