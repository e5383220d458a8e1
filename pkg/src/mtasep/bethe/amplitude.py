"""Bethe amplitudes A_sigma, the ansatz U(X;t) and boundary-condition residuals."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .. import algebra
from ..catalog import InteractionMatrix
from ..scattering import Rule, scattering
from .words import Perm, all_perms, canonical_word, identity_perm, swap


def energy(xi):
    """Single-particle energy ``1/xi - 1``."""
    return 1 / xi - 1


@dataclass
class AmplitudeMatrix:
    sigma: Perm
    matrix: np.ndarray = field(repr=False)
    spectral: tuple
    word: tuple[int, ...] = ()


def _entries(B):
    return B.entries if isinstance(B, InteractionMatrix) else B


def _species_count(B) -> int:
    return int(round(np.sqrt(_entries(B).shape[0])))


def amplitude(sigma: Sequence[int], B, spectral: Sequence, rule=Rule.BACKWARD,
              word: Sequence[int] | None = None) -> AmplitudeMatrix:
    """Ordered product of embedded scattering matrices along a word of ``sigma``.

    At each step the transposition T_i swaps the entries alpha (position i)
    and beta (position i+1) of the evolving permutation and contributes
    ``T_{i, beta alpha}`` on the left.
    """
    rule = Rule.parse(rule)
    sigma = tuple(sigma)
    n = len(sigma)
    N = _species_count(B)
    word = tuple(canonical_word(sigma) if word is None else word)
    Bm = _entries(B)
    exact_field = algebra.is_exact(Bm) and all(isinstance(x, (Fraction, int)) for x in spectral)
    A = algebra.identity(N ** n, exact_field)
    p = identity_perm(n)
    cache: dict[tuple[int, int], np.ndarray] = {}
    for i in word:
        alpha, beta = p[i - 1], p[i]
        if (alpha, beta) not in cache:
            R = scattering(Bm, spectral[alpha - 1], spectral[beta - 1], rule).entries
            cache[(alpha, beta)] = R if exact_field else algebra.to_complex(R)
        T = algebra.embed_at_site(cache[(alpha, beta)], i, n, N)
        A = algebra.matmul(T, A)
        p = swap(p, i)
    if p != sigma:
        raise ValueError(f"word {word} does not produce {sigma}")
    return AmplitudeMatrix(sigma, A, tuple(spectral), word)


def all_amplitudes(B, spectral: Sequence, rule=Rule.BACKWARD) -> dict[Perm, np.ndarray]:
    n = len(spectral)
    return {s: amplitude(s, B, spectral, rule).matrix for s in all_perms(n)}


def _power(x, e: int):
    if isinstance(x, Fraction):
        return x ** e
    return complex(x) ** e


def ansatz(X: Sequence[int], t, amplitudes: dict[Perm, np.ndarray], spectral: Sequence):
    """U(X;t) = sum_sigma A_sigma prod_i xi_{sigma(i)}^{x_i} * exp(t * sum_i eps(xi_i)).

    The exponential factor is sigma-independent.  With ``t == 0`` and exact
    spectral values the result is exact.
    """
    total = None
    for sigma, A in amplitudes.items():
        coeff = 1
        for i, x in enumerate(X):
            coeff = coeff * _power(spectral[sigma[i] - 1], x)
        term = coeff * A
        total = term if total is None else total + term
    if t == 0:
        return total
    growth = cmath.exp(complex(t) * sum(complex(energy(complex(x))) for x in spectral))
    return algebra.to_complex(total) * growth


def boundary_residual(B, rule, spectral: Sequence, configurations: Sequence[Sequence[int]] | None = None,
                      t=0, amplitudes: dict | None = None):
    """Largest violation of the boundary conditions on the ansatz.

    Each configuration is a position vector with ``x_i == x_{i+1}`` at the
    site being tested; every coincident adjacent pair is checked.  Backward:
    ``U(..x,x..) = B_i U(..x,x+1..)``, drop-push: ``U(..x,x..) = B_i U(..x-1,x..)``.
    Returns 0 (a Fraction) in exact arithmetic when the conditions hold.
    """
    rule = Rule.parse(rule)
    n = len(spectral)
    N = _species_count(B)
    Bm = _entries(B)
    amps = amplitudes or all_amplitudes(Bm, spectral, rule)
    if configurations is None:
        configurations = default_boundary_configurations(n)
    exact_field = t == 0 and algebra.is_exact(next(iter(amps.values())))
    worst = Fraction(0) if exact_field else 0.0
    for conf in configurations:
        conf = tuple(conf)
        for i in range(1, n):
            if conf[i - 1] != conf[i]:
                continue
            if rule is Rule.BACKWARD:
                other = conf[:i] + (conf[i] + 1,) + conf[i + 1:]
            else:
                other = conf[:i - 1] + (conf[i - 1] - 1,) + conf[i:]
            Bi = algebra.embed_at_site(Bm if exact_field else algebra.to_complex(Bm), i, n, N)
            lhs = ansatz(conf, t, amps, spectral)
            rhs = algebra.matmul(Bi, ansatz(other, t, amps, spectral))
            diff = lhs - rhs
            if exact_field:
                v = max((abs(d) for d in diff.flat), default=Fraction(0))
            else:
                v = float(np.max(np.abs(algebra.to_complex(diff))))
            worst = max(worst, v)
    return worst


def default_boundary_configurations(n: int) -> list[tuple[int, ...]]:
    """Coincident pairs at every site, with the spectator particles placed around them."""
    out = []
    for i in range(1, n):
        for base in (-2, 0, 3):
            pos = []
            x = base - 3 * (i - 1)
            for k in range(1, n + 1):
                if k == i + 1:
                    pos.append(pos[-1])
                else:
                    pos.append(x)
                x += 3
            out.append(tuple(pos))
    return out
