"""Two-particle scattering matrices for the backward and drop-push dynamics."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from . import algebra
from .algebra import ONE, SingularMatrix
from .catalog import InteractionMatrix

Scalar = Union[Fraction, complex, float, int]


class Rule(str, enum.Enum):
    BACKWARD = "backward"
    DROP_PUSH = "drop-push"

    @classmethod
    def parse(cls, value) -> "Rule":
        if isinstance(value, Rule):
            return value
        v = str(value).strip().lower().replace("_", "-")
        if v in ("droppush", "push", "dp"):
            v = "drop-push"
        return cls(v)


class SingularResolvent(ArithmeticError):
    def __init__(self, name: str, value):
        self.name = name
        self.value = value
        super().__init__(f"resolvent singular at {name}={value}")


def _is_exact_scalar(x) -> bool:
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def _field_of(B: np.ndarray, *xs) -> bool:
    return algebra.is_exact(B) and all(_is_exact_scalar(x) for x in xs)


def _coerce(x, exact_field: bool):
    return Fraction(x) if exact_field else complex(x)


def _entries(B) -> np.ndarray:
    return B.entries if isinstance(B, InteractionMatrix) else B


@dataclass(frozen=True)
class ScatteringMatrix:
    N: int
    entries: np.ndarray = field(repr=False)
    rule: Rule = Rule.BACKWARD
    pair: tuple = ()

    @property
    def exact(self) -> bool:
        return algebra.is_exact(self.entries)


def resolvent_factor(B: np.ndarray, coeff, exact_field: bool) -> np.ndarray:
    """``I - coeff*B`` over the chosen field."""
    B = B if exact_field else algebra.to_complex(B)
    return algebra.identity(B.shape[0], exact_field) - coeff * B


def _inverse_or_raise(m: np.ndarray, name: str, value) -> np.ndarray:
    try:
        return algebra.inverse(m)
    except SingularMatrix:
        raise SingularResolvent(name, value) from None


def scattering(B, xi_alpha: Scalar, xi_beta: Scalar, rule=Rule.BACKWARD,
               pair: tuple = ()) -> ScatteringMatrix:
    """R_{beta alpha} for the given spectral parameters.

    Backward:  -(I - xi_a B)^{-1} (I - xi_b B)
    Drop-push: -(I - B/xi_b)^{-1} (I - B/xi_a)
    """
    rule = Rule.parse(rule)
    Bm = _entries(B)
    N = int(round(np.sqrt(Bm.shape[0])))
    ex = _field_of(Bm, xi_alpha, xi_beta)
    xa, xb = _coerce(xi_alpha, ex), _coerce(xi_beta, ex)
    if xa == 0 or xb == 0:
        raise ValueError("spectral parameters must be nonzero")
    if rule is Rule.BACKWARD:
        left = _inverse_or_raise(resolvent_factor(Bm, xa, ex), "xi_alpha", xi_alpha)
        right = resolvent_factor(Bm, xb, ex)
    else:
        left = _inverse_or_raise(resolvent_factor(Bm, ONE / xb if ex else 1 / xb, ex), "xi_beta", xi_beta)
        right = resolvent_factor(Bm, ONE / xa if ex else 1 / xa, ex)
    R = -algebra.matmul(left, right)
    return ScatteringMatrix(N, R, rule, pair)


def closed_form_S(r, xi_alpha, xi_beta):
    """Diagonal entry ``-(1 - r xi_b)/(1 - r xi_a)``."""
    den = 1 - r * xi_alpha
    if den == 0:
        raise ZeroDivisionError("1 - r*xi_alpha vanishes")
    return -(1 - r * xi_beta) / den


def closed_form_T(r, xi_alpha, xi_beta):
    """Conversion entry ``r (xi_b - xi_a) / ((1 - xi_a)(1 - (1-r) xi_a))``."""
    f1 = 1 - xi_alpha
    f2 = 1 - (1 - r) * xi_alpha
    if f1 == 0:
        raise ZeroDivisionError("1 - xi_alpha vanishes")
    if f2 == 0:
        raise ZeroDivisionError("1 - (1-r)*xi_alpha vanishes")
    return r * (xi_beta - xi_alpha) / (f1 * f2)


def param_family_closed_form(lam, lam_prime, N: int, xi_alpha, xi_beta) -> np.ndarray:
    """Scattering matrix of the two-parameter family assembled entry by entry."""
    ex = all(_is_exact_scalar(v) for v in (lam, lam_prime, xi_alpha, xi_beta))
    if ex:
        lam, lam_prime, xi_alpha, xi_beta = map(Fraction, (lam, lam_prime, xi_alpha, xi_beta))
    out = algebra.zeros((N * N, N * N), ex)
    words = algebra.all_words(2, N)
    S1 = closed_form_S(1, xi_alpha, xi_beta)
    Sl = closed_form_S(lam, xi_alpha, xi_beta)
    Slp = closed_form_S(lam_prime, xi_alpha, xi_beta)
    Tm = closed_form_T(1 - lam, xi_alpha, xi_beta)
    Tmp = closed_form_T(1 - lam_prime, xi_alpha, xi_beta)
    for c, (v1, v2) in enumerate(words):
        if v1 == v2:
            out[c, c] = S1
        elif v1 < v2:
            out[c, c] = Sl
            out[algebra.word_rank((v2, v2), N), c] = Tm
        else:
            out[c, c] = Slp
            out[algebra.word_rank((v1, v1), N), c] = Tmp
    return out


def rescaled_scattering(a, b, B, xi_alpha, xi_beta) -> ScatteringMatrix:
    """Scattering matrix of ``a I + b B`` written through B with rescaled parameters."""
    Bm = _entries(B)
    ex = _field_of(Bm, a, b, xi_alpha, xi_beta)
    a, b, xa, xb = (_coerce(v, ex) for v in (a, b, xi_alpha, xi_beta))
    if a + b != 1:
        raise ValueError(f"coefficients must sum to 1, got {a}+{b}")
    da, db = 1 - a * xa, 1 - a * xb
    if da == 0:
        raise ZeroDivisionError("1 - a*xi_alpha vanishes")
    if db == 0:
        raise ZeroDivisionError("1 - a*xi_beta vanishes")
    prefactor = -db / da
    left = _inverse_or_raise(resolvent_factor(Bm, b * xa / da, ex), "xi_alpha", xi_alpha)
    right = resolvent_factor(Bm, b * xb / db, ex)
    N = int(round(np.sqrt(Bm.shape[0])))
    return ScatteringMatrix(N, prefactor * algebra.matmul(left, right), Rule.BACKWARD)


def embed_T(R: ScatteringMatrix, i: int, n: int) -> np.ndarray:
    return algebra.embed_at_site(R.entries, i, n, R.N)
