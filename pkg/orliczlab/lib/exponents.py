"""
Exact-rational calculus of exponents: conjugates, the delta and lambda
thresholds, cotype lookups and the admissibility predicates of the mixed
(l_q1, ..., l_q(m-1), l_p*) inequalities for multilinear forms.

Every exponent is stored through its reciprocal as a Fraction, so that a
threshold comparison at equality (q = 4 against delta = 4) is decided
exactly. A reciprocal of 0 encodes infinity.
"""
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Tuple, Union

from orliczlab.lib.data_types import Field
from orliczlab.lib.exceptions import (
    ExponentDomainError,
    ExponentParseError,
    InvalidPermutation,
    RankMismatch,
)

import logging
logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

_RATIONAL = re.compile(r'^\s*(\d+)\s*(?:/\s*(\d+))?\s*$')
_DECIMAL = re.compile(r'^\s*(\d+\.\d*|\.\d+)\s*$')
_INFINITY = {'inf', 'infinity', 'oo', '∞'}


@total_ordering
@dataclass(frozen=True)
class ExtExp:
    """An exponent in (0, inf], ordered by its value."""
    recip: Fraction

    def __post_init__(self):
        recip = self.recip
        if isinstance(recip, float):
            raise ExponentDomainError(
                f"reciprocal must be exact, got float {recip!r}")
        if not isinstance(recip, Fraction):
            object.__setattr__(self, 'recip', Fraction(recip))
        if self.recip < 0:
            raise ExponentDomainError(
                f"reciprocal must be nonnegative, got {self.recip}")

    @classmethod
    def of(cls, value: Union["ExtExp", int, float, str, Fraction]) -> "ExtExp":
        """Builds an exponent from its value (not its reciprocal)."""
        if isinstance(value, ExtExp):
            return value
        if isinstance(value, str):
            return parse_exponent(value, allow_decimal=True)
        if isinstance(value, float):
            if math.isinf(value) and value > 0:
                return INF
            if not math.isfinite(value):
                raise ExponentDomainError(f"invalid exponent {value!r}")
            # decimal reading of the float: 1.2 -> 6/5
            value = Fraction(repr(value))
        value = Fraction(value)
        if value <= 0:
            raise ExponentDomainError(f"exponent must be positive, got {value}")
        return cls(1 / value)

    @property
    def is_infinite(self) -> bool:
        return self.recip == 0

    @property
    def value(self) -> Union[Fraction, float]:
        """The exponent itself; math.inf when infinite."""
        if self.is_infinite:
            return math.inf
        return 1 / self.recip

    def is_space_index(self) -> bool:
        """True for exponents of an l_p space, p in [1, inf]."""
        return 0 <= self.recip <= 1

    def to_float(self) -> float:
        if self.is_infinite:
            return math.inf
        return float(1 / self.recip)

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.recip > other.recip

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.recip == other.recip

    def __hash__(self):
        return hash(self.recip)

    def __str__(self):
        if self.is_infinite:
            return 'inf'
        return str(1 / self.recip)

    def __repr__(self):
        return f"ExtExp({self})"


def _coerce(other):
    if isinstance(other, ExtExp):
        return other
    if isinstance(other, (int, float, Fraction)):
        try:
            return ExtExp.of(other)
        except ExponentDomainError:
            return NotImplemented
    return NotImplemented


INF = ExtExp(Fraction(0))
ONE = ExtExp(Fraction(1))
TWO = ExtExp(Fraction(1, 2))


def parse_exponent(text: str, allow_decimal: bool = False) -> ExtExp:
    """
    Parses 'inf', an integer or a rational 'a/b' into an exponent.

    :param text: exponent string
    :param allow_decimal: accept decimals like '1.2' (probe exponents)
    :return: exponent
    :raises ExponentParseError: malformed or nonpositive exponent
    """
    cleaned = text.strip().lower()
    if cleaned in _INFINITY:
        return INF
    match = _RATIONAL.match(cleaned)
    if match:
        numerator = int(match.group(1))
        denominator = int(match.group(2) or 1)
        if numerator == 0 or denominator == 0:
            raise ExponentParseError(
                f"exponent '{text}' must be a positive number")
        return ExtExp(Fraction(denominator, numerator))
    if _DECIMAL.match(cleaned):
        if not allow_decimal:
            raise ExponentParseError(
                f"decimal exponent '{text}' is not exact, use 'a/b'")
        value = Fraction(cleaned)
        if value == 0:
            raise ExponentParseError(
                f"exponent '{text}' must be a positive number")
        return ExtExp(1 / value)
    raise ExponentParseError(
        f"malformed exponent '{text}', expected 'inf', an integer or 'a/b'")


class ExponentTuple(tuple):
    """Ordered exponents, outermost aggregation first."""

    def __new__(cls, entries: Iterable):
        seq = tuple(ExtExp.of(e) for e in entries)
        if not seq:
            raise ExponentDomainError("an exponent tuple cannot be empty")
        return super().__new__(cls, seq)

    @classmethod
    def parse(cls, text: str, allow_decimal: bool = False) -> "ExponentTuple":
        parts = [t for t in text.split(',') if t.strip()]
        return cls(parse_exponent(t, allow_decimal) for t in parts)

    def reciprocal_sum(self) -> Fraction:
        return sum((e.recip for e in self), Fraction(0))

    def to_json(self):
        return [str(e) for e in self]

    def __add__(self, other):
        return ExponentTuple(tuple(self) + tuple(other))

    def __getitem__(self, item):
        result = super().__getitem__(item)
        if isinstance(item, slice):
            return tuple(result)
        return result

    def __str__(self):
        return '(' + ', '.join(str(e) for e in self) + ')'


@dataclass(frozen=True)
class ProblemSpec:
    """Arity, space exponents p_1..p_m, summation order sigma and field.

    sigma is 1-based: sigma[k-1] is the tensor axis summed at nesting depth k,
    so sigma[0] is outermost and sigma[-1] innermost.
    """
    m: int
    p: ExponentTuple
    sigma: Tuple[int, ...] = None
    field: Field = Field.REAL

    def __post_init__(self):
        if self.m < 2:
            raise ExponentDomainError(f"arity must be at least 2, got {self.m}")
        object.__setattr__(self, 'p', ExponentTuple(self.p))
        if len(self.p) != self.m:
            raise RankMismatch(
                f"{len(self.p)} space exponents given for arity {self.m}")
        for p in self.p:
            if not p.is_space_index():
                raise ExponentDomainError(
                    f"space exponent {p} is outside [1, inf]")
        sigma = self.sigma
        if sigma is None:
            sigma = tuple(range(1, self.m + 1))
        sigma = tuple(int(s) for s in sigma)
        if sorted(sigma) != list(range(1, self.m + 1)):
            raise InvalidPermutation(
                f"{sigma} is not a permutation of 1..{self.m}")
        object.__setattr__(self, 'sigma', sigma)
        object.__setattr__(self, 'field', Field(self.field))

    @property
    def p_sigma(self) -> ExponentTuple:
        """Space exponents in summation order, outermost first."""
        return ExponentTuple(self.p[s - 1] for s in self.sigma)

    @property
    def innermost(self) -> ExtExp:
        return self.p[self.sigma[-1] - 1]

    def is_orlicz(self) -> bool:
        """Real bilinear forms on l_inf x l_inf."""
        return (self.m == 2 and all(p.is_infinite for p in self.p)
                and self.field is Field.REAL)

    def to_json(self):
        return {
            'm': self.m,
            'p': self.p.to_json(),
            'sigma': list(self.sigma),
            'field': self.field.value,
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            m=int(data['m']),
            p=ExponentTuple(parse_exponent(str(p)) for p in data['p']),
            sigma=data.get('sigma'),
            field=Field(data.get('field', 'real')),
        )

    def __str__(self):
        sigma = ','.join(str(s) for s in self.sigma)
        return f"m={self.m} p={self.p} sigma=({sigma}) {self.field.value}"


@dataclass(frozen=True)
class AdmissibilityVerdict:
    thresholds: ExponentTuple
    q: ExponentTuple
    passes: Tuple[bool, ...]
    degenerate: bool = False
    admissible: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'admissible', all(self.passes))


def _require_space_index(p: ExtExp, what: str):
    if not p.is_space_index():
        raise ExponentDomainError(
            f"{what} needs an exponent in [1, inf], got {p}")


def conjugate(p: ExtExp) -> ExtExp:
    """The exponent p* with 1/p + 1/p* = 1; 1* = inf and inf* = 1."""
    p = ExtExp.of(p)
    _require_space_index(p, "conjugate")
    return ExtExp(1 - p.recip)


def optimal_inner_exponent(p_last: ExtExp) -> ExtExp:
    """Innermost exponent of the scalar inequality, always p_last*."""
    return conjugate(p_last)


def delta(s: Iterable) -> ExtExp:
    """1 / max{1 - (1/s_k + ... + 1/s_m), 0}."""
    s = ExponentTuple(s)
    return ExtExp(max(1 - s.reciprocal_sum(), Fraction(0)))


def lambda_(r: ExtExp, s: Iterable) -> ExtExp:
    """1 / max{1/r - (1/s_k + ... + 1/s_m), 0}, for r >= 2."""
    r = ExtExp.of(r)
    if not 0 < r.recip <= Fraction(1, 2):
        raise ExponentDomainError(f"lambda needs 2 <= r < inf, got r={r}")
    s = ExponentTuple(s)
    return ExtExp(max(r.recip - s.reciprocal_sum(), Fraction(0)))


def mu(p_last: ExtExp) -> ExtExp:
    """min{p_last, 2}."""
    p_last = ExtExp.of(p_last)
    _require_space_index(p_last, "mu")
    return ExtExp(max(p_last.recip, Fraction(1, 2)))


def space_cotype(s: ExtExp) -> ExtExp:
    """Cotype of l_s by lookup: max{s, 2}; c_0 has none (inf)."""
    s = ExtExp.of(s)
    _require_space_index(s, "space_cotype")
    if s.is_infinite:
        return INF
    return ExtExp(min(s.recip, Fraction(1, 2)))


def dual_space_cotype(p: ExtExp) -> ExtExp:
    """Cotype max{p*, 2} of the dual of X_p."""
    return space_cotype(conjugate(p))


def orl_thresholds(spec: ProblemSpec) -> Tuple[ExtExp, ExponentTuple]:
    """
    Innermost exponent and the delta thresholds q_i >= delta^{p_sigma(i),
    ..., p_sigma(m-1), mu} of the main characterization.

    :return: (inner exponent p_sigma(m)*, thresholds for q_1..q_(m-1))
    """
    p_sig = spec.p_sigma
    last = p_sig[-1]
    inner = conjugate(last)
    mu_ = mu(last)
    thresholds = ExponentTuple(
        delta(tuple(p_sig[i:spec.m - 1]) + (mu_,))
        for i in range(spec.m - 1))
    return inner, thresholds


def orl_admissible(spec: ProblemSpec, q: Iterable) -> AdmissibilityVerdict:
    """Checks q_i >= threshold_i at every position; q_i = inf always passes."""
    q = ExponentTuple(q)
    if len(q) != spec.m - 1:
        raise ExponentDomainError(
            f"{len(q)} exponents given, {spec.m - 1} expected")
    _, thresholds = orl_thresholds(spec)
    passes = tuple(qi >= ti for qi, ti in zip(q, thresholds))
    degenerate = mu(spec.p_sigma[-1]) == ONE
    if degenerate:
        logger.debug("p_sigma(m) = 1 forces every threshold to inf")
    return AdmissibilityVerdict(
        thresholds=thresholds, q=q, passes=passes, degenerate=degenerate)


def cotcrit_thresholds(p: Iterable, r: ExtExp) -> ExponentTuple:
    """lambda_r^{p_i, ..., p_m} for i = 1..m."""
    p = ExponentTuple(p)
    return ExponentTuple(lambda_(r, p[i:]) for i in range(len(p)))


def cotcrit_admissible(p: Iterable, r: ExtExp, q: Iterable) -> AdmissibilityVerdict:
    """Admissibility of (q_1..q_m) for operators into a space of cotype r."""
    p = ExponentTuple(p)
    q = ExponentTuple(q)
    if len(q) != len(p):
        raise ExponentDomainError(
            f"{len(q)} exponents given, {len(p)} expected")
    thresholds = cotcrit_thresholds(p, r)
    passes = tuple(qi >= ti for qi, ti in zip(q, thresholds))
    return AdmissibilityVerdict(thresholds=thresholds, q=q, passes=passes)
