"""
Witness families: parametrized sequences of forms whose mixed-norm to
operator-norm ratio exposes the exponent thresholds.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import hadamard

from orliczlab import settings
from orliczlab.lib.exceptions import (
    BudgetExceeded,
    ConfigurationError,
    ExponentDomainError,
    RankMismatch,
)
from orliczlab.lib.exponents import ExponentTuple, ExtExp, INF
from orliczlab.lib.opnorm import VectorValuedOp
from orliczlab.lib.tensor import CoefficientTensor
from orliczlab.lib.utilities import stream_rng

import logging
logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


class WitnessKind(Enum):
    DIAGONAL = 'diagonal'
    PINNED_DIAGONAL = 'pinned-diagonal'
    HADAMARD = 'hadamard'
    RANDOM_SIGN = 'random-sign'


def _check_entries(count: int):
    if count > settings.MAX_TENSOR_ENTRIES:
        raise BudgetExceeded(count, settings.MAX_TENSOR_ENTRIES, what="dense tensor")


def diagonal_witness(m: int, n: int, c: Optional[Sequence] = None,
                     codomain_r=None, p=None) -> Union[CoefficientTensor, VectorValuedOp]:
    """
    Diagonal form sum_j c_j x_j^(1) ... x_j^(m), or with a codomain the
    l_r-valued operator sum_j c_j x_j^(1) ... x_j^(m) e_j.

    :param m: number of arguments
    :param n: dimension of every argument (and of the codomain)
    :param c: diagonal weights, all ones by default
    :param codomain_r: codomain exponent r, scalar form if None
    :param p: input exponents of the operator, all inf by default
    """
    if m < 1 or n < 1:
        raise RankMismatch(f"diagonal witness needs m, n >= 1, got m={m}, n={n}")
    c = np.ones(n) if c is None else np.asarray(c)
    if c.shape != (n,):
        raise RankMismatch(f"{len(c)} diagonal weights for n={n}")
    axes = m if codomain_r is None else m + 1
    _check_entries(n ** axes)
    dtype = np.complex128 if np.iscomplexobj(c) else np.float64
    array = np.zeros((n,) * axes, dtype=dtype)
    array[(np.arange(n),) * axes] = c
    tensor = CoefficientTensor(array)
    if codomain_r is None:
        return tensor
    p = ExponentTuple(p) if p is not None else ExponentTuple((INF,) * m)
    return VectorValuedOp(p=p, r=ExtExp.of(codomain_r), tensor=tensor)


def pinned_diagonal_witness(m: int, n: int, pins: int) -> CoefficientTensor:
    """Ones at (1, ..., 1, j, ..., j): the first pins indices are pinned to 1."""
    if not 1 <= pins <= m - 1:
        raise RankMismatch(f"pin count must lie in 1..{m - 1}, got {pins}")
    _check_entries(n ** m)
    array = np.zeros((n,) * m)
    array[(0,) * pins + (np.arange(n),) * (m - pins)] = 1.0
    return CoefficientTensor(array)


def hadamard_witness(k: int) -> CoefficientTensor:
    """Sylvester matrix of order 2^k, H_(k+1) = [[H_k, H_k], [H_k, -H_k]]."""
    if k < 0:
        raise ExponentDomainError(f"hadamard order exponent must be >= 0, got {k}")
    if k >= 32 or 4 ** k > settings.MAX_TENSOR_ENTRIES:
        raise BudgetExceeded(4 ** k, settings.MAX_TENSOR_ENTRIES, what="hadamard matrix")
    return CoefficientTensor(hadamard(2 ** k).astype(np.float64))


def random_sign_tensor(dims: Sequence[int], seed) -> CoefficientTensor:
    """
    I.i.d. +-1 entries drawn as 1 - 2 * Generator.integers(0, 2) from
    numpy's PCG64 stream seeded with seed (an int or a sequence of ints),
    in row-major order.
    """
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise RankMismatch(f"dims must be positive, got {dims}")
    _check_entries(math.prod(dims))
    rng = stream_rng(seed)
    return CoefficientTensor(1.0 - 2.0 * rng.integers(0, 2, size=dims))


@dataclass
class WitnessFamily:
    """Descriptor of a witness family, as stored in experiment configs."""
    kind: WitnessKind
    m: int = 2
    n: Optional[int] = None
    pins: Optional[int] = None
    c: Optional[Sequence[float]] = None
    seed: int = 0
    codomain_r: Optional[ExtExp] = None

    def __post_init__(self):
        try:
            self.kind = WitnessKind(self.kind)
        except ValueError:
            raise ConfigurationError(f"unknown witness kind '{self.kind}'")
        if self.codomain_r is not None:
            self.codomain_r = ExtExp.of(self.codomain_r)
            if self.kind is not WitnessKind.DIAGONAL:
                raise ConfigurationError("only diagonal witnesses take a codomain")
        if self.kind is WitnessKind.PINNED_DIAGONAL and self.pins is None:
            raise ConfigurationError("pinned-diagonal witness needs pins")
        if self.kind is WitnessKind.HADAMARD and self.m != 2:
            raise ConfigurationError("hadamard witnesses are bilinear")

    @property
    def is_random(self) -> bool:
        return self.kind is WitnessKind.RANDOM_SIGN

    @property
    def is_vector_valued(self) -> bool:
        return self.codomain_r is not None

    def emit(self, n: Optional[int] = None, seed: Optional[int] = None,
             p=None) -> Union[CoefficientTensor, VectorValuedOp]:
        """
        Family member of dimension n. Random members of a sweep over n use
        the stream (seed, n), so every size is independent.

        :param p: input exponents for vector-valued members
        """
        n = self.n if n is None else n
        if n is None:
            raise ConfigurationError("no dimension given for the witness")
        seed = self.seed if seed is None else seed
        if self.kind is WitnessKind.DIAGONAL:
            c = self.c if self.c is not None and len(self.c) == n else None
            if self.c is not None and c is None:
                raise RankMismatch(f"{len(self.c)} weights for n={n}")
            return diagonal_witness(self.m, n, c=c, codomain_r=self.codomain_r, p=p)
        if self.kind is WitnessKind.PINNED_DIAGONAL:
            return pinned_diagonal_witness(self.m, n, self.pins)
        if self.kind is WitnessKind.HADAMARD:
            k = n.bit_length() - 1
            if n != 2 ** k:
                raise ConfigurationError(f"hadamard order {n} is not a power of two")
            return hadamard_witness(k)
        return random_sign_tensor((n,) * self.m, (seed, n))

    def to_json(self):
        data = {'kind': self.kind.value, 'm': self.m, 'seed': self.seed}
        if self.n is not None:
            data['n'] = self.n
        if self.pins is not None:
            data['pins'] = self.pins
        if self.c is not None:
            data['c'] = [float(x) for x in self.c]
        if self.codomain_r is not None:
            data['codomain_r'] = str(self.codomain_r)
        return data

    @classmethod
    def from_json(cls, data):
        try:
            return cls(
                kind=data['kind'],
                m=int(data.get('m', 2)),
                n=data.get('n'),
                pins=data.get('pins'),
                c=data.get('c'),
                seed=int(data.get('seed', 0)),
                codomain_r=data.get('codomain_r'),
            )
        except (KeyError, TypeError) as e:
            raise ConfigurationError(f"malformed witness descriptor: {e}")

    def __str__(self):
        parts = [self.kind.value, f"m={self.m}"]
        if self.pins is not None:
            parts.append(f"pins={self.pins}")
        if self.codomain_r is not None:
            parts.append(f"r={self.codomain_r}")
        if self.is_random:
            parts.append(f"seed={self.seed}")
        return ' '.join(parts)
