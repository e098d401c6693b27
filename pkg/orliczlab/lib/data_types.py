from enum import Enum
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np


class Field(Enum):
    REAL = 'real'
    COMPLEX = 'complex'


class OpNormMethod(Enum):
    AUTO = 'auto'
    EXACT_ENUMERATION = 'exact-enumeration'
    DIAGONAL_CLOSED_FORM = 'diagonal-closed-form'
    ALTERNATING_ASCENT = 'alternating-ascent'


class Verdict(Enum):
    BOUNDED = 'bounded'
    GROWING = 'growing'


@dataclass
class OpNormEstimate:
    """Operator norm value together with the vectors attaining it.

    Ascent results are lower bounds (exact is False)."""
    value: float
    method: OpNormMethod
    exact: bool
    certificate: Tuple[np.ndarray, ...] = field(compare=False, default=())
    iterations: int = field(compare=False, default=0)
    starts: int = field(compare=False, default=0)

    def to_json(self):
        return {
            'value': self.value,
            'method': self.method.value,
            'exact': self.exact,
            'certificate': [_vector_to_json(v) for v in self.certificate],
            'iterations': self.iterations,
            'starts': self.starts,
        }

    def __str__(self):
        bound = "" if self.exact else " (lower bound)"
        return f"{self.value:.12g} [{self.method.value}]{bound}"


def _vector_to_json(vector):
    if np.iscomplexobj(vector):
        return [[float(z.real), float(z.imag)] for z in vector]
    return [float(x) for x in vector]
