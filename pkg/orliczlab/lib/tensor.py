"""
Dense coefficient tensors of multilinear forms and their permuted mixed
(l_q1, ..., l_qm) norms.
"""
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from orliczlab import settings
from orliczlab.lib.data_types import Field
from orliczlab.lib.exceptions import (
    BudgetExceeded,
    ExponentDomainError,
    RankMismatch,
    TensorFormatError,
    TensorIndexError,
)
from orliczlab.lib.exponents import ExponentTuple, ExtExp

import logging
logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


class CoefficientTensor(object):
    """
    Coefficients A(e_j1, ..., e_jm) of an m-linear form, stored as a
    read-only numpy array with one axis per argument.
    """

    def __init__(self, entries, field: Field = None):
        """
        :param entries: nested sequence or array of scalars
        :param field: real or complex, inferred from the entries if omitted
        """
        array = np.array(entries)
        if array.ndim == 0:
            raise TensorFormatError("a coefficient tensor needs at least one axis")
        if 0 in array.shape:
            raise TensorFormatError(f"empty axis in dims {array.shape}")
        if array.size > settings.MAX_TENSOR_ENTRIES:
            raise BudgetExceeded(
                array.size, settings.MAX_TENSOR_ENTRIES, what="dense tensor")
        if field is None:
            field = Field.COMPLEX if np.iscomplexobj(array) else Field.REAL
        field = Field(field)
        if field is Field.REAL:
            if np.iscomplexobj(array):
                if np.any(array.imag != 0):
                    raise TensorFormatError("complex entries in a real tensor")
                array = array.real
            array = np.asarray(array, dtype=np.float64)
        else:
            array = np.asarray(array, dtype=np.complex128)
        if not np.all(np.isfinite(array)):
            raise TensorFormatError("tensor entries must be finite")

        array = array.copy()
        array.flags.writeable = False
        self.array = array
        self.field = field

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.array.shape

    @property
    def rank(self) -> int:
        return self.array.ndim

    def __eq__(self, other):
        if not isinstance(other, CoefficientTensor):
            return NotImplemented
        return (self.field is other.field and self.dims == other.dims
                and bool(np.array_equal(self.array, other.array)))

    def __repr__(self):
        return f"CoefficientTensor(dims={self.dims}, field={self.field.value})"

    @classmethod
    def zeros(cls, dims: Sequence[int], field: Field = Field.REAL):
        dtype = np.complex128 if Field(field) is Field.COMPLEX else np.float64
        return cls(np.zeros(tuple(dims), dtype=dtype), field=field)

    def to_json(self):
        """Row-major JSON with complex entries as [re, im] pairs."""
        flat = self.array.ravel(order='C')
        if self.field is Field.COMPLEX:
            entries = [[float(z.real), float(z.imag)] for z in flat]
        else:
            entries = [float(x) for x in flat]
        return {
            'dims': list(self.dims),
            'field': self.field.value,
            'entries': entries,
        }

    @classmethod
    def from_json(cls, data):
        try:
            dims = [int(d) for d in data['dims']]
            field = Field(data.get('field', 'real'))
            entries = data['entries']
        except (KeyError, TypeError, ValueError) as e:
            raise TensorFormatError(f"malformed tensor JSON: {e}")
        if any(d < 1 for d in dims):
            raise TensorFormatError(f"dims must be positive, got {dims}")
        if len(entries) != math.prod(dims):
            raise TensorFormatError(
                f"{len(entries)} entries given for dims {dims}")
        if field is Field.COMPLEX:
            try:
                values = [complex(float(re), float(im)) for re, im in entries]
            except (TypeError, ValueError):
                raise TensorFormatError("complex entries must be [re, im] pairs")
        else:
            try:
                values = [float(x) for x in entries]
            except (TypeError, ValueError):
                raise TensorFormatError("real entries must be numbers")
        array = np.array(values).reshape(dims, order='C')
        return cls(array, field=field)

    @classmethod
    def load(cls, path):
        with open(path, 'r') as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise TensorFormatError(f"{path} is not valid JSON: {e}")
        return cls.from_json(data)

    def dump(self, path):
        with open(path, 'w') as f:
            json.dump(self.to_json(), f)


@dataclass(frozen=True)
class MixedNormSpec:
    """Summation order (1-based axes, outermost first) and aligned exponents."""
    order: Tuple[int, ...]
    exps: ExponentTuple

    def __post_init__(self):
        order = tuple(int(o) for o in self.order)
        if sorted(order) != list(range(1, len(order) + 1)):
            raise RankMismatch(f"{order} is not a permutation of the axes")
        exps = ExponentTuple(self.exps)
        if len(exps) != len(order):
            raise RankMismatch(
                f"{len(exps)} exponents for {len(order)} axes")
        object.__setattr__(self, 'order', order)
        object.__setattr__(self, 'exps', exps)

    @classmethod
    def natural(cls, exps: Iterable) -> "MixedNormSpec":
        exps = ExponentTuple(exps)
        return cls(order=tuple(range(1, len(exps) + 1)), exps=exps)


def _as_float_exponent(q) -> float:
    """Exact exponents (ExtExp, str, int, Fraction) go through ExtExp.of;
    plain floats are taken as they are."""
    if not isinstance(q, float):
        return ExtExp.of(q).to_float()
    q = float(q)
    if not q > 0:
        raise ExponentDomainError(f"norm exponent must be positive, got {q}")
    return q


def _reduce_last_axis(values: np.ndarray, q: float) -> np.ndarray:
    """l_q aggregation of nonnegative values over the last axis."""
    if math.isinf(q):
        return values.max(axis=-1)
    scale = values.max(axis=-1)
    safe = np.where(scale > 0, scale, 1.0)
    powered = (values / safe[..., np.newaxis]) ** q
    return np.where(scale > 0, safe * powered.sum(axis=-1) ** (1.0 / q), 0.0)


def lp_norm(vector, q) -> float:
    """l_q (quasi-)norm of a vector; q may be an ExtExp or a float."""
    q = _as_float_exponent(q)
    values = np.abs(np.asarray(vector)).ravel()
    return float(_reduce_last_axis(values, q))


def mixed_norm(tensor: CoefficientTensor, spec: MixedNormSpec) -> float:
    """
    Nested norm: the innermost axis spec.order[-1] is aggregated with
    spec.exps[-1] first, then outwards up to spec.order[0].
    """
    if len(spec.order) != tensor.rank:
        raise RankMismatch(
            f"mixed norm over {len(spec.order)} axes of a rank "
            f"{tensor.rank} tensor")
    values = np.abs(tensor.array).transpose([o - 1 for o in spec.order])
    for q in reversed(spec.exps):
        values = _reduce_last_axis(values, _as_float_exponent(q))
    return float(values)


def flat_norm(tensor: CoefficientTensor, q) -> float:
    """l_q norm of all entries."""
    return lp_norm(tensor.array, q)


def scale(tensor: CoefficientTensor, alpha) -> CoefficientTensor:
    field = tensor.field
    if isinstance(alpha, complex) and alpha.imag != 0:
        field = Field.COMPLEX
    return CoefficientTensor(tensor.array * alpha, field=field)


def embed(tensor: CoefficientTensor, dims: Sequence[int],
          offset: Optional[Sequence[int]] = None) -> CoefficientTensor:
    """Places the tensor into a zero tensor of the given dims at offset."""
    dims = tuple(int(d) for d in dims)
    if len(dims) != tensor.rank:
        raise RankMismatch(f"cannot embed rank {tensor.rank} into {dims}")
    offset = tuple(offset) if offset is not None else (0,) * tensor.rank
    if len(offset) != tensor.rank:
        raise RankMismatch(f"offset {offset} has the wrong length")
    region = []
    for start, size, total in zip(offset, tensor.dims, dims):
        if start < 0 or start + size > total:
            raise TensorIndexError(
                f"tensor of dims {tensor.dims} at offset {offset} "
                f"does not fit into {dims}")
        region.append(slice(start, start + size))
    array = np.zeros(dims, dtype=tensor.array.dtype)
    array[tuple(region)] = tensor.array
    return CoefficientTensor(array, field=tensor.field)


def slice_tensor(tensor: CoefficientTensor,
                 ranges: Sequence[Tuple[int, int]]) -> CoefficientTensor:
    """Extracts the sub-block given by half-open (start, stop) index ranges."""
    if len(ranges) != tensor.rank:
        raise RankMismatch(f"{len(ranges)} ranges for rank {tensor.rank}")
    region = []
    for (start, stop), size in zip(ranges, tensor.dims):
        if not 0 <= start < stop <= size:
            raise TensorIndexError(
                f"range ({start}, {stop}) outside an axis of size {size}")
        region.append(slice(start, stop))
    return CoefficientTensor(tensor.array[tuple(region)], field=tensor.field)


def is_diagonal(tensor: CoefficientTensor) -> bool:
    """True if all dims agree and only entries (j, ..., j) are nonzero."""
    dims = tensor.dims
    if len(set(dims)) != 1:
        return False
    n = dims[0]
    support = np.zeros(dims, dtype=bool)
    support[(np.arange(n),) * tensor.rank] = True
    return not np.any(tensor.array[~support])


def diagonal(tensor: CoefficientTensor) -> np.ndarray:
    if not is_diagonal(tensor):
        raise TensorFormatError("tensor is not diagonal")
    n = tensor.dims[0]
    return np.array(tensor.array[(np.arange(n),) * tensor.rank])
