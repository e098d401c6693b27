"""
Operator norms of multilinear forms on products of l_p balls:

- exact enumeration of sign vectors (real forms on l_inf balls),
- the generalized-Hoelder closed form for diagonal forms,
- multistart alternating Hoelder ascent (a certified lower bound),
- the isometric lift of l_r-valued operators to scalar forms.
"""
import itertools
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from orliczlab import settings
from orliczlab.lib.data_types import Field, OpNormEstimate, OpNormMethod
from orliczlab.lib.exceptions import (
    AscentMonotonicityError,
    BudgetExceeded,
    CertificateError,
    ExponentDomainError,
    RankMismatch,
    UnsupportedMethod,
)
from orliczlab.lib.exponents import ExponentTuple, ExtExp, conjugate
from orliczlab.lib.tensor import (
    CoefficientTensor,
    MixedNormSpec,
    diagonal,
    is_diagonal,
    lp_norm,
    mixed_norm,
)
from orliczlab.lib.utilities import parallel_map, stream_rng

import logging
logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# sign vectors of the second axis are processed in blocks of this many rows
SIGN_BLOCK = 2 ** 14
# relative slack for the per-sweep monotonicity assertion
MONOTONICITY_SLACK = 1e-10
CERTIFICATE_RTOL = 1e-10


def _check_exponents(tensor: CoefficientTensor, p) -> ExponentTuple:
    p = ExponentTuple(p)
    if len(p) != tensor.rank:
        raise RankMismatch(
            f"{len(p)} space exponents for a rank {tensor.rank} tensor")
    for pk in p:
        if not pk.is_space_index():
            raise ExponentDomainError(f"space exponent {pk} is outside [1, inf]")
    return p


def _contract_except(array: np.ndarray, vectors: Sequence[np.ndarray],
                     slot: int) -> np.ndarray:
    """The linear functional obtained by fixing every argument but one."""
    g = array
    for axis in range(array.ndim - 1, -1, -1):
        if axis == slot:
            continue
        g = np.tensordot(g, vectors[axis], axes=([axis], [0]))
    return g


def evaluate_form(tensor, vectors: Sequence[np.ndarray]):
    """A(x^(1), ..., x^(m)), linear (not conjugate-linear) in every slot."""
    array = tensor.array if isinstance(tensor, CoefficientTensor) else tensor
    if len(vectors) != array.ndim:
        raise RankMismatch(f"{len(vectors)} vectors for a rank {array.ndim} form")
    value = array
    for axis in range(array.ndim - 1, -1, -1):
        value = np.tensordot(value, vectors[axis], axes=([axis], [0]))
    return value.item()


def _unit_phase(g: np.ndarray) -> np.ndarray:
    """Unimodular multipliers aligning g to |g|; the phase of 0 is +1."""
    if np.iscomplexobj(g):
        modulus = np.abs(g)
        safe = np.where(modulus > 0, modulus, 1.0)
        return np.where(modulus > 0, np.conj(g) / safe, 1.0 + 0j)
    return np.where(g >= 0, 1.0, -1.0)


def _canonical(n: int, index: int, dtype) -> np.ndarray:
    e = np.zeros(n, dtype=dtype)
    e[index] = 1
    return e


def holder_extremizer(g: np.ndarray, p) -> Tuple[np.ndarray, float]:
    """
    Unit vector x of l_p maximizing |sum_j g_j x_j|, with the attained
    value ||g||_{p*}.

    :param g: coefficients of the linear functional
    :param p: ExtExp or float exponent in [1, inf]
    :return: (x, ||g||_{p*})
    """
    p = ExtExp.of(p)
    g = np.asarray(g)
    p_star = conjugate(p).to_float()
    dtype = g.dtype if np.iscomplexobj(g) else np.float64
    if p.is_infinite:
        x = _unit_phase(g).astype(dtype)
    elif p.recip == 1:
        # lowest index wins ties
        j = int(np.argmax(np.abs(g)))
        x = _unit_phase(g[j:j + 1]).astype(dtype)[0] * _canonical(len(g), j, dtype)
    else:
        norm = lp_norm(g, p_star)
        if norm == 0:
            return _canonical(len(g), 0, dtype), 0.0
        x = _unit_phase(g) * (np.abs(g) / norm) ** (p_star - 1)
        x = x.astype(dtype)
    return x, lp_norm(g, p_star)


def sign_vectors(n: int) -> np.ndarray:
    """All 2^(n-1) sign vectors of length n with first entry +1, one per row."""
    rows = np.arange(2 ** (n - 1), dtype=np.int64)[:, np.newaxis]
    bits = (rows >> np.arange(n - 1, dtype=np.int64)) & 1
    return np.hstack([np.ones((len(rows), 1)), 1.0 - 2.0 * bits])


def enumeration_size(dims: Sequence[int]) -> int:
    """Number of sign-vector combinations enumerated for axes 2..m."""
    return math.prod(2 ** (n - 1) for n in dims[1:])


def _zero_estimate(tensor: CoefficientTensor, method: OpNormMethod,
                   exact: bool, starts=0) -> OpNormEstimate:
    dtype = tensor.array.dtype
    certificate = tuple(_canonical(n, 0, dtype) for n in tensor.dims)
    return OpNormEstimate(
        value=0.0, method=method, exact=exact,
        certificate=certificate, starts=starts)


def opnorm_exact_signs(tensor: CoefficientTensor, budget: int = None) -> OpNormEstimate:
    """
    Exact norm of a real form on l_inf balls. The maximum of a multilinear
    form over a product of cubes is attained at sign vectors; axes 2..m are
    enumerated (first sign fixed by symmetry) and axis 1 is solved by the
    sign of the contracted fiber.

    :param tensor: real coefficient tensor
    :param budget: maximal number of sign-vector combinations
    :return: exact estimate with a sign-vector certificate
    :raises BudgetExceeded: enumeration larger than budget
    """
    if tensor.field is not Field.REAL:
        raise UnsupportedMethod(
            "sign enumeration needs a real form, complex extreme points "
            "are not finite")
    budget = settings.ENUMERATION_BUDGET if budget is None else budget
    size = enumeration_size(tensor.dims)
    if size > budget:
        raise BudgetExceeded(size, budget)

    array = tensor.array
    method = OpNormMethod.EXACT_ENUMERATION
    if not array.any():
        return _zero_estimate(tensor, method, exact=True)
    if tensor.rank == 1:
        certificate = (_unit_phase(array),)
        return OpNormEstimate(
            value=float(np.abs(array).sum()), method=method, exact=True,
            certificate=certificate)

    sign_sets = [sign_vectors(n) for n in tensor.dims[1:]]
    second = sign_sets[0]
    best_value, best_combo, best_row = -1.0, None, None
    for combo in itertools.product(*(range(len(s)) for s in sign_sets[1:])):
        reduced = array
        for axis in range(tensor.rank - 1, 1, -1):
            y = sign_sets[axis - 1][combo[axis - 2]]
            reduced = np.tensordot(reduced, y, axes=([axis], [0]))
        for start in range(0, len(second), SIGN_BLOCK):
            block = second[start:start + SIGN_BLOCK]
            values = np.abs(reduced @ block.T).sum(axis=0)
            k = int(np.argmax(values))
            if values[k] > best_value:
                best_value = float(values[k])
                best_combo, best_row = combo, start + k

    vectors = [None, second[best_row]]
    vectors += [sign_sets[axis - 1][best_combo[axis - 2]]
                for axis in range(2, tensor.rank)]
    g = _contract_except(array, vectors, 0)
    vectors[0] = _unit_phase(g)
    value = abs(evaluate_form(array, vectors))
    logger.debug(f"sign enumeration over {size} combinations: {value:.12g}")
    return OpNormEstimate(
        value=float(value), method=method, exact=True,
        certificate=tuple(vectors), iterations=size)


def opnorm_diagonal_closed_form(c, p) -> OpNormEstimate:
    """
    Exact norm of the diagonal form sum_j c_j x_j^(1) ... x_j^(m).

    With s = sum 1/p_k the norm is ||c||_t, t = 1/(1 - s), if s < 1, and
    ||c||_inf otherwise. The certificate is the Hoelder extremal family
    x_j^(k) ~ |c_j|^(t/p_k), with the phase of c carried by the first slot.
    """
    c = np.asarray(c)
    p = ExponentTuple(p)
    for pk in p:
        if not pk.is_space_index():
            raise ExponentDomainError(f"space exponent {pk} is outside [1, inf]")
    if not np.all(np.isfinite(c)):
        raise ExponentDomainError("diagonal weights must be finite")
    n, m = len(c), len(p)
    dtype = np.complex128 if np.iscomplexobj(c) else np.float64
    method = OpNormMethod.DIAGONAL_CLOSED_FORM
    magnitudes = np.abs(c)
    s = p.reciprocal_sum()

    if not magnitudes.any():
        certificate = tuple(_canonical(n, 0, dtype) for _ in range(m))
        return OpNormEstimate(
            value=0.0, method=method, exact=True, certificate=certificate)

    if s < 1:
        t = 1 / (1 - s)
        value = lp_norm(magnitudes, float(t))
        vectors = []
        for pk in p:
            w = magnitudes ** float(t * pk.recip)
            vectors.append((w / lp_norm(w, pk)).astype(dtype))
    else:
        j = int(np.argmax(magnitudes))
        value = float(magnitudes[j])
        vectors = [_canonical(n, j, dtype) for _ in range(m)]
    vectors[0] = vectors[0] * _unit_phase(c).astype(dtype)
    return OpNormEstimate(
        value=value, method=method, exact=True, certificate=tuple(vectors))


def _random_unit(rng: np.random.Generator, n: int, p: ExtExp,
                 complex_field: bool) -> np.ndarray:
    x = rng.standard_normal(n)
    if complex_field:
        x = x + 1j * rng.standard_normal(n)
    norm = lp_norm(x, p)
    if norm == 0:
        x = _canonical(n, 0, x.dtype)
        norm = 1.0
    return x / norm


def _ascent_start(job) -> Tuple[float, List[np.ndarray], int]:
    """One start of the alternating ascent; start 0 is the canonical start
    at the largest-modulus entry."""
    array, exps, start, seed, tol, max_sweeps = job
    complex_field = np.iscomplexobj(array)
    dtype = array.dtype
    if start == 0:
        index = np.unravel_index(int(np.argmax(np.abs(array))), array.shape)
        vectors = [_canonical(n, j, dtype) for n, j in zip(array.shape, index)]
    else:
        rng = stream_rng(seed, start)
        vectors = [_random_unit(rng, n, p, complex_field).astype(dtype)
                   for n, p in zip(array.shape, exps)]

    objective = abs(evaluate_form(array, vectors))
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        previous = objective
        for slot, p in enumerate(exps):
            g = _contract_except(array, vectors, slot)
            vectors[slot], objective = holder_extremizer(g, p)
        if objective < previous * (1 - MONOTONICITY_SLACK):
            raise AscentMonotonicityError(
                f"start {start}, sweep {sweeps}: objective dropped from "
                f"{previous!r} to {objective!r}")
        if objective - previous <= tol * objective:
            break
    return abs(evaluate_form(array, vectors)), vectors, sweeps


def opnorm_ascent(tensor: CoefficientTensor, p, starts: int = None,
                  seed: int = 0, tol: float = None, max_sweeps: int = None,
                  jobs: int = 1) -> OpNormEstimate:
    """
    Multistart alternating Hoelder ascent. Every slot update is the exact
    maximizer over that slot, so the objective never decreases; the best
    value over all starts is returned as a lower bound of the norm.

    :param tensor: coefficient tensor
    :param p: space exponents, one per axis
    :param starts: number of starts (start 0 is deterministic)
    :param seed: base seed, start i draws from the stream (seed, i)
    :param tol: relative sweep improvement below which a start stops
    :param max_sweeps: sweep cap per start
    :param jobs: worker processes, the result does not depend on it
    """
    p = _check_exponents(tensor, p)
    starts = settings.ASCENT_STARTS if starts is None else starts
    tol = settings.ASCENT_TOL if tol is None else tol
    max_sweeps = settings.ASCENT_MAX_SWEEPS if max_sweeps is None else max_sweeps
    if starts < 1:
        raise ValueError("at least one start is needed")

    method = OpNormMethod.ALTERNATING_ASCENT
    if not tensor.array.any():
        return _zero_estimate(tensor, method, exact=False, starts=starts)

    jobs_list = [(tensor.array, tuple(p), start, seed, tol, max_sweeps)
                 for start in range(starts)]
    results = parallel_map(_ascent_start, jobs_list, jobs)

    # strict comparison keeps the lowest start index on ties
    best = 0
    for i, result in enumerate(results):
        if result[0] > results[best][0]:
            best = i
    value, vectors, sweeps = results[best]
    logger.debug(
        f"ascent: best start {best} of {starts}, {sweeps} sweeps, {value:.12g}")
    return OpNormEstimate(
        value=float(value), method=method, exact=False,
        certificate=tuple(vectors), iterations=sweeps, starts=starts)


@dataclass
class VectorValuedOp:
    """
    An m-linear operator into l_r^d, stored as an (m+1)-axis tensor whose
    last axis holds the codomain coordinates.
    """
    p: ExponentTuple
    r: ExtExp
    tensor: CoefficientTensor

    def __post_init__(self):
        self.p = ExponentTuple(self.p)
        self.r = ExtExp.of(self.r)
        if not self.r.is_space_index():
            raise ExponentDomainError(f"codomain exponent {self.r} is below 1")
        if self.tensor.rank != len(self.p) + 1:
            raise RankMismatch(
                f"an operator with {len(self.p)} arguments needs a rank "
                f"{len(self.p) + 1} tensor, got rank {self.tensor.rank}")

    @property
    def m(self) -> int:
        return len(self.p)

    @property
    def d(self) -> int:
        return self.tensor.dims[-1]

    def mixed_norm(self, q) -> float:
        """(q_1, ..., q_m)-mixed norm of the vectors ||A(e_j1, ..., e_jm)||_r."""
        q = ExponentTuple(q)
        if len(q) != self.m:
            raise RankMismatch(f"{len(q)} exponents for {self.m} arguments")
        return mixed_norm(self.tensor, MixedNormSpec.natural(q + (self.r,)))


def lift_vector_valued(op: VectorValuedOp) -> Tuple[CoefficientTensor, ExponentTuple]:
    """
    Scalar (m+1)-linear form on l_p1 x ... x l_pm x l_r* with the same
    coefficients; ||v||_r is the sup over the dual ball, so the lift is
    isometric.
    """
    return op.tensor, op.p + (conjugate(op.r),)


def split_scalar_form(tensor: CoefficientTensor, p) -> VectorValuedOp:
    """
    Inverse of the lift: an m-form becomes an (m-1)-linear operator into
    the dual l_(p_m*) of the last space.
    """
    p = _check_exponents(tensor, p)
    if tensor.rank < 2:
        raise RankMismatch("splitting needs a form with at least two arguments")
    return VectorValuedOp(p=ExponentTuple(p[:-1]), r=conjugate(p[-1]),
                          tensor=tensor)


def check_certificate(tensor: CoefficientTensor, p,
                      estimate: OpNormEstimate,
                      rtol: float = CERTIFICATE_RTOL):
    """
    Asserts unit l_pk norms of the certificate and that evaluating the form
    on it reproduces the reported value.

    :raises CertificateError: on any mismatch
    """
    p = ExponentTuple(p)
    for k, (vector, pk) in enumerate(zip(estimate.certificate, p)):
        norm = lp_norm(vector, pk)
        if abs(norm - 1) > rtol:
            raise CertificateError(
                f"certificate vector {k + 1} has l_{pk} norm {norm!r}")
    attained = abs(evaluate_form(tensor, estimate.certificate))
    if abs(attained - estimate.value) > rtol * max(estimate.value, 1.0):
        raise CertificateError(
            f"certificate attains {attained!r}, reported {estimate.value!r}")


def operator_norm(tensor: CoefficientTensor, p,
                  method: OpNormMethod = OpNormMethod.AUTO,
                  budget: int = None, starts: int = None, seed: int = 0,
                  tol: float = None, max_sweeps: int = None,
                  jobs: int = 1) -> OpNormEstimate:
    """
    Operator norm with an exact method whenever one applies: diagonal forms
    use the closed form, real forms on l_inf balls within the enumeration
    budget are enumerated, everything else goes to the ascent.
    """
    p = _check_exponents(tensor, p)
    method = OpNormMethod(method)
    budget = settings.ENUMERATION_BUDGET if budget is None else budget
    all_infinite = all(pk.is_infinite for pk in p)

    if method is OpNormMethod.AUTO:
        if is_diagonal(tensor):
            method = OpNormMethod.DIAGONAL_CLOSED_FORM
        elif (tensor.field is Field.REAL and all_infinite
              and enumeration_size(tensor.dims) <= budget):
            method = OpNormMethod.EXACT_ENUMERATION
        else:
            method = OpNormMethod.ALTERNATING_ASCENT

    if method is OpNormMethod.DIAGONAL_CLOSED_FORM:
        if not is_diagonal(tensor):
            raise UnsupportedMethod("the closed form needs a diagonal tensor")
        estimate = opnorm_diagonal_closed_form(diagonal(tensor), p)
    elif method is OpNormMethod.EXACT_ENUMERATION:
        if not all_infinite:
            raise UnsupportedMethod(
                "sign enumeration needs l_inf balls, use the ascent for "
                "finite exponents")
        estimate = opnorm_exact_signs(tensor, budget=budget)
    else:
        estimate = opnorm_ascent(
            tensor, p, starts=starts, seed=seed, tol=tol,
            max_sweeps=max_sweeps, jobs=jobs)

    check_certificate(tensor, p, estimate)
    return estimate
