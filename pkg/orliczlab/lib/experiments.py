"""
Experiments on the mixed-norm inequalities: ratio tables, growth probes
and the exhaustive search for the bilinear constant over sign matrices.
"""
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from orliczlab import settings
from orliczlab.lib.data_types import Field, OpNormEstimate, OpNormMethod, Verdict
from orliczlab.lib.exceptions import (
    BudgetExceeded,
    InequalityViolation,
    InvariantViolation,
    ProbeError,
    RankMismatch,
    TensorFormatError,
    UnsupportedMethod,
)
from orliczlab.lib.exponents import (
    AdmissibilityVerdict,
    ExponentTuple,
    ExtExp,
    ProblemSpec,
    cotcrit_admissible,
    dual_space_cotype,
    mu,
    orl_admissible,
    orl_thresholds,
)
from orliczlab.lib.opnorm import (
    VectorValuedOp,
    enumeration_size,
    lift_vector_valued,
    operator_norm,
    sign_vectors,
)
from orliczlab.lib.tensor import (
    CoefficientTensor,
    MixedNormSpec,
    embed,
    flat_norm,
    is_diagonal,
    mixed_norm,
)
from orliczlab.lib.utilities import parallel_map, profiled, stream_rng
from orliczlab.lib.witness import WitnessFamily

import logging
logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

SQRT2 = math.sqrt(2)
# slack of the hard assertion against the proven constant
BOUND_TOL = 1e-9
SEARCH_TOL = 1e-12
# sign-matrix classes per work unit of the constant search
SEARCH_CHUNK = 2 ** 12
SYMMETRY_SAMPLES = 8


@dataclass
class Instance:
    """A form entering a ratio table, with the size and seed it came from."""
    tensor: CoefficientTensor
    n: int
    seed: Optional[int] = None
    label: str = ''


@dataclass
class RatioRow:
    n: int
    seed: Optional[int]
    mixed_norm: float
    opnorm: float
    opnorm_exact: bool
    method: OpNormMethod
    label: str = ''

    @property
    def ratio(self) -> float:
        if self.opnorm == 0:
            return 0.0
        return self.mixed_norm / self.opnorm

    def to_json(self):
        return {
            'label': self.label,
            'n': self.n,
            'seed': self.seed,
            'mixed_norm': self.mixed_norm,
            'opnorm': self.opnorm,
            'opnorm_exact': self.opnorm_exact,
            'method': self.method.value,
            'ratio': self.ratio,
        }


def bound_holds(ratio: float, bound: float) -> bool:
    return ratio <= bound + BOUND_TOL


def _check_orlicz_bound(spec: ProblemSpec, tensor: CoefficientTensor, row: RatioRow):
    """Hard check of the (l_2, l_1) mixed norm against sqrt(2) ||A|| for real
    bilinear forms on l_inf x l_inf, whichever exponents are being measured."""
    if not (spec.is_orlicz() and row.opnorm_exact) or not row.opnorm:
        return
    outer_two = mixed_norm(tensor, MixedNormSpec(order=(1, 2), exps=(2, 1)))
    ratio = outer_two / row.opnorm
    if not bound_holds(ratio, SQRT2):
        raise InequalityViolation(ratio, SQRT2, label=row.label)


def _complete_q(spec: ProblemSpec, q) -> ExponentTuple:
    """Exponents for all m nesting levels, the innermost forced to
    conjugate(p_sigma(m))."""
    q = ExponentTuple(q)
    inner, _ = orl_thresholds(spec)
    if len(q) == spec.m - 1:
        return q + (inner,)
    if len(q) == spec.m:
        if q[-1] != inner:
            logger.warning(
                f"innermost exponent {q[-1]} replaced by the optimal {inner}")
        return ExponentTuple(q[:-1]) + (inner,)
    raise RankMismatch(f"{len(q)} exponents for m={spec.m}")


@dataclass
class VerificationReport:
    spec: ProblemSpec
    q: ExponentTuple
    admissibility: AdmissibilityVerdict
    rows: List[RatioRow]
    bound: Optional[float] = None

    @property
    def max_ratio(self) -> float:
        return max((row.ratio for row in self.rows), default=0.0)

    @property
    def passed(self) -> Optional[bool]:
        if self.bound is None:
            return None
        return all(bound_holds(row.ratio, self.bound)
                   for row in self.rows if row.opnorm_exact)

    def to_json(self):
        return {
            'spec': self.spec.to_json(),
            'q': self.q.to_json(),
            'admissible': self.admissibility.admissible,
            'thresholds': self.admissibility.thresholds.to_json(),
            'bound': self.bound,
            'passed': self.passed,
            'max_ratio': self.max_ratio,
            'rows': [row.to_json() for row in self.rows],
        }

    def summary(self) -> str:
        status = {True: 'PASS', False: 'FAIL', None: 'no proven bound'}[self.passed]
        return (f"max_ratio={self.max_ratio:.12g}, instances={len(self.rows)}, "
                f"admissible={self.admissibility.admissible}, {status}")


def _ratio_row(instance: Instance, spec: ProblemSpec, q: ExponentTuple,
               budget, starts, seed, tol, max_sweeps) -> RatioRow:
    tensor = instance.tensor
    mixed = mixed_norm(tensor, MixedNormSpec(order=spec.sigma, exps=q))
    estimate = operator_norm(
        tensor, spec.p, budget=budget, starts=starts, seed=seed, tol=tol,
        max_sweeps=max_sweeps)
    return RatioRow(
        n=instance.n, seed=instance.seed, mixed_norm=mixed,
        opnorm=estimate.value, opnorm_exact=estimate.exact,
        method=estimate.method, label=instance.label)


def _verify_instance(job) -> RatioRow:
    instance, spec, q, check_embedding, budget, starts, seed, tol, max_sweeps = job
    row = _ratio_row(instance, spec, q, budget, starts, seed, tol, max_sweeps)
    _check_orlicz_bound(spec, instance.tensor, row)
    if check_embedding and row.opnorm_exact:
        tensor = instance.tensor
        padded = Instance(
            tensor=embed(tensor, [d + 1 for d in tensor.dims]),
            n=instance.n + 1, label=instance.label)
        padded_row = _ratio_row(
            padded, spec, q, budget, starts, seed, tol, max_sweeps)
        if padded_row.opnorm_exact and (
                abs(padded_row.ratio - row.ratio) > BOUND_TOL * max(1.0, row.ratio)):
            raise InvariantViolation(
                f"zero padding changed the ratio of {instance.label or 'instance'} "
                f"from {row.ratio!r} to {padded_row.ratio!r}")
    return row


def _as_instance(item, index: int) -> Instance:
    if isinstance(item, Instance):
        return item
    return Instance(tensor=item, n=max(item.dims), label=f"#{index}")


@profiled
def verify_inequality(spec: ProblemSpec, q,
                      instances: Sequence[Union[Instance, CoefficientTensor]],
                      check_embedding: bool = False, budget: int = None,
                      starts: int = None, seed: int = 0, tol: float = None,
                      max_sweeps: int = None,
                      jobs: int = 1) -> VerificationReport:
    """
    Ratio of the permuted mixed norm to the operator norm for every instance.

    :param spec: arity, space exponents and summation order
    :param q: outer exponents q_1..q_(m-1) (an m-th entry is replaced by the
        optimal innermost exponent)
    :param instances: tensors or Instance records of rank m
    :param check_embedding: also verify that zero padding keeps the ratio
    :return: the ratio table
    :param tol: ascent stopping tolerance, for instances without an exact method
    :param max_sweeps: ascent sweep cap per start
    :raises InequalityViolation: an exact (l_2, l_1) ratio above sqrt(2) for
        the bilinear l_inf x l_inf case
    """
    q = _complete_q(spec, q)
    admissibility = orl_admissible(spec, q[:spec.m - 1])
    instances = [_as_instance(item, i) for i, item in enumerate(instances)]
    for instance in instances:
        if instance.tensor.rank != spec.m:
            raise RankMismatch(
                f"instance {instance.label} has rank {instance.tensor.rank}, "
                f"expected {spec.m}")
        if spec.field is Field.REAL and instance.tensor.field is Field.COMPLEX:
            raise TensorFormatError(
                f"instance {instance.label} is complex, the problem is "
                f"posed over the reals")
    jobs_list = [(instance, spec, q, check_embedding, budget, starts, seed,
                  tol, max_sweeps)
                 for instance in instances]
    rows = parallel_map(_verify_instance, jobs_list, jobs)
    bound = SQRT2 if spec.is_orlicz() and q[0] >= 2 else None
    report = VerificationReport(
        spec=spec, q=q, admissibility=admissibility, rows=rows, bound=bound)
    inexact = sum(1 for row in rows if not row.opnorm_exact)
    if inexact:
        logger.warning(
            f"{inexact} operator norms are ascent lower bounds, their ratios "
            f"overestimate the true ratio")
    return report


@dataclass
class ClassicalRatios:
    """The three classical bilinear inequalities on l_inf x l_inf."""
    opnorm: OpNormEstimate
    orlicz: float
    littlewood_mixed: float
    littlewood_43: float
    holder_bound: float

    def to_json(self):
        return {
            'opnorm': self.opnorm.value,
            'opnorm_exact': self.opnorm.exact,
            'orlicz': self.orlicz,
            'littlewood_mixed': self.littlewood_mixed,
            'littlewood_43': self.littlewood_43,
            'holder_bound': self.holder_bound,
        }


def classical_ratios(tensor: CoefficientTensor, budget: int = None,
                     starts: int = None, seed: int = 0, tol: float = None,
                     max_sweeps: int = None) -> ClassicalRatios:
    """
    Orlicz (l_2, l_1), mixed Littlewood (l_1, l_2) and Littlewood 4/3
    ratios of a real bilinear form. The flat 4/3 norm is bounded by the
    geometric mean of the two mixed norms, so all three ratios are at most
    sqrt(2) when the operator norm is exact.
    """
    if tensor.rank != 2:
        raise RankMismatch(f"classical ratios need a matrix, got rank {tensor.rank}")
    if tensor.field is not Field.REAL:
        raise UnsupportedMethod("the classical constants are for real forms")
    estimate = operator_norm(
        tensor, ('inf', 'inf'), budget=budget, starts=starts, seed=seed,
        tol=tol, max_sweeps=max_sweeps)
    outer_two = mixed_norm(tensor, MixedNormSpec(order=(1, 2), exps=(2, 1)))
    outer_one = mixed_norm(tensor, MixedNormSpec(order=(1, 2), exps=(1, 2)))
    four_thirds = flat_norm(tensor, ExtExp.of('4/3'))
    holder = math.sqrt(outer_two * outer_one)

    if four_thirds > holder * (1 + SEARCH_TOL):
        raise InvariantViolation(
            f"flat 4/3 norm {four_thirds!r} above the mixed Hoelder bound {holder!r}")
    op = estimate.value
    ratios = ClassicalRatios(
        opnorm=estimate,
        orlicz=outer_two / op if op else 0.0,
        littlewood_mixed=outer_one / op if op else 0.0,
        littlewood_43=four_thirds / op if op else 0.0,
        holder_bound=holder / op if op else 0.0,
    )
    if estimate.exact:
        for name in ('orlicz', 'littlewood_mixed', 'littlewood_43'):
            ratio = getattr(ratios, name)
            if not bound_holds(ratio, SQRT2):
                raise InequalityViolation(ratio, SQRT2, label=name)
    return ratios


@dataclass
class GrowthReport:
    """Ratio rows of a size sweep and the log-log slope of the median ratio."""
    spec: ProblemSpec
    q: ExponentTuple
    family: WitnessFamily
    admissibility: AdmissibilityVerdict
    rows: List[RatioRow]
    sizes: List[int]
    medians: List[float]
    slope: float
    r_squared: float
    verdict: Verdict
    truncated: List[int] = field(default_factory=list)

    def to_json(self):
        return {
            'spec': self.spec.to_json(),
            'q': self.q.to_json(),
            'family': self.family.to_json(),
            'admissible': self.admissibility.admissible,
            'thresholds': self.admissibility.thresholds.to_json(),
            'sizes': self.sizes,
            'medians': self.medians,
            'slope': self.slope,
            'r_squared': self.r_squared,
            'verdict': self.verdict.value,
            'truncated': self.truncated,
            'rows': [row.to_json() for row in self.rows],
        }

    def summary(self) -> str:
        return (f"slope={self.slope:.6g}, r2={self.r_squared:.6g}, "
                f"verdict={self.verdict.value}, "
                f"admissible={self.admissibility.admissible}")


def _exact_available(tensor: CoefficientTensor, p, budget: int) -> bool:
    if is_diagonal(tensor):
        return True
    return (tensor.field is Field.REAL
            and all(ExtExp.of(pk).is_infinite for pk in p)
            and enumeration_size(tensor.dims) <= budget)


def _probe_instance(job) -> RatioRow:
    family, spec, q, n, seed, budget, starts, tol, max_sweeps = job
    member = family.emit(n, seed=seed, p=spec.p)
    if isinstance(member, VectorValuedOp):
        mixed = member.mixed_norm(q)
        tensor, p = lift_vector_valued(member)
    else:
        tensor, p = member, spec.p
        mixed = mixed_norm(tensor, MixedNormSpec(order=spec.sigma, exps=q))
    estimate = operator_norm(tensor, p, budget=budget, starts=starts, seed=seed,
                             tol=tol, max_sweeps=max_sweeps)
    row = RatioRow(
        n=n, seed=seed if family.is_random else None, mixed_norm=mixed,
        opnorm=estimate.value, opnorm_exact=estimate.exact,
        method=estimate.method, label=str(family))
    if not family.is_vector_valued:
        _check_orlicz_bound(spec, tensor, row)
    return row


def fit_log_slope(sizes: Sequence[int], values: Sequence[float]) -> Tuple[float, float]:
    """Least-squares slope of log(value) against log(n), with r^2."""
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if np.ptp(y) == 0:
        return 0.0, 1.0
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.rvalue ** 2)


@profiled
def probe_optimality(spec: ProblemSpec, q, family: WitnessFamily,
                     n_range: Sequence[int], seeds: Sequence[int] = (0,),
                     threshold: float = None, budget: int = None,
                     starts: int = None, tol: float = None,
                     max_sweeps: int = None, jobs: int = 1) -> GrowthReport:
    """
    Growth of the ratio along a witness family: median over seeds per size,
    then a least-squares fit of log ratio against log n. The verdict is
    growing iff the slope exceeds the threshold.

    Scalar families take q_1..q_(m-1) (the innermost exponent is forced);
    vector-valued families take q_1..q_m and are judged against the cotype
    thresholds of their codomain.

    :raises ProbeError: fewer than four sizes, also after budget truncation
    """
    threshold = settings.GROWTH_THRESHOLD if threshold is None else threshold
    budget = settings.ENUMERATION_BUDGET if budget is None else budget
    sizes = sorted(set(int(n) for n in n_range))
    if len(sizes) < 4:
        raise ProbeError(f"a growth fit needs at least 4 sizes, got {sizes}")
    if family.m != spec.m:
        raise RankMismatch(f"family has m={family.m}, spec has m={spec.m}")

    if family.is_vector_valued:
        if spec.sigma != tuple(range(1, spec.m + 1)):
            raise UnsupportedMethod("vector-valued probes use the natural order")
        q = ExponentTuple(q)
        admissibility = cotcrit_admissible(spec.p, family.codomain_r, q)
    else:
        q = _complete_q(spec, q)
        admissibility = orl_admissible(spec, q[:spec.m - 1])

    seeds = list(seeds) if family.is_random else list(seeds)[:1]
    if not seeds:
        raise ProbeError("no seeds given")

    # sizes whose exact norm would exceed the budget are dropped
    truncated = []
    first = family.emit(sizes[0], seed=seeds[0], p=spec.p)
    if isinstance(first, VectorValuedOp):
        first_tensor, first_p = lift_vector_valued(first)
    else:
        first_tensor, first_p = first, spec.p
    if (_exact_available(first_tensor, first_p, budget)
            and not is_diagonal(first_tensor)):
        for i, n in enumerate(sizes):
            if enumeration_size((n,) * first_tensor.rank) > budget:
                truncated = sizes[i:]
                sizes = sizes[:i]
                logger.warning(
                    f"sizes {truncated} exceed the enumeration budget "
                    f"{budget} and are dropped")
                break
    if len(sizes) < 4:
        raise ProbeError(
            f"only {len(sizes)} sizes left within budget, at least 4 needed")

    jobs_list = [(family, spec, q, n, seed, budget, starts, tol, max_sweeps)
                 for n in sizes for seed in seeds]
    rows = parallel_map(_probe_instance, jobs_list, jobs)

    medians = []
    for n in sizes:
        ratios = [row.ratio for row in rows if row.n == n]
        medians.append(float(np.median(ratios)))
    slope, r_squared = fit_log_slope(sizes, medians)
    verdict = Verdict.GROWING if slope > threshold else Verdict.BOUNDED
    report = GrowthReport(
        spec=spec, q=q, family=family, admissibility=admissibility, rows=rows,
        sizes=sizes, medians=medians, slope=slope, r_squared=r_squared,
        verdict=verdict, truncated=truncated)
    if not all(row.opnorm_exact for row in rows):
        logger.warning("ascent norms in the probe, ratios are upper estimates")
    return report


@dataclass
class ConstantSearchReport:
    n: int
    reduce_symmetry: bool
    best_ratio: float
    argmax: np.ndarray
    mixed_norm: float
    opnorm: float
    classes: int
    wall_time: float

    def to_json(self):
        return {
            'n': self.n,
            'reduce_symmetry': self.reduce_symmetry,
            'best_ratio': self.best_ratio,
            'argmax': self.argmax.tolist(),
            'mixed_norm': self.mixed_norm,
            'opnorm': self.opnorm,
            'classes': self.classes,
            'wall_time': self.wall_time,
        }

    def summary(self) -> str:
        return f"max_ratio={self.best_ratio:.12g}, classes={self.classes}"


def _free_entries(n: int, reduce_symmetry: bool) -> int:
    return (n - 1) ** 2 if reduce_symmetry else n ** 2


def sign_matrices(n: int, indices: np.ndarray, reduce_symmetry: bool) -> np.ndarray:
    """
    Sign matrices for class indices; bit b of an index is the sign of the
    b-th free entry in row-major order (1 means -1). With symmetry
    reduction the first row and column are fixed to +1, one
    representative per orbit of row and column negations.
    """
    free = _free_entries(n, reduce_symmetry)
    bits = (indices[:, np.newaxis] >> np.arange(free, dtype=np.int64)) & 1
    signs = 1.0 - 2.0 * bits
    if not reduce_symmetry:
        return signs.reshape(len(indices), n, n)
    matrices = np.ones((len(indices), n, n))
    matrices[:, 1:, 1:] = signs.reshape(len(indices), n - 1, n - 1)
    return matrices


def _batch_ratios(matrices: np.ndarray, columns: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(2,1) mixed norms, exact l_inf x l_inf norms and ratios of a batch."""
    magnitudes = np.abs(matrices)
    mixed = np.sqrt((magnitudes.sum(axis=2) ** 2).sum(axis=1))
    fibers = matrices @ columns.T
    opnorms = np.abs(fibers).sum(axis=1).max(axis=1)
    return mixed, opnorms, mixed / opnorms


def _search_chunk(job) -> Tuple[float, int]:
    n, start, stop, reduce_symmetry = job
    indices = np.arange(start, stop, dtype=np.int64)
    matrices = sign_matrices(n, indices, reduce_symmetry)
    _, _, ratios = _batch_ratios(matrices, sign_vectors(n))
    k = int(np.argmax(ratios))
    return float(ratios[k]), start + k


def _check_symmetry(matrix: np.ndarray, ratio: float, samples: int):
    """Ratios along random row and column negations of matrix agree."""
    n = len(matrix)
    rng = stream_rng(0, n)
    columns = sign_vectors(n)
    for _ in range(samples):
        rows = 1.0 - 2.0 * rng.integers(0, 2, size=n)
        cols = 1.0 - 2.0 * rng.integers(0, 2, size=n)
        negated = (rows[:, np.newaxis] * matrix * cols[np.newaxis, :])[np.newaxis]
        _, _, other = _batch_ratios(negated, columns)
        if abs(other[0] - ratio) > SEARCH_TOL:
            raise InvariantViolation(
                f"ratio changed under sign symmetry: {ratio!r} != {other[0]!r}")


@profiled
def search_constant(n: int, reduce_symmetry: bool = True, budget: int = None,
                    jobs: int = 1) -> ConstantSearchReport:
    """
    Largest (l_2, l_1) to operator norm ratio over all n x n sign matrices
    on l_inf x l_inf, a certified lower bound for the optimal constant at
    size n. Sign matrices are not known to be extremal for n > 2.

    :param n: matrix size
    :param reduce_symmetry: enumerate one matrix per row/column negation
        orbit
    :param budget: cap on classes times enumerated sign vectors
    :param jobs: worker processes, the report does not depend on it
    """
    if n < 1:
        raise RankMismatch(f"matrix size must be positive, got {n}")
    budget = settings.SEARCH_BUDGET if budget is None else budget
    free = _free_entries(n, reduce_symmetry)
    classes = 2 ** free
    work = classes * 2 ** (n - 1)
    if work > budget:
        raise BudgetExceeded(work, budget, what="constant search")

    start_time = time.perf_counter()
    chunks = [(n, start, min(start + SEARCH_CHUNK, classes), reduce_symmetry)
              for start in range(0, classes, SEARCH_CHUNK)]
    results = parallel_map(_search_chunk, chunks, jobs)
    # chunks come in index order; strict comparison keeps the lowest index
    best_ratio, best_index = results[0]
    for ratio, index in results[1:]:
        if ratio > best_ratio:
            best_ratio, best_index = ratio, index

    argmax = sign_matrices(
        n, np.array([best_index], dtype=np.int64), reduce_symmetry)[0]
    mixed = mixed_norm(CoefficientTensor(argmax), MixedNormSpec((1, 2), (2, 1)))
    estimate = operator_norm(CoefficientTensor(argmax), ('inf', 'inf'),
                             budget=max(enumeration_size((n, n)), 1))
    if abs(mixed / estimate.value - best_ratio) > SEARCH_TOL:
        raise InvariantViolation(
            f"batched ratio {best_ratio!r} disagrees with the direct "
            f"evaluation {mixed / estimate.value!r}")
    _check_symmetry(argmax, best_ratio, SYMMETRY_SAMPLES)
    if best_ratio > SQRT2 + SEARCH_TOL:
        raise InequalityViolation(best_ratio, SQRT2, label=f"n={n}")

    wall_time = time.perf_counter() - start_time
    logger.debug(f"searched {classes} classes of size {n} in {wall_time:.3f} s")
    return ConstantSearchReport(
        n=n, reduce_symmetry=reduce_symmetry, best_ratio=best_ratio,
        argmax=argmax, mixed_norm=mixed, opnorm=estimate.value,
        classes=classes, wall_time=wall_time)


@dataclass
class AdmissibilityReport:
    spec: ProblemSpec
    inner: ExtExp
    thresholds: ExponentTuple
    mu: ExtExp
    dual_cotype: ExtExp
    degenerate: bool

    @property
    def all_infinite(self) -> bool:
        return all(t.is_infinite for t in self.thresholds)

    def to_json(self):
        return {
            'spec': self.spec.to_json(),
            'inner': str(self.inner),
            'q': self.thresholds.to_json(),
            'mu': str(self.mu),
            'dual_cotype': str(self.dual_cotype),
            'degenerate': self.degenerate,
            'all_infinite': self.all_infinite,
        }

    def __str__(self):
        q = ', '.join(str(t) for t in self.thresholds)
        return (f"inner={self.inner} q=({q}) mu={self.mu} "
                f"dual_cotype={self.dual_cotype}"
                + (" degenerate" if self.degenerate else ""))


def admissibility_report(spec: ProblemSpec) -> AdmissibilityReport:
    """Minimal admissible exponents of spec, in exact rationals."""
    inner, thresholds = orl_thresholds(spec)
    last = spec.p_sigma[-1]
    mu_ = mu(last)
    return AdmissibilityReport(
        spec=spec, inner=inner, thresholds=thresholds, mu=mu_,
        dual_cotype=dual_space_cotype(last), degenerate=mu_.recip == 1)
