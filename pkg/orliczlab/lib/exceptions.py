class OrliczLabError(Exception):
    exit_code = 1


class ExponentDomainError(OrliczLabError):
    exit_code = 6


class ExponentParseError(ExponentDomainError):
    exit_code = 2


class RankMismatch(OrliczLabError):
    exit_code = 5


class BudgetExceeded(OrliczLabError):
    exit_code = 4

    def __init__(self, required, budget, what="enumeration"):
        self.required = required
        self.budget = budget
        super().__init__(
            f"{what} needs {required} evaluations, budget is {budget}")


class TensorFormatError(OrliczLabError):
    exit_code = 7


class TensorIndexError(TensorFormatError, IndexError):
    pass


class UnsupportedMethod(OrliczLabError):
    exit_code = 8


class ProbeError(OrliczLabError):
    exit_code = 9


class HardAssertionFailure(OrliczLabError):
    exit_code = 10


class InequalityViolation(HardAssertionFailure):
    def __init__(self, ratio, bound, label=""):
        self.ratio = ratio
        self.bound = bound
        super().__init__(
            f"ratio {ratio!r} exceeds the proven bound {bound!r} {label}".strip())


class AscentMonotonicityError(HardAssertionFailure):
    pass


class CertificateError(HardAssertionFailure):
    pass


class InvalidPermutation(OrliczLabError):
    exit_code = 6


class InvariantViolation(HardAssertionFailure):
    pass


class ConfigurationError(OrliczLabError):
    exit_code = 2
