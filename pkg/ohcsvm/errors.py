# ---------------------------------------------------------------------
# ohcsvm/errors.py
# ---------------------------------------------------------------------
# Exception hierarchy for the library. The cli maps these onto exit
# codes; the app maps them onto HTTP status codes.
# ---------------------------------------------------------------------

from typing import Iterable, List, Optional, Sequence


class OhcSvmError(Exception):
    """Base class of every error raised by ohcsvm."""


# --- data pipeline -----------------------------------------------------

class InvalidRecordError(OhcSvmError):
    """A displacement/force record holds non-finite values."""


class ShearSingularityError(OhcSvmError):
    """Shear stress requested at vanishing shear strain with nonzero shear work."""


class DegeneratePathError(OhcSvmError):
    """No strain component of a load path ever exceeds eps_div."""


class ParseError(OhcSvmError):
    """A CSV input violates the schema. `row` is the 1-based data row, if known."""

    def __init__(self, message: str, row: Optional[int] = None) -> None:
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class EmptyDatasetError(OhcSvmError):
    """An input file or sample collection holds no records."""


class StratificationError(OhcSvmError):
    """A class is too small to be split or folded."""


# --- kernels and simulator ---------------------------------------------

class ShapeError(OhcSvmError, ValueError):
    """Dimension mismatch between vectors, matrices or qubit registers."""


class EmptyInputError(OhcSvmError, ValueError):
    """A kernel or Gram evaluation was asked for zero samples."""


class CapacityError(OhcSvmError):
    """Requested register width is outside the supported range."""


class EmbeddingSpecError(OhcSvmError):
    """An embedding specification is inconsistent (e.g. theta length)."""


# --- alignment ---------------------------------------------------------

class DegenerateKernelError(OhcSvmError):
    """A kernel matrix with zero Frobenius norm cannot be aligned."""


class NotTrainableError(OhcSvmError):
    """The kernel has no trainable parameters."""


class KtaDivergenceError(OhcSvmError):
    """KTA ascent produced a non-finite gradient."""

    def __init__(self, message: str, last_good: Sequence[float], iteration: int) -> None:
        super().__init__(message)
        self.last_good = list(last_good)
        self.iteration = iteration


# --- svm and evaluation ------------------------------------------------

class DegenerateLabelsError(OhcSvmError):
    """Training labels contain a single class."""


class ParameterError(OhcSvmError, ValueError):
    """A numeric parameter is outside its admissible range."""


class EmptyEvaluationError(OhcSvmError):
    """Metrics were requested for zero evaluated samples."""


# --- cli / pipeline ----------------------------------------------------

class ConfigValidationError(OhcSvmError):
    """Run configuration is invalid. Carries every problem found."""

    def __init__(self, problems: Iterable[str]) -> None:
        self.problems: List[str] = list(problems)
        lines = "\n".join(f"  - {p}" for p in self.problems)
        super().__init__(f"{len(self.problems)} configuration problem(s):\n{lines}")


class DependencyError(OhcSvmError):
    """A stage needs an artifact that an upstream stage has not produced."""

    def __init__(self, path: str, stage: str, producer: str) -> None:
        self.path = path
        self.stage = stage
        self.producer = producer
        super().__init__(
            f"stage '{stage}' requires {path} (run stage '{producer}' first)"
        )


class StageError(OhcSvmError):
    """Wraps a failure raised inside a pipeline stage."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")
