# ---------------------------------------------------------------------
# ohcsvm/config.py
# ---------------------------------------------------------------------
# Run configuration: one JSON document with an explicit schema version.
#
# Every block carries its defaults, so the materialised config written
# to the run manifest fully describes a run. Seeds have no defaults.
# ---------------------------------------------------------------------

import json
import math
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ohcsvm.constants_config import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    CONFIG_SCHEMA_VERSION,
    DEFAULT_C_GRID,
    DEFAULT_FOLDS,
    DEFAULT_FRACTIONS,
    DEFAULT_TEST_FRACTION,
    DEFAULT_THRESHOLD,
    EPS_DIV,
    FD_STEP,
    HOLE_DIAMETER,
    KTA_BATCH_SIZE,
    KTA_ITERATIONS,
    KTA_LEARNING_RATE,
    KTA_LOG_EVERY,
    MAX_QUBITS,
    PLATE_D1,
    PLATE_D2,
    PLATE_T,
    SMO_TOL,
)
from ohcsvm.errors import ConfigValidationError

TRAINABLE_KINDS = ("rbf", "he2")


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SyntheticBlock(_Block):
    n: int = Field(ge=4, description="number of radial paths; one terminal sample each")


class InputBlock(_Block):
    files: List[Path] = Field(default_factory=list)
    format: Literal["auto", "homogenized", "raw"] = "auto"
    synthetic: Optional[SyntheticBlock] = None


class GeometryBlock(_Block):
    d1: float = Field(PLATE_D1, gt=0)
    d2: float = Field(PLATE_D2, gt=0)
    t: float = Field(PLATE_T, gt=0)
    hole_diameter: float = Field(HOLE_DIAMETER, gt=0)


class LabelingBlock(_Block):
    threshold: float = Field(DEFAULT_THRESHOLD, gt=0, lt=1)
    eps_div: float = Field(EPS_DIV, gt=0)


class ScalingBlock(_Block):
    classical: Tuple[float, float] = (-1.0, 1.0)
    quantum: Tuple[float, float] = (-math.pi / 2, math.pi / 2)

    @field_validator("classical", "quantum")
    @classmethod
    def _non_degenerate(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[0] == value[1]:
            raise ValueError("scaling interval must be non-degenerate")
        return value


class SplitBlock(_Block):
    test_fraction: float = Field(DEFAULT_TEST_FRACTION, gt=0, lt=1)


class KernelEntry(_Block):
    name: str = Field(pattern=r"^[A-Za-z0-9_-]+$")
    kind: Literal["rbf", "polynomial", "sigmoid", "iqp", "he2"]
    gamma: float = Field(1.0, gt=0)
    c0: float = 0.0
    degree: int = Field(3, ge=1)
    width: int = Field(3, ge=1, le=MAX_QUBITS)
    depth: int = Field(1, ge=1)
    theta: Optional[List[float]] = None
    train: bool = False
    C: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _check_kind(self) -> "KernelEntry":
        if self.train and self.kind not in TRAINABLE_KINDS:
            raise ValueError(f"kind '{self.kind}' is not trainable")
        if self.theta is not None:
            if self.kind != "he2":
                raise ValueError("theta applies to he2 kernels only")
            if len(self.theta) != self.width * self.depth:
                raise ValueError(
                    f"theta needs width*depth = {self.width * self.depth} angle(s), "
                    f"got {len(self.theta)}"
                )
        return self

    @property
    def quantum(self) -> bool:
        return self.kind in ("iqp", "he2")


class KtaBlock(_Block):
    iterations: int = Field(KTA_ITERATIONS, ge=0)
    learning_rate: float = Field(KTA_LEARNING_RATE, gt=0)
    batch_size: int = Field(KTA_BATCH_SIZE, ge=2)
    log_every: int = Field(KTA_LOG_EVERY, ge=1)
    fd_step: float = Field(FD_STEP, gt=0)
    beta1: float = Field(ADAM_BETA1, ge=0, lt=1)
    beta2: float = Field(ADAM_BETA2, ge=0, lt=1)
    eps: float = Field(ADAM_EPS, gt=0)
    sweep: bool = False


class SvmBlock(_Block):
    tol: float = Field(SMO_TOL, gt=0)
    max_iter: Optional[int] = Field(None, ge=1)
    c_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_C_GRID), min_length=1)
    folds: int = Field(DEFAULT_FOLDS, ge=2)

    @field_validator("c_grid")
    @classmethod
    def _positive(cls, value: List[float]) -> List[float]:
        if any(c <= 0 for c in value):
            raise ValueError("every C must be > 0")
        return value


class CurveBlock(_Block):
    fractions: List[float] = Field(default_factory=lambda: list(DEFAULT_FRACTIONS), min_length=1)

    @field_validator("fractions")
    @classmethod
    def _in_unit_interval(cls, value: List[float]) -> List[float]:
        if any(not (0 < f <= 1) for f in value):
            raise ValueError("fractions must lie in (0, 1]")
        return value


class SeedsBlock(_Block):
    split_seed: int
    theta_seed: int
    adam_seed: int
    cv_seed: int
    synth_seed: int


class RunConfig(_Block):
    schema_version: Literal[1] = CONFIG_SCHEMA_VERSION
    input: InputBlock
    geometry: GeometryBlock = Field(default_factory=GeometryBlock)
    labeling: LabelingBlock = Field(default_factory=LabelingBlock)
    scaling: ScalingBlock = Field(default_factory=ScalingBlock)
    split: SplitBlock = Field(default_factory=SplitBlock)
    kernels: List[KernelEntry] = Field(min_length=1)
    kta: KtaBlock = Field(default_factory=KtaBlock)
    svm: SvmBlock = Field(default_factory=SvmBlock)
    curve: CurveBlock = Field(default_factory=CurveBlock)
    seeds: SeedsBlock
    output_dir: Path = Path("output/run")

    @field_validator("kernels")
    @classmethod
    def _unique_names(cls, value: List[KernelEntry]) -> List[KernelEntry]:
        names = [k.name for k in value]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate kernel name(s) {duplicates}")
        return value

    def kernel(self, name: str) -> KernelEntry:
        for entry in self.kernels:
            if entry.name == name:
                return entry
        raise KeyError(name)

    def materialized(self) -> Dict:
        return json.loads(self.model_dump_json())


def _format_errors(exc: ValidationError) -> List[str]:
    problems = []
    for err in exc.errors():
        where = ".".join(str(part) for part in err["loc"]) or "<root>"
        problems.append(f"{where}: {err['msg']}")
    return problems


def validate_run_config(config: RunConfig) -> List[str]:
    """Problems that the schema cannot see: missing files, absent input."""
    problems = []
    if not config.input.files and config.input.synthetic is None:
        problems.append("input: give at least one file or a synthetic block")
    for file in config.input.files:
        if not file.is_file():
            problems.append(f"input.files: {file} does not exist")
    return problems


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """
    Parse and validate a config file. Relative input paths resolve against
    the config file's directory. All problems are raised together.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigValidationError([f"config file {path} does not exist"])
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigValidationError([f"{path}: invalid JSON ({exc})"])

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigValidationError(_format_errors(exc))

    base = path.resolve().parent
    files = [f if f.is_absolute() else base / f for f in config.input.files]
    config = config.model_copy(
        update={"input": config.input.model_copy(update={"files": files})}
    )

    problems = validate_run_config(config)
    if problems:
        raise ConfigValidationError(problems)
    return config


def apply_seed_overrides(config: RunConfig, overrides: Optional[Sequence[str]]) -> RunConfig:
    """Apply `name=value` seed overrides, e.g. split_seed=7."""
    if not overrides:
        return config
    allowed = list(SeedsBlock.model_fields)
    seeds = config.seeds.model_dump()
    problems = []
    for item in overrides:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or name not in allowed:
            problems.append(f"--seed-override {item!r}: expected one of {allowed} as name=value")
            continue
        try:
            seeds[name] = int(value)
        except ValueError:
            problems.append(f"--seed-override {item!r}: value must be an integer")
    if problems:
        raise ConfigValidationError(problems)
    return config.model_copy(update={"seeds": SeedsBlock(**seeds)})
