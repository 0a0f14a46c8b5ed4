"""
JSON file schemas (pydantic v2).

Matrix: {"dim": 4, "rows": [[...], ...]}
Path:   {"dim": 4, "origin": {matrix}?, "segments": [{"duration": 0.5, "generator_P": [[...]]}]}
System: same as a path without origin, durations summing to 1, "periodic": true
"""
from __future__ import annotations

import json
import math
from typing import Any, Dict, List, Optional, Type, TypeVar

import numpy as np
from pydantic import BaseModel, Field, ValidationError as PydanticValidationError, field_validator, model_validator

from posipath.core.exceptions import ValidationError
from posipath.models.domain import PeriodicSystem, PositivePath

M = TypeVar("M", bound=BaseModel)


def _square(rows: List[List[float]], dim: int, name: str) -> None:
    if dim < 2 or dim % 2:
        raise ValueError(f"{name}: dim must be a positive even integer")
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise ValueError(f"{name}: expected a {dim}x{dim} array")
    if not all(math.isfinite(x) for r in rows for x in r):
        raise ValueError(f"{name}: entries must be finite")


class MatrixModel(BaseModel):
    dim: int
    rows: List[List[float]]

    @model_validator(mode="after")
    def _check_shape(self) -> "MatrixModel":
        _square(self.rows, self.dim, "rows")
        return self

    def to_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    @classmethod
    def from_array(cls, A: np.ndarray) -> "MatrixModel":
        A = np.asarray(A, dtype=float)
        return cls(dim=int(A.shape[0]), rows=A.tolist())


class SegmentModel(BaseModel):
    duration: float = Field(gt=0.0)
    generator_P: List[List[float]]

    @field_validator("duration")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("duration must be finite")
        return v


class PathModel(BaseModel):
    dim: int
    origin: Optional[MatrixModel] = None
    segments: List[SegmentModel]

    @model_validator(mode="after")
    def _check_dims(self) -> "PathModel":
        for k, s in enumerate(self.segments):
            _square(s.generator_P, self.dim, f"segments[{k}].generator_P")
        if self.origin is not None and self.origin.dim != self.dim:
            raise ValueError("origin dimension differs from dim")
        return self

    def to_path(self) -> PositivePath:
        from posipath.services.positive_paths import make_path

        origin = None if self.origin is None else self.origin.to_array()
        return make_path([(s.duration, np.array(s.generator_P)) for s in self.segments],
                         origin=origin if origin is not None else np.eye(self.dim))

    @classmethod
    def from_path(cls, path: PositivePath) -> "PathModel":
        return cls(
            dim=path.dim,
            origin=MatrixModel.from_array(path.origin),
            segments=[SegmentModel(duration=s.duration, generator_P=np.asarray(s.P).tolist())
                      for s in path.segments],
        )


class SystemModel(BaseModel):
    dim: int
    periodic: bool = True
    segments: List[SegmentModel]

    @model_validator(mode="after")
    def _check_period(self) -> "SystemModel":
        if not self.periodic:
            raise ValueError("system files must set periodic: true")
        if not self.segments:
            raise ValueError("a system needs at least one segment")
        for k, s in enumerate(self.segments):
            _square(s.generator_P, self.dim, f"segments[{k}].generator_P")
        total = sum(s.duration for s in self.segments)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"segment durations sum to {total}, expected 1")
        return self

    def to_system(self) -> PeriodicSystem:
        from posipath.services.stability import make_system

        return make_system([(s.duration, np.array(s.generator_P)) for s in self.segments])

    @classmethod
    def from_system(cls, sys: PeriodicSystem) -> "SystemModel":
        return cls(dim=sys.dim, segments=[SegmentModel(duration=s.duration, generator_P=np.asarray(s.P).tolist())
                                          for s in sys.segments])


def parse_model(cls: Type[M], data: Any) -> M:
    """Validate a decoded JSON value; schema failures become ValidationError (exit 2)."""
    try:
        return cls.model_validate(data)
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid {cls.__name__} input", field=cls.__name__,
                              details={"errors": e.errors(include_url=False, include_context=False)})


def load_model(cls: Type[M], file_path: str) -> M:
    try:
        with open(file_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"Input file not found: {file_path}", field="input")
    except json.JSONDecodeError as e:
        raise ValidationError(f"Input is not valid JSON: {e}", field="input")
    return parse_model(cls, data)


def dump_model(model: BaseModel) -> Dict[str, Any]:
    return model.model_dump(exclude_none=True)
