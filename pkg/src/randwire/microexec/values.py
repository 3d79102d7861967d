"""Dense tensor values exchanged with the reference interpreter."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError


@dataclass(frozen=True)
class TensorValue:
    """A (channels, height, width) tensor with row-major float data."""

    shape: tuple[int, int, int]
    data: tuple[float, ...]

    def __post_init__(self) -> None:
        c, h, w = self.shape
        if len(self.data) != c * h * w:
            raise ParameterError(
                f"data length {len(self.data)} does not match shape {self.shape}"
            )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "TensorValue":
        if arr.ndim != 3:
            raise ParameterError(f"expected a (C,H,W) array, got shape {arr.shape}")
        return cls(shape=tuple(int(s) for s in arr.shape), data=tuple(float(v) for v in arr.ravel()))

    def to_array(self) -> np.ndarray:
        return np.asarray(self.data, dtype=np.float64).reshape(self.shape)

    def to_json_dict(self) -> dict:
        return {"shape": list(self.shape), "data": list(self.data)}

    @classmethod
    def from_json_dict(cls, d: dict) -> "TensorValue":
        return cls(shape=tuple(int(s) for s in d["shape"]), data=tuple(float(v) for v in d["data"]))
