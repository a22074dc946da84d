"""Sampled signals on the integer grid ``a - n, ..., a, a + 1, ...``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HistoryError

__all__ = ["SampledSignal"]


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Real scalar or vector samples starting ``history`` steps before ``base``.

    ``values[i]`` is the sample at grid point ``base - history + i``. Scalar
    signals are stored with shape ``(L,)`` and vector signals with ``(L, d)``.
    """

    values: np.ndarray
    base: int = 0
    history: int = 1

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim not in (1, 2):
            raise ValueError("values must be 1-d (scalar) or 2-d (vector) samples")
        if len(v) < self.history:
            raise ValueError("fewer samples than history length")
        if not np.all(np.isfinite(v)):
            raise ValueError("signal samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "base", int(self.base))

    @classmethod
    def from_parts(cls, history, samples, base: int = 0) -> SampledSignal:
        history = np.asarray(history, dtype=float)
        samples = np.asarray(samples, dtype=float)
        if history.ndim == samples.ndim - 1:
            history = history[None]
        return cls(np.concatenate([history, samples]), base=base, history=len(history))

    @property
    def start(self) -> int:
        return self.base - self.history

    @property
    def k_max(self) -> int:
        return self.start + len(self.values) - 1

    @property
    def dimension(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    @property
    def is_scalar(self) -> bool:
        return self.values.ndim == 1

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.start, self.k_max + 1)

    @property
    def samples(self) -> np.ndarray:
        return self.values[self.history:]

    def index(self, k: int) -> int:
        if k < self.start or k > self.k_max:
            raise HistoryError(f"k={k} outside signal range {self.start}..{self.k_max}")
        return k - self.start

    def __call__(self, k: int):
        return self.values[self.index(k)]

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Samples at ``lo .. hi`` inclusive."""
        return self.values[self.index(lo): self.index(hi) + 1]

    def map(self, func) -> SampledSignal:
        return SampledSignal(func(self.values), base=self.base, history=self.history)

    def component(self, i: int) -> SampledSignal:
        return SampledSignal(self.values[:, i], base=self.base, history=self.history)

    def __len__(self) -> int:
        return len(self.values)
