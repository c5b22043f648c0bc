"""Trajectory records and their CSV form.

Layout: ``#key=value`` metadata lines, a header ``step,<names...>,mean_payoff``,
then one row per sample with values at 12 significant digits.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MODEL_KINDS = ("replicator", "neural-mixed", "neural-quasi-pure")


def _fmt(v: float) -> str:
    return f"{v:.12g}"


@dataclass
class TrajectoryRecord:
    names: tuple[str, ...]
    steps: np.ndarray
    freqs: np.ndarray
    mean_payoff: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.names = tuple(self.names)
        self.steps = np.asarray(self.steps, dtype=np.int64)
        self.freqs = np.asarray(self.freqs, dtype=np.float64).reshape(len(self.steps), len(self.names))
        self.mean_payoff = np.asarray(self.mean_payoff, dtype=np.float64)
        if len(self.mean_payoff) != len(self.steps):
            raise ValueError("one mean payoff per row is required")
        if len(self.steps) and np.any(np.abs(self.freqs.sum(axis=1) - 1.0) > 1e-6):
            raise ValueError("frequency rows must lie on the simplex")
        kind = self.meta.get("model")
        if kind is not None and kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {kind!r}")

    def __len__(self):
        return len(self.steps)

    def column(self, name: str) -> np.ndarray:
        return self.freqs[:, self.names.index(name)]

    @property
    def final(self) -> np.ndarray:
        return self.freqs[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.meta.items():
            buf.write(f"#{key}={value}\n")
        buf.write(",".join(("step", *self.names, "mean_payoff")) + "\n")
        for s, row, pay in zip(self.steps, self.freqs, self.mean_payoff):
            buf.write(",".join((str(int(s)), *map(_fmt, row), _fmt(pay))) + "\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> TrajectoryRecord:
        meta = {}
        lines = text.splitlines()
        while lines and lines[0].startswith("#"):
            key, _, value = lines.pop(0)[1:].partition("=")
            meta[key] = value
        if not lines:
            raise ValueError("missing CSV header")
        header = lines.pop(0).split(",")
        if header[0] != "step" or header[-1] != "mean_payoff":
            raise ValueError(f"unexpected header {header}")
        rows = [ln.split(",") for ln in lines if ln]
        steps = [int(r[0]) for r in rows]
        freqs = [[float(v) for v in r[1:-1]] for r in rows]
        pay = [float(r[-1]) for r in rows]
        return cls(tuple(header[1:-1]), steps, np.array(freqs).reshape(len(rows), len(header) - 2), pay, meta)

    @classmethod
    def read_csv(cls, path) -> TrajectoryRecord:
        return cls.from_csv(Path(path).read_text())
