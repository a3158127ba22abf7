"""Pixel-intensity distributions on (0, 1]."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np


class UnsupportedModelError(ValueError):
    """A closed form was requested for a model it does not hold under."""


@dataclass(frozen=True)
class IntensityModel:
    """``uniform`` on (0, 1], ``truncnorm`` N(mu, sigma) restricted to (0, 1], or ``constant``."""

    kind: str = "uniform"
    sigma: float = 0.0
    mu: float = 0.5
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("uniform", "truncnorm", "constant"):
            raise ValueError(f"unknown intensity model {self.kind!r}")
        if self.kind == "truncnorm" and not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.kind == "constant" and not 0 < self.value <= 1:
            raise ValueError("constant intensity must lie in (0, 1]")

    @property
    def name(self) -> str:
        if self.kind == "uniform":
            return "U(0,1)"
        if self.kind == "truncnorm":
            return f"N({self.mu:g},{self.sigma:g})"
        return f"const({self.value:g})"

    @property
    def mean(self) -> float:
        if self.kind == "uniform":
            return 0.5
        if self.kind == "constant":
            return self.value
        if self.mu == 0.5:
            return 0.5  # truncation symmetric about the mean
        raise UnsupportedModelError("mean of an off-centre truncated normal is not tabulated")

    @classmethod
    def parse(cls, text: str) -> "IntensityModel":
        """Accepts ``uniform``, ``U(0,1)``, ``N(0.5,0.17)``, ``normal:0.25`` or ``const:0.7``."""
        t = text.replace(" ", "")
        if t.lower() in ("uniform", "u(0,1)", "u"):
            return cls("uniform")
        m = re.fullmatch(r"N\(([-\d.eE]+),([-\d.eE]+)\)", t, re.IGNORECASE)
        if m:
            return cls("truncnorm", sigma=float(m.group(2)), mu=float(m.group(1)))
        if t.lower().startswith("normal:"):
            return cls("truncnorm", sigma=float(t.split(":", 1)[1]))
        if t.lower().startswith("const:"):
            return cls("constant", value=float(t.split(":", 1)[1]))
        raise ValueError(f"cannot parse intensity model {text!r}")

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "uniform":
            return 1.0 - rng.random(size)  # (0, 1]
        if self.kind == "constant":
            return np.full(size, self.value)
        out = np.empty(int(np.prod(size)))
        todo = np.arange(out.size)
        while todo.size:
            draw = rng.normal(self.mu, self.sigma, todo.size)
            ok = (draw > 0.0) & (draw <= 1.0)
            out[todo[ok]] = draw[ok]
            todo = todo[~ok]
        return out.reshape(size)


UNIFORM = IntensityModel("uniform")
STUDY_MODELS = (
    UNIFORM,
    IntensityModel("truncnorm", sigma=0.17),
    IntensityModel("truncnorm", sigma=0.25),
    IntensityModel("truncnorm", sigma=0.5),
)
