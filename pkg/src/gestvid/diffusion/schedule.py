"""Forward-noising schedule and the closed-form noising operator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step beta table plus cumulative signal fractions.

    alpha_bars[t] is the running product of (1 - beta) up to and
    including step t; both tables are float64 and length T.
    """

    betas: torch.Tensor
    alpha_bars: torch.Tensor = field(default=None)  # type: ignore[assignment]
    kind: str = "custom"

    def __post_init__(self):
        betas = torch.as_tensor(self.betas, dtype=torch.float64)
        if betas.ndim != 1 or betas.numel() < 1:
            raise ValueError("betas must be a non-empty 1-D sequence")
        if not bool(((betas > 0) & (betas < 1)).all()):
            raise ValueError("betas must lie in (0, 1)")
        alpha_bars = torch.cumprod(1.0 - betas, dim=0)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alpha_bars", alpha_bars)

    @property
    def num_steps(self) -> int:
        return self.betas.numel()

    def alpha_bar(self, t: int) -> float:
        """Cumulative signal fraction at step t; t = -1 means clean."""
        if t == -1:
            return 1.0
        if not 0 <= t < self.num_steps:
            raise IndexError(f"step {t} outside [-1, {self.num_steps})")
        return float(self.alpha_bars[t])


def build_schedule(num_steps: int, kind: str = "linear") -> NoiseSchedule:
    """Construct a schedule of the given length.

    `linear` interpolates betas over [1e-4, 2e-2]; `cosine` follows the
    squared-cosine cumulative-signal curve with offset 0.008.
    """
    if num_steps < 1:
        raise ValueError(f"num_steps must be >= 1, got {num_steps}")
    if kind == "linear":
        betas = torch.linspace(1e-4, 2e-2, num_steps, dtype=torch.float64)
    elif kind == "cosine":
        s = 0.008
        steps = torch.arange(num_steps + 1, dtype=torch.float64)
        f = torch.cos((steps / num_steps + s) / (1 + s) * math.pi / 2) ** 2
        betas = torch.clamp(1 - f[1:] / f[:-1], min=1e-8, max=0.999)
    else:
        raise ValueError(f"unknown schedule kind {kind!r}")
    return NoiseSchedule(betas=betas, kind=kind)


def q_sample(
    x0: torch.Tensor, t: int, eps: torch.Tensor, sched: NoiseSchedule
) -> torch.Tensor:
    """Noise a clean sample to step t:

    x_t = sqrt(alpha_bar[t]) * x0 + sqrt(1 - alpha_bar[t]) * eps
    """
    if x0.shape != eps.shape:
        raise ValueError(f"shape mismatch: x0 {tuple(x0.shape)} vs eps {tuple(eps.shape)}")
    if not 0 <= t < sched.num_steps:
        raise IndexError(f"step {t} outside [0, {sched.num_steps})")
    ab = sched.alpha_bars[t]
    signal = math.sqrt(float(ab))
    noise = math.sqrt(float(1.0 - ab))
    return signal * x0 + noise * eps
