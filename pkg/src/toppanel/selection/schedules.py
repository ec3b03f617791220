"""
Module: `toppanel.selection.schedules`

Annealing schedules for the softmax temperature, the Gumbel noise scale and the subset size.

Classes
-------
TemperatureSchedule
    Exponential decay of tau with a floor.
SparsitySchedule
    Plateau at d, then geometric decay of k down to k_final.
ScheduleConfig
    Schedule settings resolved against the number of optimizer steps.

Functions
---------
temperature_at(sched, step) -> float
k_at(sched, step) -> int
noise_scale_at(sched, noise_scale0, step) -> float
"""

from __future__ import annotations

import math

import attr

from toppanel.exceptions import ContractError


def _positive(instance: object, attribute: "attr.Attribute[float]", value: float) -> None:
    if not value > 0:
        raise ContractError(f"{attribute.name} must be positive, got {value}")


@attr.s(auto_attribs=True, frozen=True)
class TemperatureSchedule:
    """
    Exponential temperature annealing ``tau(t) = max(tau_min, tau0 * exp(-rate * t))``.

    Parameters
    ----------
    tau0 : float
        Initial temperature.
    rate : float
        Decay rate per optimizer step.
    tau_min : float
        Floor reached once ``tau0 * exp(-rate * t)`` drops below it.
    """

    tau0: float = attr.ib(validator=_positive)
    rate: float = attr.ib(validator=_positive)
    tau_min: float = attr.ib(validator=_positive)
    kind: str = "exponential"

    @classmethod
    def reaching_floor_at(
        cls, tau0: float, tau_min: float, floor_step: int
    ) -> "TemperatureSchedule":
        """Build the schedule whose temperature hits `tau_min` exactly at `floor_step`."""
        if tau_min >= tau0:
            # tau stays at tau_min from step 0 on.
            return cls(tau0=tau0, rate=1e-12, tau_min=tau_min)
        rate = math.log(tau0 / tau_min) / max(floor_step, 1)
        return cls(tau0=tau0, rate=rate, tau_min=tau_min)


@attr.s(auto_attribs=True, frozen=True)
class SparsitySchedule:
    """
    Subset-size annealing from all `d` features down to `k_final`.

    Parameters
    ----------
    d : int
        Number of features.
    k_final : int
        Final subset size, ``1 <= k_final <= d``.
    warmup_steps : int
        Steps during which every feature is kept.
    decay_steps : int
        Steps of geometric decay after the warmup.
    """

    d: int
    k_final: int
    warmup_steps: int
    decay_steps: int

    def __attrs_post_init__(self) -> None:
        if not 1 <= self.k_final <= self.d:
            raise ContractError(f"k_final must be in [1, {self.d}], got {self.k_final}")
        if self.warmup_steps < 0 or self.decay_steps < 0:
            raise ContractError("warmup_steps and decay_steps must be non-negative")


def temperature_at(sched: TemperatureSchedule, step: int) -> float:
    """Temperature at optimizer step `step` (``step >= 0``)."""
    if step < 0:
        raise ContractError(f"step must be non-negative, got {step}")
    return max(sched.tau_min, sched.tau0 * math.exp(-sched.rate * step))


def noise_scale_at(sched: TemperatureSchedule, noise_scale0: float, step: int) -> float:
    """Gumbel noise scale, annealed by the same multiplicative factor as the temperature."""
    return noise_scale0 * temperature_at(sched, step) / sched.tau0


def k_at(sched: SparsitySchedule, step: int) -> int:
    """
    Subset size at optimizer step `step`.

    ``d`` at step 0 and during the warmup, then
    ``d * (k_final / d) ** ((step - warmup) / decay_steps)`` rounded to the nearest integer and
    clamped to ``[k_final, d]``; ``k_final`` from ``warmup_steps + decay_steps`` on. With neither
    warmup nor decay the size drops to ``k_final`` at step 1.
    """
    if step < 0:
        raise ContractError(f"step must be non-negative, got {step}")
    if step == 0 or step < sched.warmup_steps:
        return sched.d
    elapsed = step - sched.warmup_steps
    if elapsed >= sched.decay_steps:
        return sched.k_final
    ratio = sched.k_final / sched.d
    k = int(round(sched.d * ratio ** (elapsed / sched.decay_steps)))
    return min(sched.d, max(sched.k_final, k))


DEFAULT_TAU0: float = 4.0
DEFAULT_TAU_MIN: float = 0.05
DEFAULT_TAU_FLOOR_FRACTION: float = 0.8
DEFAULT_WARMUP_FRACTION: float = 0.1
DEFAULT_DECAY_FRACTION: float = 0.4


@attr.s(auto_attribs=True, frozen=True)
class ScheduleConfig:
    """
    Settings from which the concrete schedules are built once the number of steps is known.

    Parameters
    ----------
    tau0, tau_min : float
        Initial and floor temperatures.
    tau_floor_fraction : float
        Fraction of training after which tau reaches `tau_min` (ignored when `rate` is set).
    rate : float, optional
        Explicit exponential decay rate per step.
    warmup_fraction, decay_fraction : float
        k-annealing plateau and decay lengths as fractions of training (ignored when the
        corresponding explicit step counts are set).
    warmup_steps, decay_steps : int, optional
        Explicit k-annealing plateau and decay lengths.
    """

    tau0: float = DEFAULT_TAU0
    tau_min: float = DEFAULT_TAU_MIN
    tau_floor_fraction: float = DEFAULT_TAU_FLOOR_FRACTION
    rate: float | None = None
    warmup_fraction: float = DEFAULT_WARMUP_FRACTION
    decay_fraction: float = DEFAULT_DECAY_FRACTION
    warmup_steps: int | None = None
    decay_steps: int | None = None

    def temperature(self, total_steps: int) -> TemperatureSchedule:
        if self.rate is not None:
            return TemperatureSchedule(tau0=self.tau0, rate=self.rate, tau_min=self.tau_min)
        floor_step = int(round(self.tau_floor_fraction * total_steps))
        return TemperatureSchedule.reaching_floor_at(self.tau0, self.tau_min, floor_step)

    def sparsity(self, d: int, k_final: int, total_steps: int) -> SparsitySchedule:
        warmup = (
            self.warmup_steps
            if self.warmup_steps is not None
            else int(round(self.warmup_fraction * total_steps))
        )
        decay = (
            self.decay_steps
            if self.decay_steps is not None
            else int(round(self.decay_fraction * total_steps))
        )
        return SparsitySchedule(d=d, k_final=k_final, warmup_steps=warmup, decay_steps=decay)

    def to_dict(self) -> dict[str, float | int | None]:
        return attr.asdict(self)
