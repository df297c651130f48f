"""Energy accounting of an assignment: the four cost functions and their savings."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

from .errors import DegenerateError
from .matching import aero_energy, time_mismatch, velocity_mismatch
from .model import Instance

# An assignment maps surfer s -> breaker index, or None for an unmatched surfer.
Assignment = Sequence["int | None"]


@dataclass(frozen=True)
class SavingsReport:
    f_ref: float
    f_ref_vel: float
    f1: float
    f1_mod: float
    eta_speed: float
    eta_f1: float
    eta_f1_mod: float

    def to_dict(self) -> dict:
        return asdict(self)


def _solo(instance: Instance, s: int) -> float:
    surfer = instance.surfers[s]
    return surfer.class_id * surfer.pref_velocity**2


def f_ref(instance: Instance) -> float:
    """Every surfer drives alone at its preferred speed."""
    return float(sum(_solo(instance, s) for s in range(instance.n)))


def f_ref_vel(instance: Instance, assignment: Assignment) -> float:
    """Every surfer drives alone, but at its breaker's speed. Unmatched surfers keep their own."""
    total = 0.0
    for s, b in enumerate(assignment):
        if b is None:
            total += _solo(instance, s)
        else:
            total += instance.surfers[s].class_id * instance.breakers[b].velocity ** 2
    return total


def f1(instance: Instance, assignment: Assignment) -> float:
    """Drafting energy with every pairing accepted."""
    total = 0.0
    for s, b in enumerate(assignment):
        if b is None:
            total += _solo(instance, s)
        else:
            total += aero_energy(instance.surfers[s], instance.breakers[b])
    return total


def opts_out(instance: Instance, s: int, b: int | None) -> bool:
    """A surfer abandons its pairing when its timing or speed window is violated."""
    if b is None:
        return True
    surfer, breaker = instance.surfers[s], instance.breakers[b]
    return time_mismatch(surfer, breaker) > 0 or velocity_mismatch(surfer, breaker) > 0


def f1_mod(instance: Instance, assignment: Assignment) -> float:
    """Drafting energy after surfers with violated preferences revert to solo driving."""
    total = 0.0
    for s, b in enumerate(assignment):
        if opts_out(instance, s, b):
            total += _solo(instance, s)
        else:
            total += aero_energy(instance.surfers[s], instance.breakers[b])
    return total


def percent_change(ref: float, value: float) -> float:
    """Saving of ``value`` relative to ``ref`` in percent (negative when it costs more)."""
    if ref == 0:
        raise DegenerateError("reference cost is zero; percentages are undefined")
    return 100 * (ref - value) / ref


def eta_report(instance: Instance, assignment: Assignment) -> SavingsReport:
    ref = f_ref(instance)
    vel = f_ref_vel(instance, assignment)
    paired = f1(instance, assignment)
    realised = f1_mod(instance, assignment)
    return SavingsReport(
        f_ref=ref,
        f_ref_vel=vel,
        f1=paired,
        f1_mod=realised,
        eta_speed=percent_change(ref, vel),
        eta_f1=percent_change(ref, paired),
        eta_f1_mod=percent_change(ref, realised),
    )
