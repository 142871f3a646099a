"""Compose a placement with per-segment full-storage PIR into one scheme."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .model import (
    PlacementPlan,
    SegmentPartition,
    StorageProfile,
    as_rational,
    capacity_fspir,
    capacity_scpir,
    is_integer,
    lcm_all,
)
from .placement import (
    PlacementError,
    build_placement,
    partition_cyclic,
    partition_disjoint,
    validate_plan,
)

PLACEMENTS = ("auto", "disjoint", "cyclic")


class SizingError(ValueError):
    pass


def compose_rate(alphas: Sequence, rates: Sequence) -> Fraction:
    """Overall rate ``(sum_f alpha_f / R_f)^-1`` of independent per-segment retrievals."""
    alphas = [as_rational(a) for a in alphas]
    rates = [as_rational(r) for r in rates]
    if len(alphas) != len(rates) or not alphas:
        raise ValueError("need one rate per segment")
    if sum(alphas, Fraction(0)) != 1:
        raise ValueError(f"segment masses sum to {sum(alphas)}, not 1")
    if any(r <= 0 or r > 1 for r in rates):
        raise ValueError("rates must lie in (0, 1]")
    return 1 / sum((a / r for a, r in zip(alphas, rates)), Fraction(0))


def minimum_message_length(plan: PlacementPlan, K: int) -> int:
    """Smallest L for which every segment holds a whole number of t_f**K-symbol blocks."""
    return lcm_all([seg.alpha.denominator * seg.size ** K for seg in plan])


@dataclass(frozen=True)
class SCPIRScheme:
    profile: StorageProfile
    K: int
    L: int
    plan: PlacementPlan
    partition: SegmentPartition
    break_symmetry: bool = False

    @property
    def group_sizes(self) -> tuple[int, ...]:
        return tuple(seg.size for seg in self.plan)

    @property
    def segment_rates(self) -> tuple[Fraction, ...]:
        return tuple(capacity_fspir(t, self.K) for t in self.group_sizes)

    @property
    def predicted_rate(self) -> Fraction:
        return compose_rate(self.plan.alphas, self.segment_rates)

    @property
    def predicted_download(self) -> int:
        d = self.L / self.predicted_rate
        assert is_integer(d)
        return int(d)

    @property
    def capacity(self) -> Fraction:
        return capacity_scpir(self.profile, self.K)


def make_plan(profile: StorageProfile, placement: str = "auto") -> PlacementPlan:
    if placement == "auto":
        return build_placement(profile).plan
    if placement not in ("disjoint", "cyclic"):
        raise PlacementError(f"unknown placement {placement!r}; choose from {PLACEMENTS}")
    if len(set(profile.mu)) != 1 or not profile.integer_t:
        raise PlacementError(f"{placement} placement needs uniform storage with integer t")
    t = int(profile.t)
    if placement == "disjoint":
        return partition_disjoint(profile.N, t)
    return partition_cyclic(profile.N, t)


def build_scheme(
    profile: StorageProfile,
    K: int,
    L: Optional[int] = None,
    *,
    plan: Optional[PlacementPlan] = None,
    placement: str = "auto",
    break_symmetry: bool = False,
) -> SCPIRScheme:
    """Build a scheme; L defaults to the minimum valid message length.

    Pass ``plan`` to use an explicit placement instead of ``placement``.
    """
    if K < 1:
        raise ValueError("K must be positive")
    if plan is None:
        plan = make_plan(profile, placement)
    report = validate_plan(plan, profile)
    if not report.valid:
        raise PlacementError("; ".join(report.violations))
    L_min = minimum_message_length(plan, K)
    if L is None:
        L = L_min
    elif L < 1 or L % L_min:
        raise SizingError(f"L = {L} must be a positive multiple of {L_min}")
    partition = SegmentPartition.from_plan(plan, K, L)
    return SCPIRScheme(profile, K, L, plan, partition, break_symmetry)
