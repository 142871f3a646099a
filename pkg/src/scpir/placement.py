"""Storage placement: filling-problem feasibility, the homogeneous
constructions, the iterative heterogeneous fill and the non-integer split.

A ``(m, tau)`` filling problem asks for non-negative weights on the
{0,1}-vectors with exactly ``tau`` ones whose weighted sum is ``m``. For
integer ``t`` a capacity-achieving placement is exactly a ``(mu, t)`` fill.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import (
    PlacementPlan,
    Segment,
    StorageProfile,
    as_rational,
    ceil_frac,
    floor_frac,
    is_integer,
)

ORACLE_MAX_N = 12


class PlacementError(ValueError):
    """Raised when a placement request cannot be satisfied."""


class OracleScaleError(PlacementError):
    pass


def _rationals(m: Iterable) -> list[Fraction]:
    return [as_rational(x) for x in m]


def fp_violation(m: Sequence, tau: int) -> Optional[str]:
    """Explain why the ``(m, tau)`` filling problem has no solution, or return None."""
    m = _rationals(m)
    if tau < 1:
        return f"tau must be a positive integer, got {tau}"
    if any(x < 0 for x in m):
        return "remaining storage must be non-negative"
    if len(m) < tau:
        return f"only {len(m)} databases for groups of size {tau}"
    total = sum(m, Fraction(0))
    for n, x in enumerate(m, start=1):
        if x * tau > total:
            return f"m[{n}] = {x} exceeds sum/tau = {total / tau}"
    return None


def fp_feasible(m: Sequence, tau: int) -> bool:
    """True iff every entry of ``m`` is at most ``sum(m) / tau``."""
    return fp_violation(m, tau) is None


def fp_oracle_solve(m: Sequence, tau: int) -> Optional[list[tuple[Fraction, frozenset[int]]]]:
    """Decompose ``m`` over the tau-subset indicator vectors by exact LP.

    This is a test oracle: it never looks at the max/sum criterion and instead
    runs a phase-one simplex with Bland's rule over all ``C(N, tau)`` columns
    in exact arithmetic. Returns ``(weight, subset)`` pairs with positive
    weights (1-based subsets), or None when no decomposition exists.
    """
    m = _rationals(m)
    N = len(m)
    if N > ORACLE_MAX_N:
        raise OracleScaleError(f"oracle scale exceeded: N = {N} > {ORACLE_MAX_N}")
    if tau < 1 or any(x < 0 for x in m):
        raise ValueError("oracle needs tau >= 1 and non-negative m")
    if N < tau:
        return None
    columns = [frozenset(c) for c in itertools.combinations(range(N), tau)]
    weights = _phase_one(columns, m)
    if weights is None:
        return None
    return [(w, frozenset(n + 1 for n in col)) for w, col in zip(weights, columns) if w > 0]


def _phase_one(columns: list[frozenset[int]], rhs: list[Fraction]) -> Optional[list[Fraction]]:
    N, C = len(rhs), len(columns)
    width = C + N
    # rows: [A | I | b]; artificials start basic
    rows = []
    for i in range(N):
        row = [Fraction(1) if i in col else Fraction(0) for col in columns]
        row += [Fraction(int(i == j)) for j in range(N)]
        row.append(rhs[i])
        rows.append(row)
    basis = [C + i for i in range(N)]
    # reduced cost of minimizing the artificial sum
    cost = [Fraction(0)] * (width + 1)
    for j in range(width + 1):
        if j >= C and j < width:
            continue
        cost[j] = -sum((r[j] for r in rows), Fraction(0))

    while True:
        entering = next((j for j in range(width) if cost[j] < 0), None)
        if entering is None:
            break
        best = None
        for i, r in enumerate(rows):
            if r[entering] > 0:
                ratio = r[-1] / r[entering]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # unbounded cannot happen with a bounded objective
            raise RuntimeError("phase-one LP unbounded")
        p = best[1]
        pivot = rows[p][entering]
        rows[p] = [x / pivot for x in rows[p]]
        for i, r in enumerate(rows):
            if i != p and r[entering] != 0:
                factor = r[entering]
                rows[i] = [a - factor * b for a, b in zip(r, rows[p])]
        factor = cost[entering]
        cost = [a - factor * b for a, b in zip(cost, rows[p])]
        basis[p] = entering

    if cost[-1] != 0:  # residual artificial mass
        return None
    weights = [Fraction(0)] * C
    for i, j in enumerate(basis):
        if j < C:
            weights[j] = rows[i][-1]
    return weights


def partition_disjoint(N: int, t: int) -> PlacementPlan:
    """N/t disjoint groups of t consecutive databases, each with mass t/N."""
    if t < 1 or N < 1 or N % t:
        raise PlacementError(f"disjoint scheme requires N/t integer (N={N}, t={t})")
    groups = N // t
    return PlacementPlan(
        (Fraction(1, groups), range(g * t + 1, g * t + t + 1)) for g in range(groups)
    )


def partition_cyclic(N: int, t: int) -> PlacementPlan:
    """N segments of mass 1/N; segment f lives on the t databases ending at f (cyclically)."""
    if not 1 <= t <= N:
        raise PlacementError(f"cyclic scheme needs 1 <= t <= N (N={N}, t={t})")
    return PlacementPlan(
        (Fraction(1, N), {((f - i - 1) % N) + 1 for i in range(t)}) for f in range(1, N + 1)
    )


class FillKind(enum.Enum):
    COMPLETE = "CF"
    PARTIAL = "PF"
    FINAL = "FINAL"


@dataclass(frozen=True)
class IterationTrace:
    """One iteration of the iterative fill.

    ``t_prime``, ``n_prime`` and ``e`` describe the remainder *before* the
    iteration; ``remaining`` is the remainder after it.
    """

    index: int
    t_prime: Fraction
    n_prime: int
    e: int
    alpha: Fraction
    dbset: tuple[int, ...]
    kind: FillKind
    remaining: tuple[Fraction, ...] = field(repr=False)


def fill_iterative(m: Sequence, tau: int) -> tuple[list[Segment], list[IterationTrace]]:
    """Solve the ``(m, tau)`` filling problem greedily.

    Each iteration places a segment on the database with the smallest
    non-zero remainder plus the ``tau - 1`` databases with the largest
    remainders. The segment is as large as possible without breaking
    feasibility of what is left. Ties in the ordering go to the lower index.
    """
    m = _rationals(m)
    reason = fp_violation(m, tau)
    if reason is not None:
        raise PlacementError(f"no ({tau})-fill exists: {reason}")
    segments: list[Segment] = []
    trace: list[IterationTrace] = []
    while any(x > 0 for x in m):
        t_prime = sum(m, Fraction(0))
        live = [n for n in range(len(m)) if m[n] > 0]
        n_prime = len(live)
        level = t_prime / tau
        e = sum(1 for x in m if x == level)
        if n_prime < tau:
            raise AssertionError(f"only {n_prime} non-empty databases left for tau = {tau}")
        first = min(live, key=lambda n: (m[n], n))
        largest = sorted((n for n in live if n != first), key=lambda n: (-m[n], n))
        chosen = [first] + largest[: tau - 1]
        smallest = m[first]
        if n_prime >= tau + 1:
            # tau-th largest remainder: the biggest one left out of the group
            alpha = min(level - m[largest[tau - 1]], smallest)
            kind = FillKind.COMPLETE if alpha == smallest else FillKind.PARTIAL
        else:
            if any(m[n] != smallest for n in live):
                raise AssertionError("final group remainders are not equal")
            alpha = smallest
            kind = FillKind.FINAL
        if alpha <= 0:
            raise AssertionError(f"iteration {len(trace) + 1} made no progress")
        for n in chosen:
            m[n] -= alpha
        dbset = tuple(sorted(n + 1 for n in chosen))
        segments.append(Segment(alpha, dbset))
        trace.append(
            IterationTrace(len(trace) + 1, t_prime, n_prime, e, alpha, dbset, kind, tuple(m))
        )
    return segments, trace


def place_iterative(profile: StorageProfile) -> tuple[PlacementPlan, list[IterationTrace]]:
    """Iterative placement for a profile whose total storage t is an integer."""
    if not profile.integer_t:
        raise PlacementError(f"t = {profile.t} is not an integer; use split_storage first")
    segments, trace = fill_iterative(profile.mu, int(profile.t))
    return PlacementPlan(segments), trace


@dataclass(frozen=True)
class StorageSplit:
    """Intermediate quantities of :func:`split_storage`, kept for inspection."""

    mu_floor: tuple[Fraction, ...]
    mu_ceil: tuple[Fraction, ...]
    m1: tuple[Fraction, ...]
    m2: tuple[Fraction, ...]
    r: Fraction


def split_storage_details(profile: StorageProfile) -> StorageSplit:
    t = profile.t
    if is_integer(t):
        raise PlacementError(f"t = {t} is an integer; no split needed")
    lo, hi = floor_frac(t), ceil_frac(t)
    up, down = t - lo, hi - t
    zero = Fraction(0)
    m1 = tuple(max(mu - up, zero) for mu in profile.mu)
    m2 = tuple(max(mu - down, zero) for mu in profile.mu)
    s1, s2 = sum(m1, zero), sum(m2, zero)
    r = (lo * down - s1) / (t - s1 - s2)
    if not 0 <= r < 1:
        raise AssertionError(f"split ratio r = {r} outside [0, 1)")
    rest = [mu - a - b for mu, a, b in zip(profile.mu, m1, m2)]
    mu_floor = tuple(a + x * r for a, x in zip(m1, rest))
    mu_ceil = tuple(b + x * (1 - r) for b, x in zip(m2, rest))
    return StorageSplit(mu_floor, mu_ceil, m1, m2, r)


def split_storage(profile: StorageProfile) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Split a non-integer-t profile into a floor(t)-fill part and a ceil(t)-fill part."""
    s = split_storage_details(profile)
    return s.mu_floor, s.mu_ceil


@dataclass
class PlacementResult:
    plan: PlacementPlan
    trace: list[IterationTrace]
    # (tau, trace) for each sub-problem; one entry for integer t
    phases: list[tuple[int, list[IterationTrace]]]


def build_placement(profile: StorageProfile) -> PlacementResult:
    """Iterative placement, splitting the storage first when t is fractional."""
    if profile.integer_t:
        plan, trace = place_iterative(profile)
        return PlacementResult(plan, trace, [(int(profile.t), trace)])
    mu_floor, mu_ceil = split_storage(profile)
    lo, hi = floor_frac(profile.t), ceil_frac(profile.t)
    segments: list[Segment] = []
    trace: list[IterationTrace] = []
    phases = []
    for part, tau in ((mu_floor, lo), (mu_ceil, hi)):
        segs, tr = fill_iterative(part, tau)
        segments += segs
        trace += tr
        phases.append((tau, tr))
    return PlacementResult(PlacementPlan(segments), trace, phases)


@dataclass
class ValidationReport:
    mass_ok: bool
    budget_ok: bool
    sizes_ok: bool
    split_sums_ok: bool
    exact_fill: bool
    loads: list[Fraction]
    violations: list[str]

    @property
    def valid(self) -> bool:
        return not self.violations


def validate_plan(plan: PlacementPlan, profile: StorageProfile) -> ValidationReport:
    """Check a plan against a profile for capacity-achieving placement.

    Checks total mass 1, per-database budgets, and the group-size conditions:
    every group has size t for integer t; for fractional t every group has size
    floor(t) or ceil(t) and the masses on each size are ceil(t)-t and t-floor(t).
    """
    violations = []
    N = profile.N
    t = profile.t
    mass_ok = plan.total_mass == 1
    if not mass_ok:
        violations.append(f"segment masses sum to {plan.total_mass}, not 1")

    out_of_range = [s.dbset for s in plan if s.dbset[0] < 1 or s.dbset[-1] > N]
    if out_of_range:
        violations.append(f"database ids outside 1..{N}: {out_of_range}")
        loads = [Fraction(0)] * N
        budget_ok = False
    else:
        loads = plan.load(N)
        budget_ok = True
        for n, (load, mu) in enumerate(zip(loads, profile.mu), start=1):
            if load > mu:
                budget_ok = False
                violations.append(f"database {n} stores {load} > budget {mu}")
    exact_fill = budget_ok and all(load == mu for load, mu in zip(loads, profile.mu))

    split_sums_ok = True
    if is_integer(t):
        bad = [f for f, s in enumerate(plan, start=1) if s.size != t]
        sizes_ok = not bad
        if bad:
            violations.append(f"segments {bad} do not have exactly t = {t} databases")
    else:
        lo, hi = floor_frac(t), ceil_frac(t)
        bad = [f for f, s in enumerate(plan, start=1) if s.size not in (lo, hi)]
        sizes_ok = not bad
        if bad:
            violations.append(f"segments {bad} have sizes outside {{{lo}, {hi}}}")
        lo_mass = sum((s.alpha for s in plan if s.size == lo), Fraction(0))
        hi_mass = sum((s.alpha for s in plan if s.size == hi), Fraction(0))
        if lo_mass != hi - t:
            split_sums_ok = False
            violations.append(f"mass on size-{lo} groups is {lo_mass}, needs {hi - t}")
        if hi_mass != t - lo:
            split_sums_ok = False
            violations.append(f"mass on size-{hi} groups is {hi_mass}, needs {t - lo}")
    return ValidationReport(mass_ok, budget_ok, sizes_ok, split_sums_ok, exact_fill, loads, violations)
