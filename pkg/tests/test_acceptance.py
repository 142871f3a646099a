"""Acceptance criteria, one test each; every test logs a PASS/FAIL line shown in the summary."""

import time
from fractions import Fraction

import numpy as np
import pytest

from scpir import (
    FillKind,
    MessageLibrary,
    StorageProfile,
    audit_decode,
    audit_privacy,
    build_placement,
    build_scheme,
    compose_rate,
    fp_feasible,
    fp_oracle_solve,
    place_iterative,
    provision,
    retrieve,
    split_storage,
    validate_plan,
)
from scpir.placement import split_storage_details
from _support import ACCEPTANCE_LOG, random_fp_instance, random_integer_profile, random_profile
from conftest import HETERO_MU, NONINT_MU
from test_placement import check_oracle_solution, check_trace_invariants

F = Fraction


def record(n, title, ok, detail=""):
    ACCEPTANCE_LOG.append(f"[{'PASS' if ok else 'FAIL'}] {n:>2}. {title}" + (f": {detail}" if detail else ""))
    assert ok, f"criterion {n} failed: {detail}"


def run_once(scheme, theta=1, seed=0):
    lib = MessageLibrary.random(scheme.K, scheme.L, seed)
    tr = retrieve(scheme, provision(scheme, lib), theta, seed)
    return tr, lib


def builtin_schemes():
    return {
        "uniform disjoint": build_scheme(StorageProfile.uniform(4, "1/2"), 3, 16, placement="disjoint"),
        "uniform cyclic": build_scheme(StorageProfile.uniform(5, "3/5"), 2, placement="cyclic"),
        "heterogeneous": build_scheme(StorageProfile(HETERO_MU), 2),
        "non-integer": build_scheme(StorageProfile(NONINT_MU), 2),
    }


def test_c01_uniform_disjoint():
    start = time.perf_counter()
    scheme = build_scheme(StorageProfile.uniform(4, "1/2"), 3, 16, placement="disjoint")
    tr, lib = run_once(scheme, theta=1)
    elapsed = time.perf_counter() - start
    ok = tr.d_total_bits == 28 and tr.rate == F(4, 7) and np.array_equal(tr.decoded, lib.message(1)) and elapsed < 1
    record(1, "uniform 1/2, N=4, K=3, disjoint", ok, f"D={tr.d_total_bits}, R={tr.rate}, {elapsed:.3f}s")


def test_c02_uniform_cyclic():
    scheme = build_scheme(StorageProfile.uniform(5, "3/5"), 2, placement="cyclic")
    rates = set()
    for theta in (1, 2):
        tr, lib = run_once(scheme, theta=theta)
        assert np.array_equal(tr.decoded, lib.message(theta))
        rates.add(tr.rate)
    ok = rates == {F(3, 4)}
    record(2, "uniform 3/5, N=5, K=2, cyclic", ok, f"R={sorted(map(str, rates))} at L={scheme.L}")


def test_c03_heterogeneous_fill():
    profile = StorageProfile(HETERO_MU)
    plan, trace = place_iterative(profile)
    report = validate_plan(plan, profile)
    ok = (
        plan.F == 7
        and (plan[0].alpha, plan[0].dbset) == (F(1, 10), (1, 7, 8))
        and (plan[1].alpha, plan[1].dbset) == (F(1, 5), (2, 7, 8))
        and all(s.size == 3 for s in plan)
        and report.valid
        and report.exact_fill
        and len(trace) <= 8
    )
    record(3, "heterogeneous t=3 placement", ok, f"F={plan.F}, iterations={len(trace)}, exact fill={report.exact_fill}")


def test_c04_nonint_split():
    profile = StorageProfile(NONINT_MU)
    mu_floor, mu_ceil = split_storage(profile)
    expected_floor = [F(1, 15), F(1, 15), F(2, 15), F(1, 3), F(3, 5)]
    expected_ceil = [F(2, 15), F(2, 15), F(4, 15), F(4, 15), F(2, 5)]
    plan = build_placement(profile).plan
    report = validate_plan(plan, profile)
    # independent rate: 1/R = (3/5)(3/2) + (2/5)(4/3)
    derived = 1 / (F(3, 5) * F(3, 2) + F(2, 5) * F(4, 3))
    scheme = build_scheme(profile, 2)
    tr, lib = run_once(scheme, theta=2)
    ok = (
        list(mu_floor) == expected_floor
        and list(mu_ceil) == expected_ceil
        and split_storage_details(profile).r == F(1, 3)
        and report.valid
        and report.split_sums_ok
        and tr.rate == derived == F(30, 43)
        and np.array_equal(tr.decoded, lib.message(2))
    )
    record(4, "non-integer split", ok, f"r=1/3, R={tr.rate}")


def test_c05_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    agree = feasible = 0
    for _ in range(500):
        m, tau = random_fp_instance(rng)
        sol = fp_oracle_solve(m, tau)
        if sol is not None:
            check_oracle_solution(m, tau, sol)
            feasible += 1
        agree += fp_feasible(m, tau) == (sol is not None)
    elapsed = time.perf_counter() - start
    ok = agree == 500 and elapsed < 60
    record(5, "feasibility vs oracle", ok, f"{agree}/500 agree ({feasible} feasible), {elapsed:.2f}s")


def test_c06_convergence():
    rng = np.random.default_rng(7)
    runs = 0
    partial = 0
    for _ in range(1000):
        profile = random_integer_profile(rng)
        plan, trace = place_iterative(profile)
        check_trace_invariants(profile.mu, int(profile.t), plan, trace)
        partial += sum(it.kind is FillKind.PARTIAL for it in trace)
        runs += 1
    record(6, "iterative fill convergence", runs == 1000, f"{runs} profiles, {partial} partial fills checked")


def test_c07_enumeration():
    start = time.perf_counter()
    scheme = build_scheme(StorageProfile.uniform(2, 1), 2)
    report = audit_privacy(scheme, "enumerate")
    elapsed = time.perf_counter() - start
    ok = report.verdict and report.tv_distance == 0 and elapsed < 10
    record(7, "privacy by enumeration", ok, f"(4!)^2 permutations, TV={report.tv_distance}, {elapsed:.2f}s")


@pytest.mark.slow
def test_c08_sampling():
    good = audit_privacy(
        build_scheme(StorageProfile.uniform(4, "1/2"), 3, 16, placement="disjoint"), "sample", trials=10**5, seed=0
    )
    broken = audit_privacy(
        build_scheme(StorageProfile.uniform(4, "1/2"), 3, 16, placement="disjoint", break_symmetry=True),
        "sample",
        trials=10**5,
        seed=0,
    )
    ok = good.verdict and good.tv_distance <= 0.01 and not broken.verdict
    record(8, "privacy by sampling", ok, f"max TV={good.tv_distance:.5f}, control TV={broken.tv_distance:.3f}")


@pytest.mark.slow
def test_c09_zero_error():
    failures = []
    runs = 0
    for name, scheme in builtin_schemes().items():
        lib = MessageLibrary.random(scheme.K, scheme.L, 99)
        rep = audit_decode(scheme, lib, range(100))
        runs += rep.trials
        if not rep.verdict:
            failures.append(f"{name}: {rep.details[0]}")
    record(9, "zero-error decoding", not failures, f"{runs} retrievals" + (f"; {failures}" if failures else ""))


def test_c10_rate_identity():
    schemes = list(builtin_schemes().values())
    rng = np.random.default_rng(10)
    for _ in range(50):
        schemes.append(build_scheme(random_profile(rng), int(rng.integers(1, 4))))
    bad = []
    for i, scheme in enumerate(schemes):
        tr, lib = run_once(scheme, theta=scheme.K, seed=i)
        predicted = compose_rate(scheme.plan.alphas, scheme.segment_rates)
        if not (tr.rate == predicted == scheme.capacity) or not np.array_equal(tr.decoded, lib.message(scheme.K)):
            bad.append((i, tr.rate, predicted, scheme.capacity))
    record(10, "rate identity", not bad, f"{len(schemes)} schemes" + (f"; mismatches {bad[:3]}" if bad else ""))
