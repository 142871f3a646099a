"""Shared helpers for the test-suite: random exact profiles and the acceptance log."""

from fractions import Fraction

from scpir import StorageProfile

ACCEPTANCE_LOG: list[str] = []


def random_integer_profile(rng, n_max=16, den_max=40) -> StorageProfile:
    """Random profile with 0 < mu[n] <= 1 and integer total t."""
    N = int(rng.integers(1, n_max + 1))
    t = int(rng.integers(1, N + 1))
    D = int(rng.integers(1, den_max + 1))
    # t*D units spread over N bins of capacity D, each bin at least 1
    if t * D < N:
        D = -(-N // t)
    counts = [1] * N
    left = t * D - N
    while left:
        n = int(rng.integers(N))
        room = D - counts[n]
        if room:
            step = min(room, left, int(rng.integers(1, room + 1)))
            counts[n] += step
            left -= step
    return StorageProfile(Fraction(c, D) for c in counts)


def random_profile(rng, n_max=6, dens=(2, 3, 4, 5, 6, 10)) -> StorageProfile:
    """Random valid profile (integer or fractional t) with small denominators."""
    while True:
        N = int(rng.integers(2, n_max + 1))
        D = int(rng.choice(dens))
        mu = [Fraction(int(rng.integers(1, D + 1)), D) for _ in range(N)]
        if sum(mu) >= 1:
            return StorageProfile(mu)


def random_fp_instance(rng, n_max=8, tau_max=4, den_max=12):
    """Random (m, tau) filling instance; roughly half are feasible."""
    N = int(rng.integers(1, n_max + 1))
    tau = int(rng.integers(1, min(tau_max, N) + 1))
    m = [Fraction(int(rng.integers(0, den_max + 1)), int(rng.integers(1, den_max + 1))) for _ in range(N)]
    if rng.random() < 0.5 and N > 1:
        # pull one entry towards the feasibility boundary sum/tau
        n = int(rng.integers(N))
        others = sum(m) - m[n]
        if tau > 1:
            m[n] = others / (tau - 1) + Fraction(int(rng.integers(-2, 3)), 20)
            m[n] = max(m[n], Fraction(0))
    return m, tau
