"""In-process simulated databases, retrieval and audits.

Each query/answer exchange is a plain function call on an immutable
:class:`DatabaseNode`, so download accounting is exact and runs are
reproducible from their seed.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import fspir
from .model import MessageLibrary
from .scheme import SCPIRScheme

ENUMERATION_LIMIT = 10**6
DEFAULT_TV_THRESHOLD = 0.01


class CapacityError(RuntimeError):
    pass


@dataclass(frozen=True)
class DatabaseNode:
    """Database ``id`` (1-based) with the sub-message blocks of the segments it holds.

    ``contents[f]`` is a read-only ``(K, s_f, w_f)`` bit array for segment ``f``
    (0-based).
    """

    id: int
    contents: dict
    capacity_bits: Fraction

    @property
    def stored_bits(self) -> int:
        return sum(int(block.size) for block in self.contents.values())

    def answer(self, f: int, query: fspir.QueryPlan, position: int) -> np.ndarray:
        block = self.contents.get(f)
        if block is None:
            raise fspir.QueryError(
                f"query references unstored symbol: database {self.id} holds no part of segment {f + 1}"
            )
        return fspir.answer(block, query, position)


def provision(scheme: SCPIRScheme, library: MessageLibrary) -> list[DatabaseNode]:
    """Fill every database with exactly the segments its placement assigns it."""
    if library.K != scheme.K or library.L != scheme.L:
        raise ValueError(
            f"library is K={library.K}, L={library.L}; scheme needs K={scheme.K}, L={scheme.L}"
        )
    part = scheme.partition
    contents: list[dict] = [dict() for _ in range(scheme.profile.N)]
    for f, seg in enumerate(scheme.plan):
        r = part.bit_range(f)
        block = library.bits[:, r.start:r.stop].reshape(scheme.K, part.symbols[f], part.symbol_bits[f])
        block.setflags(write=False)
        for n in seg.dbset:
            contents[n - 1][f] = block
    nodes = []
    for n, (mu, held) in enumerate(zip(scheme.profile.mu, contents), start=1):
        node = DatabaseNode(n, held, mu * scheme.K * scheme.L)
        if node.stored_bits > node.capacity_bits:
            raise CapacityError(
                f"database {n} stores {node.stored_bits} bits > capacity {node.capacity_bits}"
            )
        nodes.append(node)
    return nodes


@dataclass
class SegmentExchange:
    segment: int
    dbset: tuple[int, ...]
    query: fspir.QueryPlan
    answers: tuple[np.ndarray, ...]
    symbol_bits: int


@dataclass
class Transcript:
    theta: int
    seed: int
    L: int
    exchanges: list[SegmentExchange]
    decoded: np.ndarray
    per_db_bits: list[int]

    @property
    def d_total_bits(self) -> int:
        return sum(self.per_db_bits)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.L, self.d_total_bits)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "seed": self.seed,
            "L": self.L,
            "d_total_bits": self.d_total_bits,
            "per_db_bits": list(self.per_db_bits),
            "rate": str(self.rate),
        }


def segment_rng(seed: int, f: int) -> np.random.Generator:
    return np.random.default_rng([seed, f])


def retrieve(scheme: SCPIRScheme, nodes: Sequence[DatabaseNode], theta: int, seed: int = 0) -> Transcript:
    """Privately download message ``theta`` (1-based), one full-storage PIR per segment."""
    if not 1 <= theta <= scheme.K:
        raise ValueError(f"theta = {theta} outside 1..{scheme.K}")
    part = scheme.partition
    decoded = np.zeros(scheme.L, dtype=np.uint8)
    per_db = [0] * scheme.profile.N
    exchanges = []
    for f, seg in enumerate(scheme.plan):
        query = fspir.generate_queries(
            seg.size, scheme.K, theta, rng=segment_rng(seed, f), break_symmetry=scheme.break_symmetry
        )
        answers = tuple(nodes[n - 1].answer(f, query, i) for i, n in enumerate(seg.dbset))
        w = part.symbol_bits[f]
        for n, a in zip(seg.dbset, answers):
            per_db[n - 1] += a.shape[0] * w
        symbols = fspir.decode(query, answers, theta)
        r = part.bit_range(f)
        decoded[r.start:r.stop] = symbols.reshape(-1)
        exchanges.append(SegmentExchange(f, seg.dbset, query, answers, w))
    return Transcript(theta, seed, scheme.L, exchanges, decoded, per_db)


@dataclass
class DbVerdict:
    db: int
    verdict: bool
    tv_distance: float = 0.0


@dataclass
class AuditReport:
    name: str
    verdict: bool
    details: list[str] = field(default_factory=list)
    per_db: list[DbVerdict] = field(default_factory=list)
    tv_distance: Optional[float] = None
    threshold: Optional[float] = None
    mode: Optional[str] = None
    trials: Optional[int] = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "verdict": "pass" if self.verdict else "fail"}
        if self.mode is not None:
            out["mode"] = self.mode
        if self.trials is not None:
            out["trials"] = self.trials
        if self.tv_distance is not None:
            out["tv_distance"] = self.tv_distance
            out["threshold"] = self.threshold
        if self.per_db:
            out["per_db"] = [
                {"db": v.db, "verdict": "pass" if v.verdict else "fail", "tv_distance": v.tv_distance}
                for v in self.per_db
            ]
        out["details"] = list(self.details)
        return out


def audit_storage(scheme: SCPIRScheme, nodes: Sequence[DatabaseNode]) -> AuditReport:
    """Per-database budgets, and that every bit is stored once per member of its group."""
    details = []
    ok = True
    for node in nodes:
        if node.stored_bits > node.capacity_bits:
            ok = False
            details.append(f"database {node.id}: {node.stored_bits} bits > {node.capacity_bits}")
    expected = sum(seg.size * seg.alpha for seg in scheme.plan) * scheme.K * scheme.L
    total = sum(node.stored_bits for node in nodes)
    if total != expected:
        ok = False
        details.append(f"total stored {total} bits, placement implies {expected}")
    if not details:
        details.append(f"{total} bits stored across {len(nodes)} databases")
    return AuditReport("storage", ok, details)


def audit_decode(scheme: SCPIRScheme, library: MessageLibrary, seeds: Iterable[int]) -> AuditReport:
    """Zero-error check: every message decodes bit-for-bit under every seed."""
    nodes = provision(scheme, library)
    failures = []
    runs = 0
    for seed in seeds:
        for theta in range(1, scheme.K + 1):
            runs += 1
            try:
                tr = retrieve(scheme, nodes, theta, seed)
            except (fspir.DecodeError, fspir.QueryError) as exc:
                failures.append(f"theta={theta} seed={seed}: {exc}")
                continue
            if not np.array_equal(tr.decoded, library.message(theta)):
                bad = int(np.count_nonzero(tr.decoded != library.message(theta)))
                failures.append(f"theta={theta} seed={seed}: {bad} wrong bits")
    details = failures[:20] or [f"{runs} retrievals decoded exactly"]
    return AuditReport("decode", not failures, details, trials=runs)


def tv_distance(p: Counter, q: Counter):
    """Total-variation distance between two count histograms (exact for equal totals)."""
    n_p, n_q = sum(p.values()), sum(q.values())
    if not n_p or not n_q:
        return Fraction(int(bool(n_p) != bool(n_q)))
    keys = set(p) | set(q)
    return sum(abs(Fraction(p[k], n_p) - Fraction(q[k], n_q)) for k in keys) / 2


def _sample_features(requests) -> list:
    feats = [("shape", fspir.canonical_form(requests))]
    for req in requests:
        if len(req) == 1:
            feats.append(("singleton", req[0].message, req[0].symbol))
    return feats


def audit_privacy(
    scheme: SCPIRScheme,
    mode: str = "sample",
    trials: int = 10**5,
    seed: int = 0,
    threshold: float = DEFAULT_TV_THRESHOLD,
) -> AuditReport:
    """Compare, at every database, the query distribution for each pair of desired messages.

    ``enumerate`` walks every permutation tuple of each segment's instance and
    requires exactly equal distributions of the raw query and of its
    canonical form. ``sample`` draws ``trials`` seeded queries per message and
    requires the total-variation distance of the canonical form and of each
    message's singleton label to stay within ``threshold``.
    """
    if mode not in ("enumerate", "sample"):
        raise ValueError(f"unknown privacy audit mode {mode!r}")
    K = scheme.K
    worst = [Fraction(0)] * scheme.profile.N
    details = []
    for f, seg in enumerate(scheme.plan):
        t = seg.size
        if mode == "enumerate":
            space = math.factorial(t ** K) ** K
            if space > ENUMERATION_LIMIT:
                raise ValueError(
                    f"segment {f + 1}: permutation space {space} exceeds {ENUMERATION_LIMIT}; use sampling"
                )
            hists = _enumerate_histograms(t, K, scheme.break_symmetry)
        else:
            hists = _sample_histograms(t, K, trials, seed, f, scheme.break_symmetry)
        for pos, n in enumerate(seg.dbset):
            for a, b in itertools.combinations(range(K), 2):
                ha, hb = hists[a][pos], hists[b][pos]
                for family in set(ha) | set(hb):
                    d = tv_distance(ha.get(family, Counter()), hb.get(family, Counter()))
                    worst[n - 1] = max(worst[n - 1], d)
    if mode == "enumerate":
        per_db = [DbVerdict(n, w == 0, float(w)) for n, w in enumerate(worst, start=1)]
        details.append("distributions identical" if all(v.verdict for v in per_db) else "distributions differ")
    else:
        per_db = [DbVerdict(n, float(w) <= threshold, float(w)) for n, w in enumerate(worst, start=1)]
        details.append(f"max TV {float(max(worst)):.6f} over {trials} trials per message (threshold {threshold})")
    verdict = all(v.verdict for v in per_db)
    return AuditReport(
        "privacy",
        verdict,
        details,
        per_db,
        tv_distance=float(max(worst)),
        threshold=0.0 if mode == "enumerate" else threshold,
        mode=mode,
        trials=None if mode == "enumerate" else trials,
    )


def _enumerate_histograms(t: int, K: int, broken: bool):
    s = t ** K
    hists = [[{"raw": Counter(), "shape": Counter()} for _ in range(t)] for _ in range(K)]
    perms = list(itertools.permutations(range(s)))
    for combo in itertools.product(perms, repeat=K):
        arr = np.array(combo)
        for theta in range(K):
            q = fspir.generate_queries(t, K, theta + 1, perms=arr, break_symmetry=broken)
            for pos, reqs in enumerate(q.requests):
                hists[theta][pos]["raw"][reqs] += 1
                hists[theta][pos]["shape"][fspir.canonical_form(reqs)] += 1
    return hists


def _sample_histograms(t: int, K: int, trials: int, seed: int, f: int, broken: bool):
    hists = []
    for theta in range(K):
        rng = np.random.default_rng([seed, f, theta])
        per_pos = [dict() for _ in range(t)]
        for _ in range(trials):
            q = fspir.generate_queries(t, K, theta + 1, rng=rng, break_symmetry=broken)
            for pos, reqs in enumerate(q.requests):
                for feat in _sample_features(reqs):
                    family = feat[:2] if feat[0] == "singleton" else feat[:1]
                    per_pos[pos].setdefault(family, Counter())[feat] += 1
        hists.append(per_pos)
    return hists
