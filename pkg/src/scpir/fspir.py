"""Capacity-achieving full-storage PIR over one group of t replicated databases.

Every message holds ``s = t**K`` symbols. Queries are built block by block:
in block ``r`` each database is asked, for every r-subset S of the messages,
``(t-1)**(r-1)`` XOR sums with one symbol from each message in S. Sums that
avoid the desired message use fresh symbols and become side information; sums
that contain it pair a fresh desired symbol with an undesired sum the user
already obtained from another database in block ``r-1``. Symbol labels are
hidden behind an independent uniform permutation per message.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from math import comb
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import kernels


class SymbolId(NamedTuple):
    message: int  # 1-based
    symbol: int  # 1-based


Request = tuple[SymbolId, ...]


class QueryError(ValueError):
    pass


class DecodeError(RuntimeError):
    pass


@dataclass(frozen=True)
class QueryPlan:
    """Requests sent to each database of the group (position 0..t-1).

    Each database's list is in presentation order: sorted by request size,
    then message set, then symbol labels, so order carries no information.
    """

    t: int
    K: int
    requests: tuple[tuple[Request, ...], ...]

    @property
    def symbols_per_message(self) -> int:
        return self.t ** self.K

    def count(self) -> int:
        return sum(len(r) for r in self.requests)


def requests_per_database(t: int, K: int) -> int:
    return sum(comb(K, r) * (t - 1) ** (r - 1) for r in range(1, K + 1))


def _message_set(req) -> tuple[int, ...]:
    return tuple(sym[0] for sym in req)


@functools.lru_cache(maxsize=256)
def _template(t: int, K: int, theta: int, broken: bool):
    """Per-database request lists over (message, draw counter) pairs, 0-based."""
    fresh = [0] * K
    side: list[dict[tuple[int, ...], list]] = [dict() for _ in range(t)]
    out: list[list] = [[] for _ in range(t)]

    def draw(k):
        c = fresh[k]
        fresh[k] += 1
        return (k, c)

    for r in range(1, K + 1):
        for db in range(t):
            for S in itertools.combinations(range(K), r):
                if theta not in S:
                    if broken and r == 1:
                        continue
                    sums = [tuple(draw(k) for k in S) for _ in range((t - 1) ** (r - 1))]
                    side[db][S] = sums
                    out[db].extend(sums)
                elif r == 1:
                    out[db].append((draw(theta),))
                else:
                    rest = tuple(k for k in S if k != theta)
                    for other in range(t):
                        if other == db:
                            continue
                        for undesired in side[other].get(rest, ()):
                            out[db].append(tuple(sorted((draw(theta),) + undesired)))
    s = t ** K
    assert max(fresh) <= s
    if not broken:
        assert fresh[theta] == s
    return tuple(tuple(reqs) for reqs in out)


def random_permutations(t: int, K: int, rng) -> np.ndarray:
    """One uniform permutation of ``range(t**K)`` per message, shape ``(K, t**K)``."""
    s = t ** K
    return np.stack([rng.permutation(s) for _ in range(K)])


def generate_queries(
    t: int,
    K: int,
    theta: int,
    seed: Optional[int] = None,
    *,
    rng: Optional[np.random.Generator] = None,
    perms: Optional[np.ndarray] = None,
    break_symmetry: bool = False,
) -> QueryPlan:
    """Queries for retrieving message ``theta`` (1-based) from t replicas.

    Randomness comes from ``perms`` if given, else from ``rng``, else from a
    generator seeded with ``seed``. ``break_symmetry`` drops the undesired
    singleton requests; it exists only as a negative control for the audits.
    """
    if t < 1 or K < 1:
        raise QueryError("t and K must be positive")
    if not 1 <= theta <= K:
        raise QueryError(f"theta = {theta} outside 1..{K}")
    s = t ** K
    if perms is None:
        if rng is None:
            rng = np.random.default_rng(seed)
        perms = random_permutations(t, K, rng)
    perms = np.asarray(perms)
    if perms.shape != (K, s):
        raise QueryError(f"sub-message not divisible into t^K = {s} symbols per message")
    labels = (perms + 1).tolist()
    template = _template(t, K, theta - 1, break_symmetry)
    requests = []
    for reqs in template:
        rendered = [
            tuple(SymbolId(k + 1, labels[k][c]) for k, c in req) for req in reqs
        ]
        rendered.sort(key=lambda q: (len(q), _message_set(q), q))
        requests.append(tuple(rendered))
    return QueryPlan(t, K, tuple(requests))


def _csr(requests: Sequence[Request], s: int):
    indptr = np.zeros(len(requests) + 1, dtype=np.int64)
    indices = []
    for i, req in enumerate(requests):
        indices.extend((sym.message - 1) * s + (sym.symbol - 1) for sym in req)
        indptr[i + 1] = len(indices)
    return indptr, np.asarray(indices, dtype=np.int64)


def answer(storage: np.ndarray, query: QueryPlan, db: int) -> np.ndarray:
    """Answers of group member ``db`` (0-based): one XOR per request.

    ``storage`` is the member's copy of the group's sub-messages, shape
    ``(K, s, w)`` with one row of ``w`` bits per symbol.
    """
    storage = np.asarray(storage, dtype=np.uint8)
    K, s = query.K, query.symbols_per_message
    if storage.ndim != 3 or storage.shape[:2] != (K, s):
        raise QueryError(
            f"query references unstored symbol: storage holds {storage.shape[:2]} symbols, "
            f"query needs ({K}, {s})"
        )
    indptr, indices = _csr(query.requests[db], s)
    return kernels.xor_gather(storage.reshape(K * s, -1), indptr, indices)


def answer_all(storage: np.ndarray, query: QueryPlan) -> tuple[np.ndarray, ...]:
    return tuple(answer(storage, query, db) for db in range(query.t))


def decode(query: QueryPlan, answers: Sequence[np.ndarray], theta: int) -> np.ndarray:
    """Recover the ``s`` symbols of message ``theta`` as an ``(s, w)`` array.

    Answers to sums that avoid ``theta`` are kept as side information; every
    answer containing a ``theta`` symbol is XORed with the side-information
    answer over exactly its undesired symbols.
    """
    s = query.symbols_per_message
    if len(answers) != query.t:
        raise DecodeError(f"expected answers from {query.t} databases, got {len(answers)}")
    table = np.concatenate([np.asarray(a, dtype=np.uint8) for a in answers], axis=0)
    if table.shape[0] != query.count():
        raise DecodeError("answer count does not match the query plan")
    side: dict[Request, int] = {}
    row = 0
    wanted = []
    for reqs in query.requests:
        for req in reqs:
            desired = [sym for sym in req if sym.message == theta]
            if not desired:
                side.setdefault(req, row)
            elif len(desired) > 1:
                raise DecodeError(f"request {req} holds several desired symbols")
            else:
                wanted.append((desired[0].symbol, row, tuple(x for x in req if x.message != theta)))
            row += 1
    indptr = [0]
    indices: list[int] = []
    targets = []
    for symbol, r, rest in wanted:
        indices.append(r)
        if rest:
            other = side.get(rest)
            if other is None:
                raise DecodeError(f"decoding failed: no side information for {rest}")
            indices.append(other)
        indptr.append(len(indices))
        targets.append(symbol)
    values = kernels.xor_gather(
        table, np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64)
    )
    out = np.zeros((s, table.shape[1]), dtype=np.uint8)
    seen = np.zeros(s, dtype=bool)
    for symbol, value in zip(targets, values):
        if seen[symbol - 1]:
            raise DecodeError(f"decoding failed: symbol {symbol} requested twice")
        seen[symbol - 1] = True
        out[symbol - 1] = value
    if not seen.all():
        missing = (np.flatnonzero(~seen) + 1).tolist()
        raise DecodeError(f"decoding failed: symbols {missing} of message {theta} not recovered")
    return out


def canonical_form(requests: Sequence[Request]) -> tuple:
    """Query shape at one database with the symbol labels quotiented out.

    Labels of each message are replaced by their first-occurrence order in the
    presented request list, then requests are sorted by size, message set and
    the relabelled symbols.
    """
    ranks: dict[SymbolId, int] = {}
    counters: dict[int, int] = {}
    relabelled = []
    for req in requests:
        row = []
        for sym in req:
            if sym not in ranks:
                ranks[sym] = counters.get(sym.message, 0)
                counters[sym.message] = ranks[sym] + 1
            row.append((sym.message, ranks[sym]))
        relabelled.append(tuple(row))
    relabelled.sort(key=lambda q: (len(q), _message_set(q), q))
    return tuple(relabelled)
