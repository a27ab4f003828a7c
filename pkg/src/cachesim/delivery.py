"""One-shot D2D delivery: leaders, codewords, decoding and load accounting."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .combinatorics import n_distinct, subset_mask, subsets_colex
from .placement import CacheState, Scenario, SubPieceId, SubPieceStore


class DecodeError(RuntimeError):
    """A user could not rebuild a sub-piece; indicates a protocol bug."""


def check_demand(d: Sequence[int], N: int, K: int) -> tuple[int, ...]:
    d = tuple(int(x) for x in d)
    if len(d) != K:
        raise ValueError(f"demand has length {len(d)}, expected K={K}")
    if any(not 1 <= x <= N for x in d):
        raise ValueError(f"demand entries must lie in [1, {N}]")
    return d


def select_leaders(i: int, d: Sequence[int], rule: str = "lowest") -> tuple[int, ...]:
    """One user per distinct file requested by [K] minus {i}.

    ``rule`` picks the lowest (default) or highest user index per file.
    """
    chosen: dict[int, int] = {}
    for k, f in enumerate(d, start=1):
        if k == i:
            continue
        if rule == "lowest":
            chosen.setdefault(f, k)
        elif rule == "highest":
            chosen[f] = k
        else:
            raise ValueError(f"unknown leader rule {rule!r}")
    return tuple(sorted(chosen.values()))


def codeword_terms(i: int, A: Iterable[int], d: Sequence[int]) -> list[SubPieceId]:
    """Sub-pieces XORed into Y^i_A: W_{d_k, (A + {i}) - {k}, i} for k in A."""
    A = tuple(sorted(A))
    full = set(A) | {i}
    return [SubPieceId(d[k - 1], tuple(sorted(full - {k})), i) for k in A]


def _xor_terms(keys: Iterable[SubPieceId], pieces, t: int) -> int:
    acc = 0
    for key in keys:
        # sub-files cached by other than t users are empty under MAN placement
        if len(key.holders) == t:
            acc ^= pieces[key]
    return acc


@dataclass(frozen=True)
class Codeword:
    sender: int
    targets: tuple[int, ...]
    payload: int


def build_codeword(i: int, A: Iterable[int], d: Sequence[int], store: SubPieceStore) -> Codeword:
    A = tuple(sorted(A))
    if i in A:
        raise ValueError("sender cannot be in its own target set")
    payload = _xor_terms(codeword_terms(i, A, d), store.pieces, store.scenario.t)
    return Codeword(i, A, payload)


@dataclass
class TransmissionLog:
    scenario: Scenario
    demand: tuple[int, ...]
    leaders: dict[int, tuple[int, ...]]
    sent: dict[int, list[Codeword]]
    _index: dict[tuple[int, tuple[int, ...]], int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        for i, cws in self.sent.items():
            for cw in cws:
                self._index[(i, cw.targets)] = cw.payload

    def lookup(self, i: int, A: tuple[int, ...]) -> int | None:
        return self._index.get((i, A))

    def counts(self) -> dict[int, int]:
        return {i: len(cws) for i, cws in self.sent.items()}

    @property
    def total_bits(self) -> int:
        return sum(self.counts().values()) * self.scenario.piece_bits

    @property
    def load(self) -> Fraction:
        return Fraction(self.total_bits, self.scenario.F)

    def user_loads(self) -> dict[int, Fraction]:
        L, F = self.scenario.piece_bits, self.scenario.F
        return {i: Fraction(n * L, F) for i, n in self.counts().items()}


def transmit_all(
    scenario: Scenario,
    d: Sequence[int],
    store: SubPieceStore,
    leader_rule: str = "lowest",
    active: Iterable[int] | None = None,
) -> TransmissionLog:
    """Every (active) user i broadcasts Y^i_A for all t-subsets A meeting its leaders."""
    d = check_demand(d, scenario.N, scenario.K)
    senders = sorted(active) if active is not None else list(scenario.users)
    leaders: dict[int, tuple[int, ...]] = {}
    sent: dict[int, list[Codeword]] = {}
    for i in scenario.users:
        leaders[i] = select_leaders(i, d, leader_rule)
    for i in senders:
        U = set(leaders[i])
        others = [k for k in scenario.users if k != i]
        sent[i] = [
            build_codeword(i, A, d, store)
            for A in subsets_colex(others, scenario.t)
            if U.intersection(A)
        ]
    return TransmissionLog(scenario, d, leaders, sent)


def covering_sets(C: Iterable[int], d: Sequence[int], exclude: int) -> list[tuple[int, ...]]:
    """Subsets of C holding exactly one requester of each file in d minus ``exclude``."""
    files = sorted({f for k, f in enumerate(d, start=1) if k != exclude})
    by_file: dict[int, list[int]] = {f: [] for f in files}
    for k in sorted(C):
        by_file.setdefault(d[k - 1], []).append(k)
    if set(by_file) != set(files):
        return []
    return [tuple(sorted(choice)) for choice in product(*(by_file[f] for f in files))]


def lemma1_null_check(
    i: int,
    d: Sequence[int],
    C: Iterable[int],
    store: SubPieceStore,
    leader_rule: str = "lowest",
) -> bool:
    """True iff XOR over V in V_F of Y^i_{C - V} vanishes.

    Codewords indexed by sets of size other than t are empty (zero).
    """
    C = tuple(sorted(C))
    U = select_leaders(i, d, leader_rule)
    if i in C or not set(U) <= set(C):
        raise ValueError("C must contain the leaders of i and exclude i")
    t = store.scenario.t
    acc = 0
    for V in covering_sets(C, d, i):
        B = tuple(k for k in C if k not in V)
        acc ^= _xor_terms(codeword_terms(i, B, d), store.pieces, t)
    return acc == 0


@dataclass
class DecodeResult:
    user: int
    file: int
    bits: int
    # missing sub-piece -> (sender whose codewords were used, target sets used)
    provenance: dict[SubPieceId, tuple[int, tuple[tuple[int, ...], ...]]]

    def one_shot(self) -> bool:
        return all(key.owner == sender for key, (sender, _) in self.provenance.items())


def recover_codeword(
    log: TransmissionLog, i: int, A: tuple[int, ...]
) -> tuple[int, tuple[tuple[int, ...], ...]]:
    """Y^i_A, either as sent or rebuilt from sender i's other codewords."""
    direct = log.lookup(i, A)
    if direct is not None:
        return direct, (A,)
    U = log.leaders[i]
    C = tuple(sorted(set(A) | set(U)))
    acc = 0
    used = []
    for V in covering_sets(C, log.demand, i):
        if V == U:
            continue
        B = tuple(k for k in C if k not in V)
        payload = log.lookup(i, B)
        if payload is None:
            raise DecodeError(f"Y^{i}_{B} needed to rebuild Y^{i}_{A} was not received")
        acc ^= payload
        used.append(B)
    return acc, tuple(used)


def recover_pieces(
    k: int, log: TransmissionLog, cache: CacheState, d: Sequence[int] | None = None
) -> tuple[dict[SubPieceId, int], dict]:
    """All sub-pieces of W_{d_k} user k can obtain; senders absent from the log are skipped."""
    scenario = log.scenario
    d = log.demand if d is None else tuple(d)
    q = d[k - 1]
    mine = cache.caches[k]
    got: dict[SubPieceId, int] = {}
    provenance = {}
    rebuilt: dict[tuple[int, tuple[int, ...]], tuple[int, tuple]] = {}
    for V in subsets_colex(scenario.users, scenario.t):
        for i in V:
            key = SubPieceId(q, V, i)
            if k in V:
                got[key] = mine[key]
                continue
            if i not in log.sent:
                continue
            A = tuple(sorted((set(V) - {i}) | {k}))
            if (i, A) not in rebuilt:
                rebuilt[(i, A)] = recover_codeword(log, i, A)
            bits, used = rebuilt[(i, A)]
            for term in codeword_terms(i, A, d):
                if term == key:
                    continue
                try:
                    bits ^= mine[term]
                except KeyError:
                    raise DecodeError(f"user {k} lacks side information {term}") from None
            got[key] = bits
            provenance[key] = (i, used)
    return got, provenance


def decode_all(
    k: int, log: TransmissionLog, cache: CacheState, d: Sequence[int] | None = None
) -> DecodeResult:
    """Rebuild W_{d_k} at user k from its cache and the received codewords."""
    scenario = log.scenario
    d = log.demand if d is None else tuple(d)
    q = d[k - 1]
    got, provenance = recover_pieces(k, log, cache, d)
    L = scenario.piece_bits
    out = 0
    for position, V_i in enumerate(
        (V, i) for V in subsets_colex(scenario.users, scenario.t) for i in V
    ):
        key = SubPieceId(q, *V_i)
        if key not in got:
            raise DecodeError(f"user {k} cannot recover {key}: sender {key.owner} silent")
        out |= got[key] << (position * L)
    return DecodeResult(k, q, out, provenance)


# --------------------------------------------------------------------------
# Wire format


def serialize_log(log: TransmissionLog) -> bytes:
    """[sender u16][t u16][K-bit target bitmap][payload], little-endian, sender order."""
    K = log.scenario.K
    bitmap_len = (K + 7) // 8
    payload_len = (log.scenario.piece_bits + 7) // 8
    chunks = []
    for i in sorted(log.sent):
        for cw in log.sent[i]:
            chunks.append(struct.pack("<HH", cw.sender, len(cw.targets)))
            chunks.append(subset_mask(cw.targets).to_bytes(bitmap_len, "little"))
            chunks.append(cw.payload.to_bytes(payload_len, "little"))
    return b"".join(chunks)


def parse_log(data: bytes, K: int, piece_bits: int) -> list[Codeword]:
    bitmap_len = (K + 7) // 8
    payload_len = (piece_bits + 7) // 8
    step = 4 + bitmap_len + payload_len
    if len(data) % step:
        raise ValueError("truncated transmission log")
    out = []
    for off in range(0, len(data), step):
        sender, t = struct.unpack_from("<HH", data, off)
        mask = int.from_bytes(data[off + 4 : off + 4 + bitmap_len], "little")
        targets = tuple(k for k in range(1, K + 1) if mask >> (k - 1) & 1)
        if len(targets) != t:
            raise ValueError("bitmap population does not match t")
        payload = int.from_bytes(data[off + 4 + bitmap_len : off + step], "little")
        out.append(Codeword(sender, targets, payload))
    return out


def expected_codeword_count(scenario: Scenario, d: Sequence[int], i: int) -> int:
    from .combinatorics import binom

    ne = n_distinct(d, exclude=i)
    return binom(scenario.K - 1, scenario.t) - binom(scenario.K - 1 - ne, scenario.t)
