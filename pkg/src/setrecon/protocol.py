"""Executable partitioned set-reconciliation protocols.

Node A (the caller) reconciles its set against node B, reachable only
through a request/reply transport: A sends a partition path word, B
replies with the serialized sketch of its elements in that partition.
Two engines are provided:

* `psr_reconcile` requests a sketch for every partition it visits.
* `epsr_reconcile` requests sketches only for the first children of each
  split and derives the remaining child by subtracting the transmitted
  ones from the parent sketch, halving communication.

Both engines count sketches transmitted, recovery calls, communication
rounds (1 + deepest transmitted partition), and B->A bits, where one
sketch always costs (mbar+gamma+1)(element_bits+1)-1 bits regardless of
its actual serialized size.  A->B requests are free by convention.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from . import sketch as sk
from .partition import (
    PartitionSchedule,
    fair_probs,
    key_of,
    word_of_key,
)

_MAX_DEPTH = 128


class ProtocolError(Exception):
    """Protocol-level misuse: config mismatch, unknown placement, bad reply."""


@dataclass(frozen=True)
class ProtocolConfig:
    """Parameters shared by both parties of a reconciliation."""

    mbar: int
    gamma: int
    element_bits: int
    schedule: PartitionSchedule
    hash_seed: int = 0
    protocol: str = "psr"

    def __post_init__(self):
        if self.protocol not in ("psr", "epsr"):
            raise ValueError("protocol must be 'psr' or 'epsr'")

    @property
    def field_config(self) -> sk.FieldConfig:
        return sk.field_setup(self.element_bits, self.mbar, self.gamma)

    def fingerprint(self) -> str:
        text = "|".join(
            [
                str(self.element_bits),
                str(self.mbar),
                str(self.gamma),
                str(self.hash_seed),
                ",".join(str(p) for p in self.schedule.probs),
            ]
        )
        return hashlib.blake2b(text.encode(), digest_size=8).hexdigest()


@dataclass(frozen=True)
class ReconcileMetrics:
    sketches_transmitted: int
    recovery_calls: int
    rounds: int
    bits_b_to_a: int


@dataclass(frozen=True)
class ReconcileResult:
    """One-sided differences as seen from A."""

    a_only: frozenset[int]
    b_only: frozenset[int]

    @property
    def symmetric_difference(self) -> frozenset[int]:
        return self.a_only | self.b_only


class HashPlacement:
    """Default placement: elements fall into children according to their
    hashed key and the schedule's subinterval widths."""

    _LOOKAHEAD = 8  # words are computed a few levels ahead and cached

    def __init__(self, schedule: PartitionSchedule, seed: int):
        self.schedule = schedule
        self.seed = seed
        self._words: dict[int, tuple[int, ...]] = {}

    def word(self, element: int, depth: int) -> tuple[int, ...]:
        w = self._words.get(element)
        if w is None or len(w) < depth:
            w = word_of_key(
                self.schedule, key_of(element, self.seed), depth + self._LOOKAHEAD
            )
            self._words[element] = w
        return w[:depth]


class TablePlacement:
    """Explicit element -> path-word table, for reproducing fixed trees."""

    def __init__(self, words: dict[int, tuple[int, ...]]):
        self._words = dict(words)

    def word(self, element: int, depth: int) -> tuple[int, ...]:
        try:
            w = self._words[element]
        except KeyError:
            raise ProtocolError(f"no placement for element {element}") from None
        if depth > len(w):
            raise ProtocolError(
                f"placement word for element {element} shorter than depth {depth}"
            )
        return w[:depth]


def default_placement(config: ProtocolConfig) -> HashPlacement:
    return HashPlacement(config.schedule, config.hash_seed)


class _SubsetCache:
    """Per-path subsets of one party's element list, filtered incrementally."""

    def __init__(self, elements, placement):
        self._cache = {(): tuple(elements)}
        self._placement = placement

    def members(self, path: tuple[int, ...]) -> tuple[int, ...]:
        got = self._cache.get(path)
        if got is None:
            parent = self.members(path[:-1])
            depth = len(path)
            got = tuple(
                e for e in parent if self._placement.word(e, depth) == path
            )
            self._cache[path] = got
        return got


def respond(request, set_b, config: ProtocolConfig, placement=None) -> sk.SRSketch:
    """B's reply: the sketch of its elements inside the requested partition.

    The request is a path word, or a PartitionInterval carrying one.
    """
    path = tuple(getattr(request, "path", request))
    placement = placement or default_placement(config)
    depth = len(path)
    members = [e for e in set_b if placement.word(e, depth) == path]
    return sk.sketch_of(config.field_config, members)


@dataclass(frozen=True)
class TraceRecord:
    direction: str  # "a_to_b" | "b_to_a"
    round: int
    path: tuple[int, ...]
    nbytes: int

    def line(self) -> str:
        path = ".".join(str(j) for j in self.path) if self.path else "-"
        return f"{self.direction},{self.round},{path},{self.nbytes}"


@dataclass
class ProtocolTrace:
    """Wire-level record of one reconciliation, one line per message."""

    records: list[TraceRecord] = field(default_factory=list)

    def add(self, direction: str, path, nbytes: int) -> None:
        self.records.append(TraceRecord(direction, len(path) + 1, tuple(path), nbytes))

    def lines(self) -> list[str]:
        return [r.line() for r in self.records]

    def write(self, fobj) -> None:
        for line in self.lines():
            fobj.write(line + "\n")

    def transmitted_paths(self) -> list[tuple[int, ...]]:
        return [r.path for r in self.records if r.direction == "b_to_a"]


def round_count(trace: ProtocolTrace) -> int:
    """1 + deepest partition whose sketch crossed the network."""
    paths = trace.transmitted_paths()
    if not paths:
        raise ValueError("empty trace")
    return 1 + max(len(p) for p in paths)


class Responder:
    """B-side request handler serving serialized partition sketches."""

    def __init__(self, set_b, config: ProtocolConfig, placement=None):
        self.config = config
        self._fingerprint = config.fingerprint()
        self._cache = _SubsetCache(set_b, placement or default_placement(config))
        self._field = config.field_config

    def reply(self, fingerprint: str, path: tuple[int, ...]) -> bytes:
        if fingerprint != self._fingerprint:
            raise ProtocolError("request fingerprint does not match responder config")
        return sk.to_bytes(sk.sketch_of(self._field, self._cache.members(path)))


class LoopbackTransport:
    """In-process transport wiring A directly to a Responder, optionally
    recording every message into a ProtocolTrace."""

    def __init__(self, responder: Responder, trace: ProtocolTrace | None = None):
        self._responder = responder
        self.trace = trace

    def request(self, fingerprint: str, path: tuple[int, ...]) -> bytes:
        if self.trace is not None:
            self.trace.add("a_to_b", path, 0)
        blob = self._responder.reply(fingerprint, path)
        if self.trace is not None:
            self.trace.add("b_to_a", path, len(blob))
        return blob


def make_loopback(set_b, config: ProtocolConfig, placement=None,
                  trace: ProtocolTrace | None = None) -> LoopbackTransport:
    return LoopbackTransport(Responder(set_b, config, placement), trace)


class _Run:
    """Shared per-run state of either engine."""

    def __init__(self, set_a, transport, config: ProtocolConfig, placement):
        self.config = config
        self.transport = transport
        self.fingerprint = config.fingerprint()
        self.field = config.field_config
        self.cache = _SubsetCache(set_a, placement or default_placement(config))
        self.a_only: set[int] = set()
        self.b_only: set[int] = set()
        self.tx = 0
        self.recoveries = 0
        self.max_tx_depth = 0

    def fetch(self, path: tuple[int, ...]) -> sk.SRSketch:
        if len(path) > _MAX_DEPTH:
            raise ProtocolError("partition tree too deep; placement not separating")
        zb = sk.from_bytes(self.transport.request(self.fingerprint, path))
        if zb.config != self.field:
            raise ProtocolError("reply sketch configuration mismatch")
        self.tx += 1
        self.max_tx_depth = max(self.max_tx_depth, len(path))
        return zb

    def diff_sketch(self, path: tuple[int, ...]) -> sk.SRSketch:
        za = sk.sketch_of(self.field, self.cache.members(path))
        return sk.subtract(za, self.fetch(path))

    def recover(self, z: sk.SRSketch) -> sk.RecoveryOutcome:
        self.recoveries += 1
        return sk.recover(z)

    def merge(self, outcome: sk.RecoveryOutcome) -> None:
        # Recovered pieces come from disjoint partitions (or disjoint
        # residuals) and must never overlap.
        if (self.a_only & outcome.recovered_a) or (self.b_only & outcome.recovered_b):
            raise ProtocolError("overlapping recoveries; inconsistent replies")
        self.a_only |= outcome.recovered_a
        self.b_only |= outcome.recovered_b

    def finish(self) -> tuple[ReconcileResult, ReconcileMetrics]:
        bits = self.tx * sk.wire_cost(
            self.config.mbar, self.config.gamma, self.config.element_bits
        )
        result = ReconcileResult(frozenset(self.a_only), frozenset(self.b_only))
        return result, ReconcileMetrics(self.tx, self.recoveries, self.max_tx_depth + 1, bits)


def psr_reconcile(set_a, transport, config: ProtocolConfig, placement=None):
    """Reconcile by requesting one sketch per visited partition.

    Every failed recovery splits the partition and requests all c children
    in the next round; every request is followed by exactly one recovery.
    """
    run = _Run(set_a, transport, config, placement)
    c = config.schedule.c
    pending: list[tuple[int, ...]] = [()]
    while pending:
        next_pending: list[tuple[int, ...]] = []
        for path in pending:
            outcome = run.recover(run.diff_sketch(path))
            if outcome.flag:
                run.merge(outcome)
            else:
                next_pending.extend(path + (j,) for j in range(c))
        pending = next_pending
    return run.finish()


def epsr_reconcile(set_a, transport, config: ProtocolConfig, placement=None):
    """Reconcile reusing each parent sketch for its last child.

    At a split, children are requested one at a time; after each reply the
    child sketch is subtracted from the parent, and recovery is attempted
    on the residual.  Residual success ends the split early; if all c-1
    requests fail to finish the job, the final residual *is* the last
    child's sketch, which is processed without transmission and without a
    redundant recovery call (the residual attempt already failed for it).
    """
    run = _Run(set_a, transport, config, placement)
    c = config.schedule.c

    def process(path: tuple[int, ...], z: sk.SRSketch, skip: bool) -> None:
        if not skip:
            outcome = run.recover(z)
            if outcome.flag:
                run.merge(outcome)
                return
        if len(path) >= _MAX_DEPTH:
            raise ProtocolError("partition tree too deep; placement not separating")
        residual = z
        for j in range(c - 1):
            child = path + (j,)
            z_child = run.diff_sketch(child)
            process(child, z_child, skip=False)
            residual = sk.subtract(residual, z_child)
            outcome = run.recover(residual)
            if outcome.flag:
                run.merge(outcome)
                return
        process(path + (c - 1,), residual, skip=True)

    process((), run.diff_sketch(()), skip=False)
    return run.finish()


def reconcile(set_a, transport, config: ProtocolConfig, placement=None):
    engine = psr_reconcile if config.protocol == "psr" else epsr_reconcile
    return engine(set_a, transport, config, placement)


# Reference placement reproducing the documented 9-difference splitting
# tree (root 9 -> 5/4 -> 2,3 / 0,4 -> 2,1 / 2,2) used by tests and the
# fig2/fig3 CLI fixtures.
WORKED_EXAMPLE_WORDS: dict[int, tuple[int, ...]] = {
    1: (0, 0, 0, 0),
    2: (0, 0, 1, 0),
    3: (0, 1, 0, 0),
    4: (0, 1, 0, 1),
    5: (0, 1, 1, 0),
    6: (1, 1, 0, 0),
    7: (1, 1, 0, 1),
    8: (1, 1, 1, 0),
    9: (1, 1, 1, 1),
}

_FIXTURE_PROTOCOLS = {"fig2": "psr", "fig3": "epsr"}


@dataclass(frozen=True)
class Fixture:
    name: str
    set_a: frozenset[int]
    set_b: frozenset[int]
    config: ProtocolConfig
    placement: TablePlacement


def load_fixture(name: str) -> Fixture:
    """Built-in placements `fig2` (PSR) and `fig3` (EPSR) over one shared
    tree, pinned so metrics are exactly reproducible."""
    try:
        proto = _FIXTURE_PROTOCOLS[name]
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; choose from fig2, fig3") from None
    config = ProtocolConfig(
        mbar=2,
        gamma=1,
        element_bits=16,
        schedule=fair_probs(2),
        hash_seed=0,
        protocol=proto,
    )
    set_a = frozenset({1, 3, 5, 7, 9})
    set_b = frozenset({2, 4, 6, 8})
    return Fixture(name, set_a, set_b, config, TablePlacement(WORKED_EXAMPLE_WORDS))
