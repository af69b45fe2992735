"""Shared basis <-> ID mapping with LRU identifier recycling.

One DictionaryState is logically shared by the encoder and decoder; the
control plane is the single writer. Identifiers are plain ints in
[0, 2^id_width); bases are plain ints holding k-bit values. Timestamps
are any comparable numbers (the simulator passes integer nanoseconds) and
are clamped internally so the stored clock never runs backwards.
"""

from __future__ import annotations

from collections import OrderedDict, deque
from dataclasses import dataclass
from pathlib import Path

from .gdcore import GdError


class AlreadyKnown(GdError):
    """learn() was called for a basis that already has an identifier."""


class SnapshotError(GdError):
    """A snapshot file is malformed or inconsistent with the state."""


@dataclass(frozen=True, slots=True)
class LearnOutcome:
    """Result of learning one basis: the assigned ID, plus the basis that
    was evicted to free it (None while unused IDs remain)."""

    assigned: int
    evicted_basis: int | None


class DictionaryState:
    """Forward (basis -> ID) and reverse (ID -> basis) maps with recency.

    The two maps are exact mutual inverses at all times, and the assigned
    IDs plus the free pool always partition the 2^id_width ID space.
    Fresh states hand out IDs in ascending order; once the pool is empty,
    learn() evicts the entry with the smallest (last_used, id) pair and
    recycles its identifier.
    """

    def __init__(self, id_width: int = 15, basis_bits: int | None = None):
        if id_width < 1:
            raise ValueError("id_width must be >= 1")
        self.id_width = id_width
        self.capacity = 1 << id_width
        self.basis_bits = basis_bits
        # basis -> [id, last_used], kept in touch order (oldest first)
        self._entries: OrderedDict[int, list] = OrderedDict()
        self._reverse: dict[int, int] = {}
        self._free: deque[int] = deque(range(self.capacity))
        self._clock = 0

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def free_count(self) -> int:
        return len(self._free)

    def free_ids(self) -> tuple[int, ...]:
        return tuple(self._free)

    def items(self):
        """(id, basis) pairs sorted by id."""
        return sorted((id_, basis) for id_, basis in self._reverse.items())

    def entry(self, basis: int) -> tuple[int, int] | None:
        """(id, last_used) for a basis, without touching recency."""
        e = self._entries.get(basis)
        return None if e is None else (e[0], e[1])

    def _check_basis(self, basis: int):
        if basis < 0:
            raise ValueError("basis must be non-negative")
        if self.basis_bits is not None and basis >> self.basis_bits:
            raise ValueError(f"basis does not fit in {self.basis_bits} bits")

    def _tick(self, now):
        if now > self._clock:
            self._clock = now
        return self._clock

    def lookup_id(self, basis: int, now) -> int | None:
        """Encoder-side read: returns the ID on a hit and refreshes its
        recency; a miss returns None and mutates nothing."""
        self._check_basis(basis)
        e = self._entries.get(basis)
        if e is None:
            return None
        e[1] = self._tick(now)
        self._entries.move_to_end(basis)
        return e[0]

    def lookup_basis(self, id_: int) -> int | None:
        """Decoder-side read: no recency refresh (the compression table's
        TTL lives on the encoder side)."""
        if not 0 <= id_ < self.capacity:
            raise ValueError(f"id does not fit in {self.id_width} bits")
        return self._reverse.get(id_)

    def learn(self, basis: int, now) -> LearnOutcome:
        """Map a new basis, evicting the LRU entry if no ID is free.

        Ties on last_used evict the smaller ID. Raises AlreadyKnown for a
        basis that is already mapped (duplicate digest; callers treat it
        as a benign no-op).
        """
        self._check_basis(basis)
        if basis in self._entries:
            raise AlreadyKnown(f"basis already mapped to id {self._entries[basis][0]}")
        now = self._tick(now)
        evicted = None
        if self._free:
            id_ = self._free.popleft()
        else:
            id_, evicted = self._pick_victim()
            del self._entries[evicted]
            del self._reverse[id_]
        self._entries[basis] = [id_, now]
        self._reverse[id_] = basis
        return LearnOutcome(assigned=id_, evicted_basis=evicted)

    def peek_victim(self) -> tuple[int, int] | None:
        """The (id, basis) that the next learn() would evict, or None while
        free identifiers remain."""
        if self._free or not self._entries:
            return None
        return self._pick_victim()

    def _pick_victim(self) -> tuple[int, int]:
        # entries are in touch order with non-decreasing last_used, so the
        # minimal-timestamp group is a prefix; break ties by smallest id
        it = iter(self._entries.items())
        basis, (id_, stamp) = next(it)
        best = (id_, basis)
        for b, (i, t) in it:
            if t != stamp:
                break
            if i < best[0]:
                best = (i, b)
        return best

    # -- snapshot format: one "<id-decimal> <basis-hex>" line per entry,
    # sorted by id; used to pre-load static tables.

    def save(self, path) -> None:
        width = (self.basis_bits + 3) // 4 if self.basis_bits else 1
        lines = [f"{id_} {basis:0{width}x}" for id_, basis in self.items()]
        Path(path).write_text("".join(line + "\n" for line in lines))

    @classmethod
    def load(cls, path, id_width: int = 15, basis_bits: int | None = None,
             now=0) -> "DictionaryState":
        state = cls(id_width=id_width, basis_bits=basis_bits)
        seen_ids = set()
        for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                id_str, basis_str = line.split()
                id_, basis = int(id_str), int(basis_str, 16)
            except ValueError:
                raise SnapshotError(f"line {ln}: expected '<id> <basis-hex>'") from None
            if not 0 <= id_ < state.capacity:
                raise SnapshotError(f"line {ln}: id {id_} outside {id_width}-bit space")
            if id_ in seen_ids:
                raise SnapshotError(f"line {ln}: duplicate id {id_}")
            if basis in state._entries:
                raise SnapshotError(f"line {ln}: duplicate basis")
            state._check_basis(basis)
            seen_ids.add(id_)
            state._entries[basis] = [id_, now]
            state._reverse[id_] = basis
        state._free = deque(i for i in range(state.capacity) if i not in seen_ids)
        state._tick(now)
        return state
