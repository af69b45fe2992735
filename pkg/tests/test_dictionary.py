import random

import pytest

from gdpipe.dictionary import AlreadyKnown, DictionaryState, SnapshotError


class ReferenceModel:
    """Linear-scan model of the same LRU semantics, for cross-checking."""

    def __init__(self, id_width):
        self.capacity = 1 << id_width
        self.entries = {}  # basis -> [id, last_used]
        self.next_free = 0

    def lookup(self, basis, now):
        if basis in self.entries:
            self.entries[basis][1] = now
            return self.entries[basis][0]
        return None

    def learn(self, basis, now):
        evicted = None
        if self.next_free < self.capacity:
            id_ = self.next_free
            self.next_free += 1
        else:
            id_, evicted = min(
                (v[0], b) for b, v in self.entries.items()
                if v[1] == min(e[1] for e in self.entries.values()))
            del self.entries[evicted]
        self.entries[basis] = [id_, now]
        return id_, evicted


def check_invariants(state: DictionaryState):
    pairs = state.items()
    ids = [i for i, _ in pairs]
    bases = [b for _, b in pairs]
    assert len(set(ids)) == len(ids)
    assert len(set(bases)) == len(bases)
    assert len(pairs) + state.free_count == state.capacity
    for id_, basis in pairs:
        assert state.lookup_basis(id_) == basis
        entry = state.entry(basis)
        assert entry is not None and entry[0] == id_
    assert set(ids).isdisjoint(state.free_ids())


class TestBasics:
    def test_fresh_pool_assigns_in_order(self):
        state = DictionaryState(id_width=15)
        outcomes = [state.learn(b, now=t) for t, b in enumerate([10, 20, 30])]
        assert [o.assigned for o in outcomes] == [0, 1, 2]
        assert all(o.evicted_basis is None for o in outcomes)
        assert state.lookup_id(10, now=5) == 0
        assert state.lookup_id(20, now=5) == 1

    def test_miss_returns_none_without_mutation(self):
        state = DictionaryState(id_width=4)
        assert state.lookup_id(7, now=1) is None
        assert len(state) == 0 and state.free_count == 16

    def test_lookup_basis(self):
        state = DictionaryState(id_width=4)
        assert state.lookup_basis(3) is None
        state.learn(99, now=0)
        assert state.lookup_basis(0) == 99
        with pytest.raises(ValueError):
            state.lookup_basis(16)
        with pytest.raises(ValueError):
            state.lookup_basis(-1)

    def test_already_known(self):
        state = DictionaryState(id_width=4)
        state.learn(5, now=0)
        with pytest.raises(AlreadyKnown):
            state.learn(5, now=1)

    def test_basis_width_validation(self):
        state = DictionaryState(id_width=4, basis_bits=4)
        with pytest.raises(ValueError):
            state.learn(16, now=0)
        with pytest.raises(ValueError):
            state.lookup_id(-1, now=0)


class TestEviction:
    def test_capacity_two_hand_simulation(self):
        # 1-bit ID pool: learn b0, learn b1, touch b1, learn b2 evicts b0
        state = DictionaryState(id_width=1)
        assert state.learn(100, now=0).assigned == 0
        assert state.learn(101, now=1).assigned == 1
        assert state.lookup_id(101, now=2) == 1
        out = state.learn(102, now=3)
        assert (out.assigned, out.evicted_basis) == (0, 100)
        assert state.lookup_id(100, now=4) is None
        assert state.lookup_basis(0) == 102  # recycled id, never the old basis

    def test_tie_break_smaller_id(self):
        state = DictionaryState(id_width=2)
        for b in (10, 11, 12, 13):
            state.learn(b, now=0)  # all stamps equal
        state.lookup_id(10, now=0)  # touch id 0, stamp unchanged
        out = state.learn(14, now=0)
        assert (out.assigned, out.evicted_basis) == (0, 10)

    def test_decoder_reads_do_not_refresh(self):
        state = DictionaryState(id_width=1)
        state.learn(100, now=0)
        state.learn(101, now=1)
        state.lookup_basis(0)  # would save basis 100 if it refreshed
        out = state.learn(102, now=2)
        assert out.evicted_basis == 100

    def test_encoder_hits_do_refresh(self):
        state = DictionaryState(id_width=1)
        state.learn(100, now=0)
        state.learn(101, now=1)
        state.lookup_id(100, now=2)
        out = state.learn(102, now=3)
        assert out.evicted_basis == 101

    def test_peek_victim(self):
        state = DictionaryState(id_width=1)
        assert state.peek_victim() is None
        state.learn(100, now=0)
        assert state.peek_victim() is None  # pool not yet exhausted
        state.learn(101, now=1)
        assert state.peek_victim() == (0, 100)
        out = state.learn(102, now=2)
        assert (out.assigned, out.evicted_basis) == (0, 100)

    def test_eviction_is_lru_minimal(self):
        rng = random.Random(17)
        state = DictionaryState(id_width=3)
        stamps = {}
        for t in range(500):
            basis = rng.randrange(100)
            if state.entry(basis) is not None:
                state.lookup_id(basis, now=t)
                stamps[basis] = t
                continue
            out = state.learn(basis, now=t)
            if out.evicted_basis is not None:
                evicted_stamp = stamps.pop(out.evicted_basis)
                assert all(evicted_stamp <= s for s in stamps.values())
            stamps[basis] = t
            check_invariants(state)

    def test_monotone_clock_clamp(self):
        state = DictionaryState(id_width=2)
        state.learn(1, now=10)
        state.lookup_id(1, now=3)  # stale timestamp cannot rewind recency
        assert state.entry(1)[1] == 10


class TestAgainstReference:
    @pytest.mark.parametrize("seed", range(4))
    def test_random_walk_matches_model(self, seed):
        rng = random.Random(seed)
        state = DictionaryState(id_width=3)
        model = ReferenceModel(3)
        for t in range(400):
            basis = rng.randrange(40)
            got = state.lookup_id(basis, now=t)
            want = model.lookup(basis, now=t)
            assert got == want
            if got is None:
                out = state.learn(basis, now=t)
                want_id, want_evicted = model.learn(basis, now=t)
                assert (out.assigned, out.evicted_basis) == (want_id, want_evicted)
        check_invariants(state)

    def test_determinism(self):
        def run():
            state = DictionaryState(id_width=2)
            rng = random.Random(123)
            for t in range(200):
                b = rng.randrange(12)
                if state.lookup_id(b, now=t) is None:
                    state.learn(b, now=t)
            return state.items(), state.free_ids()

        assert run() == run()


class TestSnapshot:
    def test_roundtrip(self, tmp_path):
        state = DictionaryState(id_width=4, basis_bits=11)
        for t, b in enumerate((0x7FF, 0x001, 0x2A5)):
            state.learn(b, now=t)
        path = tmp_path / "snap.txt"
        state.save(path)
        assert path.read_text() == "0 7ff\n1 001\n2 2a5\n"
        loaded = DictionaryState.load(path, id_width=4, basis_bits=11)
        assert loaded.items() == state.items()
        assert loaded.free_ids() == tuple(range(3, 16))
        check_invariants(loaded)

    def test_load_with_id_holes(self, tmp_path):
        path = tmp_path / "snap.txt"
        path.write_text("1 0a\n5 0b\n")
        loaded = DictionaryState.load(path, id_width=3)
        assert loaded.items() == [(1, 0x0A), (5, 0x0B)]
        assert loaded.free_ids() == (0, 2, 3, 4, 6, 7)

    @pytest.mark.parametrize("text", [
        "0\n",            # missing field
        "0 zz\n",         # bad hex
        "99 0a\n",        # id out of range
        "1 0a\n1 0b\n",   # duplicate id
        "1 0a\n2 0a\n",   # duplicate basis
    ])
    def test_load_rejects_malformed(self, tmp_path, text):
        path = tmp_path / "snap.txt"
        path.write_text(text)
        with pytest.raises(SnapshotError):
            DictionaryState.load(path, id_width=3)


def test_conservation_under_many_learns():
    state = DictionaryState(id_width=6)
    for t in range(1000):
        state.learn(t, now=t)
    assert len(state) == 64 and state.free_count == 0
    check_invariants(state)
