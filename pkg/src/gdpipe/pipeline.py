"""Encoder switch, decoder switch, control plane, and link simulation.

Three packet types cross the link: RAW (1) carries an unprocessed 2^m-bit
chunk, SYN_BASIS (2) carries syndrome + MSB + basis, SYN_ID (3) carries
syndrome + MSB + a short dictionary identifier. The control plane learns
unknown bases from digests and installs the mapping decoder-side first,
after a configurable delay.

Time is discrete-event. Configs speak float seconds; internally every
timestamp is an integer nanosecond count so scheduling comparisons are
exact (float seconds cannot represent the 1.77 ms / 1 us experiment grid
without off-by-one install ticks).
"""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from math import isinf, isnan

import numpy as np

from .dictionary import DictionaryState
from .gdcore import (
    GENERATOR_REGISTRY,
    BitChunk,
    EncodedChunk,
    GdError,
    HammingCode,
    LengthMismatch,
    _mod_small,
    build_code,
    gd_decode,
    gd_encode,
    join_chunk,
    split_chunk,
)
from .traces import Trace

RAW = 1
SYN_BASIS = 2
SYN_ID = 3

# local-experimental EtherTypes used by the pcap exporter, one per kind
ETHERTYPES = {RAW: 0x88B5, SYN_BASIS: 0x88B6, SYN_ID: 0x88B7}


class MalformedFrame(GdError):
    """Frame payload has the wrong length, bad padding, or bad field widths."""


class DecodeMiss(GdError):
    """A SYN_ID frame referenced an identifier with no installed mapping."""


class InvariantViolation(GdError):
    """A pipeline bookkeeping invariant failed to hold."""


def _to_ns(seconds: float) -> int:
    return round(seconds * 1e9)


@dataclass(frozen=True, slots=True)
class Frame:
    kind: int
    payload: bytes
    timestamp: float = 0.0  # simulated seconds


@dataclass(frozen=True, slots=True)
class Digest:
    """Encoder-to-control-plane notification of an unknown basis."""

    basis: BitChunk
    emitted_at: float


@dataclass(frozen=True, slots=True)
class CompressedChunk:
    """Processed-and-compressed payload fields: (syndrome, msb, id)."""

    syndrome: int
    msb: int
    basis_id: int


@dataclass
class Counters:
    """Per-classification frame counts."""

    raw_in: int = 0
    out_syn_basis: int = 0
    out_syn_id: int = 0
    in_syn_basis: int = 0
    in_syn_id: int = 0
    restored_raw: int = 0
    digests: int = 0
    installs: int = 0
    evictions: int = 0
    decode_miss: int = 0

    _ORDER = ("raw_in", "out_syn_basis", "out_syn_id", "in_syn_basis",
              "in_syn_id", "restored_raw", "digests", "installs",
              "evictions", "decode_miss")

    def as_dict(self) -> dict[str, int]:
        return {name.upper(): getattr(self, name) for name in self._ORDER}

    def report(self) -> str:
        """One "NAME count" line per classification."""
        return "\n".join(f"{name} {value}" for name, value in self.as_dict().items())

    def verify(self) -> None:
        for name in self._ORDER:
            if getattr(self, name) < 0:
                raise InvariantViolation(f"{name} went negative")
        if self.raw_in != self.out_syn_basis + self.out_syn_id:
            raise InvariantViolation("RAW_IN != OUT_SYN_BASIS + OUT_SYN_ID")
        if self.restored_raw != self.in_syn_basis + self.in_syn_id - self.decode_miss:
            raise InvariantViolation(
                "RESTORED_RAW != IN_SYN_BASIS + IN_SYN_ID - DECODE_MISS")


@dataclass(frozen=True, slots=True)
class PipelineConfig:
    m: int = 8
    id_width: int = 15
    learning_delay: float = 1.77e-3  # seconds; +inf disables learning
    alignment_padding: bool = False
    decoder_install_lead: float = 1.0  # fraction of learning_delay

    def __post_init__(self):
        if self.m not in GENERATOR_REGISTRY:
            raise ValueError(f"m={self.m} has no registered generator (3..15)")
        if not 1 <= self.id_width <= 24:
            raise ValueError("id_width must be in 1..24")
        if isnan(self.learning_delay) or self.learning_delay < 0:
            raise ValueError("learning_delay must be >= 0 (or inf)")
        if not 0.0 <= self.decoder_install_lead <= 1.0:
            raise ValueError("decoder_install_lead must be in [0, 1]")

    @property
    def chunk_bits(self) -> int:
        return 1 << self.m


# -- wire layouts -----------------------------------------------------------
#
# Fields are packed MSB-first and zero-padded at the tail to a whole byte.
# SYN_ID:    syndrome(m) | msb(1) | id(id_width)
# SYN_BASIS: syndrome(m) | [8 zero bits in alignment-padding mode] | msb(1) | basis(k)
# RAW:       the 2^m-bit chunk itself.

def raw_nbytes(config: PipelineConfig) -> int:
    return (1 << config.m) // 8


def syn_basis_nbytes(config: PipelineConfig) -> int:
    # m + 1 + k == 2^m, always byte-aligned; padding adds exactly one byte
    return (1 << config.m) // 8 + (1 if config.alignment_padding else 0)


def syn_id_nbytes(config: PipelineConfig) -> int:
    return (config.m + 1 + config.id_width + 7) // 8


def serialize_frame(kind: int, fields, config: PipelineConfig) -> bytes:
    if kind == RAW:
        if not isinstance(fields, BitChunk) or fields.length != config.chunk_bits:
            raise MalformedFrame(f"RAW payload must be a {config.chunk_bits}-bit chunk")
        return fields.to_bytes()
    if kind == SYN_BASIS:
        if not isinstance(fields, EncodedChunk):
            raise MalformedFrame("SYN_BASIS takes EncodedChunk fields")
        k = config.chunk_bits - 1 - config.m
        s, msb, basis = fields.syndrome, fields.msb, fields.basis
        if not 0 <= s < (1 << config.m) or msb not in (0, 1) or basis.length != k:
            raise MalformedFrame("SYN_BASIS field widths do not match config")
        v = s
        if config.alignment_padding:
            v <<= 8
        v = (((v << 1) | msb) << k) | basis.value
        return v.to_bytes(syn_basis_nbytes(config), "big")
    if kind == SYN_ID:
        if not isinstance(fields, CompressedChunk):
            raise MalformedFrame("SYN_ID takes CompressedChunk fields")
        s, msb, id_ = fields.syndrome, fields.msb, fields.basis_id
        if (not 0 <= s < (1 << config.m) or msb not in (0, 1)
                or not 0 <= id_ < (1 << config.id_width)):
            raise MalformedFrame("SYN_ID field widths do not match config")
        bits = config.m + 1 + config.id_width
        pad = -bits % 8
        v = ((((s << 1) | msb) << config.id_width) | id_) << pad
        return v.to_bytes(syn_id_nbytes(config), "big")
    raise MalformedFrame(f"unknown frame kind {kind}")


def parse_frame(kind: int, payload: bytes, config: PipelineConfig):
    """Inverse of serialize_frame. The kind is carried out-of-band (by the
    EtherType on a real wire): RAW and SYN_BASIS payloads can share a length."""
    if kind == RAW:
        if len(payload) != raw_nbytes(config):
            raise MalformedFrame(f"RAW payload must be {raw_nbytes(config)} bytes")
        return BitChunk.from_bytes(payload)
    if kind == SYN_BASIS:
        if len(payload) != syn_basis_nbytes(config):
            raise MalformedFrame(
                f"SYN_BASIS payload must be {syn_basis_nbytes(config)} bytes")
        k = config.chunk_bits - 1 - config.m
        v = int.from_bytes(payload, "big")
        basis = BitChunk(k, v & ((1 << k) - 1))
        v >>= k
        msb = v & 1
        v >>= 1
        if config.alignment_padding:
            if v & 0xFF:
                raise MalformedFrame("nonzero padding byte")
            v >>= 8
        return EncodedChunk(syndrome=v, msb=msb, basis=basis)
    if kind == SYN_ID:
        if len(payload) != syn_id_nbytes(config):
            raise MalformedFrame(
                f"SYN_ID payload must be {syn_id_nbytes(config)} bytes")
        bits = config.m + 1 + config.id_width
        pad = -bits % 8
        v = int.from_bytes(payload, "big")
        if v & ((1 << pad) - 1):
            raise MalformedFrame("nonzero tail padding bits")
        v >>= pad
        id_ = v & ((1 << config.id_width) - 1)
        v >>= config.id_width
        return CompressedChunk(syndrome=v >> 1, msb=v & 1, basis_id=id_)
    raise MalformedFrame(f"unknown frame kind {kind}")


# -- control plane ----------------------------------------------------------

class ControlPlane:
    """Digest queue plus two-phase mapping installation.

    Phase 1 (at emitted + lead*delay): allocate an ID via the shared
    dictionary -- this is the decoder-side install, since the decoder reads
    the shared reverse map directly. Phase 2 (at emitted + delay): make the
    forward mapping visible to the encoder. Evictions clear the encoder
    side first so no frame is ever compressed against a dying ID.

    The plane is polled after each arrival, so an install becomes effective
    for the traffic *after* the first arrival at or past its ready time.
    """

    def __init__(self, state: DictionaryState, counters: Counters,
                 config: PipelineConfig, fwd_install, fwd_remove):
        self._state = state
        self._counters = counters
        self._fwd_install = fwd_install
        self._fwd_remove = fwd_remove
        if isinf(config.learning_delay):
            self._enc_delay = self._dec_delay = None
        else:
            self._enc_delay = _to_ns(config.learning_delay)
            self._dec_delay = _to_ns(config.decoder_install_lead
                                     * config.learning_delay)
        self._unalloc: deque[tuple[int, int]] = deque()        # (basis, emit_ns)
        self._alloc: deque[tuple[int, int, int]] = deque()     # (basis, emit_ns, id)
        self._pending: set[int] = set()

    @property
    def next_event_ns(self) -> int | None:
        if self._enc_delay is None:
            return None
        nxt = None
        if self._unalloc:
            nxt = self._unalloc[0][1] + self._dec_delay
        if self._alloc:
            t = self._alloc[0][1] + self._enc_delay
            nxt = t if nxt is None else min(nxt, t)
        return nxt

    def submit(self, basis: int, now_ns: int) -> bool:
        """Queue a digest for an unknown basis; False if one is already
        pending for it (re-emission suppressed)."""
        if basis in self._pending:
            return False
        self._pending.add(basis)
        self._counters.digests += 1
        self._unalloc.append((basis, now_ns))
        return True

    def install_now(self, basis: int, now_ns: int = 0, count: bool = True) -> int | None:
        """Learn and make a basis visible to both sides immediately.

        Used with count=False to preload static tables before a run; such
        setup does not touch the counters. Returns the assigned ID, or
        None if the basis was already mapped.
        """
        if self._state.entry(basis) is not None:
            return None
        if self._state.free_count == 0:
            _, victim = self._state.peek_victim()
            self._fwd_remove(victim)
            if count:
                self._counters.evictions += 1
        outcome = self._state.learn(basis, now_ns)
        self._fwd_install(basis, outcome.assigned)
        if count:
            self._counters.installs += 1
        return outcome.assigned

    def poll(self, now_ns: int) -> list[tuple[int, int]]:
        """Process every digest whose phase is due; returns the (basis, id)
        pairs whose forward mapping completed during this step."""
        if self._enc_delay is None:
            return []
        while self._unalloc and self._unalloc[0][1] + self._dec_delay <= now_ns:
            basis, emit_ns = self._unalloc.popleft()
            if self._state.free_count == 0:
                _, victim = self._state.peek_victim()
                self._fwd_remove(victim)
                self._counters.evictions += 1
            outcome = self._state.learn(basis, now_ns)
            self._alloc.append((basis, emit_ns, outcome.assigned))
        completed = []
        while self._alloc and self._alloc[0][1] + self._enc_delay <= now_ns:
            basis, _, id_ = self._alloc.popleft()
            self._pending.discard(basis)
            cur = self._state.entry(basis)
            if cur is not None and cur[0] == id_:
                self._fwd_install(basis, id_)
                self._counters.installs += 1
                completed.append((basis, id_))
        return completed


# -- scalar per-frame nodes -------------------------------------------------

class EncoderNode:
    """Source switch: RAW in, SYN_BASIS or SYN_ID out, digests up."""

    def __init__(self, config: PipelineConfig, code: HammingCode,
                 state: DictionaryState, counters: Counters,
                 control: ControlPlane):
        self.config = config
        self.code = code
        self.state = state
        self.counters = counters
        self.control = control
        self.forward: dict[int, int] = {}  # visible basis -> id map

    def process(self, frame: Frame, now: float | None = None,
                ) -> tuple[Frame, Digest | None]:
        if frame.kind != RAW:
            raise MalformedFrame("encoder expects RAW frames")
        chunk = parse_frame(RAW, frame.payload, self.config)
        ts = frame.timestamp if now is None else now
        now_ns = _to_ns(ts)
        msb, body = split_chunk(chunk, self.code)
        syndrome, basis = gd_encode(body, self.code)
        self.counters.raw_in += 1
        id_ = self.forward.get(basis.value)
        if id_ is not None:
            self.state.lookup_id(basis.value, now_ns)  # refresh recency
            fields = CompressedChunk(syndrome=syndrome, msb=msb, basis_id=id_)
            self.counters.out_syn_id += 1
            return Frame(SYN_ID, serialize_frame(SYN_ID, fields, self.config), ts), None
        fields = EncodedChunk(syndrome=syndrome, msb=msb, basis=basis)
        self.counters.out_syn_basis += 1
        out = Frame(SYN_BASIS, serialize_frame(SYN_BASIS, fields, self.config), ts)
        digest = None
        if self.control.submit(basis.value, now_ns):
            digest = Digest(basis=basis, emitted_at=ts)
        return out, digest


class DecoderNode:
    """Destination switch: SYN_BASIS or SYN_ID in, restored RAW out."""

    def __init__(self, config: PipelineConfig, code: HammingCode,
                 state: DictionaryState, counters: Counters):
        self.config = config
        self.code = code
        self.state = state
        self.counters = counters

    def process(self, frame: Frame) -> Frame:
        if frame.kind == SYN_BASIS:
            fields = parse_frame(SYN_BASIS, frame.payload, self.config)
            self.counters.in_syn_basis += 1
            syndrome, msb, basis = fields.syndrome, fields.msb, fields.basis
        elif frame.kind == SYN_ID:
            fields = parse_frame(SYN_ID, frame.payload, self.config)
            self.counters.in_syn_id += 1
            value = self.state.lookup_basis(fields.basis_id)
            if value is None:
                self.counters.decode_miss += 1
                raise DecodeMiss(f"no mapping for id {fields.basis_id}")
            syndrome, msb = fields.syndrome, fields.msb
            basis = BitChunk(self.code.k, value)
        else:
            raise MalformedFrame("decoder expects SYN_BASIS or SYN_ID frames")
        body = gd_decode(syndrome, basis, self.code)
        chunk = join_chunk(msb, body, self.code)
        self.counters.restored_raw += 1
        return Frame(RAW, chunk.to_bytes(), frame.timestamp)


class Pipeline:
    """One encoder, a zero-delay link, one decoder, one control plane.

    Arrivals must be pushed in timestamp order; the control plane is
    polled after each arrival. This is the scalar reference world;
    run_pipeline() replays whole traces through equivalent vectorized
    machinery.
    """

    def __init__(self, config: PipelineConfig, collect_frames: bool = False):
        self.config = config
        self.code = build_code(config.m)
        self.state = DictionaryState(config.id_width, basis_bits=self.code.k)
        self.counters = Counters()
        self.control = ControlPlane(self.state, self.counters, config,
                                    self._fwd_install, self._fwd_remove)
        self.encoder = EncoderNode(config, self.code, self.state,
                                   self.counters, self.control)
        self.decoder = DecoderNode(config, self.code, self.state, self.counters)
        self.wire_frames: list[Frame] | None = [] if collect_frames else None
        self._last_ns = 0
        self.encoded_bytes = 0

    def _fwd_install(self, basis: int, id_: int):
        self.encoder.forward[basis] = id_

    def _fwd_remove(self, basis: int):
        self.encoder.forward.pop(basis, None)

    def preload(self, bases, now: float = 0.0) -> int:
        """Install mappings for every given basis before replay (static
        table); duplicates are skipped, counters untouched."""
        now_ns = _to_ns(now)
        added = 0
        for b in bases:
            if self.control.install_now(b, now_ns, count=False) is not None:
                added += 1
        return added

    def control_plane_step(self, now: float) -> list[tuple[int, int]]:
        return self.control.poll(_to_ns(now))

    def push_chunk(self, chunk: BitChunk, at: float) -> BitChunk | None:
        """Feed one RAW chunk at a timestamp; returns the restored chunk
        (None if the frame was dropped on a decode miss)."""
        return self._push_ns(chunk, _to_ns(at))

    def _push_ns(self, chunk: BitChunk, now_ns: int) -> BitChunk | None:
        if now_ns < self._last_ns:
            raise ValueError("arrivals must be pushed in timestamp order")
        self._last_ns = now_ns
        ts = now_ns * 1e-9
        raw = Frame(RAW, chunk.to_bytes(), ts)
        out, _ = self.encoder.process(raw, ts)
        self.encoded_bytes += len(out.payload)
        if self.wire_frames is not None:
            self.wire_frames.append(out)
        try:
            restored = self.decoder.process(out)
        except DecodeMiss:
            restored = None
        self.control.poll(now_ns)
        if restored is None:
            return None
        return BitChunk.from_bytes(restored.payload)

    def replay(self, trace: Trace, gap: float) -> tuple[Trace, Counters, tuple[int, int]]:
        if trace.chunk_bits != self.config.chunk_bits:
            raise LengthMismatch(
                f"trace holds {trace.chunk_bits}-bit chunks, config m={self.config.m} "
                f"needs {self.config.chunk_bits}")
        gap_ns = _to_ns(gap)
        if gap_ns < 0:
            raise ValueError("inter-arrival gap must be >= 0")
        out_chunks = []
        for i in range(trace.chunk_count):
            restored = self._push_ns(trace.chunk(i), i * gap_ns)
            if restored is not None:
                out_chunks.append(restored)
        out = Trace.from_chunks(trace.chunk_bits, out_chunks)
        return out, self.counters, (trace.chunk_count * trace.chunk_nbytes,
                                    self.encoded_bytes)


# -- vectorized trace replay ------------------------------------------------

_VECTOR_MAX_M = 13  # above this the parity-placement table would be >32 MB


class _VectorTables:
    """Byte-column lookup tables for whole-trace transforms."""

    def __init__(self, m: int, low_bits: int):
        full = (1 << m) | low_bits
        width = (1 << m) // 8
        n = (1 << m) - 1
        k = n - m

        def shifted(col, times):
            for _ in range(times):
                col = [(r << 1) ^ full if r >> (m - 1) else r << 1 for r in col]
            return col

        # syn[j][v] = (v << 8*(width-1-j)) mod g; par[j][v] adds m more shifts
        syn = np.empty((width, 256), dtype=np.uint16)
        par = np.empty((width, 256), dtype=np.uint16)
        col = [_mod_small(v, full, m) for v in range(256)]
        for j in range(width - 1, -1, -1):
            syn[j] = col
            par[j] = shifted(col, m)
            col = shifted(col, 8)
        self.syn, self.par = syn, par

        code = build_code(m, low_bits)
        self.flip_col = np.zeros(1 << m, dtype=np.int64)
        self.flip_bit = np.zeros(1 << m, dtype=np.uint8)
        for s, pos in code.syndrome_table.items():
            self.flip_col[s] = width - 1 - (pos >> 3)
            self.flip_bit[s] = 1 << (pos & 7)

        rows = b"".join((p << k).to_bytes(width, "big") for p in range(1 << m))
        self.parity_rows = np.frombuffer(rows, dtype=np.uint8).reshape(1 << m, width)

        # masking the top m+1 bits of a corrected codeword leaves the basis
        self.mask_full_bytes = (m + 1) // 8
        rem = (m + 1) % 8
        self.mask_rem_byte = (0xFF >> rem) if rem else None
        self.width = width


@lru_cache(maxsize=8)
def _vector_tables(m: int, low_bits: int) -> _VectorTables:
    return _VectorTables(m, low_bits)


def _encode_arrays(payload: bytes, count: int, tabs: _VectorTables):
    """(msb, syndrome, basis-row buffer) for every chunk in the payload."""
    a = np.frombuffer(payload, dtype=np.uint8).reshape(count, tabs.width)
    msb = a[:, 0] >> 7
    body = a.copy()
    body[:, 0] &= 0x7F
    s = np.zeros(count, dtype=np.uint16)
    for j in range(tabs.width):
        s ^= tabs.syn[j][body[:, j]]
    body[np.arange(count), tabs.flip_col[s]] ^= tabs.flip_bit[s]
    body[:, :tabs.mask_full_bytes] = 0
    if tabs.mask_rem_byte is not None:
        body[:, tabs.mask_full_bytes] &= tabs.mask_rem_byte
    return msb, s, body.tobytes()


def _decode_arrays(basis_rows: np.ndarray, s: np.ndarray, msb: np.ndarray,
                   tabs: _VectorTables) -> bytes:
    """Restore chunks from per-frame (basis row, syndrome, msb)."""
    count = len(basis_rows)
    p = np.zeros(count, dtype=np.uint16)
    for j in range(tabs.width):
        p ^= tabs.par[j][basis_rows[:, j]]
    cw = basis_rows ^ tabs.parity_rows[p]
    cw[np.arange(count), tabs.flip_col[s]] ^= tabs.flip_bit[s]
    cw[:, 0] |= msb.astype(np.uint8) << 7
    return cw.tobytes()


def run_pipeline(trace: Trace, config: PipelineConfig, gap: float, *,
                 preload=None, state_out: list | None = None,
                 ) -> tuple[Trace, Counters, tuple[int, int]]:
    """Replay a trace through encoder -> link -> decoder at fixed
    inter-arrival `gap` seconds, control plane interleaved.

    Returns (restored trace, counters, (raw payload bytes, encoded payload
    bytes)). `preload` optionally installs a static basis table first; if
    `state_out` is a list the final DictionaryState is appended to it.
    Semantically identical to Pipeline.replay; large traces go through
    vectorized transforms.
    """
    if trace.chunk_bits != config.chunk_bits:
        raise LengthMismatch(
            f"trace holds {trace.chunk_bits}-bit chunks, config m={config.m} "
            f"needs {config.chunk_bits}")
    if gap < 0:
        raise ValueError("inter-arrival gap must be >= 0")
    if config.m > _VECTOR_MAX_M:
        pipe = Pipeline(config)
        if preload is not None:
            pipe.preload(preload)
        result = pipe.replay(trace, gap)
        if state_out is not None:
            state_out.append(pipe.state)
        return result

    code = build_code(config.m)
    tabs = _vector_tables(config.m, code.generator.low_bits)
    width = tabs.width
    count = trace.chunk_count
    msb_vec, s_vec, basis_buf = _encode_arrays(trace.payload, count, tabs)

    state = DictionaryState(config.id_width, basis_bits=code.k)
    counters = Counters()
    forward: dict[bytes, tuple[int, int]] = {}  # basis row -> (id, basis int)
    cp = ControlPlane(
        state, counters, config,
        fwd_install=lambda b, i: forward.__setitem__(b.to_bytes(width, "big"), (i, b)),
        fwd_remove=lambda b: forward.pop(b.to_bytes(width, "big"), None))
    if preload is not None:
        for b in preload:
            cp.install_now(b, 0, count=False)

    gap_ns = _to_ns(gap)
    n_sb = n_si = 0
    resolved: list[bytes] = []  # decoder-resolved basis rows, emission order
    dropped: list[int] = []
    lookup_basis = state.lookup_basis
    lookup_id = state.lookup_id
    get_fwd = forward.get
    submit = cp.submit
    poll = cp.poll
    nxt = cp.next_event_ns
    for i in range(count):
        t = i * gap_ns
        key = basis_buf[i * width:(i + 1) * width]
        hit = get_fwd(key)
        if hit is None:
            n_sb += 1
            basis_int = int.from_bytes(key, "big")
            if submit(basis_int, t):
                nxt = cp.next_event_ns
            resolved.append(key)
        else:
            id_, basis_int = hit
            lookup_id(basis_int, t)  # refresh recency
            n_si += 1
            value = lookup_basis(id_)
            if value is None:  # unreachable with decoder-first installs
                counters.decode_miss += 1
                dropped.append(i)
            else:
                resolved.append(value.to_bytes(width, "big"))
        if nxt is not None and nxt <= t:
            poll(t)
            nxt = cp.next_event_ns

    counters.raw_in += count
    counters.out_syn_basis += n_sb
    counters.out_syn_id += n_si
    counters.in_syn_basis += n_sb
    counters.in_syn_id += n_si
    counters.restored_raw += len(resolved)

    if resolved:
        rows = np.frombuffer(b"".join(resolved), dtype=np.uint8)
        rows = rows.reshape(len(resolved), width)
        if dropped:
            keep = np.ones(count, dtype=bool)
            keep[dropped] = False
            s_out, msb_out = s_vec[keep], msb_vec[keep]
        else:
            s_out, msb_out = s_vec, msb_vec
        restored_payload = _decode_arrays(rows, s_out, msb_out, tabs)
    else:
        restored_payload = b""
    out = Trace(trace.chunk_bits, restored_payload)
    raw_bytes = count * width
    encoded = n_sb * syn_basis_nbytes(config) + n_si * syn_id_nbytes(config)
    if state_out is not None:
        state_out.append(state)
    return out, counters, (raw_bytes, encoded)


def compute_bases(trace: Trace, config: PipelineConfig) -> list[int]:
    """Distinct bases of a trace in first-appearance order (static preload)."""
    if trace.chunk_bits != config.chunk_bits:
        raise LengthMismatch("trace chunk size does not match config")
    code = build_code(config.m)
    if config.m > _VECTOR_MAX_M:
        seen = dict()
        for chunk in trace.chunks():
            _, body = split_chunk(chunk, code)
            _, basis = gd_encode(body, code)
            seen.setdefault(basis.value, None)
        return list(seen)
    tabs = _vector_tables(config.m, code.generator.low_bits)
    _, _, buf = _encode_arrays(trace.payload, trace.chunk_count, tabs)
    w = tabs.width
    seen = dict()
    for i in range(trace.chunk_count):
        seen.setdefault(buf[i * w:(i + 1) * w], None)
    return [int.from_bytes(key, "big") for key in seen]


# -- pcap export ------------------------------------------------------------

_PCAP_GLOBAL = struct.Struct("<IHHiIII")
_PCAP_RECORD = struct.Struct("<IIII")
_ETH_DST = bytes.fromhex("020000000002")
_ETH_SRC = bytes.fromhex("020000000001")


def write_pcap(frames, path) -> None:
    """Dump frames as a little-endian pcap of Ethernet II packets, one
    EtherType per frame kind, microsecond timestamps."""
    with open(path, "wb") as f:
        f.write(_PCAP_GLOBAL.pack(0xA1B2C3D4, 2, 4, 0, 0, 65535, 1))
        for frame in frames:
            ns = _to_ns(frame.timestamp)
            sec, rem = divmod(ns, 10 ** 9)
            pkt = (_ETH_DST + _ETH_SRC
                   + ETHERTYPES[frame.kind].to_bytes(2, "big") + frame.payload)
            f.write(_PCAP_RECORD.pack(sec, rem // 1000, len(pkt), len(pkt)))
            f.write(pkt)
