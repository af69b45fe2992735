"""Generalized-deduplication line compression toolkit.

Hamming-code chunk transforms realized as plain CRC-style polynomial
remainders, a learned basis<->ID dictionary with LRU recycling, a
three-packet-type pipeline simulator, and trace tooling for the
compression experiments.
"""

from .dictionary import AlreadyKnown, DictionaryState, LearnOutcome
from .gdcore import (
    BitChunk,
    EncodedChunk,
    GdError,
    GeneratorPolynomial,
    HammingCode,
    LengthMismatch,
    UnsupportedM,
    build_code,
    format_syndrome_table,
    gd_decode,
    gd_encode,
    join_chunk,
    parity_of,
    poly_mod,
    split_chunk,
)
from .pipeline import (
    RAW,
    SYN_BASIS,
    SYN_ID,
    CompressedChunk,
    Counters,
    DecodeMiss,
    Digest,
    Frame,
    InvariantViolation,
    MalformedFrame,
    Pipeline,
    PipelineConfig,
    compute_bases,
    parse_frame,
    run_pipeline,
    serialize_frame,
    write_pcap,
)
from .traces import (
    BadMagic,
    EmptyInput,
    InvalidSpec,
    Trace,
    TraceSpec,
    TruncatedFile,
    chunk_file,
    gen_synthetic,
    read_pcap_payloads,
    read_trace,
    reassemble,
    write_trace,
)

__version__ = "0.1.0"
