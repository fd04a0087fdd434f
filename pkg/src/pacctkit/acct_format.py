"""Binary process-accounting record formats.

Two fixed-size layouts are supported, both NUL-padded and packed without
alignment gaps:

SysV32 (32 bytes)                     Linux64 (64 bytes)
  @0  ac_flag   u8                      @0  ac_flag    u8
  @1  ac_stat   u8                      @1  ac_version u8 (0..3)
  @2  ac_uid    u16                     @2  ac_uid     u16
  @4  ac_gid    u16                     @4  ac_gid     u16
  @6  ac_tty    u16                     @6  ac_tty     u16
  @8  ac_btime  u32 epoch seconds       @8  ac_btime   u32
  @12 ac_utime  comp_t                  @12 ac_utime   comp_t
  @14 ac_stime  comp_t                  @14 ac_stime   comp_t
  @16 ac_etime  comp_t                  @16 ac_etime   comp_t
  @18 ac_mem    comp_t (8K pages)       @18 ac_mem     comp_t
  @20 ac_io     comp_t                  @20 ac_io      comp_t
  @22 ac_rw    comp_t                   @22 ac_rw      comp_t
  @24 ac_comm  char[8]                  @24 ac_minflt  comp_t
                                        @26 ac_majflt  comp_t
                                        @28 ac_swaps   comp_t
                                        @30 ac_exitcode u32
                                        @34 ac_comm    char[17]
                                        @51 padding    13 bytes

comp_t is a 16-bit pseudo float: 13-bit mantissa, 3-bit base-8 exponent
(bits 15..13). Time fields count clock ticks (AHZ per second, default 100);
ac_mem counts 8K pages.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from struct import Struct
from typing import BinaryIO, Iterator

from .errors import FieldRangeError, MalformedRecord, TruncatedFile, UnknownFormat

DEFAULT_AHZ = 100

COMP_T_MAX = 0x1FFF * 8**7  # 17,177,772,032 ticks


class FormatKind(Enum):
    SYSV32 = "sysv32"
    LINUX64 = "linux64"


class Endianness(Enum):
    LITTLE = "little"
    BIG = "big"


RECORD_SIZE = {FormatKind.SYSV32: 32, FormatKind.LINUX64: 64}

_FIELDS_SYSV32 = "BBHHHIHHHHHH8s"
_FIELDS_LINUX64 = "BBHHHIHHHHHHHHHI17s13x"

_STRUCTS = {
    (FormatKind.SYSV32, Endianness.LITTLE): Struct("<" + _FIELDS_SYSV32),
    (FormatKind.SYSV32, Endianness.BIG): Struct(">" + _FIELDS_SYSV32),
    (FormatKind.LINUX64, Endianness.LITTLE): Struct("<" + _FIELDS_LINUX64),
    (FormatKind.LINUX64, Endianness.BIG): Struct(">" + _FIELDS_LINUX64),
}

assert _STRUCTS[(FormatKind.SYSV32, Endianness.LITTLE)].size == 32
assert _STRUCTS[(FormatKind.LINUX64, Endianness.LITTLE)].size == 64


def decode_comp_t(raw: int) -> int:
    """Expand a comp_t code to ticks: mantissa * 8**exponent."""
    return (raw & 0x1FFF) << (((raw >> 13) & 0x7) * 3)


def encode_comp_t(ticks: int) -> int:
    """Pack ticks into the smallest-exponent comp_t code.

    Mantissa bits shifted out are dropped (round toward zero), so
    decode(encode(t)) <= t with relative error below 1/1024.
    """
    if ticks < 0:
        raise ValueError("comp_t cannot encode negative values")
    if ticks > COMP_T_MAX:
        raise OverflowError(f"{ticks} exceeds comp_t maximum {COMP_T_MAX}")
    exp = 0
    while ticks > 0x1FFF:
        ticks >>= 3
        exp += 1
    return (exp << 13) | ticks


def ticks_to_seconds(ticks: int, ahz: int = DEFAULT_AHZ) -> float:
    """Convert clock ticks to seconds at the given accounting clock rate."""
    if ahz <= 0:
        raise ValueError("ahz must be positive")
    return ticks / ahz


@dataclass(frozen=True, slots=True)
class FlagSet:
    """Decoded ac_flag bits.

    Bit assignment (re-mappable in one place if a platform differs):
    0x01 fork-without-exec, 0x02 superuser, 0x08 core dumped,
    0x10 killed by signal.
    """

    fork_no_exec: bool
    superuser: bool
    core_dumped: bool
    killed_by_signal: bool

    @classmethod
    def from_byte(cls, raw: int) -> "FlagSet":
        return cls(bool(raw & 0x01), bool(raw & 0x02), bool(raw & 0x08), bool(raw & 0x10))

    def to_byte(self) -> int:
        return (
            (0x01 if self.fork_no_exec else 0)
            | (0x02 if self.superuser else 0)
            | (0x08 if self.core_dumped else 0)
            | (0x10 if self.killed_by_signal else 0)
        )

    def letters(self) -> str:
        """Compact lastcomm-style flag letters (F, S, D, X)."""
        out = []
        if self.fork_no_exec:
            out.append("F")
        if self.superuser:
            out.append("S")
        if self.core_dumped:
            out.append("D")
        if self.killed_by_signal:
            out.append("X")
        return "".join(out)


_FLAG_CACHE = tuple(FlagSet.from_byte(b) for b in range(256))


@dataclass(slots=True)
class ProcessRecord:
    """One normalized accounting record.

    Times are seconds, memory is average 8K pages, io/rw are block counts.
    extras holds layout-specific leftovers: {"stat": n} for SysV32,
    {"version", "minflt", "majflt", "swaps", "exitcode"} for Linux64.
    """

    uid: int
    gid: int
    comm: str
    btime: int
    utime_s: float
    stime_s: float
    etime_s: float
    mem_pages: float
    io_blocks: float
    rw_blocks: float
    flags: FlagSet
    tty: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def exit_time(self) -> float:
        return self.btime + self.etime_s


_PRINTABLE_LO = 0x20
_PRINTABLE_HI = 0x7E


def _decode_comm(raw: bytes) -> str:
    """Trim a comm field at the first NUL.

    A field with no terminator is legal only when it is entirely a command
    name; non-printable bytes past position 0 mark a corrupt record.
    """
    end = raw.find(0)
    if end >= 0:
        return raw[:end].decode("latin-1")
    for b in raw[1:]:
        if b < _PRINTABLE_LO or b > _PRINTABLE_HI:
            raise MalformedRecord(f"unterminated comm field with binary bytes: {raw!r}")
    return raw.decode("latin-1")


def _build_sysv32(fields: tuple, inv_ahz: float, comm_of) -> ProcessRecord:
    flag, stat, uid, gid, tty, btime, ut, st, et, mem, io_, rw, comm_raw = fields
    return ProcessRecord(
        uid,
        gid,
        comm_of(comm_raw),
        btime,
        ((ut & 0x1FFF) << ((ut >> 13) * 3)) * inv_ahz,
        ((st & 0x1FFF) << ((st >> 13) * 3)) * inv_ahz,
        ((et & 0x1FFF) << ((et >> 13) * 3)) * inv_ahz,
        float((mem & 0x1FFF) << ((mem >> 13) * 3)),
        float((io_ & 0x1FFF) << ((io_ >> 13) * 3)),
        float((rw & 0x1FFF) << ((rw >> 13) * 3)),
        _FLAG_CACHE[flag],
        tty,
        {"stat": stat},
    )


def _build_linux64(fields: tuple, inv_ahz: float, comm_of) -> ProcessRecord:
    (flag, version, uid, gid, tty, btime, ut, st, et, mem, io_, rw,
     minflt, majflt, swaps, exitcode, comm_raw) = fields
    return ProcessRecord(
        uid,
        gid,
        comm_of(comm_raw),
        btime,
        ((ut & 0x1FFF) << ((ut >> 13) * 3)) * inv_ahz,
        ((st & 0x1FFF) << ((st >> 13) * 3)) * inv_ahz,
        ((et & 0x1FFF) << ((et >> 13) * 3)) * inv_ahz,
        float((mem & 0x1FFF) << ((mem >> 13) * 3)),
        float((io_ & 0x1FFF) << ((io_ >> 13) * 3)),
        float((rw & 0x1FFF) << ((rw >> 13) * 3)),
        _FLAG_CACHE[flag],
        tty,
        {
            "version": version,
            "minflt": (minflt & 0x1FFF) << ((minflt >> 13) * 3),
            "majflt": (majflt & 0x1FFF) << ((majflt >> 13) * 3),
            "swaps": (swaps & 0x1FFF) << ((swaps >> 13) * 3),
            "exitcode": exitcode,
        },
    )


_BUILDERS = {FormatKind.SYSV32: _build_sysv32, FormatKind.LINUX64: _build_linux64}


def parse_record(
    data: bytes,
    kind: FormatKind,
    order: Endianness = Endianness.LITTLE,
    ahz: int = DEFAULT_AHZ,
) -> ProcessRecord:
    """Decode one raw record. data must be exactly the layout size."""
    st = _STRUCTS[(kind, order)]
    if len(data) != st.size:
        raise ValueError(f"expected {st.size} bytes for {kind.value}, got {len(data)}")
    return _BUILDERS[kind](st.unpack(data), 1.0 / ahz, _decode_comm)


_COMM_CACHE_LIMIT = 65536


def _comm_decoder():
    # Command vocabularies are tiny compared to record counts; memoize the
    # bytes -> str decode but never cache corrupt fields (they must re-raise).
    cache: dict[bytes, str] = {}

    def comm_of(raw: bytes) -> str:
        v = cache.get(raw)
        if v is None:
            v = _decode_comm(raw)
            if len(cache) < _COMM_CACHE_LIMIT:
                cache[raw] = v
        return v

    return comm_of


def _comp_t_field(name: str, ticks: int) -> int:
    try:
        return encode_comp_t(ticks)
    except (OverflowError, ValueError) as exc:
        raise FieldRangeError(name, str(exc)) from None


def _uint_field(name: str, value: int, maximum: int) -> int:
    if not 0 <= value <= maximum:
        raise FieldRangeError(name, f"{value} outside [0, {maximum}]")
    return value


def encode_record(
    record: ProcessRecord,
    kind: FormatKind,
    order: Endianness = Endianness.LITTLE,
    ahz: int = DEFAULT_AHZ,
) -> bytes:
    """Pack a record back into its binary layout.

    comm is truncated to the layout's capacity (8 or 16 chars) like the
    kernel does; everything else out of range raises FieldRangeError.
    Times are rounded to the nearest tick, then comp_t quantized.
    """
    uid = _uint_field("uid", record.uid, 0xFFFF)
    gid = _uint_field("gid", record.gid, 0xFFFF)
    tty = _uint_field("tty", record.tty, 0xFFFF)
    btime = _uint_field("btime", record.btime, 0xFFFFFFFF)
    ut = _comp_t_field("utime", _ticks_of("utime", record.utime_s, ahz))
    st = _comp_t_field("stime", _ticks_of("stime", record.stime_s, ahz))
    et = _comp_t_field("etime", _ticks_of("etime", record.etime_s, ahz))
    mem = _comp_t_field("mem", _count_of("mem", record.mem_pages))
    io_ = _comp_t_field("io", _count_of("io", record.io_blocks))
    rw = _comp_t_field("rw", _count_of("rw", record.rw_blocks))
    comm = _encode_comm(record.comm, 8 if kind is FormatKind.SYSV32 else 16)
    flag = record.flags.to_byte()
    extras = record.extras or {}
    packer = _STRUCTS[(kind, order)]
    if kind is FormatKind.SYSV32:
        stat = _uint_field("stat", extras.get("stat", 0), 0xFF)
        return packer.pack(flag, stat, uid, gid, tty, btime, ut, st, et, mem, io_, rw, comm)
    version = _uint_field("version", extras.get("version", 2), 3)
    minflt = _comp_t_field("minflt", _count_of("minflt", extras.get("minflt", 0)))
    majflt = _comp_t_field("majflt", _count_of("majflt", extras.get("majflt", 0)))
    swaps = _comp_t_field("swaps", _count_of("swaps", extras.get("swaps", 0)))
    exitcode = _uint_field("exitcode", extras.get("exitcode", 0), 0xFFFFFFFF)
    return packer.pack(
        flag, version, uid, gid, tty, btime, ut, st, et, mem, io_, rw,
        minflt, majflt, swaps, exitcode, comm,
    )


def _ticks_of(name: str, seconds: float, ahz: int) -> int:
    if seconds < 0:
        raise FieldRangeError(name, "negative time")
    return int(round(seconds * ahz))


def _count_of(name: str, value: float) -> int:
    if value < 0:
        raise FieldRangeError(name, "negative count")
    return int(round(value))


def _encode_comm(comm: str, max_chars: int) -> bytes:
    if "\0" in comm:
        raise FieldRangeError("comm", "embedded NUL")
    try:
        raw = comm.encode("latin-1")
    except UnicodeEncodeError:
        raise FieldRangeError("comm", f"not encodable as single bytes: {comm!r}") from None
    return raw[:max_chars]


# Plausibility window for ac_btime during format detection.
_BTIME_MIN = 473385600  # 1985-01-01T00:00:00Z
_BTIME_MAX = 4102444800  # 2100-01-01T00:00:00Z
_PROBE_RECORDS = 32


def _comm_well_formed(raw: bytes) -> bool:
    # Printable up to the first NUL, NUL padding after it. Stricter than
    # record parsing; used only to score detection candidates.
    end = raw.find(0)
    if end < 0:
        return all(_PRINTABLE_LO <= b <= _PRINTABLE_HI for b in raw)
    if any(raw[end:]):
        return False
    return all(_PRINTABLE_LO <= b <= _PRINTABLE_HI for b in raw[:end])


def _probe(head: bytes, size: int, kind: FormatKind, order: Endianness) -> bool:
    rs = RECORD_SIZE[kind]
    if size < rs or size % rs:
        return False
    n = min(_PROBE_RECORDS, size // rs, len(head) // rs)
    u32 = Struct(("<" if order is Endianness.LITTLE else ">") + "I")
    for i in range(n):
        base = i * rs
        (btime,) = u32.unpack_from(head, base + 8)
        if not _BTIME_MIN <= btime < _BTIME_MAX:
            return False
        if kind is FormatKind.LINUX64:
            if head[base + 1] > 3:
                return False
            comm = head[base + 34 : base + 51]
        else:
            comm = head[base + 24 : base + 32]
        if not _comm_well_formed(comm):
            return False
    return True


# Linux64 is probed first: every Linux64-divisible length is also
# SysV32-divisible, and the Linux64 checks are stricter.
_CANDIDATES = (
    (FormatKind.LINUX64, Endianness.LITTLE),
    (FormatKind.LINUX64, Endianness.BIG),
    (FormatKind.SYSV32, Endianness.LITTLE),
    (FormatKind.SYSV32, Endianness.BIG),
)

ByteSource = "str | os.PathLike | bytes | BinaryIO"


def _open_source(source) -> tuple[BinaryIO, bool]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, "rb"), True
    if isinstance(source, (bytes, bytearray)):
        return io.BytesIO(bytes(source)), True
    return source, False


def detect_format(source) -> tuple[FormatKind, Endianness]:
    """Identify the record layout and byte order of a pacct file.

    Accepts a path, raw bytes, or a seekable binary file (its position is
    reset to 0). Raises TruncatedFile when the length fits no whole number
    of records, UnknownFormat when nothing plausible matches.
    """
    fh, owned = _open_source(source)
    try:
        head = fh.read(_PROBE_RECORDS * RECORD_SIZE[FormatKind.LINUX64])
        size = fh.seek(0, os.SEEK_END)
        fh.seek(0)
    finally:
        if owned:
            fh.close()
    if size == 0:
        raise UnknownFormat("empty file")
    if size % RECORD_SIZE[FormatKind.SYSV32]:
        raise TruncatedFile(f"{size} bytes is not a whole number of 32-byte records")
    for kind, order in _CANDIDATES:
        if _probe(head, size, kind, order):
            return kind, order
    raise UnknownFormat("no known accounting record layout matches this file")


_CHUNK_RECORDS = 4096


class RecordStream:
    """Single-use forward iterator over the records of one log file.

    Reads the source strictly front to back in fixed chunks. Malformed
    records are skipped with a warning; a truncated final record warns and
    ends the stream cleanly. Warnings accumulate on .warnings.
    """

    def __init__(
        self,
        source,
        kind: FormatKind,
        order: Endianness = Endianness.LITTLE,
        ahz: int = DEFAULT_AHZ,
    ):
        if ahz <= 0:
            raise ValueError("ahz must be positive")
        self._fh, self._owned = _open_source(source)
        self._kind = kind
        self._order = order
        self._struct = _STRUCTS[(kind, order)]
        self._inv_ahz = 1.0 / ahz
        self._consumed = False
        self.warnings: list[str] = []
        self.records_skipped = 0

    @property
    def kind(self) -> FormatKind:
        return self._kind

    @property
    def order(self) -> Endianness:
        return self._order

    @property
    def format_label(self) -> str:
        return f"{self._kind.value}/{self._order.value}"

    def __iter__(self) -> Iterator[ProcessRecord]:
        if self._consumed:
            raise RuntimeError("a RecordStream can only be iterated once")
        self._consumed = True
        read = self._fh.read
        rs = self._struct.size
        iter_unpack = self._struct.iter_unpack
        build = _BUILDERS[self._kind]
        inv = self._inv_ahz
        comm_of = _comm_decoder()
        warnings = self.warnings
        chunk_bytes = _CHUNK_RECORDS * rs
        buf = b""
        index = 0
        try:
            while True:
                chunk = read(chunk_bytes)
                if not chunk:
                    break
                if buf:
                    chunk = buf + chunk
                    buf = b""
                rem = len(chunk) % rs
                if rem:
                    buf = chunk[-rem:]
                    chunk = chunk[:-rem]
                for fields in iter_unpack(chunk):
                    index += 1
                    try:
                        rec = build(fields, inv, comm_of)
                    except MalformedRecord as exc:
                        self.records_skipped += 1
                        warnings.append(f"record {index}: skipped ({exc})")
                        continue
                    yield rec
            if buf:
                warnings.append(
                    f"{len(buf)} trailing bytes ignored (truncated final record)"
                )
        finally:
            if self._owned:
                self._fh.close()


def open_record_stream(
    source,
    kind: FormatKind,
    order: Endianness = Endianness.LITTLE,
    ahz: int = DEFAULT_AHZ,
) -> RecordStream:
    """Open a one-pass record producer over a path, bytes, or binary file."""
    return RecordStream(source, kind, order, ahz)
