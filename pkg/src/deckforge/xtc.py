"""Compressed trajectory (XTC) reading and writing.

The format stores, per frame, a small big-endian header (magic, atom count,
step, time, box) followed by fixed-point coordinates.  Frames with more than
nine atoms are bit-packed: coordinates are quantized to integers at a stated
precision, offset against a bounding box minimum, and written through a
mixed-radix integer packer; short runs of atoms that sit close together
(water hydrogens, mostly) are stored as small deltas against the previous
atom, with an adaptive bit width that walks up and down a fixed table.

The writer favours clarity over squeezing out the last few bits, but its
output is fully standard: any conforming reader, including this module's
own, reconstructs coordinates to within half a quantization step.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import (
    AtomCountChangedError,
    CoordinateOverflowError,
    TruncatedFrameError,
    XtcFormatError,
)
from .trajectory import Frame, Trajectory, make_trajectory

MAGIC = 1995
MAXABS = 2147483645  # largest quantized magnitude that still fits an int32

# bit-width ladder for delta coding; zeros pad the low indices so that a
# ladder position can drop by one without re-checking the floor each time
MAGICINTS = (
    0, 0, 0, 0, 0, 0, 0, 0, 0, 8,
    10, 12, 16, 20, 25, 32, 40, 50, 64, 80,
    101, 128, 161, 203, 256, 322, 406, 512, 645, 812,
    1024, 1290, 1625, 2048, 2580, 3250, 4096, 5060, 6501, 8192,
    10321, 13003, 16384, 20642, 26007, 32768, 41285, 52015, 65536, 82570,
    104031, 131072, 165140, 208063, 262144, 330280, 416127, 524287, 660561,
    832255, 1048576, 1321122, 1664510, 2097152, 2642245, 3329021, 4194304,
    5284491, 6658042, 8388607, 10568983, 13316085, 16777216,
)
FIRSTIDX = 9
LASTIDX = len(MAGICINTS) - 1


def _sizeofint(size: int) -> int:
    """Bits needed to store values in [0, size]."""
    num = 1
    nbits = 0
    while size >= num and nbits < 32:
        nbits += 1
        num <<= 1
    return nbits


def _sizeofints(sizes: tuple[int, int, int]) -> int:
    """Bits needed for three mixed-radix packed values."""
    return (sizes[0] * sizes[1] * sizes[2]).bit_length()


class _BitWriter:
    """MSB-first bit accumulator over a byte buffer."""

    __slots__ = ("buf", "lastbits", "lastbyte")

    def __init__(self):
        self.buf = bytearray()
        self.lastbits = 0
        self.lastbyte = 0

    def sendbits(self, nbits: int, num: int) -> None:
        lastbits = self.lastbits
        lastbyte = self.lastbyte
        buf = self.buf
        num &= (1 << nbits) - 1
        while nbits >= 8:
            lastbyte = (lastbyte << 8) | ((num >> (nbits - 8)) & 0xFF)
            buf.append((lastbyte >> lastbits) & 0xFF)
            nbits -= 8
        if nbits > 0:
            lastbyte = ((lastbyte << nbits) | (num & ((1 << nbits) - 1))) & 0xFFFFFFFF
            lastbits += nbits
            if lastbits >= 8:
                lastbits -= 8
                buf.append((lastbyte >> lastbits) & 0xFF)
        self.lastbits = lastbits
        self.lastbyte = lastbyte & 0xFFFFFFFF

    def sendints(self, nbits: int, sizes: tuple[int, int, int], nums) -> None:
        # mixed radix: v = (n0*s1 + n1)*s2 + n2, sent as bytes low-first;
        # the top byte may be sent in fewer than 8 bits when nbits says so
        v = (nums[0] * sizes[1] + nums[1]) * sizes[2] + nums[2]
        parts = []
        while True:
            parts.append(v & 0xFF)
            v >>= 8
            if v == 0:
                break
        if nbits >= len(parts) * 8:
            for byte in parts:
                self.sendbits(8, byte)
            self.sendbits(nbits - len(parts) * 8, 0)
        else:
            for byte in parts[:-1]:
                self.sendbits(8, byte)
            self.sendbits(nbits - (len(parts) - 1) * 8, parts[-1])

    def getvalue(self) -> bytes:
        out = bytearray(self.buf)
        if self.lastbits > 0:
            out.append((self.lastbyte << (8 - self.lastbits)) & 0xFF)
        return bytes(out)


class _BitReader:
    """MSB-first bit extractor mirroring :class:`_BitWriter`."""

    __slots__ = ("data", "cnt", "lastbits", "lastbyte", "base_offset")

    def __init__(self, data: bytes, base_offset: int):
        self.data = data
        self.cnt = 0
        self.lastbits = 0
        self.lastbyte = 0
        self.base_offset = base_offset

    def _next_byte(self) -> int:
        if self.cnt >= len(self.data):
            raise XtcFormatError(
                self.base_offset + self.cnt,
                "bit stream exhausted before all atoms were decoded",
            )
        b = self.data[self.cnt]
        self.cnt += 1
        return b

    def receivebits(self, nbits: int) -> int:
        mask = (1 << nbits) - 1
        lastbits = self.lastbits
        lastbyte = self.lastbyte
        num = 0
        while nbits >= 8:
            lastbyte = ((lastbyte << 8) | self._next_byte()) & 0xFFFFFFFF
            num |= ((lastbyte >> lastbits) & 0xFF) << (nbits - 8)
            nbits -= 8
        if nbits > 0:
            if lastbits < nbits:
                lastbits += 8
                lastbyte = ((lastbyte << 8) | self._next_byte()) & 0xFFFFFFFF
            lastbits -= nbits
            num |= (lastbyte >> lastbits) & ((1 << nbits) - 1)
        self.lastbits = lastbits
        self.lastbyte = lastbyte
        return num & mask

    def receiveints(self, nbits: int, sizes: tuple[int, int, int], out) -> None:
        v = 0
        shift = 0
        while nbits > 8:
            v |= self.receivebits(8) << shift
            shift += 8
            nbits -= 8
        if nbits > 0:
            v |= self.receivebits(nbits) << shift
        p, out[2] = divmod(v, sizes[2])
        out[0], out[1] = divmod(p, sizes[1])


# ---------------------------------------------------------------------------
# encoding


def _quantize(value: float, precision: float) -> int:
    scaled = value * precision
    scaled = scaled + 0.5 if scaled >= 0 else scaled - 0.5
    if abs(scaled) > MAXABS:
        raise CoordinateOverflowError(
            f"coordinate {value:g} does not fit the integer range at "
            f"precision {precision:g}"
        )
    return int(scaled)


def _encode_frame_coords(positions: np.ndarray, precision: float) -> bytes:
    """Bit-pack one frame's coordinates (more than 9 atoms)."""
    size = positions.shape[0]
    scaled = positions * precision
    scaled = np.where(scaled >= 0, scaled + 0.5, scaled - 0.5)
    if np.any(np.abs(scaled) > MAXABS) or not np.all(np.isfinite(scaled)):
        bad = positions.flat[int(np.argmax(~(np.abs(scaled) <= MAXABS)))]
        raise CoordinateOverflowError(
            f"coordinate {bad:g} does not fit the integer range at "
            f"precision {precision:g}"
        )
    ints = scaled.astype(np.int64)

    minint = ints.min(axis=0)
    maxint = ints.max(axis=0)
    diffs = np.abs(np.diff(ints, axis=0)).sum(axis=1)
    mindiff = int(diffs.min()) if diffs.size else 0x7FFFFFFF

    sizeint = tuple(int(maxint[d] - minint[d] + 1) for d in range(3))
    if any(s > 0xFFFFFF for s in sizeint):
        bitsizeint = tuple(_sizeofint(s) for s in sizeint)
        bitsize = 0
    else:
        bitsizeint = (0, 0, 0)
        bitsize = _sizeofints(sizeint)

    smallidx = FIRSTIDX
    while smallidx < LASTIDX and MAGICINTS[smallidx] < mindiff:
        smallidx += 1

    header = struct.pack(
        ">f3i3ii",
        precision,
        int(minint[0]), int(minint[1]), int(minint[2]),
        int(maxint[0]), int(maxint[1]), int(maxint[2]),
        smallidx,
    )

    maxidx = min(LASTIDX, smallidx + 8)
    minidx = maxidx - 8
    smaller = MAGICINTS[max(FIRSTIDX, smallidx - 1)] // 2
    smallnum = MAGICINTS[smallidx] // 2
    sizesmall = (MAGICINTS[smallidx],) * 3
    larger = MAGICINTS[maxidx] // 2

    writer = _BitWriter()
    coords = ints.tolist()  # per-atom [x, y, z]; ~3x faster than ndarray access
    prevrun = -1
    prevcoord = [0, 0, 0]
    tmpcoord = [0] * 30
    i = 0
    while i < size:
        this = coords[i]
        is_small = 0
        if smallidx < maxidx and i >= 1 and \
                abs(this[0] - prevcoord[0]) < larger and \
                abs(this[1] - prevcoord[1]) < larger and \
                abs(this[2] - prevcoord[2]) < larger:
            is_smaller = 1
        elif smallidx > minidx:
            is_smaller = -1
        else:
            is_smaller = 0
        if i + 1 < size:
            nxt = coords[i + 1]
            if abs(this[0] - nxt[0]) < smallnum and \
                    abs(this[1] - nxt[1]) < smallnum and \
                    abs(this[2] - nxt[2]) < smallnum:
                # swap so the pair is stored big-atom-first; the reader
                # swaps back, which packs tight pairs into delta runs
                coords[i], coords[i + 1] = nxt, this
                this = coords[i]
                is_small = 1

        if bitsize == 0:
            writer.sendbits(bitsizeint[0], this[0] - int(minint[0]))
            writer.sendbits(bitsizeint[1], this[1] - int(minint[1]))
            writer.sendbits(bitsizeint[2], this[2] - int(minint[2]))
        else:
            writer.sendints(
                bitsize, sizeint,
                (this[0] - int(minint[0]), this[1] - int(minint[1]), this[2] - int(minint[2])),
            )
        prevcoord = this
        i += 1

        run = 0
        if is_small == 0 and is_smaller == -1:
            is_smaller = 0
        while is_small and run < 8 * 3:
            this = coords[i]
            if is_smaller == -1 and (
                (this[0] - prevcoord[0]) ** 2
                + (this[1] - prevcoord[1]) ** 2
                + (this[2] - prevcoord[2]) ** 2
            ) >= smaller * smaller:
                is_smaller = 0
            tmpcoord[run] = this[0] - prevcoord[0] + smallnum
            tmpcoord[run + 1] = this[1] - prevcoord[1] + smallnum
            tmpcoord[run + 2] = this[2] - prevcoord[2] + smallnum
            run += 3
            prevcoord = this
            i += 1
            is_small = 0
            if i < size:
                nxt = coords[i]
                if abs(nxt[0] - prevcoord[0]) < smallnum and \
                        abs(nxt[1] - prevcoord[1]) < smallnum and \
                        abs(nxt[2] - prevcoord[2]) < smallnum:
                    is_small = 1

        if run != prevrun or is_smaller != 0:
            prevrun = run
            writer.sendbits(1, 1)
            writer.sendbits(5, run + is_smaller + 1)
        else:
            writer.sendbits(1, 0)
        for k in range(0, run, 3):
            writer.sendints(smallidx, sizesmall, tmpcoord[k : k + 3])
        if is_smaller != 0:
            smallidx += is_smaller
            if is_smaller < 0:
                smallnum = smaller
                smaller = MAGICINTS[smallidx - 1] // 2
            else:
                smaller = smallnum
                smallnum = MAGICINTS[smallidx] // 2
            sizesmall = (MAGICINTS[smallidx],) * 3

    payload = writer.getvalue()
    padded = payload + b"\x00" * (-len(payload) % 4)
    return header + struct.pack(">i", len(payload)) + padded


def write_xtc(trajectory: Trajectory, precision: float = 1000.0) -> bytes:
    """Serialize a trajectory at the given fixed-point precision."""
    if precision <= 0:
        raise ValueError("precision must be positive")
    chunks: list[bytes] = []
    count = trajectory.atom_count
    for index, frame in enumerate(trajectory.frames):
        if frame.atom_count != count:
            raise AtomCountChangedError(index, count, frame.atom_count)
        box = np.asarray(frame.box, dtype=np.float64).reshape(3, 3)
        head = struct.pack(">iiif", MAGIC, count, frame.step, frame.time_ps)
        head += struct.pack(">9f", *box.reshape(9).tolist())
        head += struct.pack(">i", count)
        if count <= 9:
            flat = np.asarray(frame.positions, dtype=np.float32).reshape(-1)
            body = struct.pack(f">{3 * count}f", *flat.tolist())
        else:
            body = _encode_frame_coords(
                np.asarray(frame.positions, dtype=np.float64), precision
            )
        chunks.append(head + body)
    return b"".join(chunks)


def write_xtc_file(trajectory: Trajectory, path: str | Path, precision: float = 1000.0) -> None:
    Path(path).write_bytes(write_xtc(trajectory, precision=precision))


# ---------------------------------------------------------------------------
# decoding


class _StreamReader:
    __slots__ = ("data", "offset")

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def remaining(self) -> int:
        return len(self.data) - self.offset

    def take(self, n: int) -> bytes:
        if self.remaining() < n:
            raise _Truncated(self.offset)
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


class _Truncated(Exception):
    def __init__(self, offset: int):
        self.offset = offset


def _decode_frame_coords(
    stream: _StreamReader, natoms: int
) -> tuple[np.ndarray, float]:
    frame_base = stream.offset
    precision, = stream.unpack(">f")
    if not np.isfinite(precision) or precision <= 0:
        raise XtcFormatError(frame_base, f"bad precision {precision!r}")
    minint = list(stream.unpack(">3i"))
    maxint = list(stream.unpack(">3i"))
    smallidx, = stream.unpack(">i")
    if not FIRSTIDX <= smallidx <= LASTIDX:
        raise XtcFormatError(stream.offset - 4, f"initial bit-width index {smallidx} out of range")

    sizeint = tuple(maxint[d] - minint[d] + 1 for d in range(3))
    if any(s <= 0 for s in sizeint):
        raise XtcFormatError(frame_base, "coordinate bounds are inverted")
    if any(s > 0xFFFFFF for s in sizeint):
        bitsizeint = tuple(_sizeofint(s) for s in sizeint)
        bitsize = 0
    else:
        bitsizeint = (0, 0, 0)
        bitsize = _sizeofints(sizeint)

    nbytes, = stream.unpack(">i")
    if nbytes < 0:
        raise XtcFormatError(stream.offset - 4, f"negative payload length {nbytes}")
    if natoms > 9 and natoms > nbytes * 8:
        # even a maximally dense run spends more than one bit per atom
        raise XtcFormatError(
            stream.offset - 4,
            f"payload of {nbytes} bytes cannot hold {natoms} atoms",
        )
    payload = stream.take(nbytes + (-nbytes % 4))[:nbytes]
    reader = _BitReader(payload, stream.offset - nbytes)

    inv_precision = 1.0 / precision
    out = np.empty((natoms, 3), dtype=np.float64)
    smallnum = MAGICINTS[smallidx] // 2
    smaller = MAGICINTS[max(FIRSTIDX, smallidx - 1)] // 2
    sizesmall = (MAGICINTS[smallidx],) * 3
    run = 0
    this = [0, 0, 0]
    small = [0, 0, 0]
    i = 0
    while i < natoms:
        if bitsize == 0:
            this[0] = reader.receivebits(bitsizeint[0]) + minint[0]
            this[1] = reader.receivebits(bitsizeint[1]) + minint[1]
            this[2] = reader.receivebits(bitsizeint[2]) + minint[2]
        else:
            reader.receiveints(bitsize, sizeint, this)
            this[0] += minint[0]
            this[1] += minint[1]
            this[2] += minint[2]
        prev = (this[0], this[1], this[2])
        slot = i
        i += 1

        flag = reader.receivebits(1)
        is_smaller = 0
        if flag == 1:
            code = reader.receivebits(5)
            is_smaller = code % 3
            run = code - is_smaller
            is_smaller -= 1
        if run > 0 and i + run // 3 > natoms:
            raise XtcFormatError(
                reader.base_offset + reader.cnt,
                "delta run extends past the declared atom count",
            )
        if run > 0:
            for k in range(0, run, 3):
                reader.receiveints(smallidx, sizesmall, small)
                point = (
                    small[0] + prev[0] - smallnum,
                    small[1] + prev[1] - smallnum,
                    small[2] + prev[2] - smallnum,
                )
                if k == 0:
                    # the pair was stored big-atom-first; restore file order
                    point, prev = prev, point
                    out[slot, 0] = prev[0] * inv_precision
                    out[slot, 1] = prev[1] * inv_precision
                    out[slot, 2] = prev[2] * inv_precision
                    slot += 1
                else:
                    prev = point
                out[slot, 0] = point[0] * inv_precision
                out[slot, 1] = point[1] * inv_precision
                out[slot, 2] = point[2] * inv_precision
                slot += 1
                i += 1
        else:
            out[slot, 0] = this[0] * inv_precision
            out[slot, 1] = this[1] * inv_precision
            out[slot, 2] = this[2] * inv_precision

        smallidx += is_smaller
        if is_smaller < 0:
            smallnum = smaller
            if smallidx > FIRSTIDX:
                smaller = MAGICINTS[smallidx - 1] // 2
            else:
                smaller = 0
        elif is_smaller > 0:
            smaller = smallnum
            smallnum = MAGICINTS[smallidx] // 2
        if not 0 <= smallidx <= LASTIDX or MAGICINTS[smallidx] == 0:
            raise XtcFormatError(
                reader.base_offset + reader.cnt,
                f"bit-width index walked out of range ({smallidx})",
            )
        sizesmall = (MAGICINTS[smallidx],) * 3

    return out, float(precision)


def iter_xtc_frames(data: bytes):
    """Yield frames from raw bytes, raising typed errors on malformed input."""
    stream = _StreamReader(data)
    expected_count: int | None = None
    index = 0
    while stream.remaining() > 0:
        frame_start = stream.offset
        try:
            magic, natoms, step, time_ps = stream.unpack(">iiif")
            if magic != MAGIC:
                raise XtcFormatError(frame_start, f"bad magic {magic} (expected {MAGIC})")
            if natoms <= 0:
                raise XtcFormatError(frame_start + 4, f"bad atom count {natoms}")
            box = np.array(stream.unpack(">9f"), dtype=np.float64).reshape(3, 3)
            lsize, = stream.unpack(">i")
            if lsize != natoms:
                raise XtcFormatError(
                    stream.offset - 4,
                    f"coordinate count {lsize} disagrees with header atom count {natoms}",
                )
            if expected_count is not None and natoms != expected_count:
                raise AtomCountChangedError(index, expected_count, natoms)
            expected_count = natoms
            if natoms <= 9:
                flat = stream.unpack(f">{3 * natoms}f")
                positions = np.array(flat, dtype=np.float64).reshape(natoms, 3)
                precision = 0.0
            else:
                positions, precision = _decode_frame_coords(stream, natoms)
        except _Truncated as exc:
            raise TruncatedFrameError([], exc.offset) from None
        yield Frame(
            step=step,
            time_ps=float(time_ps),
            box=box,
            positions=positions,
            precision=precision,
        )
        index += 1


def read_xtc(source: bytes | str | Path) -> Trajectory:
    """Read a whole trajectory.

    On truncation the raised :class:`TruncatedFrameError` carries every
    complete frame on its ``frames`` attribute, so callers can keep what
    survived a cut-short download.
    """
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = bytes(source)
    frames: list[Frame] = []
    try:
        for frame in iter_xtc_frames(data):
            frames.append(frame)
    except TruncatedFrameError as exc:
        raise TruncatedFrameError(frames, exc.offset) from None
    return make_trajectory(frames)
