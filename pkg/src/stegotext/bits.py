"""Bit-level primitives: immutable bit strings plus reader/writer cursors.

Bit order is MSB-first within a byte everywhere.  A BitString knows its
exact length independently of any byte rendering, so payloads that are
not a multiple of 8 bits survive hex/file round-trips unchanged.
"""

from __future__ import annotations

from typing import Iterable, Iterator


class BitString:
    """Immutable ordered sequence of 0/1 values."""

    __slots__ = ("_bits",)

    def __init__(self, bits: Iterable[int] = ()) -> None:
        bits = tuple(int(b) for b in bits)
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"bit values must be 0 or 1, got {b}")
        self._bits = bits

    @classmethod
    def from_bytes(cls, data: bytes, length: int | None = None) -> "BitString":
        """Unpack `length` bits from `data` (default: all 8*len(data) bits)."""
        if length is None:
            length = 8 * len(data)
        if length < 0 or length > 8 * len(data):
            raise ValueError(f"length {length} out of range for {len(data)} bytes")
        return cls((data[i >> 3] >> (7 - (i & 7))) & 1 for i in range(length))

    @classmethod
    def from_hex(cls, text: str, length: int | None = None) -> "BitString":
        return cls.from_bytes(bytes.fromhex(text.strip()), length)

    @classmethod
    def from_int(cls, value: int, width: int) -> "BitString":
        """Big-endian fixed-width rendering of a non-negative integer."""
        if width < 0:
            raise ValueError("width must be non-negative")
        if value < 0 or (width < value.bit_length()):
            raise ValueError(f"{value} does not fit in {width} bits")
        return cls((value >> (width - 1 - i)) & 1 for i in range(width))

    def to_bytes(self) -> bytes:
        """Pack into bytes, zero-padding the final partial byte."""
        out = bytearray((len(self._bits) + 7) // 8)
        for i, b in enumerate(self._bits):
            if b:
                out[i >> 3] |= 1 << (7 - (i & 7))
        return bytes(out)

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    def to_int(self) -> int:
        """Big-endian integer value (0 for the empty string)."""
        value = 0
        for b in self._bits:
            value = (value << 1) | b
        return value

    def to01(self) -> str:
        return "".join("1" if b else "0" for b in self._bits)

    def __len__(self) -> int:
        return len(self._bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self._bits)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return BitString(self._bits[index])
        return self._bits[index]

    def __add__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        joined = BitString()
        joined._bits = self._bits + other._bits
        return joined

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self._bits == other._bits

    def __hash__(self) -> int:
        return hash(self._bits)

    def __repr__(self) -> str:
        shown = self.to01() if len(self) <= 64 else self.to01()[:61] + "..."
        return f"BitString({shown!r}, length={len(self)})"


class BitReader:
    """Forward cursor over a BitString that pads with zeros once real bits run out.

    Tracks real vs padding consumption separately so codecs can report
    exactly how many payload bits a token carried.
    """

    def __init__(self, bits: BitString) -> None:
        self._bits = bits
        self._pos = 0
        self._padding = 0

    @property
    def real_consumed(self) -> int:
        return self._pos

    @property
    def padding_consumed(self) -> int:
        return self._padding

    @property
    def remaining(self) -> int:
        """Real (non-padding) bits left to read."""
        return len(self._bits) - self._pos

    @property
    def exhausted(self) -> bool:
        return self._pos >= len(self._bits)

    def read_bit(self) -> int:
        if self._pos < len(self._bits):
            bit = self._bits[self._pos]
            self._pos += 1
            return bit
        self._padding += 1
        return 0

    def read(self, count: int) -> BitString:
        """Read `count` bits, zero-padded past the end of the payload."""
        if count < 0:
            raise ValueError("count must be non-negative")
        return BitString(self.read_bit() for _ in range(count))


class BitWriter:
    """Accumulates bits; `getvalue` snapshots the current BitString."""

    def __init__(self) -> None:
        self._bits: list[int] = []

    def write_bit(self, bit: int) -> None:
        if bit not in (0, 1):
            raise ValueError(f"bit values must be 0 or 1, got {bit}")
        self._bits.append(bit)

    def write(self, bits: Iterable[int]) -> None:
        for b in bits:
            self.write_bit(int(b))

    def __len__(self) -> int:
        return len(self._bits)

    def getvalue(self) -> BitString:
        return BitString(self._bits)
