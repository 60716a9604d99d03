"""Bit-exact codec for the in-band inference chain header.

Layout, MSB first: N id fields of max(1, ceil(log2 N)) bits each, then N
1-bit votes, then N 1-bit validity flags, zero-padded to a whole byte.
The validity mask makes "do I have every vote?" an explicit check at the
finalizing hop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache


class ChainError(ValueError):
    pass


@lru_cache(maxsize=None)
def id_width(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def header_bit_length(n: int) -> int:
    return n * id_width(n) + 2 * n


def header_byte_length(n: int) -> int:
    return (header_bit_length(n) + 7) // 8


@dataclass(frozen=True)
class ChainHeader:
    n: int
    wl_ids: tuple  # slot order; id of the learner assigned to each slot
    outputs: tuple  # 1-bit votes, meaningful only where mask is set
    mask: tuple  # 1-bit validity flags

    def __post_init__(self):
        if self.n < 1:
            raise ChainError("need at least one learner slot")
        for name in ("wl_ids", "outputs", "mask"):
            if len(getattr(self, name)) != self.n:
                raise ChainError(f"{name} must have {self.n} entries")
        width = id_width(self.n)
        for i in self.wl_ids:
            if not (0 <= i < (1 << width)):
                raise ChainError(f"wl_id {i} does not fit in {width} bits")
        for bit in self.outputs + self.mask:
            if bit not in (0, 1):
                raise ChainError("outputs and mask are 1-bit fields")

    @classmethod
    def empty(cls, n: int, wl_ids=None) -> "ChainHeader":
        ids = tuple(range(n)) if wl_ids is None else tuple(wl_ids)
        return cls(n=n, wl_ids=ids, outputs=(0,) * n, mask=(0,) * n)

    def is_complete(self) -> bool:
        return all(self.mask)

    def append_result(self, wl_id: int, vote: int) -> "ChainHeader":
        if vote not in (0, 1):
            raise ChainError("vote must be a single bit")
        try:
            slot = self.wl_ids.index(wl_id)
        except ValueError:
            raise ChainError(f"no slot for wl_id {wl_id}") from None
        if self.mask[slot]:
            raise ChainError(f"duplicate result for wl_id {wl_id} (mis-deployed chain)")
        outputs = list(self.outputs)
        mask = list(self.mask)
        outputs[slot] = vote
        mask[slot] = 1
        return replace(self, outputs=tuple(outputs), mask=tuple(mask))

    def finalize(self):
        """Majority verdict over the collected votes; ties go malicious."""
        if not self.is_complete():
            missing = [self.wl_ids[i] for i in range(self.n) if not self.mask[i]]
            raise ChainError(f"incomplete chain, missing votes from wl_ids {missing}")
        verdict = 1 if 2 * sum(self.outputs) >= self.n else 0
        return Verdict(
            label="malicious" if verdict else "benign",
            votes=tuple(zip(self.wl_ids, self.outputs)),
        )


@dataclass(frozen=True)
class Verdict:
    label: str  # benign | malicious
    votes: tuple  # (wl_id, bit) pairs

    @property
    def malicious(self) -> bool:
        return self.label == "malicious"


def encode_header(h: ChainHeader) -> bytes:
    width = id_width(h.n)
    bits = 0
    count = 0
    for i in h.wl_ids:
        bits = (bits << width) | i
        count += width
    for b in h.outputs + h.mask:
        bits = (bits << 1) | b
        count += 1
    pad = (-count) % 8
    bits <<= pad
    return bits.to_bytes((count + pad) // 8, "big")


def decode_header(raw: bytes, n: int) -> ChainHeader:
    expected = header_byte_length(n)
    if len(raw) != expected:
        raise ChainError(f"header for N={n} must be {expected} bytes, got {len(raw)}")
    bit_len = header_bit_length(n)
    total_bits = len(raw) * 8
    value = int.from_bytes(raw, "big")
    pad = total_bits - bit_len
    if value & ((1 << pad) - 1):
        raise ChainError("nonzero padding bits")
    value >>= pad

    width = id_width(n)
    id_mask = (1 << width) - 1
    remaining = bit_len
    wl_ids = []
    for _ in range(n):
        remaining -= width
        wl_ids.append((value >> remaining) & id_mask)
    flags = [(value >> (2 * n - 1 - i)) & 1 for i in range(2 * n)]
    return ChainHeader(
        n=n, wl_ids=tuple(wl_ids), outputs=tuple(flags[:n]), mask=tuple(flags[n:])
    )
