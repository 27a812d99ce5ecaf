"""Hierarchical (ruler) sequence R_N and the potential it induces on the path.

R_N is built from "underlined" blocks ``underline(m) = 0 1^m 0^(m+1)`` via

    R_n = S_{n-1} underline(n),    S_n = R_n S_{n-1},    S_0 = underline(0).

Only the run-length values m are stored; bits are produced on demand.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from cqtm.errors import DomainError, ResourceError

# N=24 gives 2^24 terms and 2^26 bits; both fit comfortably as uint8.
MAX_LEVEL = 24


@dataclass(frozen=True)
class UnderlineTerm:
    m: int

    def __post_init__(self):
        if self.m < 0:
            raise DomainError(f"underline term needs m >= 0, got {self.m}")

    def bits(self) -> str:
        return "0" + "1" * self.m + "0" * (self.m + 1)

    def __len__(self) -> int:
        return 2 * self.m + 2


@dataclass(frozen=True)
class RulerSequence:
    """R_n as an ordered array of underline values.

    ``terms`` is a read-only uint8 array; ``bits()`` materializes the 0/1
    string, ``iter_bits()`` streams it.
    """

    n: int
    terms: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def bit_length(self) -> int:
        return int(np.sum(2 * self.terms.astype(np.int64) + 2))

    def underline_terms(self) -> list[UnderlineTerm]:
        return [UnderlineTerm(int(m)) for m in self.terms]

    def iter_bits(self) -> Iterator[int]:
        for m in self.terms:
            yield 0
            for _ in range(m):
                yield 1
            for _ in range(m + 1):
                yield 0

    def bits(self) -> np.ndarray:
        m = self.terms.astype(np.int64)
        lengths = 2 * m + 2
        starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
        total = int(lengths.sum())
        # +1 at each run start, -1 one past its end; cumsum marks the 1s
        marks = np.zeros(total + 1, dtype=np.int64)
        np.add.at(marks, starts + 1, 1)
        np.add.at(marks, starts + 1 + m, -1)
        return np.cumsum(marks[:-1]).astype(np.uint8)

    def bit_string(self) -> str:
        return "".join("1" if b else "0" for b in self.bits())


def expand_sequence(n: int, max_level: int = MAX_LEVEL) -> RulerSequence:
    if n < 0:
        raise DomainError(f"level must be non-negative, got {n}")
    if n > max_level:
        raise ResourceError(f"level {n} exceeds configured maximum {max_level}")
    s = np.zeros(1, dtype=np.uint8)  # S_0
    if n == 0:
        r = s.copy()  # R_0 is just underline(0)
    for level in range(1, n + 1):
        r = np.concatenate((s, np.array([level], dtype=np.uint8)))
        if level < n:
            s = np.concatenate((r, s))
    r.setflags(write=False)
    return RulerSequence(n, r)


def run_lengths(bits: np.ndarray) -> np.ndarray:
    """Lengths of the maximal runs of 1s in a 0/1 array."""
    b = np.concatenate(([0], np.asarray(bits, dtype=np.int8), [0]))
    d = np.diff(b)
    return np.flatnonzero(d == -1) - np.flatnonzero(d == 1)


def barrier_census(seq: RulerSequence) -> dict[int, int]:
    # every term starts with 0 and ends with at least one 0, so runs never merge
    counts = np.bincount(seq.terms, minlength=1)
    return {m: int(c) for m, c in enumerate(counts) if m >= 1 and c}


@dataclass(frozen=True)
class PotentialProfile:
    """Potential along region II of the path, energies in units of K.

    ``link_value[j]`` couples sites j and j+1; ``site_height[j]`` is the sum
    of the two links touching site j, so barrier flanks sit at (1-gamma) and
    cores at 2(1-gamma).
    """

    gamma: float
    link_value: np.ndarray = field(repr=False)
    site_height: np.ndarray = field(repr=False)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(len(self.site_height))


def potential_profile(seq: RulerSequence, gamma: float) -> PotentialProfile:
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    links = (1.0 - gamma) * seq.bits().astype(float)
    padded = np.concatenate(([0.0], links, [0.0]))
    heights = padded[:-1] + padded[1:]
    return PotentialProfile(gamma, links, heights)
