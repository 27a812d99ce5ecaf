"""Classical walk along the single computation path of the counting machine.

The step operator is a sum of seven terms.  Each term is a guard (head
state, symbol under the head) and an action (symbol flip, head-state shift
mod 3, one-site move).  Decoded from the operator products:

    term  state reads   writes  new state  move
      1     0     0       -        0       +1
      2     0     2       -        1       +1
      3     1     0       -        1       +1
      4     1     2       -        2       -1
      5     2     1       0        2       -1    (weighted by gamma: read-1)
      6     2     0       1        1       +1
      7     2     2       -        0       +1

Tape symbols 0/1 carry the binary string, 2 is a marker.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from cqtm.errors import MachineHalted, NonterminationError
from cqtm.seqgen import RulerSequence

READ1_TERM = 5

# (state, read) -> (term, write or None, new_state, move)
FORWARD = {
    (0, 0): (1, None, 0, +1),
    (0, 2): (2, None, 1, +1),
    (1, 0): (3, None, 1, +1),
    (1, 2): (4, None, 2, -1),
    (2, 1): (5, 0, 2, -1),
    (2, 0): (6, 1, 1, +1),
    (2, 2): (7, None, 0, +1),
}

# Adjoint table.  Keyed on (current state, offset of the site the previous
# step acted on, symbol now stored there) -> (term, restore, previous state).
BACKWARD = {
    (0, -1, 0): (1, None, 0),
    (1, -1, 2): (2, None, 0),
    (1, -1, 0): (3, None, 1),
    (2, +1, 2): (4, None, 1),
    (2, +1, 0): (5, 1, 2),
    (1, -1, 1): (6, 0, 2),
    (0, -1, 2): (7, None, 2),
}


@dataclass(frozen=True)
class MachineConfig:
    head_state: int
    head_pos: int
    tape: dict = field(default_factory=dict)  # site -> nonzero symbol

    def read(self, site: int) -> int:
        return self.tape.get(site, 0)

    def with_symbol(self, site: int, value: int) -> dict:
        tape = dict(self.tape)
        if value:
            tape[site] = value
        else:
            tape.pop(site, None)
        return tape

    def window(self, lo: int, hi: int) -> str:
        return "".join(str(self.read(j)) for j in range(lo, hi + 1))


@dataclass(frozen=True)
class StepRecord:
    step_index: int
    term_fired: int
    is_read1: bool
    head_state: int  # before the step
    head_pos: int


def step(cfg: MachineConfig, step_index: int = 0) -> tuple[MachineConfig, StepRecord]:
    key = (cfg.head_state, cfg.read(cfg.head_pos))
    if key not in FORWARD:
        raise MachineHalted(f"no term applies to state {key[0]} reading {key[1]}")
    term, write, new_state, move = FORWARD[key]
    tape = cfg.tape if write is None else cfg.with_symbol(cfg.head_pos, write)
    nxt = MachineConfig(new_state, cfg.head_pos + move, tape)
    rec = StepRecord(step_index, term, term == READ1_TERM, cfg.head_state, cfg.head_pos)
    return nxt, rec


def step_back(cfg: MachineConfig) -> tuple[MachineConfig, int]:
    """Apply the adjoint step; returns the predecessor and the term undone."""
    hits = []
    for offset in (-1, +1):
        site = cfg.head_pos + offset
        key = (cfg.head_state, offset, cfg.read(site))
        if key in BACKWARD:
            hits.append((site, BACKWARD[key]))
    if len(hits) != 1:
        raise MachineHalted(f"adjoint has {len(hits)} applicable terms at {cfg}")
    site, (term, restore, prev_state) = hits[0]
    tape = cfg.tape if restore is None else cfg.with_symbol(site, restore)
    return MachineConfig(prev_state, site, tape), term


def initial_config(n: int, head_pos: int = -1) -> MachineConfig:
    if head_pos >= 0:
        raise ValueError("head must start left of the origin marker")
    return MachineConfig(0, head_pos, {0: 2, n + 1: 2})


def is_final(cfg: MachineConfig, n: int) -> bool:
    return cfg.head_state == 1 and cfg.head_pos > n + 1


def run_counting(
    n: int, max_steps: int | None = None, head_pos: int = -1
) -> tuple[list[StepRecord], MachineConfig]:
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if max_steps is None:
        max_steps = 2 ** (n + 3) + 4 * n + 16
    cfg = initial_config(n, head_pos)
    records = []
    while not is_final(cfg, n):
        if len(records) >= max_steps:
            raise NonterminationError(f"no final state after {max_steps} steps")
        cfg, rec = step(cfg, len(records))
        records.append(rec)
    return records, cfg


def counter_values(n: int, records: list[StepRecord]) -> list[str]:
    """Marker-bounded tape strings each time the head bounces off the right marker.

    Those are the moments an increment has finished, so the list runs through
    every integer 0..2^n - 1 (most significant digit at site 1).
    """
    cfg = initial_config(n, records[0].head_pos if records else -1)
    out = []
    for rec in records:
        if rec.term_fired == 4:
            out.append(cfg.window(1, n))
        cfg, _ = step(cfg)
    return out


def read1_trace(records: list[StepRecord]) -> np.ndarray:
    return np.fromiter((r.is_read1 for r in records), dtype=np.uint8, count=len(records))


def _trim(bits: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(bits)
    if len(nz) == 0:
        return bits[:0]
    return bits[nz[0] : nz[-1] + 1]


def read1_trace_matches(seq: RulerSequence, records: list[StepRecord]) -> bool:
    a = _trim(read1_trace(records))
    b = _trim(seq.bits())
    return len(a) == len(b) and bool(np.array_equal(a, b))
