import pytest

from cqtm.errors import MachineHalted, NonterminationError
from cqtm.qtm_sim import (
    FORWARD,
    MachineConfig,
    counter_values,
    initial_config,
    read1_trace,
    read1_trace_matches,
    run_counting,
    step,
    step_back,
)
from cqtm.seqgen import expand_sequence


def test_first_step_moves_right_in_state_zero():
    cfg, rec = step(initial_config(3))
    assert rec.term_fired == 1 and not rec.is_read1
    assert (cfg.head_state, cfg.head_pos) == (0, 0)


def test_marker_read_changes_state():
    cfg, _ = step(initial_config(3))
    cfg, rec = step(cfg)
    assert rec.term_fired == 2
    assert (cfg.head_state, cfg.head_pos) == (1, 1)


def test_read1_term_clears_bit_and_moves_left():
    cfg = MachineConfig(2, 4, {0: 2, 4: 1, 6: 2})
    nxt, rec = step(cfg)
    assert rec.term_fired == 5 and rec.is_read1
    assert nxt.read(4) == 0
    assert (nxt.head_state, nxt.head_pos) == (2, 3)


def test_halts_on_undefined_guard():
    with pytest.raises(MachineHalted):
        step(MachineConfig(0, 3, {3: 1}))


@pytest.mark.parametrize("n", range(1, 9))
def test_trace_matches_sequence(n):
    records, final = run_counting(n)
    assert read1_trace_matches(expand_sequence(n), records)
    assert final.head_state == 1


@pytest.mark.parametrize("n", range(1, 8))
def test_trace_alignment_offset(n):
    # R bit i is emitted at step i + n + 2; the leading steps are all read-0
    records, _ = run_counting(n)
    trace = read1_trace(records)
    bits = expand_sequence(n).bits()
    assert not trace[: n + 2].any()
    assert (trace[n + 2 : n + 2 + len(bits)] == bits).all()
    assert not trace[n + 2 + len(bits) :].any()
    assert len(records) == 2 ** (n + 2) - 2 + n + 3


def test_counter_runs_through_all_values():
    records, _ = run_counting(2)
    assert counter_values(2, records) == ["00", "01", "10", "11"]


@pytest.mark.parametrize("n", [3, 5])
def test_counter_values_binary(n):
    records, _ = run_counting(n)
    assert counter_values(n, records) == [format(i, f"0{n}b") for i in range(2**n)]


@pytest.mark.parametrize("n", range(1, 6))
def test_reversibility(n):
    records, final = run_counting(n)
    cfg = final
    for rec in reversed(records):
        cfg, term = step_back(cfg)
        assert term == rec.term_fired
        assert (cfg.head_state, cfg.head_pos) == (rec.head_state, rec.head_pos)
    assert cfg == initial_config(n)


@pytest.mark.parametrize("n", range(1, 6))
def test_markers_conserved(n):
    records, _ = run_counting(n)
    cfg = initial_config(n)
    for _ in records:
        cfg, _ = step(cfg)
        assert cfg.read(0) == 2 and cfg.read(n + 1) == 2
        assert sorted(s for s, v in cfg.tape.items() if v == 2) == [0, n + 1]


@pytest.mark.parametrize("start", [-1, -5])
def test_head_placement_only_shifts_prefix(start):
    n = 4
    records, _ = run_counting(n, head_pos=start)
    assert read1_trace_matches(expand_sequence(n), records)


def test_deterministic():
    a, fa = run_counting(4)
    b, fb = run_counting(4)
    assert a == b and fa == fb


def test_nontermination_guard():
    with pytest.raises(NonterminationError):
        run_counting(5, max_steps=10)


def test_forward_table_is_injective_on_guards():
    assert len(FORWARD) == 7
    assert sorted(v[0] for v in FORWARD.values()) == list(range(1, 8))


def test_read1_count_level_three():
    records, _ = run_counting(3)
    assert int(read1_trace(records).sum()) == 7


def test_trace_without_read1_matches_level_zero():
    assert read1_trace_matches(expand_sequence(0), [])


def test_trace_of_wrong_level_rejected():
    records, _ = run_counting(4)
    assert not read1_trace_matches(expand_sequence(5), records)
