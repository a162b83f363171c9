"""Queue dynamics and run accounting."""

import numpy as np
import pytest

from birelay.channel import ChannelState, FadingStatistics, sample_trace
from birelay.engine import QueueState, SlotFlows, run, step
from birelay.policy import SlotDecision, Thresholds, proposed_policy
from birelay.rate import PowerTriple, link_capacities


def _decision(mode, ch, p1=0.0, p2=0.0, pr=0.0, t=0.0):
    triple = PowerTriple(p1, p2, pr)
    return SlotDecision(mode=mode, powers=triple, t=t, rates=link_capacities(ch, triple, t))


def test_queue_state_validated():
    with pytest.raises(ValueError):
        QueueState(-0.1, 0.0)
    with pytest.raises(ValueError):
        QueueState(0.0, -1.0)


def test_uplink_modes_fill_buffers():
    ch = ChannelState(1, 3.0, 1.0)
    q, flows = step(QueueState(0.5, 0.0), _decision(1, ch, p1=1.0))
    assert flows == SlotFlows(2.0, 0.0, 0.0, 0.0)  # log2(1+3)
    assert q == QueueState(2.5, 0.0)
    q, flows = step(QueueState(0.0, 0.2), _decision(2, ch, p2=1.0))
    assert flows.in2 == 1.0  # log2(1+1)
    assert q == QueueState(0.0, 1.2)


def test_joint_uplink_fills_both():
    ch = ChannelState(1, 1.5, 2.5)
    q, flows = step(QueueState(0.0, 0.0), _decision(3, ch, p1=1.0, p2=1.0, t=1.0))
    assert flows.in1 == pytest.approx(1.3219280948873624)
    assert flows.in2 == pytest.approx(1.0)
    assert q.q1 == pytest.approx(1.3219280948873624)
    assert q.q2 == pytest.approx(1.0)


def test_downlink_modes_clip_to_buffer():
    ch = ChannelState(1, 3.0, 1.0)
    # mode 4 serves user 1 out of buffer 2
    q, flows = step(QueueState(0.0, 0.7), _decision(4, ch, pr=1.0))
    assert flows.out1 == pytest.approx(0.7)  # capacity 2.0 clipped to 0.7
    assert q == QueueState(0.0, 0.0)
    # mode 5 serves user 2 out of buffer 1
    q, flows = step(QueueState(5.0, 0.0), _decision(5, ch, pr=1.0))
    assert flows.out2 == pytest.approx(1.0)  # capacity 1.0, buffer has more
    assert q.q1 == pytest.approx(4.0)


def test_broadcast_serves_both_from_pre_slot_levels():
    ch = ChannelState(1, 3.0, 3.0)  # cr1 = cr2 = 2.0 at pr = 1
    q, flows = step(QueueState(1.0, 3.0), _decision(6, ch, pr=1.0))
    assert flows.out1 == pytest.approx(2.0)  # from buffer 2
    assert flows.out2 == pytest.approx(1.0)  # from buffer 1, clipped
    assert q.q1 == pytest.approx(0.0)
    assert q.q2 == pytest.approx(1.0)


def test_step_rejects_unknown_mode():
    ch = ChannelState(1, 1.0, 1.0)
    with pytest.raises(ValueError):
        step(QueueState(0.0, 0.0), _decision(7, ch))


def test_run_empty_trace_guards():
    # a one-slot trace is the minimum; the sampler refuses zero slots
    with pytest.raises(ValueError):
        sample_trace(FadingStatistics(1.0, 1.0), 0, 1)


def test_run_accounting_and_conservation():
    stats = FadingStatistics(1.0, 1.0)
    trace = sample_trace(stats, 2000, 13)
    policy = proposed_policy(Thresholds(0.37, 0.36, 0.09), stats)
    report = run(trace, policy)
    n = report.n_slots
    assert n == 2000
    assert sum(report.mode_freq) == pytest.approx(1.0, abs=1e-12)
    assert report.sum_rate == pytest.approx(report.r_r1 + report.r_r2, rel=1e-12)
    # delivered bits can never exceed ingested bits, direction by direction
    assert report.r_r2 * n <= report.r_1r * n + 1e-9
    assert report.r_r1 * n <= report.r_2r * n + 1e-9
    # ingested minus delivered sits in the final buffers, exactly
    assert report.final_queues.q1 == pytest.approx(
        (report.r_1r - report.r_r2) * n, rel=1e-9, abs=1e-9
    )
    assert report.final_queues.q2 == pytest.approx(
        (report.r_2r - report.r_r1) * n, rel=1e-9, abs=1e-9
    )
    assert report.avg_power > 0.0


def test_run_is_deterministic():
    stats = FadingStatistics(1.3, 0.8)
    trace = sample_trace(stats, 500, 99)
    policy = proposed_policy(Thresholds(0.42, 0.33, 0.2), stats)
    a = run(trace, policy)
    b = run(trace, policy)
    assert a == b


def test_run_respects_policy_modes():
    stats = FadingStatistics(1.0, 1.0)
    trace = sample_trace(stats, 300, 5)

    def uplink_only(ch, queues):
        return _decision(1, ch, p1=1.0)

    report = run(trace, uplink_only)
    assert report.mode_freq[0] == 1.0
    assert report.r_r1 == report.r_r2 == 0.0
    assert report.final_queues.q1 == pytest.approx(report.r_1r * 300, rel=1e-12)
    assert report.avg_power == pytest.approx(1.0, rel=1e-12)
