import math
import random
from fractions import Fraction

import pytest

from setrecon import partition as pt


def test_schedule_validation():
    with pytest.raises(pt.ScheduleError):
        pt.PartitionSchedule((Fraction(1),))
    with pytest.raises(pt.ScheduleError):
        pt.PartitionSchedule((Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(pt.ScheduleError):
        pt.PartitionSchedule((Fraction(0), Fraction(1)))
    with pytest.raises(pt.ScheduleError):
        pt.fair_probs(1)
    with pytest.raises(pt.ScheduleError):
        pt.schedule_from_strings(["0.5", "nope"])


def test_round_optimal_probs():
    assert pt.round_optimal_probs(2).probs == (Fraction(1, 2), Fraction(1, 2))
    assert pt.round_optimal_probs(4).probs == (
        Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8),
    )
    for c in range(2, 33):
        assert sum(pt.round_optimal_probs(c).probs) == 1


def test_split_examples():
    root = pt.root_interval()
    fair = pt.fair_probs(2)
    left, right = root.split(fair)
    assert (left.lo, left.hi, left.path) == (0, Fraction(1, 2), (0,))
    assert (right.lo, right.hi, right.path) == (Fraction(1, 2), 1, (1,))

    sched3 = pt.schedule_from_strings(["1/2", "1/4", "1/4"])
    kids = root.split(sched3)
    assert [(k.lo, k.hi) for k in kids] == [
        (0, Fraction(1, 2)),
        (Fraction(1, 2), Fraction(3, 4)),
        (Fraction(3, 4), 1),
    ]

    sub = pt.PartitionInterval(Fraction(1, 2), Fraction(1), (1,))
    kids = sub.split(fair)
    assert [(k.lo, k.hi) for k in kids] == [
        (Fraction(1, 2), Fraction(3, 4)),
        (Fraction(3, 4), 1),
    ]


def test_exact_tiling():
    rng = random.Random(0)
    for sched, depth in ((pt.fair_probs(2), 12), (pt.round_optimal_probs(3), 6)):
        leaves = [pt.root_interval()]
        for _ in range(depth):
            leaves = [child for leaf in leaves for child in leaf.split(sched)]
        assert leaves[0].lo == 0 and leaves[-1].hi == 1
        for a, b in zip(leaves, leaves[1:]):
            assert a.hi == b.lo  # no gaps, no overlaps
        # every key lands in exactly one leaf
        for _ in range(50):
            key = Fraction(rng.getrandbits(64), 1 << 64)
            assert sum(leaf.contains(key) for leaf in leaves) == 1


def test_key_of_determinism_and_range():
    k1 = pt.key_of(123456, 7)
    assert k1 == pt.key_of(123456, 7)
    assert 0 <= k1 < 1
    assert pt.key_of(123456, 8) != k1


def test_seed_changes_partition():
    sched = pt.fair_probs(2)
    elems = list(range(40))
    w0 = [pt.word_of_key(sched, pt.key_of(e, 0), 3) for e in elems]
    w1 = [pt.word_of_key(sched, pt.key_of(e, 1), 3) for e in elems]
    assert w0 != w1


def test_key_uniformity_ks():
    n = 1_000_000
    keys = sorted(float(pt.key_of(e, 3)) for e in range(n))
    d_stat = 0.0
    for i, x in enumerate(keys):
        d_stat = max(d_stat, abs((i + 1) / n - x), abs(x - i / n))
    assert d_stat < 1.628 / math.sqrt(n)  # 1% critical value


def test_multinomial_placement_chi_square():
    # left-count histogram of fair binary placement of 5 elements matches
    # Binomial(5, 1/2) at the 1% level over 10^4 trials
    sched = pt.fair_probs(2)
    trials, per = 10_000, 5
    hist = [0] * (per + 1)
    for t in range(trials):
        left = sum(
            pt.word_of_key(sched, pt.key_of(t * per + j, 9), 1) == (0,)
            for j in range(per)
        )
        hist[left] += 1
    chi2 = 0.0
    for k, got in enumerate(hist):
        expected = math.comb(per, k) / 2**per * trials
        chi2 += (got - expected) ** 2 / expected
    assert chi2 < 15.086  # chi-square 1% critical value, 5 dof


def test_path_word_roundtrip():
    sched = pt.round_optimal_probs(3)
    rng = random.Random(5)
    for _ in range(100):
        path = tuple(rng.randrange(3) for _ in range(rng.randrange(7)))
        interval = pt.interval_for_path(sched, path)
        assert interval.path == path
        # any key inside the interval maps back to the same word
        span = interval.hi - interval.lo
        key = interval.lo + span * Fraction(rng.getrandbits(32), 1 << 33)
        assert pt.word_of_key(sched, key, len(path)) == path


def test_word_of_key_boundary():
    sched = pt.fair_probs(2)
    assert pt.word_of_key(sched, Fraction(1, 2), 1) == (1,)
    assert pt.word_of_key(sched, Fraction(0), 3) == (0, 0, 0)


def test_locate_matches_word():
    sched = pt.schedule_from_strings(["0.15", "0.1", "0.25", "0.2", "0.3"])
    rng = random.Random(6)
    for _ in range(50):
        key = Fraction(rng.getrandbits(64), 1 << 64)
        j, child = pt.root_interval().locate(key, sched)
        assert pt.word_of_key(sched, key, 1) == (j,)
        assert child.contains(key)


def test_interval_validation():
    with pytest.raises(ValueError):
        pt.PartitionInterval(Fraction(1, 2), Fraction(1, 2), ())
    with pytest.raises(ValueError):
        pt.interval_for_path(pt.fair_probs(2), (2,))
