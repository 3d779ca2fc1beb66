import random
import time

import pytest

from setrecon import sketch as sk


@pytest.fixture(scope="module")
def cfg4():
    return sk.field_setup(4, 2, 1)


def test_field_setup_examples(cfg4):
    assert cfg4.modulus == 23
    assert cfg4.eval_points == (16, 17, 18, 19)
    assert sk.field_setup(8, 2, 1).modulus == 263
    assert sk.field_setup(8, 2, 1).eval_points == (256, 257, 258, 259)
    tiny = sk.field_setup(1, 1, 0)
    assert tiny.modulus == 5 and tiny.eval_points == (2, 3)


def test_field_setup_validation():
    with pytest.raises(sk.ConfigError):
        sk.field_setup(0, 2, 1)
    with pytest.raises(sk.ConfigError):
        sk.field_setup(4, 0, 1)
    with pytest.raises(sk.ConfigError):
        sk.field_setup(4, 2, -1)
    with pytest.raises(sk.ConfigError):
        sk.field_setup(100000, 2, 1)


def test_init_identity(cfg4):
    z = sk.new_sketch(cfg4)
    assert z.values == (1, 1, 1, 1) and z.count == 0
    out = sk.recover(z)
    assert out.flag and not out.recovered_a and not out.recovered_b
    other = sk.sketch_of(cfg4, [3, 5])
    assert sk.subtract(other, z) == other


def test_insert_examples(cfg4):
    z = sk.insert_element(sk.new_sketch(cfg4), 3)
    assert z.values == (13, 14, 15, 16) and z.count == 1
    z35 = sk.sketch_of(cfg4, [3, 5])
    assert z35.values[0] == 5  # 13*11 mod 23
    assert z35.values[1] == 7  # 14*12 mod 23
    assert z35.count == 2


def test_insert_order_irrelevant(cfg4):
    z = sk.new_sketch(cfg4)
    ab = sk.insert_element(sk.insert_element(z, 3), 5)
    ba = sk.insert_element(sk.insert_element(z, 5), 3)
    assert ab == ba


def test_insert_validation(cfg4):
    with pytest.raises(sk.ElementError):
        sk.insert_element(sk.new_sketch(cfg4), 16)
    with pytest.raises(sk.ElementError):
        sk.insert_set(sk.new_sketch(cfg4), [1, 1])


def test_subtract_example(cfg4):
    d = sk.subtract(sk.sketch_of(cfg4, [3, 5]), sk.sketch_of(cfg4, [5, 7]))
    assert d.values[0] == 4 and d.count == 0
    out = sk.recover(d)
    assert out.flag
    assert out.recovered_a == frozenset({3}) and out.recovered_b == frozenset({7})


def test_subtract_group_laws(cfg4):
    z = sk.sketch_of(cfg4, [1, 9, 12])
    assert sk.subtract(z, z) == sk.new_sketch(cfg4)
    # disjoint union factorizes pointwise
    s, t = [2, 4], [7, 11]
    zu = sk.sketch_of(cfg4, s + t)
    zs, zt = sk.sketch_of(cfg4, s), sk.sketch_of(cfg4, t)
    assert zu.values == tuple(a * b % 23 for a, b in zip(zs.values, zt.values))
    assert sk.subtract(zu, zt) == zs


def test_subtract_errors(cfg4):
    other = sk.field_setup(4, 2, 2)
    with pytest.raises(sk.MismatchError):
        sk.subtract(sk.new_sketch(cfg4), sk.new_sketch(other))
    bad = sk.SRSketch(cfg4, (0, 1, 1, 1), 0)
    with pytest.raises(ZeroDivisionError):
        sk.subtract(sk.new_sketch(cfg4), bad)


def test_count_overflow_guard(cfg4):
    z = sk.SRSketch(cfg4, (1, 1, 1, 1), 2**31 - 1)
    with pytest.raises(sk.ElementError):
        sk.insert_element(z, 3)


def test_roundtrip_random_instances():
    rng = random.Random(11)
    cfg = sk.field_setup(16, 6, 1)
    for _ in range(150):
        universe = 1 << 16
        da = rng.randrange(0, 4)
        db = rng.randrange(0, 4 - min(3, da) + 1)
        pool = rng.sample(range(universe), da + db + 6)
        a_only, b_only = pool[:da], pool[da:da + db]
        shared = pool[da + db:]
        za = sk.sketch_of(cfg, a_only + shared)
        zb = sk.sketch_of(cfg, b_only + shared)
        out = sk.recover(sk.subtract(za, zb))
        assert out.flag
        assert out.recovered_a == frozenset(a_only)
        assert out.recovered_b == frozenset(b_only)
        assert len(out.recovered_a) - len(out.recovered_b) == da - db


def test_over_capacity_fails():
    rng = random.Random(12)
    cfg = sk.field_setup(16, 2, 1)
    for _ in range(100):
        pool = rng.sample(range(1 << 16), 3)
        out = sk.recover(sk.sketch_of(cfg, pool))  # 3 > mbar=2, one-sided
        assert not out.flag


def test_oracle_equivalence_tiny_universe():
    cfg = sk.field_setup(4, 4, 1)
    universe = range(16)
    from itertools import combinations

    subsets = [frozenset(c) for size in (0, 1, 2) for c in combinations(universe, size)]
    for sa in subsets:
        for sb in subsets:
            diff = sa ^ sb
            if len(diff) > 4:
                continue
            out = sk.recover(sk.subtract(sk.sketch_of(cfg, sa), sk.sketch_of(cfg, sb)))
            assert out.flag
            assert out.recovered_a == sa - sb and out.recovered_b == sb - sa


def test_oracle_equivalence_tiny_universe_sampled():
    rng = random.Random(13)
    cfg = sk.field_setup(4, 4, 1)
    for _ in range(400):
        sa = frozenset(rng.sample(range(16), rng.randrange(5)))
        sb = frozenset(rng.sample(range(16), rng.randrange(5)))
        out = sk.recover(sk.subtract(sk.sketch_of(cfg, sa), sk.sketch_of(cfg, sb)))
        if len(sa ^ sb) <= 4:
            assert out.flag
            assert out.recovered_a == sa - sb and out.recovered_b == sb - sa


def test_false_success_rate_bounded():
    # sizes above capacity: observed false-success rate stays within a 10x
    # envelope of (size/2^bits)^gamma
    rng = random.Random(14)
    cfg = sk.field_setup(8, 3, 1)
    trials_per_size = 12_500
    for size in range(4, 13):
        hits = 0
        for _ in range(trials_per_size):
            pool = rng.sample(range(256), size)
            a = pool[: (size + 1) // 2]
            b = pool[(size + 1) // 2:]
            out = sk.recover(sk.subtract(sk.sketch_of(cfg, a), sk.sketch_of(cfg, b)))
            if out.flag:
                hits += 1
        bound = 10.0 * (size / 256.0)
        assert hits / trials_per_size <= bound, (size, hits)


def test_roundtrip_without_verification_points():
    # gamma=0 leaves no spare evaluations; recovery still works for true
    # differences of either parity
    rng = random.Random(16)
    for mbar in (3, 4):
        cfg = sk.field_setup(16, mbar, 0)
        for da, db in ((0, 0), (1, 0), (2, 1), (mbar, 0), (mbar - 1, 1)):
            pool = rng.sample(range(1 << 16), da + db)
            out = sk.recover(
                sk.subtract(sk.sketch_of(cfg, pool[:da]), sk.sketch_of(cfg, pool[da:]))
            )
            assert out.flag
            assert out.recovered_a == frozenset(pool[:da])
            assert out.recovered_b == frozenset(pool[da:])


def test_large_field_setup():
    cfg = sk.field_setup(256, 50, 1)
    assert cfg.modulus.bit_length() == 257
    assert cfg.eval_points[0] == 1 << 256 and len(cfg.eval_points) == 52
    elem = (1 << 256) - 12345
    z = sk.insert_element(sk.new_sketch(cfg), elem)
    out = sk.recover(z)
    assert out.flag and out.recovered_a == {elem}


def test_serialization_roundtrip(cfg4):
    z = sk.sketch_of(cfg4, [3, 5, 9])
    blob = sk.to_bytes(z)
    assert sk.from_bytes(blob) == z
    assert len(blob) == 10 + 4 * cfg4.value_bytes
    assert sk.hex_dump(z).count(" ") > 0
    with pytest.raises(ValueError):
        sk.from_bytes(blob[:-1])
    with pytest.raises(ValueError):
        sk.from_bytes(b"\x00" * 4)
    # value outside the field
    bad = bytearray(blob)
    bad[10:10 + cfg4.value_bytes] = cfg4.modulus.to_bytes(cfg4.value_bytes, "little")
    with pytest.raises(ValueError):
        sk.from_bytes(bytes(bad))


def test_recover_deterministic(cfg4):
    d = sk.subtract(sk.sketch_of(cfg4, [3, 5]), sk.sketch_of(cfg4, [5, 7]))
    assert sk.recover(d) == sk.recover(d)


def test_wire_cost_examples():
    assert sk.wire_cost(25, 1, 64) == 1754
    assert sk.wire_cost(50, 1, 256) == 13363
    assert sk.wire_cost(2, 1, 8) == 35
    with pytest.raises(sk.ConfigError):
        sk.wire_cost(0, 1, 8)


def _time_it(fn, min_total=0.05):
    reps = 1
    while True:
        start = time.perf_counter()
        for _ in range(reps):
            fn()
        elapsed = time.perf_counter() - start
        if elapsed >= min_total:
            return elapsed / reps
        reps = max(reps * 2, int(reps * min_total / max(elapsed, 1e-9)))


def test_complexity_shape():
    # recovery cost grows much faster with capacity than the linear
    # insert/subtract operations
    rng = random.Random(15)
    results = {}
    for mbar in (8, 32):
        cfg = sk.field_setup(32, mbar, 1)
        elems = rng.sample(range(1 << 32), mbar)
        base = sk.new_sketch(cfg)
        za = sk.sketch_of(cfg, elems[: mbar // 2])
        zb = sk.sketch_of(cfg, elems[mbar // 2:])
        diff = sk.subtract(za, zb)
        results[mbar] = (
            _time_it(lambda: sk.insert_element(base, 12345)),
            _time_it(lambda: sk.subtract(za, zb)),
            _time_it(lambda: sk.recover(diff)),
        )
    insert_ratio = results[32][0] / results[8][0]
    subtract_ratio = results[32][1] / results[8][1]
    recover_ratio = results[32][2] / results[8][2]
    assert recover_ratio > 2.5 * insert_ratio, (insert_ratio, recover_ratio)
    assert recover_ratio > 2.5 * subtract_ratio, (subtract_ratio, recover_ratio)
