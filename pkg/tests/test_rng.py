"""The seeded stream must be bit-stable across hosts and sub-stream safe."""

from collections import Counter

from worksim.rng import Stream, derive_seed


def test_stream_is_reproducible():
    a = Stream(1234)
    b = Stream(1234)
    assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]


def test_known_splitmix_values():
    # First outputs for seed 0; frozen so a silent algorithm change is caught.
    s = Stream(0)
    assert s.next_u64() == 16294208416658607535
    assert s.next_u64() == 7960286522194355700


def test_derive_seed_is_stable_and_sensitive():
    assert derive_seed(1, "a") == derive_seed(1, "a")
    assert derive_seed(1, "a") != derive_seed(1, "b")
    assert derive_seed(1, "ab") != derive_seed(1, "a", "b")


def test_substreams_are_independent():
    root = Stream(99)
    one = root.substream("personas")
    two = root.substream("env")
    seq_two = [two.next_u64() for _ in range(10)]
    # Drawing more from stream one must not shift stream two.
    fresh = Stream(99).substream("env")
    for _ in range(100):
        one.next_u64()
    assert [fresh.next_u64() for _ in range(10)] == seq_two


def test_randbelow_bounds_and_uniformity():
    s = Stream(5)
    draws = [s.randbelow(7) for _ in range(7000)]
    assert set(draws) <= set(range(7))
    counts = Counter(draws)
    for value in range(7):
        assert 850 <= counts[value] <= 1150  # 1000 expected per bin


def test_sample_without_replacement():
    s = Stream(8)
    picked = s.sample(list(range(30)), 10)
    assert len(picked) == len(set(picked)) == 10


def test_shuffle_permutes_in_place():
    s = Stream(3)
    items = list(range(20))
    s.shuffle(items)
    assert sorted(items) == list(range(20))
    assert items != list(range(20))
