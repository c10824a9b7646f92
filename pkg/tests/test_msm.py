import pytest
from hypothesis import given, strategies as st

from zkinfer.algebra.engine import MockEngine
from zkinfer.algebra.field import TEST_FIELD
from zkinfer.algebra.msm import double_and_add, msm, naive_msm, pippenger


class NoFast:
    """Wrap a group so the generic MSM paths run instead of the mock shortcut."""

    def __init__(self, group):
        self.g = group

    def __getattr__(self, name):
        return getattr(self.g, name)

    def fast_msm(self, bases, scalars):
        return None


def test_double_and_add(mock):
    G = mock.g1
    for k in (0, 1, 2, 3, 255, 2**200 + 17):
        assert G.eq(double_and_add(G, G.generator(), k), G.gen_mul(k))


@given(st.lists(st.tuples(st.integers(1, TEST_FIELD.modulus - 1), st.integers(0, 2**64)), max_size=40),
       st.sampled_from([None, 1, 2, 4, 7]))
def test_pippenger_matches_naive_mock(pairs, window):
    G = NoFast(MockEngine(TEST_FIELD).g1)
    bases = [G.gen_mul(b) for b, _ in pairs]
    scalars = [s for _, s in pairs]
    expected = naive_msm(G, bases, scalars)
    assert G.eq(pippenger(G, bases, scalars, window), expected)
    assert G.eq(msm(G, bases, scalars), expected)


def test_pippenger_matches_naive_bn254(bn254, rng):
    for G in (bn254.g1, bn254.g2):
        n = 20 if G is bn254.g1 else 6
        bases = [G.gen_mul(rng.randrange(1, G.order)) for _ in range(n)]
        scalars = [rng.randrange(G.order) for _ in range(n)]
        assert G.eq(pippenger(G, bases, scalars), naive_msm(G, bases, scalars))


def test_length_mismatch(mock):
    with pytest.raises(ValueError):
        msm(mock.g1, [mock.g1.generator()], [1, 2])
    with pytest.raises(ValueError):
        pippenger(mock.g1, [], [1])


def test_empty_is_identity(mock, bn254):
    for G in (mock.g1, bn254.g1):
        assert G.is_identity(msm(G, [], []))
