import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from groupstage.ratings import draw_group, pool_bounds, pot_intervals, rescale


def test_rescale_endpoints():
    assert rescale(1500, 1500, 2200, 0.7) == 1.0
    assert rescale(2200, 1500, 2200, 3.7581) == pytest.approx(1 + math.exp(3.7581), abs=1e-12)
    assert rescale(1850, 1500, 2200, 0.0) == pytest.approx(1.5)


def test_rescale_errors():
    with pytest.raises(ValueError, match="zero rating spread"):
        rescale(1800, 1800, 1800, 1.0)
    with pytest.raises(ValueError, match="rating out of pool range"):
        rescale(2300, 1500, 2200, 1.0)


@given(
    st.floats(1000, 3000), st.floats(1, 500), st.floats(-3, 6),
    st.floats(0, 1), st.floats(0, 1),
)
def test_rescale_order_preserving(lo, spread, gap, u, v):
    hi = lo + spread
    x, y = sorted((lo + u * spread, lo + v * spread))
    if x < y:
        assert rescale(x, lo, hi, gap) < rescale(y, lo, hi, gap)
    assert rescale(lo, lo, hi, gap) == 1.0


def test_pot_intervals_four_pots():
    part = pot_intervals(1, 2, 4)
    assert part.pot(1) == pytest.approx((1.75, 2.0))
    assert part.pot(4) == pytest.approx((1.0, 1.25))


def test_pot_widths_equal():
    part = pot_intervals(0, 3, 3)
    assert [hi - lo for lo, hi in part.intervals] == pytest.approx([1.0, 1.0, 1.0])


def test_pot_intervals_needs_two_pots():
    with pytest.raises(ValueError, match="at least two pots"):
        pot_intervals(0, 1, 1)


@given(st.floats(-100, 100), st.floats(0.01, 100), st.integers(2, 8))
def test_pot_partition_covers_range(a, width, n):
    b = a + width
    iv = pot_intervals(a, b, n).intervals
    assert iv[0][1] == b and iv[-1][0] == a
    for (lo1, hi1), (lo2, hi2) in zip(iv, iv[1:]):
        assert lo1 == hi2  # shared endpoint
    for lo, hi in iv:
        assert hi - lo == pytest.approx(width / n, abs=1e-12 * max(1, abs(a), abs(b)))


def test_draw_group_reproducible_and_in_pots():
    part = pot_intervals(*pool_bounds(3.7581), 4)
    a = draw_group(part, np.random.default_rng(5))
    b = draw_group(part, np.random.default_rng(5))
    assert a.tobytes() == b.tobytes()
    for x, (lo, hi) in zip(a, part.intervals):
        assert lo <= x <= hi
    assert list(a) == sorted(a, reverse=True)


def test_draw_group_pot_mean():
    part = pot_intervals(1, 2, 4)
    rng = np.random.default_rng(11)
    top = np.array([draw_group(part, rng)[0] for _ in range(100_000)])
    # uniform on [1.75, 2]: sd of the mean is 0.072/sqrt(1e5) ~ 2.3e-4
    assert top.mean() == pytest.approx(1.875, abs=0.002)
    assert top.min() > 1.75 and top.max() <= 2.0
