import math

import pytest

import msimg as m


@pytest.fixture
def vertical_line():
    """a(t) = (0, t) on [1, 3]."""
    return m.Line(1.0, angle=math.pi / 2, offset=(0, 0),
                  interval=m.TimeInterval(1, 3))


@pytest.fixture
def fast_diagonal():
    """a(t) = (2 sqrt2 t, 2 sqrt2 t) on [1, 2]; speed 4 beats the wave speed."""
    return m.Line(4.0, angle=math.pi / 4, offset=(0, 0),
                  interval=m.TimeInterval(1, 2))


@pytest.fixture
def upper_arc():
    """a(t) = (cos t, sin t) on [0, pi]."""
    return m.Arc(center=(0, 0), interval=m.TimeInterval(0, math.pi))


@pytest.fixture
def wide_clockwise_arc():
    """a(t) = 2 sqrt2 (cos t, -sin t) on [pi/4, 3pi/4]; h' < 0 throughout
    for x_hat = (1, 0)."""
    return m.Arc(center=(0, 0), radius=2 * math.sqrt(2), orientation=-1,
                 interval=m.TimeInterval(math.pi / 4, 3 * math.pi / 4))


@pytest.fixture
def broken_line():
    """(-t+3, -t+3) on [0, 1] then (t+1, -t+3) on [1, 2]."""
    return m.PiecewiseLinear([0, 1, 2], [(3, 3), (2, 2), (3, 1)])


@pytest.fixture
def axis_line_3d():
    """a(t) = (0, 0, t) on [0, 1]."""
    return m.Line(1.0, axis=(0, 0, 1), offset=(0, 0, 0),
                  interval=m.TimeInterval(0, 1))


@pytest.fixture
def default_band():
    return m.FrequencyBand(3 * math.pi, 18)
