import math

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from tvspec.spaces import SparseVector

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
scalars = st.builds(complex, finite, finite)


@st.composite
def sparse_vectors(draw, max_index=15, max_size=5):
    idx = draw(st.lists(st.integers(1, max_index), min_size=1, max_size=max_size, unique=True))
    return SparseVector({k: draw(scalars) for k in idx})


def close(a, b, rtol=1e-12, atol=1e-12):
    return abs(a - b) <= atol + rtol * max(abs(a), abs(b))


def isinf(v):
    return math.isinf(v)
