from fractions import Fraction as F

from hypothesis import strategies as st

from pruneprice.model import Instance


def small_fractions(max_num=12, max_den=6, min_value=0):
    return st.builds(F, st.integers(min_value, max_num), st.integers(1, max_den))


@st.composite
def instances(draw, max_n=6, max_den=6):
    """Normalized instances with small denominators (ties are common)."""
    n = draw(st.integers(1, max_n))
    budget = draw(small_fractions(max_num=8, max_den=3, min_value=1))
    values = draw(st.lists(small_fractions(min_value=1), min_size=n, max_size=n))
    costs = draw(st.lists(small_fractions(max_num=8), min_size=n, max_size=n))
    return Instance.build(budget, values, [min(c, budget) for c in costs])
