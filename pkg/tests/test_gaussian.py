import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import normal_cdf_mp, normal_pdf_mp
from weightcraft.gaussian import erf, normal_cdf, normal_pdf


@given(st.floats(-8, 8), st.floats(1e-3, 1e3))
def test_cdf_matches_high_precision_erf(x, var):
    assert abs(float(normal_cdf(x, var)) - normal_cdf_mp(x, var)) <= 1e-12


@given(st.floats(-8, 8), st.floats(1e-3, 1e3))
def test_pdf_matches_high_precision(x, var):
    ref = normal_pdf_mp(x, var)
    assert float(normal_pdf(x, var)) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_lower_tail_keeps_relative_precision():
    ref = normal_cdf_mp(-30.0, 1.0)
    assert float(normal_cdf(-30.0, 1.0)) == pytest.approx(ref, rel=1e-12)


def test_erf_known_values():
    assert erf(0.0) == 0.0
    assert float(erf(1.0)) == pytest.approx(0.8427007929497149, abs=1e-15)


def test_standard_normal_at_two():
    assert float(normal_cdf(2.0, 1.0)) == pytest.approx(0.9772498680518208, abs=1e-13)
