import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxns import P_STAR, PhysicalParams, ValidationError, derive_constants

positive = st.floats(min_value=0.05, max_value=20.0)


def test_unit_parameters_derived_values():
    p = P_STAR
    assert p.b == 1.0
    assert p.omega0 == -0.5
    assert p.c_wave == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert p.T_star == pytest.approx(8.885765876, abs=1e-9)


def test_prefix_names_offending_field():
    raw = dict(P_STAR.raw(), kappa=-1.0)
    with pytest.raises(ValidationError) as exc:
        derive_constants(raw, prefix="params.")
    assert exc.value.field == "params.kappa"


@pytest.mark.parametrize("bad", [{"mu": 0.0}, {"a": float("nan")}, {"gamma": 0.5}, {"rho_s": "1"}, {"kappa": True}])
def test_rejects_invalid_raw_values(bad):
    with pytest.raises(ValidationError):
        derive_constants(dict(P_STAR.raw(), **bad))


def test_derived_fields_are_not_accepted():
    with pytest.raises(ValidationError, match="omega0"):
        derive_constants(dict(P_STAR.raw(), omega0=-0.5))


def test_missing_field():
    raw = P_STAR.raw()
    del raw["mu"]
    with pytest.raises(ValidationError, match="mu"):
        derive_constants(raw)


def test_from_b_reproduces_b():
    p = PhysicalParams.from_b(2.5, 0.7, 1.1, 0.3)
    assert p.b == pytest.approx(2.5, rel=1e-14)


@given(positive, positive, st.floats(min_value=1.0, max_value=3.0), positive, positive)
def test_accumulation_point_relation(rho_s, a, gamma, mu, kappa):
    p = PhysicalParams(rho_s, a, gamma, mu, kappa)
    assert -1.0 / kappa < p.omega0 < 0.0
    scale = p.b * p.rho_s / p.kappa
    assert abs(p.omega0_residual()) <= 1e-12 * scale
    assert p.c_wave**2 == pytest.approx(p.b * p.rho_s + p.mu / (p.kappa * p.rho_s), rel=1e-14)
