import math

import numpy as np
import pytest
import scipy.integrate

from maxns import P_STAR, GeometryError, ValidationError
from maxns.beam import (
    beam_fields,
    beam_grid_size,
    beam_residual,
    build_beam,
    check_geometry,
    concentration,
    observability_experiment,
    residual_components,
)
from maxns.state import grid

P = P_STAR
O1 = (2.2, 2.8)
O2 = (0.0, math.pi)


def test_amplitude_closure_is_exact():
    beam = build_beam(64, 1.2, 0.5, P)
    xs = grid(2049)
    for t in (0.0, 0.7):
        g1, h1, l1, _ = residual_components(beam, t, xs)
        assert np.abs(g1).max() < 1e-15 and np.abs(h1).max() < 1e-15 and np.abs(l1).max() < 1e-14
        assert np.abs(beam.ode_residual(t, xs)).max() < 1e-14


def test_residual_decays_like_one_over_k():
    vals = []
    for k in (64, 256):
        beam = build_beam(k, 1.2, 0.5, P)
        vals.append(k * beam_residual(beam, 0.0, grid(beam_grid_size(k))))
    assert vals[1] == pytest.approx(vals[0], rel=0.1)


def test_sigma_concentrates_at_x0():
    k = 1024
    beam = build_beam(k, 1.2, 0.5, P)
    mass, tail = concentration(beam, 1.0, grid(beam_grid_size(k)))
    assert mass == pytest.approx(math.sqrt(math.pi) * beam.eta(1.0, 1.2) ** 2, rel=0.02)
    assert tail < 1e-3 * mass


def test_profiles_match_finite_difference_derivative():
    # sigma = k^{-3/4} d/dx (e^{ik phi} zeta)
    beam = build_beam(64, 1.2, 0.5, P)
    xs = grid(20001)
    sigma = beam_fields(beam, 0.0, xs).rho
    z = beam.bump.value(xs)
    e = np.exp(1j * 64 * beam.phase(xs))
    fd = np.gradient(e * z, xs, edge_order=2) * 64**-0.75
    assert np.abs(sigma - fd).max() < 1e-3 * np.abs(sigma).max()


def test_wall_traces_vanish():
    beam = build_beam(64, 1.2, 0.5, P)
    f = beam_fields(beam, 0.3, grid(4097))
    assert f.u[0] == 0 and f.u[-1] == 0


def test_geometry_checks():
    with pytest.raises(GeometryError):
        build_beam(64, 0.3, 0.5, P)
    beam = build_beam(64, 1.2, 0.5, P)
    with pytest.raises(GeometryError, match="O1"):
        check_geometry(beam, (1.0, 1.5), O2, O1)
    with pytest.raises(GeometryError, match="O3"):
        check_geometry(beam, O1, O2, (1.6, 2.0))
    with pytest.raises(ValidationError):
        build_beam(0, 1.2, 0.5, P)


def test_observability_ratio_grows():
    rows = [observability_experiment(build_beam(k, 1.2, 0.5, P), O1, O2, O1, 1.0, P) for k in (32, 128)]
    assert rows[1]["ratio"] > 2.0 * rows[0]["ratio"]
    assert rows[0]["trace_max"] == 0.0
