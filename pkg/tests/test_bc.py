import numpy as np
import pytest

from peqlab import PhysParams, make_grid
from peqlab.bc import (
    TEMPERATURE_BC,
    VELOCITY_BC,
    W_BC,
    BcKind,
    FieldBcs,
    fill_ghosts,
    robin_ghost_factor,
)
from peqlab.grid import INTERIOR


@pytest.fixture
def setup():
    p = PhysParams(lx=1.0, l=1.0, h=1.0, alpha=0.7, rt2=1.3)
    g = make_grid(p, 6, 5, 4)
    return p, g


def test_zero_field_all_kinds(setup):
    p, g = setup
    for bcs in (VELOCITY_BC, TEMPERATURE_BC, W_BC):
        f = g.zeros()
        fill_ghosts(f, bcs, p, g)
        assert np.all(f == 0.0)


def test_dirichlet_reflection(setup):
    p, g = setup
    f = g.zeros()
    f[INTERIOR] = 1.0
    fill_ghosts(f, VELOCITY_BC, p, g)
    assert np.all(f[:, 0, 1:-1][1:-1] == -1.0)
    assert np.all(f[0, 1:-1, 1:-1] == -1.0)
    # stress-free top/bottom mirror
    assert np.all(f[1:-1, 1:-1, 0] == 1.0)
    assert np.all(f[1:-1, 1:-1, -1] == 1.0)


def test_robin_ghost_reproduces_analytic_extension(setup):
    """T(z) = 1 - alpha*rt2*z satisfies (1/rt2) dT/dz + alpha T = 0 at z=0."""
    p, g = setup
    f = g.zeros()
    zc = g.z(np.arange(g.nz))
    profile = 1.0 - p.alpha * p.rt2 * zc
    f[INTERIOR] = profile[None, None, :]
    fill_ghosts(f, TEMPERATURE_BC, p, g)
    z_ghost = -p.h + (g.nz + 0.5) * g.dz
    expected = 1.0 - p.alpha * p.rt2 * z_ghost
    got = f[1:-1, 1:-1, -1]
    assert np.abs(got - expected).max() <= 1e-12 * abs(expected)


def test_robin_factor_matches_half_cell_realization(setup):
    p, g = setup
    c = 0.5 * p.alpha * p.rt2 * g.dz
    assert robin_ghost_factor(p, g) == pytest.approx((1 - c) / (1 + c), rel=1e-15)


def test_fill_twice_idempotent(setup):
    p, g = setup
    rng = np.random.default_rng(7)
    for bcs in (VELOCITY_BC, TEMPERATURE_BC, W_BC):
        f = g.zeros()
        f[...] = rng.standard_normal(f.shape)  # garbage ghosts on purpose
        once = fill_ghosts(f.copy(), bcs, p, g)
        twice = fill_ghosts(once.copy(), bcs, p, g)
        assert np.array_equal(once, twice)


def test_unknown_kind_rejected(setup):
    p, g = setup
    bad = FieldBcs(
        BcKind.ROBIN_TOP, BcKind.NEUMANN, BcKind.NEUMANN,
        BcKind.NEUMANN, BcKind.NEUMANN, BcKind.NEUMANN,
    )
    f = g.zeros()
    with pytest.raises(ValueError):
        fill_ghosts(f, bad, p, g)
