import math

import numpy as np
import pytest

from gibq.construction import (
    delta_ceiling,
    make_bump,
    omega_frequencies,
    perturbed_data,
    sample_base_data,
    schedule,
    schedule_from_N,
)
from gibq.errors import LatticeMismatchError
from gibq.flow import InitialPair
from gibq.lattice import FrequencyLattice
from gibq.norms import NormSpec, norm


# ----------------------------------------------------------------------
# schedule arithmetic
# ----------------------------------------------------------------------

def test_schedule_raw_formula_arithmetic():
    # s=-1, k=2, delta=1/2, n=2: N=16, R=4, T=16^(-3/8)
    params = schedule(2, 2, -1.0, delta_hint=0.5, separation_floor=0)
    assert params.N == 16
    assert params.R == pytest.approx(4.0)
    assert params.T == pytest.approx(16 ** (-0.375), rel=1e-12)
    assert params.T == pytest.approx(0.3536, abs=5e-5)


def test_delta_ceiling_value():
    assert delta_ceiling(-0.5, 2) == pytest.approx(1 / 3)
    assert delta_ceiling(-3.0, 2) == 1.0


def test_schedule_default_delta_is_half_ceiling():
    params = schedule(2, 2, -0.75)
    assert params.delta == pytest.approx(0.25)


def test_schedule_rejects_nonnegative_s():
    with pytest.raises(ValueError):
        schedule(1, 2, 0.0)


def test_schedule_rejects_bad_delta_with_interval():
    with pytest.raises(ValueError) as err:
        schedule(1, 2, -0.5, delta_hint=0.9)
    assert "0, 0.333" in str(err.value).replace("(", "").replace(" ", "")[:30] \
        or "interval" in str(err.value)


def test_schedule_enforces_cube_separation():
    params = schedule(1, 2, -0.75, delta_hint=0.25)
    assert params.N >= 64 * params.A
    assert params.adjustments  # the raise was logged


def test_schedule_keeps_horizon_below_one_over_n():
    for n in (1, 2, 3):
        params = schedule(n, 2, -0.75, delta_hint=0.25)
        assert 0 < params.T < 1.0 / n


def test_schedule_first_rung_conditions_logged():
    from gibq.harness import check_conditions

    params = schedule(1, 2, -0.75, delta_hint=0.25)
    ledger = check_conditions(params, None)
    assert len(ledger.conditions) == 7  # six conditions, (iii) split in two
    assert ledger.condition("vi: cube separation").holds


def test_schedule_from_N_nominal_index():
    params = schedule_from_N(256, 2, -0.75, delta_hint=0.25)
    assert params.n == 2  # 256**(0.125) = 2
    assert params.R == pytest.approx(16.0)
    assert params.T == pytest.approx(256 ** (-0.3125), rel=1e-12)


# ----------------------------------------------------------------------
# bump construction
# ----------------------------------------------------------------------

def test_omega_support_enumeration():
    omega = omega_frequencies(256, 10)
    assert omega.size == 44
    expected = set()
    for eta in (-512, -256, 256, 512):
        expected |= {eta + r for r in range(-5, 6)}
    assert set(int(x) for x in omega) == expected


def test_bump_amplitude_and_cardinality():
    params = schedule_from_N(256, 2, -0.75, delta_hint=0.25)
    bump = make_bump(params)
    assert bump.phi.u0.nnz == 4 * (params.A + 1)
    assert np.allclose(bump.phi.u0.c, params.R)
    assert bump.phi.u1.nnz == 0
    assert bump.phi.is_hermitian()


def test_bump_vanishes_off_omega():
    params = schedule_from_N(256, 2, -0.75, delta_hint=0.25)
    bump = make_bump(params)
    assert bump.phi.u0.get(0) == 0
    assert bump.phi.u0.get(100) == 0
    assert bump.phi.u0.get(256 + 6) == 0


def test_bump_cubes_disjoint_at_scheduled_parameters():
    for N in (256, 1024, 4096):
        omega = omega_frequencies(N, 10)
        assert np.unique(omega).size == omega.size


def test_bump_even_symmetry():
    params = schedule_from_N(256, 2, -0.75, delta_hint=0.25)
    phi = make_bump(params).phi.u0
    for xi in phi.xi:
        assert phi.get(int(-xi)) == phi.get(int(xi))


# ----------------------------------------------------------------------
# base data
# ----------------------------------------------------------------------

def test_base_data_zero_amplitude(lattice):
    pair = sample_base_data(1, 0.25, 0.0, lattice)
    assert pair.u0.nnz == 0 and pair.u1.nnz == 0


def test_base_data_deterministic(lattice):
    a = sample_base_data(11, 0.25, 0.5, lattice)
    b = sample_base_data(11, 0.25, 0.5, lattice)
    assert np.array_equal(a.u0.c, b.u0.c)
    assert np.array_equal(a.u1.c, b.u1.c)
    c = sample_base_data(12, 0.25, 0.5, lattice)
    assert not np.array_equal(a.u0.c, c.u0.c)


def test_base_data_hermitian_and_decaying(lattice):
    pair = sample_base_data(3, 0.3, 1.0, lattice)
    assert pair.is_hermitian()
    mags = np.abs(pair.u0.c)
    assert mags.max() <= 4.0  # 1.0 amplitude with gaussian tails


def test_base_data_small_next_to_bump():
    params = schedule_from_N(1024, 2, -0.75, delta_hint=0.25)
    lat = params.lattice()
    base = sample_base_data(0, 0.25, 0.5, lat)
    margin = base.fl1() / (params.R * params.A)
    assert margin < 0.1  # condition on the base Wiener norm, logged per run


# ----------------------------------------------------------------------
# perturbation
# ----------------------------------------------------------------------

def test_perturbed_data_zero_base():
    params = schedule_from_N(256, 2, -0.75, delta_hint=0.25)
    lat = params.lattice()
    bump = make_bump(params, lat)
    out = perturbed_data(InitialPair.zero(lat), bump)
    assert out.u0.support() == bump.phi.u0.support()


def test_perturbation_norm_equals_bump_norm():
    params = schedule_from_N(256, 2, -0.75, delta_hint=0.25)
    lat = params.lattice()
    bump = make_bump(params, lat)
    base = sample_base_data(2, 0.25, 0.5, lat)
    pert = perturbed_data(base, bump)
    diff = InitialPair(pert.u0 - base.u0, pert.u1 - base.u1)
    spec = NormSpec("sobolev_pair", params.s)
    assert norm(diff, spec) == pytest.approx(norm(bump.phi, spec), rel=1e-12)


def test_perturbed_data_lattice_mismatch():
    params = schedule_from_N(256, 2, -0.75, delta_hint=0.25)
    bump = make_bump(params)
    other = FrequencyLattice(period=2.0, cutoff=1 << 22)
    with pytest.raises(LatticeMismatchError):
        perturbed_data(InitialPair.zero(other), bump)


def test_perturbation_weighted_sup_bound_over_sweep():
    for N in (256, 1024, 4096):
        params = schedule_from_N(N, 2, -0.75, delta_hint=0.25)
        bump = make_bump(params)
        w = norm(bump.phi, NormSpec("w_s2inf", params.s))
        hs_one = norm(bump.phi.u0, NormSpec("sobolev", params.s))
        assert w <= (1 + 2 * math.sqrt(params.A + 1)) * hs_one


# ----------------------------------------------------------------------
# closed-form scaling laws
# ----------------------------------------------------------------------

def _loglog_slope(xs, ys):
    return np.polyfit(np.log(xs), np.log(ys), 1)[0]


def test_scaling_laws_over_wide_sweep():
    Ns = [2**e for e in range(6, 14)]
    s, delta = -0.75, 0.25
    hs_vals, fl_vals = [], []
    for N in Ns:
        params = schedule_from_N(N, 2, s, delta_hint=delta)
        bump = make_bump(params)
        hs_vals.append(norm(bump.phi, NormSpec("sobolev_pair", s)))
        fl_vals.append(norm(bump.phi, NormSpec("wiener_pair")))
    # || phi ||_{H^s} ~ R N^s sqrt(A) = N^(-delta) x const
    assert _loglog_slope(Ns, hs_vals) == pytest.approx(s + 0.5, abs=0.02)
    assert _loglog_slope(Ns, fl_vals) == pytest.approx(-s - delta, abs=0.02)
