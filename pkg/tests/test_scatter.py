import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lambdaswap.errors import ConfigurationError, IntegrationError
from lambdaswap.pulse import Grid, PulseSpec, default_grid, envelope_norm, make_gaussian
from lambdaswap.scatter import (AtomParams, integrate_coherence, overlap, scatter_pulse,
                                write_scattering_csv)

from oracles import gaussian_coherence, gaussian_drive, quadrature_coherence


def gaussian_setup(length, atom, omega=0.0, center=0.0):
    spec = PulseSpec(length, omega, center)
    grid = default_grid(spec, atom.gamma_bar)
    return make_gaussian(spec, grid), grid


# -- oracles -----------------------------------------------------------------

def test_oracles_agree():
    length, gb, omega, center = 3.0, 0.8, -0.7, -4.0
    drive = gaussian_drive(length, omega, center)
    for t in (-2.0, 4.0, 9.5, 20.0):
        ref = quadrature_coherence(drive, t, -center - 8 * length, gb)
        assert abs(gaussian_coherence([t], length, gb, omega, center)[0] - ref) < 1e-11


def test_linear_scheme_is_exact_for_piecewise_linear_drive():
    atom = AtomParams(1.0, 1.0)
    grid = Grid(-40.0, 15.0, 551, t_final=40.0)  # dr = 0.1
    f = make_gaussian(PulseSpec(2.5, detuning=0.6), grid)
    trace = integrate_coherence(f, atom, grid, method="linear")
    tau, drive = -grid.r[::-1], f[::-1]

    def interp(u):
        return np.interp(u, tau, drive.real) + 1j * np.interp(u, tau, drive.imag)

    for idx in (30, 150, 170, 200, 300, 500):
        t = trace.times[idx]
        # one quadrature per linear segment so every kink is a panel edge
        ref = sum(quadrature_coherence(interp, b, a, atom.gamma_bar) * np.exp(-(t - b))
                  for a, b in zip(tau[:idx], tau[1:idx + 1]))
        assert abs(trace.s_values[idx] - ref) < 1e-10


@pytest.mark.parametrize("length, omega, center", [(2.5, 0.0, 0.0), (10.0, -1.0, -5.0),
                                                   (1.0, 0.4, 0.0), (20.0, -1.0, 0.0)])
def test_cubic_scheme_matches_closed_form(length, omega, center):
    atom = AtomParams(1.0, 1.0)
    f, grid = gaussian_setup(length, atom, omega, center)
    trace = integrate_coherence(f, atom, grid)
    ref = gaussian_coherence(trace.times, length, atom.gamma_bar, omega, center)
    assert np.max(np.abs(trace.s_values - ref)) < 1e-8


def test_cubic_scheme_matches_quadrature_for_custom_envelope():
    # antisymmetric two-lobe envelope with a detuned carrier
    atom = AtomParams(1.0, 1.0)
    spec = PulseSpec(3.0, center=-2.0)
    grid = default_grid(spec, atom.gamma_bar)

    def shape(r):
        x = r + 2.0
        return x * np.exp(-(x**2) / 9.0 + 0.3j * x)
    f = shape(grid.r)
    scale = 1 / np.sqrt(envelope_norm(f, grid))
    f = f * scale
    trace = integrate_coherence(f, atom, grid)
    for idx in np.linspace(0, trace.times.size - 1, 9).astype(int)[1:]:
        t = trace.times[idx]
        ref = quadrature_coherence(lambda u: scale * shape(-u), t, trace.times[0], 1.0)
        assert abs(trace.s_values[idx] - ref) < 1e-8


def test_constant_drive_reaches_fixed_point():
    atom = AtomParams(1.0, 1.0)
    grid = Grid(-40.0, 5.0, 4501, t_final=40.0)
    c = 0.3 - 0.2j
    f = np.where(grid.r <= 0, c, 0.0)
    trace = integrate_coherence(f, atom, grid, method="linear", epsilon=np.inf)
    assert trace.s_values[0] == 0
    assert abs(trace.s_values[-1] - c / atom.gamma_bar) < 1e-12


def _tracking_error(length):
    atom = AtomParams(1.0, 1.0)
    f, grid = gaussian_setup(length, atom)
    s = integrate_coherence(f, atom, grid).s_values
    target = f[::-1] * 2 / (atom.gamma_h + atom.gamma_v)
    return np.max(np.abs(s - target)) / np.max(np.abs(s))


@pytest.mark.xfail(strict=True, reason="the first-order lag f'/gamma_bar is 8.6% of the peak "
                   "at l=10, so a 5% tracking bound cannot hold there")
def test_adiabatic_tracking_five_percent_at_l10():
    assert _tracking_error(10.0) <= 0.05


@pytest.mark.parametrize("length", [10.0, 20.0, 40.0])
def test_adiabatic_tracking_error_is_first_order_lag(length):
    # max |d/dtau f| / max |f| for exp(-tau^2/l^2) is sqrt(2) exp(-1/2) / l
    lag = np.sqrt(2) * np.exp(-0.5) / length
    err = _tracking_error(length)
    assert err == pytest.approx(lag, rel=0.1)
    if length >= 20:
        assert err <= 0.05


def test_trace_starts_at_rest_and_decays():
    atom = AtomParams(1.0, 0.5)
    f, grid = gaussian_setup(4.0, atom)
    trace = integrate_coherence(f, atom, grid)
    s = trace.s_values
    assert s[0] == 0
    assert abs(s[-1]) < 1e-6 * np.max(np.abs(s))


def test_short_time_window_is_an_integration_error():
    atom = AtomParams(1.0, 1.0)
    grid = Grid(-12.0, 30.0, 4201, t_final=12.0)
    f = make_gaussian(PulseSpec(2.5), grid)
    with pytest.raises(IntegrationError, match="not de-excited"):
        integrate_coherence(f, atom, grid)


def test_pulse_already_at_atom_is_rejected():
    atom = AtomParams(1.0, 1.0)
    grid = Grid(-40.0, 10.0, 2001, t_final=40.0)
    f = make_gaussian(PulseSpec(2.5), grid)  # tail at r=10 is ~1e-7
    with pytest.raises(ConfigurationError, match="widen"):
        integrate_coherence(f, atom, grid)


def test_coarse_grid_is_rejected():
    atom = AtomParams(1.0, 1.0)
    grid = Grid(-60.0, 30.0, 91, t_final=60.0)
    with pytest.raises(ConfigurationError, match="resolve"):
        integrate_coherence(make_gaussian(PulseSpec(5.0), grid), atom, grid)


@pytest.mark.parametrize("gamma_h, gamma_v", [(0.0, 1.0), (1.0, -2.0), (np.inf, 1.0)])
def test_atom_rates_must_be_positive(gamma_h, gamma_v):
    with pytest.raises(ConfigurationError):
        AtomParams(gamma_h, gamma_v)


# -- output wavepackets ------------------------------------------------------

def test_long_pulse_swaps_cleanly():
    atom = AtomParams(1.0, 1.0)
    f, grid = gaussian_setup(10.0, atom)
    res = scatter_pulse(f, atom, grid)
    mismatch = envelope_norm(res.g2 - res.g1, res.dx)
    assert mismatch <= 0.02
    assert res.p_no_transition <= 0.01


def test_no_v_channel_means_no_transition():
    atom = AtomParams(1.0, 1e-12)
    f, grid = gaussian_setup(5.0, atom)
    res = scatter_pulse(f, atom, grid)
    assert res.p_transition <= 1e-10
    assert res.p_no_transition == pytest.approx(1.0, abs=1e-6)


def _peak(x, y):
    i = int(np.argmax(y))
    # parabolic refinement through the three samples around the maximum
    a, b, c = y[i - 1], y[i], y[i + 1]
    return x[i] + 0.5 * (a - c) / (a - 2 * b + c) * (x[1] - x[0])


def test_reemission_delay_short_pulse():
    atom = AtomParams(1.0, 1.0)
    f, grid = gaussian_setup(2.5, atom)
    res = scatter_pulse(f, atom, grid)
    delay = _peak(res.x, np.abs(res.g2)) - _peak(res.x, np.abs(res.g1))
    assert 0.3 <= delay * atom.gamma_h <= 3.0


def test_result_invariants_hold():
    atom = AtomParams(1.0, 0.37)
    f, grid = gaussian_setup(3.0, atom, omega=0.8, center=-7.0)
    res = scatter_pulse(f, atom, grid)
    assert 0 <= res.p_transition <= 1 and 0 <= res.p_no_transition <= 1
    assert abs(res.p_transition + res.p_no_transition - 1) < 1e-6
    assert abs(res.p_no_transition_v - res.p_no_transition) < 1e-6
    assert abs(res.g1_norm - 1) < 1e-8
    np.testing.assert_allclose(res.r, res.t_final - res.x)


@settings(max_examples=30, deadline=None)
@given(length=st.floats(0.5, 25.0), ratio=st.floats(0.05, 5.0), omega=st.floats(-3.0, 3.0),
       center=st.floats(-20.0, 0.0))
def test_probability_conservation(length, ratio, omega, center):
    atom = AtomParams(1.0, ratio)
    f, grid = gaussian_setup(length, atom, omega, center)
    res = scatter_pulse(f, atom, grid, check=False)
    assert abs(res.p_transition + res.p_no_transition - 1) < 1e-6
    assert abs(res.p_transition + res.p_no_transition_v - 1) < 1e-6
    assert abs(res.p_no_transition - res.p_no_transition_v) < 1e-6


@pytest.mark.parametrize("length, ratio, omega", [(2.5, 1.0, 0.0), (5.0, 0.4, -1.0),
                                                  (1.0, 2.0, 0.5)])
def test_grid_refinement_convergence(length, ratio, omega):
    atom = AtomParams(1.0, ratio)
    f, grid = gaussian_setup(length, atom, omega)
    fine = grid.refined(2)
    spec = PulseSpec(length, omega)
    p = scatter_pulse(f, atom, grid).p_transition
    p_fine = scatter_pulse(make_gaussian(spec, fine), atom, fine).p_transition
    assert abs(p - p_fine) < 1e-6


def test_rate_exchange_swaps_g3_and_g4():
    atom = AtomParams(1.0, 0.6)
    f, grid = gaussian_setup(4.0, atom, omega=-0.5)
    a = scatter_pulse(f, atom, grid)
    b = scatter_pulse(f, atom.swapped(), grid)
    np.testing.assert_array_equal(a.g1, b.g1)
    np.testing.assert_array_equal(a.g2, b.g2)
    np.testing.assert_array_equal(a.g3, b.g4)
    np.testing.assert_array_equal(a.g4, b.g3)


# -- overlap -----------------------------------------------------------------

def test_overlap_examples():
    atom = AtomParams(1.0, 1.0)
    f, grid = gaussian_setup(5.0, atom, omega=0.3)
    res = scatter_pulse(f, atom, grid)
    assert overlap(res.g1, res.g1, res.dx) == pytest.approx(1.0, abs=1e-8)
    assert overlap(f, f * np.exp(1j * np.pi / 2), grid) == pytest.approx(1j, abs=1e-10)
    ab = overlap(res.g2, res.g3, res.dx)
    assert overlap(res.g3, res.g2, res.dx) == pytest.approx(np.conj(ab), abs=1e-15)


def test_overlap_long_pulse_swap():
    atom = AtomParams(1.0, 1.0)
    f, grid = gaussian_setup(20.0, atom)
    res = scatter_pulse(f, atom, grid)
    assert overlap(res.g2, res.g1, res.dx).real >= 0.97


def test_overlap_length_mismatch():
    with pytest.raises(ConfigurationError):
        overlap(np.ones(3), np.ones(4), 0.1)


def test_csv_export(tmp_path):
    atom = AtomParams(1.0, 1.0)
    f, grid = gaussian_setup(2.5, atom)
    res = scatter_pulse(f, atom, grid)
    path = tmp_path / "g.csv"
    write_scattering_csv(res, path, {"l": 2.5})
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# l=2.5")
    assert lines[1].split(",")[:3] == ["x", "re_g1", "im_g1"]
    data = np.loadtxt(path, delimiter=",", skiprows=2)
    assert data.shape == (res.x.size, 17)
    np.testing.assert_allclose(data[:, 3] + 1j * data[:, 4], res.g2, atol=1e-12)
