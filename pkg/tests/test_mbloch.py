import numpy as np
import pytest

from magnonbs import (
    ConfigError,
    ControlSegment,
    ControlTimeline,
    MediumParams,
    PulseEnvelope,
    SimulationConfig,
    dsp_project,
    evolve,
    overlap,
    storage_efficiency,
    store_magnon,
    v_group,
)

OD30 = MediumParams(od=30.0)
PULSE = PulseEnvelope(fwhm=1.5, t_center=3.2)


def constant_drive(rabi, t_end=12.0, label="beamsplit"):
    return ControlTimeline((ControlSegment(0.0, t_end, rabi, label),))


def test_vacuum_propagation_is_a_pure_delay():
    # Empty cell: the emitted field is the input shifted by the transit
    # time L / c_eff; the advection step moves exactly one cell per step,
    # so the shape is preserved to interpolation accuracy.
    medium = MediumParams(od=0.0)
    pulse = PulseEnvelope(fwhm=1.5, t_center=5.0)
    traj = evolve(
        medium, constant_drive(0.0, 10.0), SimulationConfig(t_end=10.0, n_z=160),
        pulse=pulse,
    )
    assert traj.final_state.emitted_norm == pytest.approx(
        traj.input_norm, rel=1e-6
    )
    expected = pulse.amplitude(traj.times - 1.0 / medium.c_eff)
    num = abs(np.vdot(expected, traj.emitted)) ** 2
    den = np.sum(np.abs(expected) ** 2) * np.sum(np.abs(traj.emitted) ** 2)
    assert num / den > 0.9999
    assert traj.final_state.loss_accum < 1e-12


def test_eit_transparency_at_strong_drive():
    traj = evolve(
        OD30, constant_drive(20.0), SimulationConfig(t_end=12.0, n_z=160),
        pulse=PULSE,
    )
    transmission = traj.final_state.emitted_norm / traj.input_norm
    assert transmission >= 0.99


def test_group_delay_matches_polariton_velocity():
    traj = evolve(
        OD30, constant_drive(20.0), SimulationConfig(t_end=12.0, n_z=160),
        pulse=PULSE,
    )
    w = np.abs(traj.emitted) ** 2
    centroid = float(np.sum(traj.times * w) / np.sum(w))
    delay = centroid - PULSE.t_center
    assert delay == pytest.approx(1.0 / v_group(OD30, 20.0), rel=0.05)


def test_evolve_is_linear_in_the_input_amplitude():
    config = SimulationConfig(t_end=8.0, n_z=96)
    tl = constant_drive(13.0, 8.0)
    full = evolve(OD30, tl, config, pulse=PULSE)
    quarter = evolve(
        OD30, tl, config,
        pulse=PulseEnvelope(fwhm=1.5, t_center=3.2, amplitude_norm=0.25),
    )
    assert np.allclose(quarter.emitted, 0.5 * full.emitted, atol=1e-13)


def test_two_port_run_is_the_sum_of_single_port_runs():
    config = SimulationConfig(t_end=6.0, n_z=96)
    tl = constant_drive(13.0, 6.0)
    stored = store_magnon(OD30, PULSE, 5.0, n_z=96)
    probe = PulseEnvelope(fwhm=1.5, t_center=0.6)

    run_a = evolve(OD30, tl, config, initial=stored.state)
    run_b = evolve(OD30, tl, config, pulse=probe)
    run_ab = evolve(OD30, tl, config, pulse=probe, initial=stored.state)

    assert np.allclose(run_ab.emitted, run_a.emitted + run_b.emitted, atol=1e-12)
    assert np.allclose(
        run_ab.final_state.sigma12,
        run_a.final_state.sigma12 + run_b.final_state.sigma12,
        atol=1e-12,
    )


def test_bookkeeping_closes_through_storage():
    stored = store_magnon(OD30, PULSE, 5.0)
    traj = stored.trajectory
    assert abs(traj.final_state.bookkeeping_residual()) < 1e-12
    # Ledger loss against the independent quadrature of 2 gamma31 |P|^2.
    fin = traj.final_state
    assert traj.loss_quad == pytest.approx(fin.loss_accum, rel=1e-4)
    # Once injection has finished the split plus the emitted ledger
    # carries the full input norm at any later sample time.
    photon, magnon, excited, loss = traj.norm_split_at(7.0)
    emitted = traj.emitted_norm_between(0.0, 7.0)
    assert photon + magnon + excited + loss + emitted == pytest.approx(
        traj.input_norm, abs=1e-4
    )


def test_storage_efficiency_has_an_interior_maximum():
    effs = {
        rabi: store_magnon(OD30, PULSE, rabi).efficiency
        for rabi in (2.0, 5.0, 12.0)
    }
    assert effs[5.0] > effs[2.0]
    assert effs[5.0] > effs[12.0]


def test_storage_efficiency_frozen_values_and_depth_ordering():
    low = store_magnon(OD30, PULSE, 5.0).efficiency
    high = store_magnon(MediumParams(od=150.0), PULSE, 11.0, n_z=240).efficiency
    assert low == pytest.approx(0.73013, abs=2e-3)
    assert high == pytest.approx(0.87413, abs=2e-3)
    assert high > low


def test_store_magnon_returns_a_pure_spin_wave():
    stored = store_magnon(OD30, PULSE, 5.0)
    assert np.all(stored.state.e_field == 0)
    assert np.all(stored.state.sigma13 == 0)
    assert 0.0 < stored.efficiency < 1.0
    assert stored.residual >= 0.0
    assert stored.state.magnon_norm == pytest.approx(
        stored.efficiency * stored.trajectory.input_norm, rel=1e-12
    )


def test_storage_efficiency_requires_a_storage_segment():
    tl = constant_drive(5.0, 4.0, label="storage")
    traj = evolve(OD30, tl, SimulationConfig(t_end=6.0, n_z=96), pulse=PULSE)
    eff = storage_efficiency(traj, tl)
    assert 0.0 <= eff <= 1.0
    with pytest.raises(ConfigError):
        storage_efficiency(traj, constant_drive(5.0, 4.0, label="readout"))


def test_v_group_limits():
    assert v_group(OD30, 0.0) == 0.0
    assert v_group(OD30, 20.0) == pytest.approx(12.0 * 400.0 / 1120.0)
    empty = MediumParams(od=0.0)
    assert v_group(empty, 7.0) == pytest.approx(empty.c_eff)


def test_dsp_projection_is_a_rotation():
    stored = store_magnon(OD30, PULSE, 5.0)
    state = stored.state
    for rabi in (0.0, 3.0, 40.0):
        dark, bright = dsp_project(state, rabi, OD30)
        assert np.allclose(
            np.abs(dark) ** 2 + np.abs(bright) ** 2,
            np.abs(state.e_field) ** 2 + np.abs(state.sigma12) ** 2,
            atol=1e-12,
        )
    # Control off: the dark polariton is the (negated) spin wave.
    dark, _ = dsp_project(state, 0.0, OD30)
    assert np.allclose(dark, -state.sigma12, atol=1e-12)


def test_dsp_projection_varies_continuously_along_a_ramp():
    stored = store_magnon(OD30, PULSE, 5.0)
    sqrt_dz = np.sqrt(stored.state.dz)
    rabis = np.linspace(0.0, 20.0, 101)
    darks = [dsp_project(stored.state, w, OD30)[0] for w in rabis]
    steps = [
        np.linalg.norm(a - b) * sqrt_dz for a, b in zip(darks, darks[1:])
    ]
    assert max(steps) < 0.01


def test_overlap_basics_and_guards():
    a = np.array([1.0, 0.0], dtype=complex)
    b = np.array([0.0, 1.0], dtype=complex)
    assert overlap(a, 2j * a) == pytest.approx(1.0)
    assert overlap(a, b) == 0.0
    with pytest.raises(ConfigError):
        overlap(a, np.ones(3, dtype=complex))
    with pytest.raises(ConfigError):
        overlap(a, np.zeros(2, dtype=complex))


def test_simulation_config_guards():
    with pytest.raises(ConfigError):
        SimulationConfig(t_end=0.0)
    with pytest.raises(ConfigError):
        SimulationConfig(t_end=1.0, record_every=0)
