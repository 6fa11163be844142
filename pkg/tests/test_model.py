import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from excitasim import (
    ComplexAdmittance,
    DegenerateOwnAdmittance,
    GeneratorParams,
    GeneratorState,
    LineParams,
    MechanicalInput,
    Model,
    NetworkAdmittance,
    NoConvergence,
    ReducedState,
    SingularNetwork,
    admittances_from_line_and_load,
    derivatives_full,
    derivatives_reduced,
    find_equilibrium,
    invert_network,
    solve_network_full,
    solve_network_reduced,
)
from excitasim.errors import ConfigError
from excitasim.model import network_currents

finite = st.floats(-3, 3, allow_nan=False)
angle = st.floats(-math.pi, math.pi)


def bus(delta, v_b):
    # bus phasor in the rotor frame, shared by the series-line relations
    return v_b * math.sin(delta), v_b * math.cos(delta)


def full_residuals(delta, e_d_st, e_q_st, p, net, out):
    bd, bq = bus(delta, p.v_b)
    r6 = out.v_d + p.r_a * out.i_d - p.x_q_st * out.i_q - e_d_st
    r7 = out.v_q + p.r_a * out.i_q + p.x_d_st * out.i_d - e_q_st
    # I = Y1 v_t + Y2 v_bus
    r15 = net.g1 * out.v_d - net.b1 * out.v_q + net.g2 * bd - net.b2 * bq - out.i_d
    r16 = net.g1 * out.v_q + net.b1 * out.v_d + net.g2 * bq + net.b2 * bd - out.i_q
    return [r6, r7, r15, r16]


def random_net(rng):
    return NetworkAdmittance(*rng.uniform(-3, 3, size=4))


class TestAdmittances:
    def test_pure_line(self):
        net = admittances_from_line_and_load(ComplexAdmittance(0, -2.5), ComplexAdmittance())
        assert (net.g1, net.b1, net.g2, net.b2) == (0, -2.5, 0, 2.5)

    def test_zero_line(self):
        net = admittances_from_line_and_load(ComplexAdmittance(), ComplexAdmittance(0.3, -0.1))
        assert (net.g1, net.b1, net.g2, net.b2) == (0.3, -0.1, 0, 0)

    def test_line_from_impedance(self):
        y = LineParams(0.02, 0.4).admittance()
        # 1/(r + jx) = (r - jx)/(r^2 + x^2)
        assert y.g == pytest.approx(0.02 / 0.1604, rel=1e-14)
        assert y.b == pytest.approx(-0.4 / 0.1604, rel=1e-14)
        net = admittances_from_line_and_load(y, ComplexAdmittance())
        assert net.g1 == pytest.approx(0.12469, abs=1e-5)
        assert net.b1 == pytest.approx(-2.49377, abs=1e-5)
        assert net.g2 == -net.g1

    def test_line_validation(self):
        with pytest.raises(ConfigError):
            LineParams(0.0, 0.0)
        with pytest.raises(ConfigError):
            LineParams(-0.1, 0.4)


def test_params_invariants():
    with pytest.raises(ConfigError):
        GeneratorParams(x_d_t=2.0)
    with pytest.raises(ConfigError):
        GeneratorParams(T_d0_st=9.0)
    with pytest.raises(ConfigError):
        GeneratorParams(M=0.0)


class TestSolveNetworkFull:
    def test_open_circuit(self, params, open_net):
        out = solve_network_full(0.7, 0.2, 1.0, params, open_net)
        assert (out.i_d, out.i_q, out.v_d, out.v_q) == (0, 0, 0.2, 1.0)
        assert out.t_e == 0
        assert out.v_t == math.sqrt(1.04)

    @given(
        delta=angle,
        e_d=finite,
        e_q=finite,
        r_e=st.floats(0, 0.1),
        x_e=st.floats(0.1, 1.0),
    )
    def test_series_line_matches_direct_solve(self, delta, e_d, e_q, r_e, x_e):
        p = GeneratorParams()
        net = admittances_from_line_and_load(LineParams(r_e, x_e).admittance(), ComplexAdmittance())
        out = solve_network_full(delta, e_d, e_q, p, net)
        # stator equations + v_t = v_bus + Z_e I, unknowns (i_d, i_q, v_d, v_q)
        a = np.array([
            [p.r_a, -p.x_q_st, 1, 0],
            [p.x_d_st, p.r_a, 0, 1],
            [-r_e, x_e, 1, 0],
            [-x_e, -r_e, 0, 1],
        ])
        rhs = np.array([e_d, e_q, p.v_b * math.sin(delta), p.v_b * math.cos(delta)])
        ref = np.linalg.solve(a, rhs)
        np.testing.assert_allclose([out.i_d, out.i_q, out.v_d, out.v_q], ref, rtol=0, atol=1e-9)

    def test_random_residuals(self, params):
        rng = np.random.default_rng(1)
        for _ in range(500):
            net = random_net(rng)
            delta, e_d, e_q = rng.uniform(-3, 3, size=3)
            try:
                out = solve_network_full(delta, e_d, e_q, params, net)
            except SingularNetwork:
                continue
            res = full_residuals(delta, e_d, e_q, params, net, out)
            assert max(abs(r) for r in res) <= 1e-10 * max(1.0, abs(out.i_d), abs(out.i_q))
            assert out.v_t**2 - out.v_d**2 - out.v_q**2 == pytest.approx(0, abs=1e-14 * out.v_t**2 + 1e-300)
            assert out.t_e == pytest.approx(
                e_d * out.i_d + e_q * out.i_q - (params.x_d_st - params.x_q_st) * out.i_d * out.i_q
            )

    def test_singular(self):
        # with r_a = 0 and Y1 = j/x'' the stator and network cancel exactly
        p = GeneratorParams(r_a=0.0, x_d_st=0.25, x_q_st=0.25)
        net = NetworkAdmittance(0.0, 4.0, 0.0, 0.0)
        with pytest.raises(SingularNetwork):
            solve_network_full(0.1, 0.0, 1.0, p, net)


class TestSolveNetworkReduced:
    def test_open_circuit(self, params, open_net):
        out = solve_network_reduced(0.3, 1.0, params, open_net)
        assert (out.i_d, out.i_q, out.v_d, out.v_q, out.t_e, out.v_t) == (0, 0, 0, 1.0, 0, 1.0)

    def test_random_residuals(self, params):
        p = params
        rng = np.random.default_rng(2)
        for _ in range(500):
            net = random_net(rng)
            delta, e_q = rng.uniform(-3, 3, size=2)
            out = solve_network_reduced(delta, e_q, p, net)
            bd, bq = bus(delta, p.v_b)
            res = [
                out.v_d + p.r_a * out.i_d - p.x_q * out.i_q,
                out.v_q + p.r_a * out.i_q + p.x_d_t * out.i_d - e_q,
                net.g1 * out.v_d - net.b1 * out.v_q + net.g2 * bd - net.b2 * bq - out.i_d,
                net.g1 * out.v_q + net.b1 * out.v_d + net.g2 * bq + net.b2 * bd - out.i_q,
            ]
            assert max(abs(r) for r in res) <= 1e-10 * max(1.0, abs(out.i_d), abs(out.i_q))
            assert out.t_e == pytest.approx(e_q * out.i_q - (p.x_d_t - p.x_q) * out.i_d * out.i_q)

    def test_superposition_in_eq_and_vb(self, net):
        # for fixed delta the outputs are linear in (e_q', v_b) jointly
        delta, e_q = 0.9, 1.3
        p = GeneratorParams()
        only_e = solve_network_reduced(delta, e_q, GeneratorParams(v_b=1e-300), net)
        only_b = solve_network_reduced(delta, 0.0, p, net)
        both = solve_network_reduced(delta, e_q, p, net)
        for name in ("i_d", "i_q", "v_d", "v_q"):
            assert getattr(both, name) == pytest.approx(
                getattr(only_e, name) + getattr(only_b, name), abs=1e-12
            )


class TestInvertNetwork:
    def test_zero_current_gives_bus_voltage(self):
        net = NetworkAdmittance(g1=1.0, b1=0.0, g2=-1.0, b2=0.0)
        v_d, v_q = invert_network(0.0, 0.0, 0.0, net, 1.0)
        assert v_d == pytest.approx(0.0, abs=1e-15)
        assert v_q == pytest.approx(1.0, abs=1e-15)

    @settings(max_examples=300)
    @given(v_d=finite, v_q=finite, delta=angle, g=st.tuples(finite, finite, finite, finite))
    def test_round_trip(self, v_d, v_q, delta, g):
        net = NetworkAdmittance(*g)
        if net.g1**2 + net.b1**2 <= 1e-3:
            return
        i_d, i_q = network_currents(v_d, v_q, delta, net, 1.0)
        back = invert_network(i_d, i_q, delta, net, 1.0)
        assert back == pytest.approx((v_d, v_q), abs=1e-9)

    def test_degenerate(self):
        with pytest.raises(DegenerateOwnAdmittance):
            invert_network(0.1, 0.1, 0.0, NetworkAdmittance(0, 0, 1, 1), 1.0)


class TestDerivatives:
    def test_angle_rate(self, params, net):
        st_ = GeneratorState(0.5, 0.002, 1.0, 1.0, 0.1, 1.0)
        p = GeneratorParams(omega_0=314.159)
        d = derivatives_full(st_, MechanicalInput(0.8, 1.0), p, net)
        assert d[0] == pytest.approx(0.628318, abs=1e-12)

    def test_exciter(self, net):
        p = GeneratorParams(T_ex=0.05)
        st_ = GeneratorState(0.5, 0.0, 1.0, 1.0, 0.1, 1.0)
        d = derivatives_full(st_, MechanicalInput(0.8, 2.0), p, net)
        assert d[5] == pytest.approx(20.0, abs=1e-12)

    def test_reduced_zero_slip(self, params, net):
        d = derivatives_reduced(ReducedState(0.4, 0.0, 1.1, 1.5), MechanicalInput(0.5, 1.5), params, net)
        assert d[0] == 0.0

    def test_reduced_damping(self, net):
        p = GeneratorParams(k_d=10.0)
        x = ReducedState(0.4, 0.01, 1.1, 1.5)
        t_e = solve_network_reduced(x.delta, x.e_q_t, p, net).t_e
        d = derivatives_reduced(x, MechanicalInput(t_e, 1.5), p, net)
        assert d[1] == pytest.approx(-0.1 / p.M, rel=1e-12)

    @pytest.mark.parametrize("model", list(Model))
    def test_zero_at_equilibrium(self, params, net, model):
        state, inp = find_equilibrium(1.0, 0.8, params, net, model)
        f = derivatives_full if model is Model.FULL else derivatives_reduced
        assert np.max(np.abs(f(state, inp, params, net))) <= 1e-8


class TestEquilibrium:
    def test_open_circuit_reduced(self, params, open_net):
        state, inp = find_equilibrium(1.0, 0.0, params, open_net, Model.REDUCED)
        assert state.delta == 0.0
        assert state.e_q_t == pytest.approx(1.0, abs=1e-9)
        assert state.v_f == pytest.approx(1.0, abs=1e-9)
        assert inp.t_m == 0.0

    def test_open_circuit_torque_unreachable(self, params, open_net):
        with pytest.raises(NoConvergence):
            find_equilibrium(1.0, 0.5, params, open_net, Model.REDUCED)

    @pytest.mark.parametrize("model", list(Model))
    def test_default_point(self, params, net, model):
        state, inp = find_equilibrium(1.0, 0.8, params, net, model)
        out = (
            solve_network_full(state.delta, state.e_d_st, state.e_q_st, params, net)
            if model is Model.FULL
            else solve_network_reduced(state.delta, state.e_q_t, params, net)
        )
        assert out.v_t == pytest.approx(1.0, abs=1e-8)
        assert out.t_e == pytest.approx(0.8, abs=1e-8)
        assert state.s == 0.0
        assert inp.u == state.v_f
        assert inp.t_m == pytest.approx(out.t_e + params.k_d * state.s, abs=1e-12)
        assert 0 < state.delta < math.pi / 2

    def test_models_agree_in_steady_state(self, params, net):
        full, _ = find_equilibrium(1.0, 0.8, params, net, Model.FULL)
        red, _ = find_equilibrium(1.0, 0.8, params, net, Model.REDUCED)
        assert full.delta == pytest.approx(red.delta, abs=1e-8)
        assert full.e_q_t == pytest.approx(red.e_q_t, abs=1e-8)

    @pytest.mark.parametrize("vt", [0.0, -1.0])
    def test_degenerate_target(self, params, net, vt):
        with pytest.raises(NoConvergence):
            find_equilibrium(vt, 0.8, params, net)

    def test_infeasible_power(self, params, net):
        with pytest.raises(NoConvergence):
            find_equilibrium(1.0, 50.0, params, net, Model.REDUCED)
