"""Synchronous generator connected to a power system through a two-port network.

Two machine models are provided:

* ``Full``: 6th order (rotor angle, slip, e_q', e_q'', e_d'', field voltage).
* ``Reduced``: 4th order (rotor angle, slip, e_q', field voltage), obtained by
  neglecting stator transients and damper windings.

The connection network is a quadripole with own admittance ``Y1 = G1 + jB1``
seen at the generator terminals and transfer admittance ``Y2 = G2 + jB2`` to
the infinite bus, so that the stator current is ``I = Y1 v_t + Y2 v_b``.
All quantities are per unit, angles in radians, times in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (
    ConfigError,
    DegenerateOwnAdmittance,
    NoConvergence,
    SingularJacobian,
    SingularNetwork,
)

SINGULAR_TOL = 1e-12


class Model(str, Enum):
    FULL = "full"
    REDUCED = "reduced"


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


@dataclass(frozen=True)
class GeneratorParams:
    """Per-unit machine constants.

    The defaults are a typical round-rotor data set; they are illustrative,
    not measured values of any particular machine. ``x_q_t`` is carried for
    completeness but no equation of either model uses it.
    """

    x_d: float = 1.81
    x_q: float = 1.76
    x_d_t: float = 0.3
    x_q_t: float = 0.65
    x_d_st: float = 0.23
    x_q_st: float = 0.25
    T_d0_t: float = 8.0
    T_d0_st: float = 0.03
    T_q0_st: float = 0.07
    T_ex: float = 0.05
    M: float = 7.0
    k_d: float = 10.0
    r_a: float = 0.003
    omega_0: float = 2.0 * math.pi * 50.0
    v_b: float = 1.0

    def __post_init__(self) -> None:
        for f in fields(self):
            _require(math.isfinite(getattr(self, f.name)), f"{f.name} must be finite")
        _require(self.x_d >= self.x_d_t >= self.x_d_st > 0, "x_d >= x_d_t >= x_d_st > 0")
        _require(self.x_q >= self.x_q_st > 0, "x_q >= x_q_st > 0")
        _require(self.T_d0_t > self.T_d0_st > 0, "T_d0_t > T_d0_st > 0")
        _require(self.T_q0_st > 0, "T_q0_st > 0")
        _require(self.T_ex > 0, "T_ex > 0")
        _require(self.M > 0, "M > 0")
        _require(self.omega_0 > 0, "omega_0 > 0")
        _require(self.v_b > 0, "v_b > 0")
        _require(self.r_a >= 0, "r_a >= 0")


@dataclass(frozen=True)
class GeneratorState:
    delta: float
    s: float
    e_q_t: float
    e_q_st: float
    e_d_st: float
    v_f: float

    def as_array(self) -> np.ndarray:
        return np.array([self.delta, self.s, self.e_q_t, self.e_q_st, self.e_d_st, self.v_f])

    @classmethod
    def from_array(cls, x: Sequence[float]) -> "GeneratorState":
        return cls(*(float(v) for v in x))


@dataclass(frozen=True)
class ReducedState:
    delta: float
    s: float
    e_q_t: float
    v_f: float

    def as_array(self) -> np.ndarray:
        return np.array([self.delta, self.s, self.e_q_t, self.v_f])

    @classmethod
    def from_array(cls, x: Sequence[float]) -> "ReducedState":
        return cls(*(float(v) for v in x))


STATE_TYPES = {Model.FULL: GeneratorState, Model.REDUCED: ReducedState}


@dataclass(frozen=True)
class ComplexAdmittance:
    g: float = 0.0
    b: float = 0.0

    def __post_init__(self) -> None:
        _require(math.isfinite(self.g) and math.isfinite(self.b), "admittance must be finite")


@dataclass(frozen=True)
class LineParams:
    r_e: float = 0.02
    x_e: float = 0.4

    def __post_init__(self) -> None:
        _require(self.r_e >= 0, "r_e >= 0")
        _require(self.r_e**2 + self.x_e**2 > 0, "r_e^2 + x_e^2 > 0")

    def admittance(self) -> ComplexAdmittance:
        y = 1.0 / complex(self.r_e, self.x_e)
        return ComplexAdmittance(y.real, y.imag)


@dataclass(frozen=True)
class NetworkAdmittance:
    """Quadripole admittances.

    The usual remark that susceptances are negative for inductive branches is
    not enforced: with ``Y2 = -Y_L`` an inductive line gives ``b2 > 0``.
    """

    g1: float
    b1: float
    g2: float
    b2: float

    def __post_init__(self) -> None:
        for name in ("g1", "b1", "g2", "b2"):
            _require(math.isfinite(getattr(self, name)), f"{name} must be finite")


@dataclass(frozen=True)
class AlgebraicOutputs:
    i_d: float
    i_q: float
    v_d: float
    v_q: float
    t_e: float
    v_t: float


@dataclass(frozen=True)
class MechanicalInput:
    t_m: float
    u: float


def admittances_from_line_and_load(
    y_line: ComplexAdmittance, y_load: ComplexAdmittance
) -> NetworkAdmittance:
    """Collapse line + local consumer into the (Y1, Y2) pair: Y1 = YL + YC, Y2 = -YL."""
    return NetworkAdmittance(
        g1=y_line.g + y_load.g,
        b1=y_line.b + y_load.b,
        g2=-y_line.g,
        b2=-y_line.b,
    )


def _solve_stator(
    e_d: float,
    e_q: float,
    r_a: float,
    x_d: float,
    x_q: float,
    delta: float,
    v_b: float,
    net: NetworkAdmittance,
) -> tuple[float, float, float, float]:
    # Stator:  e_d = v_d + r_a i_d - x_q i_q,  e_q = v_q + r_a i_q + x_d i_d
    # Network: i_d = G1 v_d - B1 v_q + cd,     i_q = G1 v_q + B1 v_d + cq
    # Eliminating (v_d, v_q) leaves a 2x2 system whose determinant equals
    # det(I + Y Z) of the 4x4 formulation.
    g1, b1 = net.g1, net.b1
    sd, cs = math.sin(delta), math.cos(delta)
    cd = net.g2 * v_b * sd - net.b2 * v_b * cs
    cq = net.g2 * v_b * cs + net.b2 * v_b * sd
    a11 = 1.0 + g1 * r_a - b1 * x_d
    a12 = -g1 * x_q - b1 * r_a
    a21 = g1 * x_d + b1 * r_a
    a22 = 1.0 + g1 * r_a - b1 * x_q
    det = a11 * a22 - a12 * a21
    if abs(det) < SINGULAR_TOL:
        raise SingularNetwork(f"stator/network determinant {det:.3e}")
    r1 = g1 * e_d - b1 * e_q + cd
    r2 = g1 * e_q + b1 * e_d + cq
    i_d = (r1 * a22 - a12 * r2) / det
    i_q = (a11 * r2 - a21 * r1) / det
    v_d = e_d - r_a * i_d + x_q * i_q
    v_q = e_q - r_a * i_q - x_d * i_d
    return i_d, i_q, v_d, v_q


def solve_network_full(
    delta: float,
    e_d_st: float,
    e_q_st: float,
    params: GeneratorParams,
    net: NetworkAdmittance,
) -> AlgebraicOutputs:
    p = params
    i_d, i_q, v_d, v_q = _solve_stator(
        e_d_st, e_q_st, p.r_a, p.x_d_st, p.x_q_st, delta, p.v_b, net
    )
    t_e = e_d_st * i_d + e_q_st * i_q - (p.x_d_st - p.x_q_st) * i_d * i_q
    return AlgebraicOutputs(i_d, i_q, v_d, v_q, t_e, math.sqrt(v_d * v_d + v_q * v_q))


def solve_network_reduced(
    delta: float,
    e_q_t: float,
    params: GeneratorParams,
    net: NetworkAdmittance,
) -> AlgebraicOutputs:
    p = params
    i_d, i_q, v_d, v_q = _solve_stator(0.0, e_q_t, p.r_a, p.x_d_t, p.x_q, delta, p.v_b, net)
    t_e = e_q_t * i_q - (p.x_d_t - p.x_q) * i_d * i_q
    return AlgebraicOutputs(i_d, i_q, v_d, v_q, t_e, math.sqrt(v_d * v_d + v_q * v_q))


def network_currents(
    v_d: float, v_q: float, delta: float, net: NetworkAdmittance, v_b: float
) -> tuple[float, float]:
    """Project I = Y1 v_t + Y2 v_b onto the d and q axes.

    The bus phasor in the rotor frame is ``v_b (sin delta + j cos delta)``,
    the same one the series-line relations use, so that a pure line gives
    ``v_t = v_b + Z_e I`` and electric torque rises with rotor angle.
    """
    sd, cs = math.sin(delta), math.cos(delta)
    i_d = net.g1 * v_d - net.b1 * v_q + net.g2 * v_b * sd - net.b2 * v_b * cs
    i_q = net.g1 * v_q + net.b1 * v_d + net.g2 * v_b * cs + net.b2 * v_b * sd
    return i_d, i_q


def invert_network(
    i_d: float, i_q: float, delta: float, net: NetworkAdmittance, v_b: float
) -> tuple[float, float]:
    """Terminal voltages from stator currents, the inverse of `network_currents`."""
    g1, b1, g2, b2 = net.g1, net.b1, net.g2, net.b2
    den = b1 * b1 + g1 * g1
    if den <= SINGULAR_TOL:
        raise DegenerateOwnAdmittance(f"G1^2 + B1^2 = {den:.3e}")
    sd, cs = math.sin(delta), math.cos(delta)
    k1 = g1 * g2 + b1 * b2
    k2 = b1 * g2 - b2 * g1
    v_d = (i_d * g1 + i_q * b1 - k1 * v_b * sd - k2 * v_b * cs) / den
    v_q = (i_q * g1 - i_d * b1 + k2 * v_b * sd - k1 * v_b * cs) / den
    return v_d, v_q


def rhs_full(
    x: Sequence[float], t_m: float, u: float, p: GeneratorParams, net: NetworkAdmittance
) -> list[float]:
    """Time derivatives of the 6th-order model on a plain state sequence."""
    delta, s, e_q_t, e_q_st, e_d_st, v_f = x
    i_d, i_q, _, _ = _solve_stator(e_d_st, e_q_st, p.r_a, p.x_d_st, p.x_q_st, delta, p.v_b, net)
    t_e = e_d_st * i_d + e_q_st * i_q - (p.x_d_st - p.x_q_st) * i_d * i_q
    return [
        p.omega_0 * s,
        (-p.k_d * s + t_m - t_e) / p.M,
        (v_f - (p.x_d - p.x_d_t) * i_d - e_q_t) / p.T_d0_t,
        (e_q_t - (p.x_d_t - p.x_d_st) * i_d - e_q_st) / p.T_d0_st,
        ((p.x_q - p.x_q_st) * i_q - e_d_st) / p.T_q0_st,
        (u - v_f) / p.T_ex,
    ]


def rhs_reduced(
    x: Sequence[float], t_m: float, u: float, p: GeneratorParams, net: NetworkAdmittance
) -> list[float]:
    """Time derivatives of the 4th-order model on a plain state sequence."""
    delta, s, e_q_t, v_f = x
    i_d, i_q, _, _ = _solve_stator(0.0, e_q_t, p.r_a, p.x_d_t, p.x_q, delta, p.v_b, net)
    t_e = e_q_t * i_q - (p.x_d_t - p.x_q) * i_d * i_q
    return [
        p.omega_0 * s,
        (-p.k_d * s + t_m - t_e) / p.M,
        (v_f - (p.x_d - p.x_d_t) * i_d - e_q_t) / p.T_d0_t,
        (u - v_f) / p.T_ex,
    ]


RHS = {Model.FULL: rhs_full, Model.REDUCED: rhs_reduced}


def outputs(
    x: Sequence[float], model: Model, params: GeneratorParams, net: NetworkAdmittance
) -> AlgebraicOutputs:
    """Algebraic outputs for a plain state sequence of either model."""
    if model is Model.FULL:
        return solve_network_full(x[0], x[4], x[3], params, net)
    return solve_network_reduced(x[0], x[2], params, net)


def derivatives_full(
    state: GeneratorState,
    inp: MechanicalInput,
    params: GeneratorParams,
    net: NetworkAdmittance,
) -> np.ndarray:
    x = (state.delta, state.s, state.e_q_t, state.e_q_st, state.e_d_st, state.v_f)
    return np.array(rhs_full(x, inp.t_m, inp.u, params, net))


def derivatives_reduced(
    state: ReducedState,
    inp: MechanicalInput,
    params: GeneratorParams,
    net: NetworkAdmittance,
) -> np.ndarray:
    x = (state.delta, state.s, state.e_q_t, state.v_f)
    return np.array(rhs_reduced(x, inp.t_m, inp.u, params, net))


# --- operating point ---------------------------------------------------------

NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-10
NEWTON_FD_STEP = 1e-6
NEWTON_MAX_HALVINGS = 8


def _newton(fun, z0: np.ndarray) -> np.ndarray:
    """Damped Newton with a central-difference Jacobian."""
    z = np.array(z0, dtype=float)
    r = fun(z)
    n = len(z)
    for _ in range(NEWTON_MAX_ITER):
        if np.max(np.abs(r)) <= NEWTON_TOL:
            return z
        jac = np.empty((len(r), n))
        for j in range(n):
            dz = np.zeros(n)
            dz[j] = NEWTON_FD_STEP
            jac[:, j] = (fun(z + dz) - fun(z - dz)) / (2 * NEWTON_FD_STEP)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobian("non-finite Newton step")
        norm = np.max(np.abs(r))
        lam = 1.0
        for _ in range(NEWTON_MAX_HALVINGS):
            try:
                r_new = fun(z + lam * step)
            except SingularNetwork:
                r_new = None
            if r_new is not None and np.max(np.abs(r_new)) < norm:
                break
            lam *= 0.5
        else:
            # no halving reduced the residual: take the shortest step tried
            r_new = fun(z + lam * step)
        z = z + lam * step
        r = r_new
    if np.max(np.abs(r)) <= NEWTON_TOL:
        return z
    raise NoConvergence(f"residual {np.max(np.abs(r)):.3e} after {NEWTON_MAX_ITER} iterations")


def _angle_decoupled(net: NetworkAdmittance) -> bool:
    # with no transfer admittance the bus voltage never reaches the stator
    return net.g2 == 0.0 and net.b2 == 0.0


def find_equilibrium(
    target_vt: float,
    target_te: float,
    params: GeneratorParams,
    net: NetworkAdmittance,
    model: Model = Model.FULL,
) -> tuple[GeneratorState | ReducedState, MechanicalInput]:
    """Steady state delivering terminal voltage `target_vt` and torque `target_te`.

    Slip is zero, the exciter sits at ``v_f = u`` and the turbine torque
    balances the electric torque. When the rotor angle is electrically
    decoupled from the bus (no transfer admittance) it is fixed at 0 and the
    torque target must be 0.
    """
    model = Model(model)
    if not (target_vt > 0 and math.isfinite(target_vt)):
        raise NoConvergence(f"terminal voltage target must be positive, got {target_vt}")
    p = params
    decoupled = _angle_decoupled(net)
    if decoupled and target_te != 0.0:
        raise NoConvergence("torque target unreachable: rotor decoupled from the bus")

    if model is Model.FULL:
        # unknowns: delta, e_q', e_q'', e_d'', v_f
        def residual(z: np.ndarray) -> np.ndarray:
            delta, e_q_t, e_q_st, e_d_st, v_f = z
            alg = solve_network_full(delta, e_d_st, e_q_st, p, net)
            d = rhs_full((delta, 0.0, e_q_t, e_q_st, e_d_st, v_f), alg.t_e, v_f, p, net)
            res = [d[2], d[3], d[4], alg.v_t - target_vt]
            if not decoupled:
                res.append(alg.t_e - target_te)
            return np.array(res)

        z0 = [0.5, target_vt, target_vt, target_vt, target_vt]
    else:
        # unknowns: delta, e_q', v_f
        def residual(z: np.ndarray) -> np.ndarray:
            delta, e_q_t, v_f = z
            alg = solve_network_reduced(delta, e_q_t, p, net)
            d = rhs_reduced((delta, 0.0, e_q_t, v_f), alg.t_e, v_f, p, net)
            res = [d[2], alg.v_t - target_vt]
            if not decoupled:
                res.append(alg.t_e - target_te)
            return np.array(res)

        z0 = [0.5, target_vt, target_vt]

    if decoupled:
        z = np.concatenate([[0.0], _newton(lambda w: residual(np.concatenate([[0.0], w])), z0[1:])])
    else:
        z = _newton(residual, z0)

    if model is Model.FULL:
        delta, e_q_t, e_q_st, e_d_st, v_f = (float(v) for v in z)
        state = GeneratorState(delta, 0.0, e_q_t, e_q_st, e_d_st, v_f)
        t_e = solve_network_full(delta, e_d_st, e_q_st, p, net).t_e
    else:
        delta, e_q_t, v_f = (float(v) for v in z)
        state = ReducedState(delta, 0.0, e_q_t, v_f)
        t_e = solve_network_reduced(delta, e_q_t, p, net).t_e
    # slip is zero, so the damping term drops out of the torque balance
    return state, MechanicalInput(t_m=t_e, u=v_f)
