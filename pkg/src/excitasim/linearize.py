"""Small-signal model of the reduced generator and its discrete transfer function.

The pipeline is

    operating point -> (A, B, C) by central differences
                    -> zero-order-hold discretization (matrix exponential)
                    -> H(z^-1) = z^-1 (b0 + b1 z^-1 + b2 z^-2 + b3 z^-3)
                                 / (1 + a1 z^-1 + a2 z^-2 + a3 z^-3 + a4 z^-4)

with states (delta, s, e_q', v_f), input u and output the terminal-voltage
deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    GeneratorParams,
    MechanicalInput,
    Model,
    NetworkAdmittance,
    ReducedState,
    find_equilibrium,
    rhs_reduced,
    solve_network_reduced,
)
from .integrate import rk4_step

FD_STEP = 1e-6
EXPM_TOL = 1e-12
DEFAULT_TS = 0.02


@dataclass(frozen=True)
class ContinuousLinearModel:
    a: np.ndarray
    b: np.ndarray
    c_row: np.ndarray
    d: float = 0.0


@dataclass(frozen=True)
class DiscreteTF:
    """Coefficients of ``z^-delay B(z^-1) / A(z^-1)``; the leading 1 of A is implicit."""

    b_coeffs: tuple[float, ...]
    a_coeffs: tuple[float, ...]
    ts: float
    delay: int = 1

    def simulate(self, u: np.ndarray) -> np.ndarray:
        """Output of the difference equation for input samples `u` from rest."""
        u = np.asarray(u, dtype=float)
        y = np.zeros(len(u))
        for k in range(len(u)):
            acc = 0.0
            for i, b in enumerate(self.b_coeffs):
                n = k - self.delay - i
                if n >= 0:
                    acc += b * u[n]
            for i, a in enumerate(self.a_coeffs, start=1):
                if k - i >= 0:
                    acc -= a * y[k - i]
            y[k] = acc
        return y

    def impulse_response(self, n: int) -> np.ndarray:
        u = np.zeros(n)
        u[0] = 1.0
        return self.simulate(u)

    def step_response(self, n: int, amplitude: float = 1.0) -> np.ndarray:
        return self.simulate(np.full(n, amplitude))

    def poles(self) -> np.ndarray:
        return np.roots(np.concatenate([[1.0], self.a_coeffs]))


def _state_tuple(state: ReducedState) -> list[float]:
    return [state.delta, state.s, state.e_q_t, state.v_f]


def jacobian_reduced(
    eq_state: ReducedState,
    eq_input: MechanicalInput,
    params: GeneratorParams,
    net: NetworkAdmittance,
    step: float = FD_STEP,
) -> ContinuousLinearModel:
    """Linearize the 4th-order model at an operating point.

    Rotor-angle kinematics and the exciter are linear, so their rows (and the
    input column) are filled in exactly; the slip and e_q' rows and the
    output row come from central differences with a step of
    ``step * max(1, |x_j|)``.
    """
    p = params
    x0 = _state_tuple(eq_state)
    n = len(x0)
    a = np.zeros((n, n))
    c_row = np.zeros(n)
    for j in range(n):
        dx = step * max(1.0, abs(x0[j]))
        xp = list(x0)
        xm = list(x0)
        xp[j] += dx
        xm[j] -= dx
        fp = rhs_reduced(xp, eq_input.t_m, eq_input.u, p, net)
        fm = rhs_reduced(xm, eq_input.t_m, eq_input.u, p, net)
        for i in (1, 2):
            a[i, j] = (fp[i] - fm[i]) / (2 * dx)
        vp = solve_network_reduced(xp[0], xp[2], p, net).v_t
        vm = solve_network_reduced(xm[0], xm[2], p, net).v_t
        c_row[j] = (vp - vm) / (2 * dx)
    a[0, :] = (0.0, p.omega_0, 0.0, 0.0)
    a[3, :] = (0.0, 0.0, 0.0, -1.0 / p.T_ex)
    b = np.array([0.0, 0.0, 0.0, 1.0 / p.T_ex])
    return ContinuousLinearModel(a=a, b=b, c_row=c_row, d=0.0)


def expm(m: np.ndarray, tol: float = EXPM_TOL) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a truncated Taylor series."""
    m = np.asarray(m, dtype=float)
    norm = np.linalg.norm(m, 1)
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    x = m / (2.0**squarings)
    result = np.eye(len(m))
    term = np.eye(len(m))
    for k in range(1, 60):
        term = term @ x / k
        result = result + term
        if np.linalg.norm(term, 1) <= tol * np.linalg.norm(result, 1):
            break
    for _ in range(squarings):
        result = result @ result
    return result


def discretize_zoh(clm: ContinuousLinearModel, ts: float) -> tuple[np.ndarray, np.ndarray]:
    if not ts > 0:
        raise ValueError("ts must be positive")
    a = np.atleast_2d(np.asarray(clm.a, dtype=float))
    b = np.asarray(clm.b, dtype=float).reshape(-1)
    n = len(a)
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = a
    aug[:n, n] = b
    e = expm(aug * ts)
    return e[:n, :n], e[:n, n].copy()


def tf_from_state_space(
    a_d: np.ndarray, b_d: np.ndarray, c_row: np.ndarray, ts: float = DEFAULT_TS
) -> DiscreteTF:
    """Transfer function of ``x+ = A x + B u, y = C x`` via Leverrier-Faddeev.

    With ``adj(zI - A) = sum_k N_k z^(n-1-k)`` and
    ``det(zI - A) = z^n + a_1 z^(n-1) + ... + a_n``, dividing through by
    ``z^n`` gives numerator taps ``C N_k B`` behind one sample of delay.
    """
    a_d = np.atleast_2d(np.asarray(a_d, dtype=float))
    b_d = np.asarray(b_d, dtype=float).reshape(-1)
    c_row = np.asarray(c_row, dtype=float).reshape(-1)
    n = len(a_d)
    eye = np.eye(n)
    nk = eye
    a_coeffs = [-float(np.trace(a_d))]
    b_coeffs = [float(c_row @ nk @ b_d)]
    for k in range(1, n):
        nk = a_d @ nk + a_coeffs[-1] * eye
        b_coeffs.append(float(c_row @ nk @ b_d))
        a_coeffs.append(-float(np.trace(a_d @ nk)) / (k + 1))
    return DiscreteTF(tuple(b_coeffs), tuple(a_coeffs), ts, delay=1)


def linearize_operating_point(
    params: GeneratorParams,
    net: NetworkAdmittance,
    target_vt: float = 1.0,
    target_te: float = 0.8,
    ts: float = DEFAULT_TS,
) -> DiscreteTF:
    state, inp = find_equilibrium(target_vt, target_te, params, net, Model.REDUCED)
    clm = jacobian_reduced(state, inp, params, net)
    a_d, b_d = discretize_zoh(clm, ts)
    return tf_from_state_space(a_d, b_d, clm.c_row, ts)


@dataclass(frozen=True)
class SmallSignalReport:
    max_abs: float
    rms: float
    peak: float

    @property
    def relative_max(self) -> float:
        return self.max_abs / self.peak if self.peak > 0 else 0.0


def validate_small_signal(
    tf: DiscreteTF,
    params: GeneratorParams,
    net: NetworkAdmittance,
    target_vt: float = 1.0,
    target_te: float = 0.8,
    amplitude: float = 1e-3,
    duration: float = 10.0,
    h: float = 0.001,
) -> SmallSignalReport:
    """Compare the transfer-function step response with the nonlinear reduced model.

    Both responses are sampled every ``tf.ts`` for `duration` seconds after a
    step of `amplitude` in the excitation input; `peak` is the largest
    nonlinear output deviation.
    """
    state, inp = find_equilibrium(target_vt, target_te, params, net, Model.REDUCED)
    x = _state_tuple(state)
    v_t0 = solve_network_reduced(x[0], x[2], params, net).v_t
    sps = round(tf.ts / h)
    n = math.floor(duration / tf.ts + 1e-9) + 1
    actual = np.zeros(n)
    u = inp.u + amplitude
    for k in range(n):
        actual[k] = solve_network_reduced(x[0], x[2], params, net).v_t - v_t0
        if k == n - 1:
            break
        for _ in range(sps):
            x = rk4_step(rhs_reduced, x, h, inp.t_m, u, params, net)
    predicted = tf.step_response(n, amplitude)
    diff = np.abs(predicted - actual)
    return SmallSignalReport(
        max_abs=float(diff.max()),
        rms=float(np.sqrt(np.mean(diff**2))),
        peak=float(np.abs(actual).max()),
    )
