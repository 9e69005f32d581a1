"""Local stability of the taut-cable closed loop around hover.

Builds the one-step map x_{k+1} = Φ(x_k) of the sampled closed loop (control
held over a step, RK4 plant) with the desired-direction memory appended to
the state, differentiates it numerically at hover and prints the spectral
radius and the dominant continuous-time poles log(λ)/dt.

Usage: python scripts/linear_stability.py [--kp-att 10] [--kv-att 1] [--scale-load 1]
"""

import argparse

import numpy as np

from dqcargo import default_gains, default_params
from dqcargo.control import ControllerMemory, LoadReference, TautGains, taut_control_step
from dqcargo.dqmath import DualVector, quat_rotate
from dqcargo.dynamics import E3, TautState, taut_derivative
from dqcargo.sim import renormalize, rk4_step

G = 9.81


def step_map(params, gains, dt):
    ref = LoadReference(np.zeros(3), np.zeros(3), np.zeros(3))
    zero = np.zeros(3)

    def phi(z):
        s = TautState.from_array(z[:TautState.SIZE])
        out, mem = taut_control_step(params, s, ref, gains, G, ControllerMemory(z[TautState.SIZE:]), dt)

        def f(x):
            st = TautState.from_array(x)
            return taut_derivative(params, st, quat_rotate(st.uav_attitude, out.thrust_body), out.torque_body,
                                   zero, zero, G).to_array()

        nxt = renormalize(TautState.from_array(rk4_step(f, s.to_array(), dt)))
        return np.concatenate([nxt.to_array(), mem.prev_qc_des])

    return phi


def spectrum(params, gains, dt=0.01, h=1e-7):
    hover = TautState(DualVector(E3.copy(), np.zeros(3)), DualVector(np.zeros(3), np.zeros(3)),
                      np.array([1.0, 0.0, 0.0, 0.0]), np.zeros(3))
    z0 = np.concatenate([hover.to_array(), E3])
    phi = step_map(params, gains, dt)
    jac = np.column_stack([(phi(z0 + h * e) - phi(z0 - h * e)) / (2 * h) for e in np.eye(len(z0))])
    eig = np.linalg.eigvals(jac)
    return eig[np.argsort(-np.abs(eig))]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kp-att", type=float, default=None, help="attitude proportional gain (default: table value)")
    ap.add_argument("--kv-att", type=float, default=None, help="attitude rate gain (default: table value)")
    ap.add_argument("--scale-load", type=float, default=1.0, help="multiplier on all load gains")
    ap.add_argument("--dt", type=float, default=0.01)
    args = ap.parse_args()

    _, g = default_gains()
    kp_att = g.kp_att if args.kp_att is None else np.full(3, args.kp_att)
    kv_att = g.kv_att if args.kv_att is None else np.full(3, args.kv_att)
    k = args.scale_load
    gains = TautGains(DualVector(k * g.kp_load.real, k * g.kp_load.dual),
                      DualVector(k * g.kv_load.real, k * g.kv_load.dual), kp_att, kv_att)
    eig = spectrum(default_params(), gains, args.dt)
    print(f"spectral radius of the sampled closed loop: {np.abs(eig[0]):.6f}")
    print("dominant poles (continuous-time equivalent, 1/s):")
    seen = []
    for lam in eig[:8]:
        s = np.log(lam) / args.dt
        if any(np.isclose(s, t, atol=1e-6) for t in seen):
            continue
        seen.append(np.conj(s))
        seen.append(s)
        print(f"  |λ| = {abs(lam):.6f}   s = {s.real:+.4f} {s.imag:+.4f}j")
    print("unstable" if np.abs(eig[0]) > 1 + 1e-9 else "stable")


if __name__ == "__main__":
    main()
