"""Independent oracles for the reference values frozen into the test suite.

Every closed-form constant asserted in tests/ is recomputed here from the
defining formulas using mpmath quadrature and sympy symbolics only -- no
cpelab code is imported.  Run this script to regenerate the numbers; the
tests embed the printed 17-digit literals.

    python3 tools/oracles.py
"""

import mpmath as mp
import sympy as sp

mp.mp.dps = 30

TWO_PI = 2 * mp.pi


def phi_example_a():
    """phi for sigma=1, v=(cos(pi z), 0), p=1, gamma=1.4, mu=1, lam=0.

    Defining formula: phi = div_h(v~) + (1/(gamma p)) (v~.grad_h p
    - (gamma-1) Q~), with Q = S_h:grad_h v + mu |dz v|^2.
    Here only the Q~ term survives: Q = pi^2 sin^2(pi z).
    """
    gamma = mp.mpf("1.4")
    Q = lambda z: mp.pi**2 * mp.sin(mp.pi * z) ** 2
    Qbar = mp.quad(Q, [0, 1])
    # phi(z) = -(gamma-1)/gamma * (Q(z) - Qbar); fit amplitude of cos(2 pi z)
    phi = lambda z: -(gamma - 1) / gamma * (Q(z) - Qbar)
    # amplitude = 2 * int_0^1 phi(z) cos(2 pi z) dz
    amp = 2 * mp.quad(lambda z: phi(z) * mp.cos(2 * mp.pi * z), [0, 1])
    closed = mp.pi**2 / 7
    assert mp.almosteq(amp, closed, rel_eps=mp.mpf("1e-25"))
    # residual against pure cos(2 pi z) shape
    resid = max(abs(phi(z) - amp * mp.cos(2 * mp.pi * z)) for z in mp.linspace(0, 1, 41))
    return amp, resid


def w_example_a(phi_amp):
    """w = nu dz(sigma) - int_0^z phi dz'; sigma const => pure integral term."""
    w_amp_closed = -mp.pi / 14  # -(pi^2/7)/(2 pi)
    w = lambda z: -mp.quad(lambda s: phi_amp * mp.cos(2 * mp.pi * s), [0, z])
    resid = max(
        abs(w(z) - w_amp_closed * mp.sin(2 * mp.pi * z)) for z in mp.linspace(0, 1, 17)
    )
    return w_amp_closed, resid


def phi1_example_a():
    """Phi1 = -(v.grad_h)v - w dz(v) - sigma grad_h p for the example-A state.

    Only -w dz(v) survives.  w = -(pi/14) sin(2 pi z), dz v1 = -pi sin(pi z),
    so Phi1_1 = -w * dz v1 = -(pi^2/14) sin(2 pi z) sin(pi z).
    """
    z = sp.symbols("z", real=True)
    w = -sp.pi / 14 * sp.sin(2 * sp.pi * z)
    dzv1 = sp.diff(sp.cos(sp.pi * z), z)
    phi1 = sp.simplify(-w * dzv1)
    expected = -sp.pi**2 / 14 * sp.sin(2 * sp.pi * z) * sp.sin(sp.pi * z)
    assert sp.simplify(phi1 - expected) == 0
    return sp.sstr(expected)


def phi3_example_a():
    """Phi3 = (gamma-1) * Qbar - gamma p div_h(vbar); example A => 0.4 * pi^2/2."""
    gamma = mp.mpf("1.4")
    Qbar = mp.quad(lambda z: mp.pi**2 * mp.sin(mp.pi * z) ** 2, [0, 1])
    val = (gamma - 1) * Qbar
    assert mp.almosteq(val, mp.mpf("0.2") * mp.pi**2)
    return val


def heating_shear():
    """Q for v = (sin y, 0), mu=1, lam=0, via brute-force tensor contraction."""
    x, y, zz = sp.symbols("x y z", real=True)
    mu, lam = 1, 0
    v = [sp.sin(y), sp.Integer(0)]
    grad = [[sp.diff(v[j], c) for j in range(2)] for c in (x, y)]  # grad[i][j] = d_i v_j
    div = grad[0][0] + grad[1][1]
    S = [[mu * (grad[i][j] + grad[j][i]) + lam * div * (1 if i == j else 0) for j in range(2)] for i in range(2)]
    Q = sum(S[i][j] * grad[i][j] for i in range(2) for j in range(2))
    Q = sp.simplify(Q + mu * sp.diff(v[0], zz) ** 2)
    assert sp.simplify(Q - sp.cos(y) ** 2) == 0
    return sp.sstr(Q)


def mass_bump():
    """total mass for sigma = 1 + 0.5 cos x: (2 pi) * int dx/(1+0.5 cos x)."""
    inner = mp.quad(lambda x: 1 / (1 + mp.mpf("0.5") * mp.cos(x)), [0, mp.pi, 2 * mp.pi])
    closed = TWO_PI / mp.sqrt(mp.mpf("0.75"))
    assert mp.almosteq(inner, closed, rel_eps=mp.mpf("1e-18"))
    return TWO_PI * inner


def sobolev_cosx_h1():
    """||cos x||_{H^1(T^2)}^2 = int (cos^2 + sin^2) = (2 pi)^2."""
    val = mp.quad(lambda x: mp.cos(x) ** 2 + mp.sin(x) ** 2, [0, mp.pi, 2 * mp.pi]) * TWO_PI
    return val


def constant_state_energy():
    """E = ||v||_{H3}^2 + ||sigma||_{H2}^2 + ||p||_{H3}^2 for v=0, sigma=1, p=1.

    Channel volume is (2 pi)^2 * 1 and the torus area is (2 pi)^2, so both
    squared norms equal (2 pi)^2.
    """
    vol_channel = TWO_PI * TWO_PI * 1
    area = TWO_PI * TWO_PI
    return vol_channel + area


def ineq_sin2x_l2():
    """||d_x(cos^2 x)||_{L^2(T^3)} = ||sin 2x||_{L^2(T^3)} = sqrt((2 pi)^3 / 2)."""
    one_d = mp.quad(lambda x: mp.sin(2 * x) ** 2, [0, mp.pi, 2 * mp.pi])
    val = mp.sqrt(one_d * TWO_PI * TWO_PI)
    assert mp.almosteq(val, mp.sqrt(TWO_PI**3 / 2))
    return val


def w_cos_pi_z(gamma=1.4, kappa=1.0, R=1.0):
    """w for sigma = 1 + 0.1 cos(pi z), v = 0: w = -0.1 nu pi sin(pi z)."""
    nu = (mp.mpf(gamma) - 1) * kappa / (mp.mpf(gamma) * R)
    return -mp.mpf("0.1") * nu * mp.pi


def mms_forcing_consistency():
    """Sanity: the A-osc manufactured fields satisfy the Neumann conditions."""
    z, t = sp.symbols("z t", real=True)
    v1 = sp.exp(-t) * sp.cos(sp.pi * z)
    sig = 1 + sp.Rational(1, 10) * sp.exp(-t) * sp.cos(sp.pi * z)
    for f in (v1, sig):
        for zb in (0, 1):
            assert sp.diff(f, z).subs(z, zb) == 0
    return "dz v*, dz sigma* vanish at z in {0, 1}"


def main():
    phi_amp, phi_resid = phi_example_a()
    w_amp, w_resid = w_example_a(phi_amp)
    print("phi  amplitude (example A)      :", mp.nstr(phi_amp, 17), "resid", mp.nstr(phi_resid, 3))
    print("w    amplitude (example A)      :", mp.nstr(w_amp, 17), "resid", mp.nstr(w_resid, 3))
    print("Phi1 closed form (example A)    :", phi1_example_a())
    print("Phi3 constant  (example A)      :", mp.nstr(phi3_example_a(), 17))
    print("Q    for v=(sin y,0)            :", heating_shear())
    print("mass for sigma=1+0.5 cos x      :", mp.nstr(mass_bump(), 17))
    print("||cos x||_{H1(T^2)}^2           :", mp.nstr(sobolev_cosx_h1(), 17))
    print("const-state energy E            :", mp.nstr(constant_state_energy(), 17))
    print("||sin 2x||_{L2(T^3)}            :", mp.nstr(ineq_sin2x_l2(), 17))
    print("w amp for sigma=1+0.1cos(pi z)  :", mp.nstr(w_cos_pi_z(), 17))
    print("pi^2/7                          :", mp.nstr(mp.pi**2 / 7, 17))
    print("0.2*pi^2                        :", mp.nstr(mp.mpf("0.2") * mp.pi**2, 17))
    print("pi/14                           :", mp.nstr(mp.pi / 14, 17))
    print("(2 pi)^2                        :", mp.nstr(TWO_PI**2, 17))
    print("MMS compatibility               :", mms_forcing_consistency())


if __name__ == "__main__":
    main()
