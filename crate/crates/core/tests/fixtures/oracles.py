"""Arbitrary-precision reference values frozen into the Rust test suite.

Every quantity is computed from its defining integral or closed form with
mpmath at 30 significant digits, independently of the Rust code paths.
Run: python3 oracles.py
"""
import mpmath as mp

mp.mp.dps = 30


def heat(T, x, y):
    return mp.exp(-(y - x) ** 2 / (2 * T)) / mp.sqrt(2 * mp.pi * T)


def fp(a, t):
    return a / mp.sqrt(2 * mp.pi * t ** 3) * mp.exp(-a ** 2 / (2 * t))


def split_neg(t, lam):
    return abs(lam) / mp.sqrt(2 * mp.pi * t * (1 - t) ** 3) * mp.exp(-lam ** 2 * t / (2 * (1 - t)))


def lemma_lhs(t, a):
    f = lambda s: mp.exp(-a / (s - t)) / mp.sqrt((1 - s) * (s - t))
    return mp.quad(f, [t, (t + 1) / 2, 1])


def F1_direct(t, y, lam):
    # first term of the density display, integrated in s directly
    g = lambda s: (mp.exp(-(y - lam) ** 2 / (2 * (s - t))) - mp.exp(-(y + lam) ** 2 / (2 * (s - t)))) / mp.sqrt(
        2 * mp.pi * (1 - s) * (s - t))
    return mp.exp(lam ** 2 / 2) / (2 * y) * mp.quad(g, [t, (t + 1) / 2, 1])


def F2(t, y, lam):
    return (y - lam) / (mp.sqrt((1 - t) ** 3) * y) * mp.exp(lam ** 2 / 2) * mp.exp(-(y - lam) ** 2 / (2 * (1 - t)))


def F1_gamma(t, y, lam):
    # closed form through the upper incomplete gamma function
    a_lo = (y - lam) ** 2 / (2 * (1 - t))
    a_hi = (y + lam) ** 2 / (2 * (1 - t))
    return mp.exp(lam ** 2 / 2) / (2 * mp.sqrt(2) * y) * mp.gammainc(mp.mpf('0.5'), a_lo, a_hi)


def F(t, y, theta, lam):
    return F1_gamma(t, y, lam) + (1 - theta) * max(mp.mpf(0), F2(t, y, lam))


def d2F(t, y, theta, lam):
    return mp.diff(lambda yy: F(t, yy, theta, lam), y)


def J(t, y):
    g = lambda s: 1 / (mp.pi * mp.sqrt(s * (1 - s))) * (s / (s - t)) ** mp.mpf(1.5) * mp.exp(-y ** 2 / (2 * (s - t)))
    return mp.quad(g, [t, t + (1 - t) / 8, (t + 1) / 2, 1])


def Jdot(t, y):
    g = lambda s: 1 / (mp.pi * (s - t) * mp.sqrt(s * (1 - s))) * (s / (s - t)) ** mp.mpf(1.5) * mp.exp(
        -y ** 2 / (2 * (s - t)))
    return mp.quad(g, [t, t + (1 - t) / 8, (t + 1) / 2, 1])


# recorded path shared with the Rust tests: n = 16 steps on [0, 1]
N_REC = 16


def recorded_path():
    vals = [mp.mpf(0)]
    for k in range(1, N_REC + 1):
        vals.append(mp.sqrt(mp.mpf(k) / N_REC) * (mp.mpf('1.1') + mp.mpf('0.4') * mp.sin(mp.mpf('1.7') * k)))
    return vals


def theta_grid(vals, k, lam):
    # last grid index j <= k with vals[j] <= lam, as a time
    j = max(i for i in range(k + 1) if vals[i] <= lam)
    return mp.mpf(j) / N_REC


def Fmix(vals, k, use_derivative=False):
    t = mp.mpf(k) / N_REC
    y = vals[k]
    # F^lambda * exp(-lambda^2/2) with the exp(lambda^2/2) factor cancelled analytically
    def integrand(lam):
        th = theta_grid(vals, k, lam)
        if use_derivative:
            val = mp.diff(lambda yy: F(t, yy, th, lam), y)
        else:
            val = F(t, y, th, lam)
        return val * mp.exp(-lam ** 2 / 2)
    brk = sorted(set([mp.mpf(0)] + [v for v in vals[:k + 1] if 0 < v <= y] + [y + 12]))
    return 2 / mp.sqrt(2 * mp.pi) * mp.quad(integrand, brk)


def main():
    out = {}
    out['heat_1_0_1'] = heat(1, 0, 1)
    out['fp_1_1'] = fp(1, 1)
    out['q00_1'] = 2 / mp.sqrt(2 * mp.pi)
    out['split_neg_half_m1'] = split_neg(mp.mpf('0.5'), -1)
    out['gamma_half_tail_1'] = mp.gammainc(mp.mpf('0.5'), 1, mp.inf)
    out['gamma_half_tail_0p3'] = mp.gammainc(mp.mpf('0.5'), mp.mpf('0.3'), mp.inf)
    out['gamma_half_tail_7'] = mp.gammainc(mp.mpf('0.5'), 7, mp.inf)
    out['lemma_lhs_0p5_0p25'] = lemma_lhs(mp.mpf('0.5'), mp.mpf('0.25'))
    out['F1_0p3_0p8_1'] = F1_direct(mp.mpf('0.3'), mp.mpf('0.8'), mp.mpf(1))
    t, y, th, lam = mp.mpf('0.5'), mp.mpf('1.2'), mp.mpf('0.3'), mp.mpf(1)
    out['F_0p5_1p2_0p3_1'] = F(t, y, th, lam)
    out['F1_gamma_0p3_0p8_1'] = F1_gamma(mp.mpf('0.3'), mp.mpf('0.8'), mp.mpf(1))
    out['d2F_0p5_1p2_0p3_1'] = d2F(t, y, th, lam)
    out['drift_pos_0p5_1p2_0p3_1'] = 1 / y + d2F(t, y, th, lam) / F(t, y, th, lam)
    out['J_0p3_0p7'] = J(mp.mpf('0.3'), mp.mpf('0.7'))
    out['Jdot_0p3_0p7'] = Jdot(mp.mpf('0.3'), mp.mpf('0.7'))
    out['J_0p5_0p1'] = J(mp.mpf('0.5'), mp.mpf('0.1'))
    vals = recorded_path()
    for k in (8, 11):
        tk = mp.mpf(k) / N_REC
        fm = Fmix(vals, k)
        fd = Fmix(vals, k, use_derivative=True)
        jj = J(tk, vals[k])
        jd = Jdot(tk, vals[k])
        out['rec_y_%d' % k] = vals[k]
        out['rec_Fmix_%d' % k] = fm
        out['rec_Fdot_%d' % k] = fd
        out['rec_J_%d' % k] = jj
        out['rec_Jdot_%d' % k] = jd
        # drift of V(B) before the first zero: 1/y + d/dy log(F + J)
        out['rec_drift_before_%d' % k] = 1 / vals[k] + (fd - vals[k] * jd) / (fm + jj)
        out['rec_D_%d' % k] = (fm + jj) / (1 + jj)
    # P(R_1 > 1) for Bessel-3 from 0
    out['bessel_tail_1_1'] = mp.quad(lambda u: 2 * u ** 2 / mp.sqrt(2 * mp.pi) * mp.exp(-u ** 2 / 2), [1, mp.inf])
    # mass of the joint density of (R_1, last exit time of 1) over {R_1 > 1}
    jd = lambda yy, ss: yy * (yy - 1) / (mp.pi * mp.sqrt((1 - ss) ** 3 * ss ** 3)) * mp.exp(
        -(yy - 1) ** 2 / (2 * (1 - ss)) - 1 / (2 * ss))
    out['joint_mass_1_1'] = mp.quad(lambda yy: mp.quad(lambda ss: jd(yy, ss), [0, 0.5, 1]), [1, 2, 4, mp.inf])
    for k, v in out.items():
        print('%-28s %s' % (k, mp.nstr(v, 20)))


if __name__ == '__main__':
    main()
