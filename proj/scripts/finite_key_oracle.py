#!/usr/bin/env python3
"""Straight-line reference calculator for the decoy-state finite-key bound.

Evaluates the channel model and the secret-key-length bound in one pass,
with no shared code with the C++ library. Used to freeze expected values
into the test suite and to calibrate the default pulse rate.

Usage:
  finite_key_oracle.py            # reference tables for the default setup
  finite_key_oracle.py --sweep    # L / e_mis / eta_Bob sweeps
  finite_key_oracle.py --calibrate SPEED LKM   # pulse-rate calibration
"""

import argparse
import math


def round_half_up(x):
    """Count rounding convention shared with the implementation."""
    return int(math.floor(x + 0.5))

# Default protocol-side constants (signal/decoy/vacuum intensities, their
# selection probabilities, basis probability, raw-key target, EC efficiency,
# failure probabilities).
K1, K2, K3 = 0.4, 0.1, 0.007
PK1 = PK2 = PK3 = 1.0 / 3.0
PX = 0.8
NX_TARGET = 10_000_000
ETA_EC = 1.16
EPS_C = 1e-11
EPS_S = 1e-11

# Default channel-side constants.
L_KM = 5.0
E_MIS = 5e-4
P_DC = 6e-7
P_AP = 4e-2
ETA_BOB = 0.1


def h2(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def transmittance(L):
    return 10.0 ** (-0.2 * L / 10.0)


def detection_rate(k, L, eta_bob, p_dc):
    eta_tr = transmittance(L)
    return 1.0 - (1.0 - 2.0 * p_dc) * math.exp(-eta_tr * eta_bob * k)


def bit_error_prob(k, L, e_mis, eta_bob, p_dc, p_ap):
    eta_tr = transmittance(L)
    r_k = detection_rate(k, L, eta_bob, p_dc)
    return p_dc + e_mis * (1.0 - math.exp(-eta_tr * k)) + p_ap * r_k / 2.0


def photon_number_prob(n, ks=(K1, K2, K3), ps=(PK1, PK2, PK3)):
    return sum(math.exp(-k) * k**n * p / math.factorial(n) for k, p in zip(ks, ps))


def expected_counts(L, e_mis, eta_bob=ETA_BOB, p_dc=P_DC, p_ap=P_AP,
                    nx_target=NX_TARGET, px=PX,
                    ks=(K1, K2, K3), ps=(PK1, PK2, PK3)):
    """Closed-form expected detection/error counts, rounded to integers.

    Per-pulse detection probability includes the after-pulse multiplier;
    N is the smallest pulse count whose rounded X-basis counts reach the
    raw-key target.
    """
    R = [detection_rate(k, L, eta_bob, p_dc) * (1.0 + p_ap) for k in ks]
    b = [bit_error_prob(k, L, e_mis, eta_bob, p_dc, p_ap) for k in ks]
    rate_x = sum(p * px * px * r for p, r in zip(ps, R))
    if rate_x <= 0.0:
        raise ValueError("no detections possible")
    N = math.ceil(nx_target / rate_x)
    while sum(round_half_up(N * p * px * px * r) for p, r in zip(ps, R)) < nx_target:
        N += 1
    pz = 1.0 - px
    n_x = [round_half_up(N * p * px * px * r) for p, r in zip(ps, R)]
    n_z = [round_half_up(N * p * pz * pz * r) for p, r in zip(ps, R)]
    m_x = [min(round_half_up(N * p * px * px * e), nx) for p, e, nx in zip(ps, b, n_x)]
    m_z = [min(round_half_up(N * p * pz * pz * e), nz) for p, e, nz in zip(ps, b, n_z)]
    return N, n_x, n_z, m_x, m_z


def adjusted(counts, total, ps, ks, eps_s):
    """Finite-sample (lower, upper) pairs for per-intensity counts."""
    dev = math.sqrt(total / 2.0 * math.log(21.0 / eps_s))
    lo = [max(math.exp(k) / p * (c - dev), 0.0) for c, p, k in zip(counts, ps, ks)]
    hi = [math.exp(k) / p * (c + dev) for c, p, k in zip(counts, ps, ks)]
    return lo, hi


def f_term(a, b, c, d):
    if b <= 0.0 or b >= 1.0:
        return 0.0
    inner = math.log2((c + d) / (c * d * (1.0 - b) * b) * (441.0 / (a * a)))
    if inner <= 0.0:
        return 0.0
    return math.sqrt((c + d) * (1.0 - b) * b / (c * d * math.log(2.0)) * inner)


def secret_key_length(L=L_KM, e_mis=E_MIS, eta_bob=ETA_BOB, p_dc=P_DC, p_ap=P_AP,
                      nx_target=NX_TARGET, px=PX, eta_ec=ETA_EC,
                      eps_c=EPS_C, eps_s=EPS_S,
                      ks=(K1, K2, K3), ps=(PK1, PK2, PK3), verbose=False):
    N, n_x, n_z, m_x, m_z = expected_counts(L, e_mis, eta_bob, p_dc, p_ap,
                                            nx_target, px, ks, ps)
    k1, k2, k3 = ks
    chi0 = photon_number_prob(0, ks, ps)
    chi1 = photon_number_prob(1, ks, ps)

    def vacuum_and_single(n_counts):
        total = sum(n_counts)
        lo, hi = adjusted(n_counts, total, ps, ks, eps_s)
        xi0 = max(chi0 * (k2 * lo[2] - k3 * hi[1]) / (k2 - k3), 0.0)
        denom = k1 * (k2 - k3) - k2 * k2 + k3 * k3
        xi1 = chi1 * k1 * (lo[1] - hi[2]
                           - (k2 * k2 - k3 * k3) / (k1 * k1) * (hi[0] - xi0 / chi0)) / denom
        xi1 = min(max(xi1, 0.0), float(total))
        return xi0, xi1, total

    xi_x0, xi_x1, n_x_tot = vacuum_and_single(n_x)
    xi_z0, xi_z1, _ = vacuum_and_single(n_z)

    m_z_tot = sum(m_z)
    m_lo, m_hi = adjusted(m_z, m_z_tot, ps, ks, eps_s)
    delta_z1 = max(chi1 * (m_hi[1] - m_lo[2]) / (k2 - k3), 0.0)

    if xi_z1 <= 0.0 or xi_x1 <= 0.0:
        return dict(N=N, ell=0, insufficient=True)
    ratio = delta_z1 / xi_z1
    phi_raw = ratio + f_term(eps_s, ratio, xi_z1, xi_x1)
    phi = min(max(phi_raw, 0.0), 0.5)

    lam_ec = n_x_tot * eta_ec * h2(phi)
    ell = math.floor(xi_x0 + xi_x1 - xi_x1 * h2(phi) - lam_ec
                     - 6.0 * math.log2(21.0 / eps_s) - math.log2(2.0 / eps_c))
    ell = max(min(ell, n_x_tot), 0)
    out = dict(N=N, n_x=n_x, n_z=n_z, m_x=m_x, m_z=m_z,
               xi_x0=xi_x0, xi_x1=xi_x1, xi_z0=xi_z0, xi_z1=xi_z1,
               delta_z1=delta_z1, phi=phi, lam_ec=lam_ec, ell=ell,
               insufficient=False)
    if verbose:
        for key, val in out.items():
            print(f"  {key} = {val}")
    return out


def speed(pulse_rate, **kw):
    r = secret_key_length(**kw)
    return r["ell"] * pulse_rate / r["N"], r


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sweep", action="store_true")
    ap.add_argument("--calibrate", nargs=2, type=float, metavar=("SPEED", "L_KM"))
    ap.add_argument("--kps-window", type=float, nargs=2, metavar=("PULSE_RATE", "PKTRATE"),
                    help="scan L for the two-pool sharing scenario")
    args = ap.parse_args()

    if args.calibrate:
        target_speed, L = args.calibrate
        r = secret_key_length(L=L)
        print(f"L={L} km: ell={r['ell']}, N={r['N']}")
        print(f"pulse_rate for {target_speed} bit/s: {target_speed * r['N'] / r['ell']:.6e}")
        return

    if args.kps_window:
        pulse_rate, pkt_rate = args.kps_window
        consume = pkt_rate * 64.0
        for L10 in range(50, 301, 5):
            L = L10 / 10.0
            s_hi, r_hi = speed(pulse_rate, L=L, e_mis=8e-4)
            s_lo, r_lo = speed(pulse_rate, L=L, e_mis=5e-4)
            T = r_hi["N"] / pulse_rate
            mark = " <-- window" if s_hi < consume < s_lo and s_hi + s_lo > 2 * consume else ""
            print(f"L={L:5.1f}  s(8e-4)={s_hi:9.1f}  s(5e-4)={s_lo:9.1f}  "
                  f"block_s={T:8.1f}  sum={s_hi+s_lo:9.1f}{mark}")
        return

    if args.sweep:
        print("# L sweep at e_mis in {5..9}e-4 (ell per pulse * 1e6)")
        for L in (1, 5, 10, 20, 40, 80):
            row = []
            for em in (5e-4, 6e-4, 7e-4, 8e-4, 9e-4):
                r = secret_key_length(L=L, e_mis=em)
                row.append(r["ell"] / r["N"] * 1e6)
            print(f"L={L:3d}: " + "  ".join(f"{v:10.4f}" for v in row))
        print("# eta_Bob sweep at L in {5,10,20}, e_mis in {6,7,8}e-4")
        for L in (5, 10, 20):
            for em in (6e-4, 7e-4, 8e-4):
                row = []
                for i in range(9):
                    eb = 0.10 + 0.05 * i
                    r = secret_key_length(L=L, e_mis=em, eta_bob=eb)
                    row.append(r["ell"] / r["N"] * 1e6)
                print(f"L={L:3d} e_mis={em:.0e}: " + "  ".join(f"{v:9.3f}" for v in row))
        return

    print("== channel primitives (Table-defaults, L=5) ==")
    print(f"transmittance(0)  = {transmittance(0)!r}")
    print(f"transmittance(5)  = {transmittance(5)!r}")
    print(f"transmittance(50) = {transmittance(50)!r}")
    for k in (K1, K2, K3):
        print(f"r({k}) = {detection_rate(k, 5.0, ETA_BOB, P_DC)!r}")
    print(f"r(0.1, L=50) = {detection_rate(0.1, 50.0, ETA_BOB, P_DC)!r}")
    print(f"r(0, pdc)    = {detection_rate(0.0, 5.0, ETA_BOB, P_DC)!r}")
    for k in (K1, K2, K3):
        print(f"b({k}) = {bit_error_prob(k, 5.0, E_MIS, ETA_BOB, P_DC, P_AP)!r}")
    print(f"b(0)   = {bit_error_prob(0.0, 5.0, E_MIS, ETA_BOB, P_DC, P_AP)!r}")
    print(f"chi_0 = {photon_number_prob(0)!r}")
    print(f"chi_1 = {photon_number_prob(1)!r}")
    print(f"h2(0.11) = {h2(0.11)!r}")

    print("\n== full bound, defaults (L=5, e_mis=5e-4) ==")
    r = secret_key_length(verbose=True)

    print("\n== full bound, L=50 ==")
    r50 = secret_key_length(L=50.0, verbose=True)
    print(f"pulse_rate for 1280 bit/s at L=50: {1280.0 * r50['N'] / r50['ell']:.6e}")


if __name__ == "__main__":
    main()
