"""Brute-force high-precision series for E^g_{r,m}(z) and derived kernel quantities.

Regenerate the fixtures with:  python3 prabhakar_series.py
Writes CSV files into ../data.
"""
import os
import mpmath as mp

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")


def ml3(rho, mu, gam, z, digits=60):
    with mp.workdps(digits):
        rho, mu, gam = mp.mpf(rho), mp.mpf(mu), mp.mpf(gam)
        z = mp.mpc(z)
        s = mp.mpc(0)
        c = mp.mpf(1)
        k = 0
        while True:
            term = c * z**k * mp.rgamma(rho * k + mu)
            s += term
            if k > 20 and abs(term) < mp.mpf(10) ** (-digits + 5) * max(1, abs(s)):
                break
            c *= (gam + k) / (k + 1)
            k += 1
            if k > 20000:
                raise RuntimeError("series did not converge")
        return s


def kernel_e(alpha, mu, gam, sigma, t):
    t = mp.mpf(t)
    return t ** (mu - 1) * ml3(alpha, mu, gam, sigma * t**alpha)


def fmt(x):
    return mp.nstr(x, 25, min_fixed=0, max_fixed=0)


def ml3_grid():
    rows = []
    rhos = [0.5, 0.7, 0.9, 1.0, 1.3]
    mus = [0.25, 1.0, 1.75]
    gams = [-0.6, 0.5, 1.0, 1.4]
    zs = [-5, -3.2, -1.5, -0.7, 0.4, 2.5, 4.9, 3j, -2 + 2j, 1 - 4j, -4.5 + 0.5j]
    for r in rhos:
        for m in mus:
            for g in gams:
                for z in zs:
                    v = ml3(r, m, g, z)
                    rows.append((r, m, g, complex(z).real, complex(z).imag, v.real, v.imag))
    with open(os.path.join(DATA, "ml3_series.csv"), "w") as f:
        f.write("rho,mu,gamma,z_re,z_im,val_re,val_im\n")
        for r in rows:
            f.write(",".join(str(x) if i < 5 else fmt(x) for i, x in enumerate(r)) + "\n")


def weights_table():
    alpha, beta, dt, K = 0.5, 0.5, mp.mpf(2) ** -4, 16
    e = [mp.mpf(0)] + [kernel_e(alpha, alpha * beta + 1, beta, -1, j * dt).real for j in range(1, K + 1)]
    with open(os.path.join(DATA, "weights_a05_b05_dt2m4.csv"), "w") as f:
        f.write("j,w\n")
        for j in range(K):
            f.write(f"{j},{fmt(e[j + 1] - e[j])}\n")


def scalars():
    with open(os.path.join(DATA, "scalars.csv"), "w") as f:
        f.write("name,value\n")
        f.write(f"ml3_0.5_1.25_0.5_m1,{fmt(ml3(0.5, 1.25, 0.5, -1).real)}\n")
        f.write(f"weight_sum_0.3_0.7_t1,{fmt(kernel_e(0.3, 1.21, 0.7, -1, 1).real)}\n")
        for t in [0.5, 2.0, 7.5]:
            f.write(f"kernel_0.5_0.5_mu0.25_t{t},{fmt(kernel_e(0.5, 0.25, 0.5, -1, t).real)}\n")


if __name__ == "__main__":
    os.makedirs(DATA, exist_ok=True)
    ml3_grid()
    weights_table()
    scalars()
