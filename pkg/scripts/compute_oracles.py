"""Independent high-precision reference values for the test suite.

Everything here uses mpmath only, never the package. Kinetic references
come from the Neumann series of the Volterra equation

    N = sum_r (-d^nu)^r I^(nu r) g,

applied term by term to the power-series input g, or (for nu = 1) from the
exact resolvent N(t) = g(t) - d * int_0^t exp(-d (t - s)) g(s) ds.

Run:  python3 scripts/compute_oracles.py
"""

import mpmath as mp

mp.mp.dps = 40


def kbessel_coeff(n, b, c, g, lam, mu, k):
    poch = mp.mpf(1)
    for j in range(n):
        poch *= g + j * k
    x = lam * n + mu + mp.mpf(b + 1) / 2
    gamma_k = mp.power(k, x / k - 1) * mp.gamma(x / k)
    return mp.power(c, n) * poch / (mp.factorial(n) ** 2 * gamma_k)


def neumann(t, d, nu, powers, terms=400):
    """Solve N = g - d^nu I^nu N for g = sum coef * t**q given as (coef, q) pairs."""
    total = mp.mpf(0)
    for coef, q in powers:
        inner = mp.mpf(0)
        for r in range(terms):
            term = (-mp.power(d, nu)) ** r * mp.gamma(q + 1) * mp.rgamma(q + nu * r + 1) \
                * mp.power(t, q + nu * r)
            inner += term
            if r > 10 and abs(term) < mp.mpf(10) ** (-45):
                break
        total += coef * inner
    return total


def kbessel_powers(params, scale_arg, nu_arg, n_terms=60):
    """Powers of t in J(scale * t**nu_arg) for the k-Bessel input."""
    b, c, g, lam, mu, k = params
    out = []
    for n in range(n_terms):
        coef = kbessel_coeff(n, b, c, g, lam, mu, k) * (mp.mpf(scale_arg) / 2) ** (mu + 2 * n)
        out.append((coef, nu_arg * (mu + 2 * n)))
    return out


def ml(alpha, beta, z):
    return mp.nsum(lambda n: mp.power(z, n) * mp.rgamma(alpha * n + beta), [0, mp.inf])


def published(t, e, d, nu, params, n_terms=60):
    b, c, g, lam, mu, k = params
    x = mp.power(e * t, nu)
    y = mp.power(d * t, nu)
    return mp.fsum(kbessel_coeff(n, *params) * mp.gamma(mu + 2 * n + 1) * (x / 2) ** (mu + 2 * n)
                   * ml(nu, 2 * n + mu + 1, -y) for n in range(n_terms))


G1 = (1, -1, 1, 1, 1, 1)

if __name__ == "__main__":
    rows = {}
    rows["coeff n=3 (b=1,c=1,g=2,lam=1,mu=0.5,k=2)"] = kbessel_coeff(3, 1, 1, 2, 1, mp.mpf("0.5"), 2)
    J1 = lambda s: mp.besselj(1, s)
    rows["G1 thm1 t=1"] = J1(1) - mp.quad(lambda s: mp.exp(-(1 - s)) * J1(s), [0, 1])
    rows["G1 thm1 t=1 (neumann)"] = neumann(1, 1, 1, kbessel_powers(G1, 1, 1))
    nu = mp.mpf("0.8")
    e = mp.mpf("1.2")
    a = mp.mpf("0.7")
    rows["G2 thm2 derived t=1"] = neumann(1, e, nu, kbessel_powers(G1, e ** nu, nu))
    rows["thm2 published t=1"] = published(1, e, e, nu, G1)
    rows["G3 thm3 derived t=1"] = neumann(1, a, nu, kbessel_powers(G1, e ** nu, nu))
    rows["thm3 published t=1"] = published(1, e, a, nu, G1)
    # cor1: input w_{1,1,1}(t) = J_1(t), nu = 1/2
    rows["cor1 t=1"] = neumann(1, 1, mp.mpf("0.5"), kbessel_powers((1, -1, 1, 1, 1, 1), 1, 1))
    # cor2: input j_{1/2}(t) = sqrt(pi/(2t)) J_1(t), nu = 1, a = 1
    j = lambda s: mp.sqrt(mp.pi / (2 * s)) * J1(s)
    cor2 = j(1) - mp.quad(lambda s: mp.exp(-(1 - s)) * j(s), [0, 1])
    rows["cor2 equation t=1 (sqrt(pi)/2 variant)"] = cor2
    rows["cor2 literal t=1"] = cor2 / (mp.sqrt(mp.pi) / 2)
    # Laplace transform of the G1 solution: L{J_1}(p) / (1 + 1/p)
    p = mp.mpf(4)
    rows["G1 laplace p=4"] = (mp.sqrt(p * p + 1) - p) / mp.sqrt(p * p + 1) / (1 + 1 / p)
    rows["E_0.75(-2)"] = ml(mp.mpf("0.75"), 1, -2)
    rows["E_0.5(-10)"] = mp.exp(100) * mp.erfc(10)
    rows["1/Gamma(2.2)"] = mp.rgamma(mp.mpf("2.2"))
    rows["J0(1)"] = mp.besselj(0, 1)
    rows["I0(1)"] = mp.besseli(0, 1)
    rows["k_bessel(k=1,mu=1,g=1,lam=1,z=1)"] = mp.nsum(
        lambda n: (-1) ** n * mp.rf(1, n) * mp.mpf(0.5) ** n / (mp.gamma(n + 2) * mp.factorial(n) ** 2),
        [0, mp.inf])
    width = max(map(len, rows))
    for name, value in rows.items():
        print(f"{name:<{width}}  {mp.nstr(value, 20)}")
