"""Reference values frozen into tests/unit_tests.cpp. Run: python3 oracles.py"""
import numpy as np
from scipy import integrate, special, stats

e = np.e
out = {}

out["m_phi(1, 0.3; Exp1)"] = 0.7 * np.exp(-1) + np.exp(-1)
T1 = integrate.quad(lambda z: 2 * np.exp(-z), 1, np.inf)[0]
out["m_kennedy(1, 0.5, 0.3; psi=2, lam=1)"] = (2 * np.sinh(0.5) + np.exp(0.5) * T1) * np.exp(-0.15)
H = integrate.quad(lambda u: np.exp(-u), 0, 0.5)[0]
out["m_signed_local(0.2, 0, 0.5)"] = 1 - H + 0.2 * np.exp(-0.5)
out["m_nu(0.5, 0.2, 0.3, 0, 0.4; atom 1,1)"] = 0.7 * np.exp(0.4)

# taboo density 3/2 (1 - |x|)^2 on (-1, 1)
g = lambda x: 1.5 * (1 - abs(x)) ** 2
out["taboo_cdf(0.5)"] = integrate.quad(g, -1, 0.5)[0]
out["taboo_cdf(-0.25)"] = integrate.quad(g, -1, -0.25)[0]

# down-crossings from x = 0 on [0, 1]: n-th completion needs travel 2n
def at_least(n, t):
    return special.erfc(2 * n / np.sqrt(2 * t)) if n > 0 else 1.0
out["P(D_4 >= 1)"] = at_least(1, 4.0)
out["P(D_4 >= 2)"] = at_least(2, 4.0)
t = 1e6
s = sum(0.5 ** n * (at_least(n, t) - at_least(n + 1, t)) for n in range(0, 4000))
out["sqrt(t) E[2^-D_t], t=1e6"] = np.sqrt(t) * s
out["rhs 4 sqrt(2/pi)"] = 4 * np.sqrt(2 / np.pi)

out["kolmogorov_survival(1)"] = special.kolmogorov(1.0)
out["kolmogorov_survival(0.5)"] = special.kolmogorov(0.5)

# E[e^{-S_1}], S_1 ~ |N|
out["E exp(-S_1)"] = integrate.quad(lambda y: np.exp(-y) * 2 * stats.norm.pdf(y), 0, np.inf)[0]
# 2 E[e^{S_1 - X_1}] e^{-1/2}, S - X ~ |N|
out["kennedy lhs t=1"] = 2 * integrate.quad(lambda y: np.exp(y) * 2 * stats.norm.pdf(y), 0, 40)[0] * np.exp(-0.5)

out["zeta(2)"] = special.zeta(2)
out["chi3 cdf(1)"] = stats.chi(3).cdf(1.0)

for k, v in out.items():
    print(f"{k:45s} {v:.17g}")
