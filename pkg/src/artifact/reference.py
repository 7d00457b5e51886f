"""Published reference values for the benchmark parameter set.

Benchmark: beta = 0.2, p = 0.5, b_L = 0.15, sigma_L = 1, b_I = 0.2, sigma_I = 1.
Values V(1) use U(c) = c^p. Keys are (gamma, lambda) or (rho, gamma, lambda).
"""

from __future__ import annotations

BENCHMARK = dict(b_L=0.15, sigma_L=1.0, b_I=0.2, sigma_I=1.0, beta=0.2, p=0.5)

LAMBDAS = (1.0, 5.0, 10.0, 50.0)
ZHAT_LAMBDAS = (1.0, 3.0, 5.0, 10.0, 50.0)

MERTON_VALUE = 1.72133
MERTON_ILLIQUID_ONLY = 1.66667
MERTON_ZHAT = 0.4

# V(1) at rho = 0
TABLE_V = {
    (0.0, 1.0): 1.66641, (0.0, 5.0): 1.70493, (0.0, 10.0): 1.71257, (0.0, 50.0): 1.71945,
    (1.0, 1.0): 1.66995, (1.0, 5.0): 1.71121, (1.0, 10.0): 1.71656, (1.0, 50.0): 1.72036,
}

# V(1) without a liquid risky asset, rho = 0, gamma = 0
TABLE_NO_LIQUID = {1.0: 1.61973, 5.0: 1.65377, 10.0: 1.65987, 50.0: 1.66526}

# cost of illiquidity e(1)
TABLE_E = {
    (0.0, 0.0, 1.0): 0.067, (0.0, 0.0, 5.0): 0.0193, (0.0, 0.0, 10.0): 0.0103,
    (0.0, 0.0, 50.0): 0.00218,
    (0.0, 1.0, 1.0): 0.062, (0.0, 1.0, 5.0): 0.0119, (0.0, 1.0, 10.0): 0.0056,
    (0.0, 1.0, 50.0): 0.00112,
    (0.5, 0.0, 1.0): 0.0337, (0.5, 0.0, 5.0): 0.00892, (0.5, 0.0, 10.0): 0.00462,
    (0.5, 0.0, 50.0): 0.00095,
    (0.5, 1.0, 1.0): 0.0303, (0.5, 1.0, 5.0): 0.00491, (0.5, 1.0, 10.0): 0.00237,
    (0.5, 1.0, 50.0): 0.00051,
    (-0.5, 0.0, 1.0): 0.2511, (-0.5, 0.0, 5.0): 0.1127, (-0.5, 0.0, 10.0): 0.0700,
    (-0.5, 0.0, 50.0): 0.0161,
    (-0.5, 1.0, 1.0): 0.2493, (-0.5, 1.0, 5.0): 0.1030, (-0.5, 1.0, 10.0): 0.0614,
    (-0.5, 1.0, 50.0): 0.0120,
}

# optimal post-trade illiquid share at rho = 0
TABLE_ZHAT = {
    (0.0, 1.0): 0.18, (0.0, 3.0): 0.3, (0.0, 5.0): 0.34, (0.0, 10.0): 0.36, (0.0, 50.0): 0.4,
    (1.0, 1.0): 0.18, (1.0, 3.0): 0.32, (1.0, 5.0): 0.36, (1.0, 10.0): 0.38, (1.0, 50.0): 0.4,
}

TOLERANCES = {"table_V": 0.01, "table_V_fast": 0.03, "table_e": 0.005, "zhat": 0.02,
              "no_liquid": 0.01, "merton": 1e-4}
