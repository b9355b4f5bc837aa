"""
Reference values for the Jacobi chain of five oscillators.

Parameters: varsigma_1 = varsigma_n = kappa = 1, gamma = 0.01, n = 5.
Used by ``reproduce jacobi-chain`` and by the tests.
"""

# Jacobi chain parameters
JACOBI_PARAMS = {"n": 5, "gamma": 0.01, "kappa": 1.0, "s1": 1.0, "sn": 1.0}

# Spectrum of Q, conjugates listed next to each other
JACOBI_EIGENVALUES = [
    complex(0.0263377, 1.88656),
    complex(0.0263377, -1.88656),
    complex(0.104782, 1.55549),
    complex(0.104782, -1.55549),
    complex(0.234099, 1.06262),
    complex(0.234099, -1.06262),
    complex(0.395218, 0.517319),
    complex(0.395218, -0.517319),
    complex(0.452655, 0.0),
    complex(0.0264706, 0.0),
]

JACOBI_RATE = 0.0263377
JACOBI_ARGUMENT = 1.55684  # arg(lambda_1), not the rotation frequency
JACOBI_FREQUENCY = 1.88656
JACOBI_GAP = 0.0001329  # Re(lambda_6) - rate

# Unit eigenvector of lambda_1, third component real positive
JACOBI_V1 = [
    complex(0.112319, -0.0891416),
    complex(-0.448508, 0.0287844),
    complex(0.579305, 0.0),
    complex(-0.448508, 0.0287844),
    complex(0.112319, -0.0891416),
    complex(0.0464105, 0.060184),
    complex(-0.0119363, -0.237904),
    complex(-0.00428606, 0.307009),
    complex(-0.0119363, -0.237904),
    complex(0.0464105, 0.060184),
]
JACOBI_V1_GAUGE_INDEX = 2

# Coefficients of e_1 in the basis (v1, conj v1, v2, ..., v5, v6)
JACOBI_C_E1 = [
    complex(0.0800993, -0.0495081),
    complex(0.0800993, 0.0495081),
    complex(0.186213, -0.0967681),
    complex(0.186213, 0.0967681),
    complex(0.371378, -0.158507),
    complex(0.371378, 0.158507),
    complex(-0.0619613, 0.787062),
    complex(-0.0619613, -0.787062),
    complex(1.62062, 0.0),
    complex(1.2715, 0.0),
]

# Statistics as printed next to the table. The printed vector they are
# computed from is c_1 * c(e_1), not c_1 * v_1; kept for the report only.
PRINTED_HAT_NORM = 0.181073
PRINTED_CHECK_NORM = 0.140425
PRINTED_INNER = -0.0130705

JACOBI_TOLERANCE = 1e-4
JACOBI_GAP_TOLERANCE = 1e-6


def jacobi_leading_pair_vector():
    """c_1(e_1) v_1 from the reference coefficient and eigenvector."""
    c1 = JACOBI_C_E1[0]
    return [c1 * v for v in JACOBI_V1]
