"""Reference computations shared by the tests, written independently of the package."""
import numpy as np
from scipy import linalg

from localadd.kernels import get_kernel


def smoothed_lsq_oracle(x, y, h, nodes, kernel="epanechnikov"):
    """Minimize the trapezoid-discretized smoothed least-squares criterion for d=2.

    Every (observation, grid node pair) is a weighted row of an ordinary least
    squares problem in (m0, m_1, b_1, m_2, b_2); components are centred against
    the estimated marginal densities.
    """
    kern = get_kernel(kernel)
    n = len(y)
    G = len(nodes)
    om = np.full(G, nodes[1] - nodes[0])
    om[[0, -1]] *= 0.5
    Ks = []
    for j in range(2):
        raw = kern((nodes[:, None] - x[None, :, j]) / h) / h
        Ks.append(raw / (om @ raw))
    P = 1 + 4 * G
    rows, wts, rhs = [], [], []
    for i in range(n):
        for g1 in range(G):
            for g2 in range(G):
                wt = om[g1] * om[g2] * Ks[0][g1, i] * Ks[1][g2, i] / n
                if wt == 0:
                    continue
                r = np.zeros(P)
                r[0] = 1
                r[1 + g1] = 1
                r[1 + G + g1] = x[i, 0] - nodes[g1]
                r[1 + 2 * G + g2] = 1
                r[1 + 3 * G + g2] = x[i, 1] - nodes[g2]
                rows.append(r)
                wts.append(wt)
                rhs.append(y[i])
    A = np.array(rows) * np.sqrt(wts)[:, None]
    b = np.array(rhs) * np.sqrt(wts)
    C = np.zeros((2, P))
    C[0, 1:1 + G] = om * Ks[0].mean(axis=1)
    C[1, 1 + 2 * G:1 + 3 * G] = om * Ks[1].mean(axis=1)
    N = linalg.null_space(C)
    z = linalg.lstsq(A @ N, b)[0]
    theta = N @ z
    return theta[0], theta[1:1 + G], theta[1 + 2 * G:1 + 3 * G]
