"""Dense direct-summation oracle for the Duhamel operators on a tiny 2D grid.

Everything here is built from explicit DFT matrices and Gauss-Legendre time
quadrature; nothing calls the package's FFT or panel-weight code.  Inputs are
single low Fourier modes so that products stay below the 2/3 cut-off and
dealiasing is a no-op.
"""

import numpy as np

M = 8
L = 2 * np.pi
NPTS = M * M
_j = np.arange(M)
_F1 = np.exp(-2j * np.pi * np.outer(_j, _j) / M)
F = np.kron(_F1, _F1)
FINV = F.conj().T / NPTS
_m = np.fft.fftfreq(M, 1.0 / M)
_m_odd = np.where(np.abs(_m) == M // 2, 0.0, _m)
KX = np.repeat(_m, M) * 2 * np.pi / L
KY = np.tile(_m, M) * 2 * np.pi / L
KX_ODD = np.repeat(_m_odd, M) * 2 * np.pi / L
KY_ODD = np.tile(_m_odd, M) * 2 * np.pi / L
K2 = KX**2 + KY**2
X = np.repeat(_j, M) * L / M
Y = np.tile(_j, M) * L / M


def _mult(symbol):
    return np.real(FINV @ (symbol[:, None] * F))


D = [_mult(1j * KX_ODD), _mult(1j * KY_ODD)]
_kk = KX_ODD**2 + KY_ODD**2
_kk_safe = np.where(_kk > 0, _kk, 1.0)
_kv = [KX_ODD, KY_ODD]
P = [[_mult((1.0 if a == b else 0.0) - _kv[a] * _kv[b] / _kk_safe) for b in range(2)] for a in range(2)]


def heat(tau, kappa=0.0):
    return _mult(np.exp(-(K2 + kappa) * tau))


def leray(v):
    return [P[a][0] @ v[0] + P[a][1] @ v[1] for a in range(2)]


# sources: callables s -> flat field (scalar) or list of two flat fields (vector)
def src_B1(w, n):
    return lambda s: w(s) * n(s)


def src_B2(n, w):
    return lambda s: sum(D[j] @ (n(s) * w(s)[j]) for j in range(2))


def src_B3(u, w):
    def f(s):
        us, ws = u(s), w(s)
        div = [sum(D[l] @ (us[j] * ws[l]) for l in range(2)) for j in range(2)]
        return leray(div)
    return f


def src_B4(u, v):
    return lambda s: sum(u(s)[j] * (D[j] @ v(s)) for j in range(2))


def src_L_phi(n, grad_phi):
    return lambda s: leray([n(s) * grad_phi[0], n(s) * grad_phi[1]])


def src_L_kappa(n):
    return n


def interpolated(source, nodes):
    """Piecewise-linear interpolant in time of ``source`` sampled at ``nodes``."""
    samples = [np.asarray(source(t)) for t in nodes]

    def f(s):
        i = min(max(int(np.searchsorted(nodes, s, side="right")) - 1, 0), len(nodes) - 2)
        th = (s - nodes[i]) / (nodes[i + 1] - nodes[i])
        return (1 - th) * samples[i] + th * samples[i + 1]
    return f


def duhamel(source, nodes, kappa=0.0, gauss=12, sub=2):
    """``int_0^{t_k} e^{(t_k-s)(Delta-kappa)} source(s) ds`` at every node, by brute force."""
    xg, wg = np.polynomial.legendre.leggauss(gauss)
    out = [np.zeros_like(np.asarray(source(0.0)))]
    for k in range(1, len(nodes)):
        tk = nodes[k]
        acc = np.zeros_like(out[0])
        for i in range(k):
            edges = np.linspace(nodes[i], nodes[i + 1], sub + 1)
            for a, b in zip(edges[:-1], edges[1:]):
                for xi, wi in zip(xg, wg):
                    s = 0.5 * (a + b) + 0.5 * (b - a) * xi
                    val = np.asarray(source(s))
                    acc = acc + 0.5 * (b - a) * wi * np.einsum("ij,...j->...i", heat(tk - s, kappa), val)
        out.append(acc)
    return np.array(out)


# inputs: smooth in time, single modes in space
def scalar_w(s):
    return (1 + s) * np.sin(X) + 0.3 * np.cos(Y) * np.cos(2 * s)


def scalar_n(s):
    return np.exp(-s) * np.cos(Y) + 0.5 + 0.2 * np.sin(X + Y) * np.sin(3 * s)


def vector_u(s):
    # Taylor-Green, exactly divergence free
    a = np.exp(-2 * s)
    return [a * np.sin(X) * np.cos(Y), -a * np.cos(X) * np.sin(Y)]


def vector_w(s):
    return [np.cos(Y) * (1 + np.sin(2 * s)), np.sin(X) * np.cos(s)]


GRAD_PHI = [np.cos(X), np.sin(Y)]
