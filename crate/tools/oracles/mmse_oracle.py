"""Finite-length MMSE equalizer oracle.

Minimizes E|w^H r - a[k-d]|^2 for each decision delay as a ridge
least-squares problem ||[H^H; s I] w - [e_d; 0]||^2 with unit-energy
symbols, solved by QR via numpy.linalg.lstsq (no normal equations).
"""
import numpy as np

def oracle(taps, sigma2, n):
    taps = np.asarray(taps, dtype=complex)
    m = len(taps)
    cols = n + m - 1
    h = np.zeros((n, cols), dtype=complex)
    for i in range(n):
        h[i, i:i + m] = taps
    a = np.vstack([h.conj().T, np.sqrt(sigma2) * np.eye(n)])
    best = None
    for d in range(cols):
        b = np.zeros(cols + n, dtype=complex)
        b[d] = 1.0
        w, *_ = np.linalg.lstsq(a, b, rcond=None)
        mse = np.linalg.norm(a @ w - b) ** 2
        if best is None or mse < best[0]:
            best = (mse, d)
    return best

if __name__ == "__main__":
    mse, d = oracle([1.0, 0.5, 0.2], 0.1, 21)
    print(f"mse={mse:.17g} delay={d}")
