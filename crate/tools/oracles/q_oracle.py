"""Gaussian-tail reference values used by the link tests."""
import numpy as np
from scipy.special import erfc

def q(x):
    return 0.5 * erfc(x / np.sqrt(2.0))

if __name__ == "__main__":
    g = 10 ** 0.6
    print("two-tap (1, 0.3) BPSK at 6 dB:",
          repr(0.5 * (q(1.3 * np.sqrt(2 * g)) + q(0.7 * np.sqrt(2 * g)))))
    print("Q(1), Q(3):", repr(q(1.0)), repr(q(3.0)))
