import numpy as np

from liouville_billiards.special_functions import elliptic_K


def richardson_dK(k: float, depth: int = 5) -> float:
    """dK/dk by central differences with a Richardson tableau; the entry with
    the smallest successive change wins."""
    h0 = min(1e-3, 0.05 * (1.0 - k))
    steps = [h0 * 2.0 ** -j for j in range(depth)]
    table = [[(elliptic_K(k + h) - elliptic_K(k - h)) / (2.0 * h)] for h in steps]
    for j in range(1, depth):
        fac = 4.0 ** j
        for i in range(depth - j):
            table[i].append(
                (fac * table[i + 1][j - 1] - table[i][j - 1]) / (fac - 1.0)
            )
    row = table[0]
    gaps = [abs(row[j] - row[j - 1]) for j in range(1, len(row))]
    return row[int(np.argmin(gaps)) + 1]
