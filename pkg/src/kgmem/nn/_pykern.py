"""Pure-numpy kernel fallbacks, used when the compiled extension is unavailable."""

import numpy as np


def scatter_sum(values: np.ndarray, index: np.ndarray, n: int) -> np.ndarray:
    """Sum rows of ``values`` into an (n, d) output at positions ``index``.

    Accumulation is unbuffered and in index order, matching the compiled
    kernel's summation order.
    """
    out = np.zeros((n, values.shape[1]), dtype=values.dtype)
    np.add.at(out, index, values)
    return out
