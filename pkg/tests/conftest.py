import numpy as np


def match_multiset(a, b) -> float:
    """Largest distance when each element of ``a`` is paired with a distinct nearest element of ``b``."""
    a = list(np.asarray(a, dtype=complex))
    b = list(np.asarray(b, dtype=complex))
    assert len(a) == len(b)
    worst = 0.0
    for x in a:
        d = [abs(x - y) for y in b]
        k = int(np.argmin(d))
        worst = max(worst, d[k])
        b.pop(k)
    return worst
