"""Index sets by brute-force filtering of the full box."""

import itertools
import math


def brute(shape, N, d):
    box = itertools.product(range(N + 1), repeat=d)
    if shape == "Y":
        keep = lambda n: max(n) <= N
    elif shape == "T":
        keep = lambda n: sum(n) <= N
    else:
        keep = lambda n: math.prod(k + 1 for k in n) <= N + 1
    return sorted(n for n in box if keep(n))
