"""Small measurement matrices whose expanders are verified exhaustively at K = t."""

from functools import lru_cache

from sparsemm.expander import ExpanderParams
from sparsemm.sketch import build_measurement

# t -> (signal length, field size q); polynomials of degree < 2, so two
# coordinates share at most one expander neighbour.
VERIFIED = {2: (63, 8), 4: (31, 32), 8: (15, 64)}


@lru_cache(maxsize=None)
def verified_measurement(t):
    n, q = VERIFIED[t]
    return build_measurement(n, t, mode="manual", params=ExpanderParams.manual(n, q, 2), verify=True)
