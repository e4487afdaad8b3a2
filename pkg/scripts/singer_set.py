"""Generate a planar (q^2+q+1, q+1, 1) Singer difference set.

Offline helper used to produce the data files shipped under
``src/sdsimat/data``. Works for prime q only.

    python scripts/singer_set.py 47 > src/sdsimat/data/cds_2257_48_1.txt
"""
import itertools
import sys


def _mulmod(a, b, poly, q):
    # a, b: coefficient lists (low degree first), length 3; poly monic cubic
    prod = [0] * 5
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % q
    for deg in (4, 3):
        c = prod[deg]
        if c:
            prod[deg] = 0
            for k in range(3):
                prod[deg - 3 + k] = (prod[deg - 3 + k] - c * poly[k]) % q
    return prod[:3]


def _order_is_full(poly, q):
    n = q ** 3 - 1
    x = [0, 1, 0]
    cur = [1, 0, 0]
    seen_one_at = None
    for i in range(1, n + 1):
        cur = _mulmod(cur, x, poly, q)
        if cur == [1, 0, 0]:
            seen_one_at = i
            break
    return seen_one_at == n


def singer_set(q):
    for c0, c1, c2 in itertools.product(range(1, q), range(q), range(q)):
        poly = [c0, c1, c2]
        # irreducible cubic <=> no roots in GF(q)
        if any((r ** 3 + c2 * r * r + c1 * r + c0) % q == 0 for r in range(q)):
            continue
        if _order_is_full(poly, q):
            break
    v = q * q + q + 1
    x = [0, 1, 0]
    cur = [1, 0, 0]
    out = []
    for i in range(v):
        if cur[2] == 0:
            out.append(i)
        cur = _mulmod(cur, x, poly, q)
    return out


if __name__ == "__main__":
    for idx in singer_set(int(sys.argv[1])):
        print(idx)
