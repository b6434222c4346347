"""Brute-force enumeration oracles shared by the tests.

Everything here is deliberately naive: permutations are listed and their
cycles counted, set partitions are generated recursively, compositions are
listed by stars and bars.  Only tiny sizes are ever passed in.
"""

import itertools
from collections import Counter
from fractions import Fraction
from math import factorial


def cycle_count(perm):
    seen = [False] * len(perm)
    cycles = 0
    for i in range(len(perm)):
        if not seen[i]:
            cycles += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return cycles


def permutations_by_cycles(n):
    return Counter(cycle_count(p) for p in itertools.permutations(range(n)))


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def partitions_by_blocks(n):
    return Counter(len(p) for p in set_partitions(list(range(n))))


def compositions(n, k):
    for cuts in itertools.combinations(range(1, n), k - 1):
        edges = (0,) + cuts + (n,)
        yield tuple(b - a for a, b in zip(edges, edges[1:]))


def records(seq):
    best, count = None, 0
    for x in seq:
        if best is None or x > best:
            best, count = x, count + 1
    return count


def lah_pmf_by_records(n, k):
    """Law of the record count summed over blocks, by full enumeration."""
    tally = Counter()
    comps = list(compositions(n, k))
    for labels in itertools.permutations(range(n)):
        for comp in comps:
            pos, total = 0, 0
            for b in comp:
                total += records(labels[pos:pos + b])
                pos += b
            tally[total] += 1
    denom = factorial(n) * len(comps)
    return {j: Fraction(c, denom) for j, c in tally.items()}
