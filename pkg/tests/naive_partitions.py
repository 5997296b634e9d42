"""Set-comprehension references for the partition operations.

Partitions are frozensets of frozensets; marks are sets of blocks.  Nothing
here is shared with the library implementation.
"""

from itertools import combinations

from twvrp.partitions import Partition


def all_partitions(universe):
    universe = list(universe)
    if not universe:
        yield frozenset()
        return
    first, rest = universe[0], universe[1:]
    for p in all_partitions(rest):
        yield p | {frozenset([first])}
        for block in p:
            yield (p - {block}) | {block | {first}}


def subsets(s):
    s = list(s)
    for r in range(len(s) + 1):
        for c in combinations(s, r):
            yield frozenset(c)


def to_sets(p: Partition):
    return frozenset(frozenset(b) for b in p.blocks())


def marks_to_sets(p: Partition, marked):
    return frozenset(frozenset(p.block_of(l)) for l in marked)


def from_sets(blocks, universe=()):
    if not blocks:
        return Partition(sorted(universe), sorted(universe))
    return Partition.from_blocks(blocks)


def marks_from_sets(marked_blocks):
    return frozenset(min(b) for b in marked_blocks)


def refines(p, q):
    return all(any(x <= y for y in q) for x in p)


def coarsen_join(p, q):
    universe = set().union(*p) if p else set()
    upper = [r for r in all_partitions(sorted(universe)) if refines(p, r) and refines(q, r)]
    finest = [r for r in upper if all(refines(r, s) for s in upper)]
    assert len(finest) == 1
    return finest[0]


def restrict(p, v):
    return frozenset(x & v for x in p if x & v)


def extend(p, v):
    universe = set().union(*p) if p else set()
    return p | {frozenset([x]) for x in v - universe}


def singleton_except(universe, v):
    return frozenset([frozenset(v)] if v else []) | {frozenset([u]) for u in universe - v}


def _marks_above(new_p, marks):
    return frozenset(y for y in new_p if any(x <= y for x in marks))


def glue(u, v, p, marks):
    universe = set().union(*p)
    q = coarsen_join(p, singleton_except(universe, {u, v}))
    return q, _marks_above(q, marks)


def insert(v, depots, p, marks):
    return p | {frozenset([x]) for x in v}, marks | {frozenset([x]) for x in v & depots}


def project(v, p, marks):
    universe = set().union(*p) if p else set()
    if not all(any(x in blk and (blk - v) for blk in p) for x in v):
        return None
    return restrict(p, universe - v), frozenset(x - v for x in marks)


def detach(v, p, marks):
    if not all(x <= v and x in marks for x in p if x & v):
        return None
    return frozenset(x for x in p if not x & v), frozenset(x for x in marks if not x <= v)


def join(p, pm, q, qm):
    r = coarsen_join(p, q)
    return r, _marks_above(r, pm | qm)


def rmc(triples):
    best = {}
    for p, m, w in triples:
        if (p, m) not in best or w < best[(p, m)]:
            best[(p, m)] = w
    return {(p, m, w) for (p, m), w in best.items()}
