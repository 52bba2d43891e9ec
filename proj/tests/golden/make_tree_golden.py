"""Writes trees_p{1..6}.txt: every children-count sequence of length p that
codes one ordered tree, in increasing lexicographic order.

Brute force over {0..p-1}^p with the walk criterion, independent of the C++
enumerator it is compared against.
"""
import itertools
import pathlib

here = pathlib.Path(__file__).parent
for p in range(1, 7):
    rows = []
    for counts in itertools.product(range(p), repeat=p):
        x, ok = 0, True
        for i, k in enumerate(counts):
            x += k - 1
            if x < 0 and i < p - 1:
                ok = False
                break
        if ok and x == -1:
            rows.append(" ".join(map(str, counts)))
    rows.sort(key=lambda s: tuple(map(int, s.split())))
    (here / f"trees_p{p}.txt").write_text("\n".join(rows) + "\n")
    print(p, len(rows))
