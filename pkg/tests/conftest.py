"""Independent brute-force oracles shared by the test modules."""

import math
from itertools import combinations

import numpy as np
import pytest


def oracle_simplices(mask):
    """Enumerate (dim, vertex tuple) of the diagonal triangulation by plain loops.

    Vertices are (x, y) with x = col - h, y = h - row.
    """
    mask = np.asarray(mask, dtype=bool)
    n = mask.shape[0]
    h = (n - 1) // 2
    pt = lambda r, c: (c - h, h - r)
    on = lambda r, c: 0 <= r < n and 0 <= c < n and mask[r, c]
    out = []
    for r in range(n):
        for c in range(n):
            if on(r, c):
                out.append((0, (pt(r, c),)))
            for dr, dc in ((0, 1), (1, 0), (1, 1)):
                if on(r, c) and on(r + dr, c + dc):
                    out.append((1, (pt(r, c), pt(r + dr, c + dc))))
            if on(r, c) and on(r, c + 1) and on(r + 1, c + 1):
                out.append((2, (pt(r, c), pt(r, c + 1), pt(r + 1, c + 1))))
            if on(r, c) and on(r + 1, c) and on(r + 1, c + 1):
                out.append((2, (pt(r, c), pt(r + 1, c), pt(r + 1, c + 1))))
    return out


def oracle_weight(verts, weight_of, extension):
    ws = [weight_of[v] for v in verts]
    if extension == "max":
        return max(ws)
    if extension == "min":
        return min(ws)
    return sum(ws) / len(ws)


def oracle_wecf_value(simplices, weight_of, extension, theta, t):
    """Direct sum of (-1)^dim * weight over simplices with height <= t."""
    c, s = math.cos(theta), math.sin(theta)
    total = 0.0
    for dim, verts in simplices:
        height = max(round(x * c + y * s, 10) for x, y in verts)
        if height <= t:
            total += (-1) ** dim * oracle_weight(verts, weight_of, extension)
    return total


def random_mask_weights(rng, n):
    mask = rng.random((n, n)) < rng.uniform(0.3, 1.0)
    img = np.where(mask, 1.0 - rng.random((n, n)), 0.0)
    return mask, img


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def faces(verts):
    return [tuple(f) for k in range(1, len(verts)) for f in combinations(verts, k)]


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
