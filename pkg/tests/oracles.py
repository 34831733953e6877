"""Slow, independent reference implementations used as test oracles.

Everything here works patch by patch and bit by bit with plain Python
loops.  LDP and BSIF responses are computed in exact rational arithmetic
on the raw (LDP) or mean-centered (BSIF) 3x3 region, so the oracle does
not share the fast path's floating-point route.
"""

from fractions import Fraction
import math

import numpy as np

# clockwise from top-left, written out independently of the package
CLOCKWISE = [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0)]

KIRSCH = [
    [[-3, -3, 5], [-3, 0, 5], [-3, -3, 5]],     # E
    [[-3, 5, 5], [-3, 0, 5], [-3, -3, -3]],     # NE
    [[5, 5, 5], [-3, 0, -3], [-3, -3, -3]],     # N
    [[5, 5, -3], [5, 0, -3], [-3, -3, -3]],     # NW
    [[5, -3, -3], [5, 0, -3], [5, -3, -3]],     # W
    [[-3, -3, -3], [5, 0, -3], [5, 5, -3]],     # SW
    [[-3, -3, -3], [-3, 0, -3], [5, 5, 5]],     # S
    [[-3, -3, -3], [-3, 0, 5], [-3, 5, 5]],     # SE
]


def patches(m):
    m = np.asarray(m, dtype=float)
    for r in range(1, m.shape[0] - 1):
        for c in range(1, m.shape[1] - 1):
            yield r - 1, c - 1, [[float(m[r + i - 1, c + j - 1]) for j in range(3)] for i in range(3)]


def _neighbors(p):
    return [p[i][j] for i, j in CLOCKWISE]


def lph(p):
    code = 0
    for n, v in enumerate(_neighbors(p)):
        if v - p[1][1] >= 0:
            code += 2 ** n
    return code


def lbp(p):
    code = 0
    for n, v in enumerate(_neighbors(p)):
        if v > p[1][1]:
            code += 2 ** n
    return code


def ltrp(p):
    s = [1 if v >= p[1][1] else 0 for v in _neighbors(p)]
    code = 0
    for n in range(8):
        if s[n] != s[(n + 1) % 8]:
            code += 2 ** n
    return code


def ltep(p, thr):
    c = Fraction(p[1][1])
    t = Fraction(thr)
    upper = lower = 0
    for n, v in enumerate(_neighbors(p)):
        v = Fraction(v)
        if v > c + t:
            upper += 2 ** n
        elif v < c - t:
            lower += 2 ** n
    return upper, lower


def kirsch_responses(p):
    out = []
    for mask in KIRSCH:
        acc = Fraction(0)
        for i in range(3):
            for j in range(3):
                acc += mask[i][j] * Fraction(p[i][j])
        out.append(acc)
    return out


def ldp(p, rtol=1e-9):
    """Top three |Kirsch| responses; within rtol * 30 * max|ring| counts as a tie."""
    mags = [abs(r) for r in kirsch_responses(p)]
    tol = Fraction(rtol) * 30 * max(abs(Fraction(v)) for v in _neighbors(p))
    chosen = []
    for _ in range(3):
        rest = [o for o in range(8) if o not in chosen]
        top = max(mags[o] for o in rest)
        for o in rest:
            if mags[o] >= top - tol:
                chosen.append(o)
                break
    return sum(2 ** o for o in chosen)


def bsif(p, filters):
    vals = [Fraction(p[i][j]) for i in range(3) for j in range(3)]
    mean = sum(vals) / 9
    code = 0
    for f, filt in enumerate(filters):
        flat = [Fraction(float(x)) for x in np.asarray(filt).reshape(-1)]
        acc = sum(w * (v - mean) for w, v in zip(flat, vals))
        if acc > 0:
            code += 2 ** f
    return code


def code_matrix(m, kind, thr=0.02, filters=None):
    m = np.asarray(m, dtype=float)
    shape = (m.shape[0] - 2, m.shape[1] - 2)
    if kind == "LTEP":
        out = np.zeros((2,) + shape, dtype=np.int64)
        for r, c, p in patches(m):
            out[0, r, c], out[1, r, c] = ltep(p, thr)
        return out
    fn = {"LPH": lph, "LBP": lbp, "LTRP": ltrp, "LDP": ldp}.get(kind)
    out = np.zeros(shape, dtype=np.int64)
    for r, c, p in patches(m):
        out[r, c] = bsif(p, filters) if kind == "BSIF" else fn(p)
    return out


def ldp_table():
    """Ascending list of bytes with exactly three bits set."""
    return [b for b in range(256) if bin(b).count("1") == 3]


# -- classifiers -------------------------------------------------------------

def iknn_exhaustive(train, labels, query, k, eps=1e-9):
    """Class-weighted KNN over the whole training set (what IKNN does with m=1).

    Returns (label, neighbor indices).
    """
    classes = []
    for lab in labels:
        if lab not in classes:
            classes.append(lab)
    n = len(labels)
    prior = {c: sum(1 for lab in labels if lab == c) / n for c in classes}
    entropy = -sum(a * math.log2(a) for a in prior.values())
    weight = {c: min(10.0, max(0.1, -math.log2(prior[c]) / entropy)) for c in classes}
    dists = []
    for i, (row, lab) in enumerate(zip(train, labels)):
        d = math.sqrt(sum((float(a) - float(b)) ** 2 for a, b in zip(row, query)))
        dists.append((math.sqrt(weight[lab]) * d, i))
    dists.sort()
    chosen = dists[:k]
    votes = {c: 0.0 for c in classes}
    for wd, i in chosen:
        votes[labels[i]] += weight[labels[i]] / (wd + eps)
    best = classes[0]
    for c in classes:
        if votes[c] > votes[best]:
            best = c
    return best, [i for _, i in chosen]


def knn_exhaustive(train, labels, query, k, metric):
    classes = []
    for lab in labels:
        if lab not in classes:
            classes.append(lab)
    scored = []
    for i, row in enumerate(train):
        row = [float(x) for x in row]
        q = [float(x) for x in query]
        if metric == "cosine":
            dot = sum(a * b for a, b in zip(row, q))
            na = math.sqrt(sum(a * a for a in row))
            nb = math.sqrt(sum(b * b for b in q))
            d = 1.0 - dot / (na * nb)
        else:
            d = math.sqrt(sum((a - b) ** 2 for a, b in zip(row, q)))
        scored.append((d, i))
    scored.sort()
    votes = {c: 0.0 for c in classes}
    for d, i in scored[:k]:
        votes[labels[i]] += 1.0 / (d + 1e-9) if metric == "weighted" else 1.0
    best = classes[0]
    for c in classes:
        if votes[c] > votes[best]:
            best = c
    return best
