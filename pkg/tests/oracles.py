"""Independent brute-force oracles used by the tests.

Deliberately naive: plain-Python counting over value tuples, no shared code
with the package's estimators or the greedy ranking engine.
"""

import math
from collections import Counter


def bf_entropy(*columns) -> float:
    """Joint entropy in bits of one or more aligned code sequences."""
    rows = list(zip(*[list(c) for c in columns]))
    n = len(rows)
    counts = Counter(rows)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


def bf_mi(x, y) -> float:
    return max(0.0, bf_entropy(x) + bf_entropy(y) - bf_entropy(x, y))


def bf_cmi(x, y, z) -> float:
    """I(X;Y|Z) via the chain rule on joint entropies."""
    return max(0.0, bf_entropy(x, z) + bf_entropy(y, z) - bf_entropy(z) - bf_entropy(x, y, z))


def _pair(xi, xj):
    return [(a, b) for a, b in zip(xi, xj)]


def bf_criterion_score(algorithm, columns, label, i, selected, beta=1.0):
    """Score candidate column i against the selected index list, computing
    every information quantity from scratch."""
    rel = bf_mi(columns[i], label)
    if algorithm == "mRMR":
        if not selected:
            return rel
        return rel - sum(bf_mi(columns[i], columns[j]) for j in selected) / len(selected)
    if algorithm == "MIFS":
        return rel - beta * sum(bf_mi(columns[i], columns[j]) for j in selected)
    if algorithm == "CIFE":
        return rel - sum(
            bf_mi(columns[i], columns[j]) - bf_cmi(columns[i], columns[j], label)
            for j in selected)
    if algorithm == "JMI":
        if not selected:
            return rel
        return rel - sum(
            bf_mi(columns[i], columns[j]) - bf_cmi(columns[i], columns[j], label)
            for j in selected) / len(selected)
    if algorithm == "CMIM":
        if not selected:
            return rel
        return min(bf_cmi(columns[i], label, columns[j]) for j in selected)
    if algorithm == "DISR":
        if not selected:
            h = bf_entropy(columns[i], label)
            return rel / h if h > 0 else 0.0
        total = 0.0
        for j in selected:
            pair = _pair(columns[i], columns[j])
            h = bf_entropy(pair, label)
            total += (bf_mi(pair, label) / h) if h > 0 else 0.0
        return total
    raise ValueError(algorithm)


def bf_greedy_ranking(algorithm, columns, label, beta=1.0, tie_tol=1e-12):
    """Exhaustive per-step evaluation of the criterion; scores within
    tie_tol of the maximum are tied, smallest original index wins."""
    remaining = list(range(len(columns)))
    selected = []
    order = []
    while remaining:
        scores = [bf_criterion_score(algorithm, columns, label, i, selected, beta)
                  for i in remaining]
        top = max(scores)
        best_pos = next(p for p, s in enumerate(scores) if s >= top - tie_tol)
        idx = remaining.pop(best_pos)
        selected.append(idx)
        order.append((idx, scores[best_pos]))
    return order
