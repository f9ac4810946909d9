"""Maximum-weight matching on general graphs (Edmonds' blossom algorithm).

O(n**3) primal-dual implementation in the style of Galil's presentation.
Vertex duals are stored doubled so integer weights keep every quantity an
integer; the toric metric only ever produces integers.

Terminology used below:
    endpoint p of edge k is ``2k`` (first vertex) or ``2k + 1`` (second vertex);
    ``p ^ 1`` is the other end of the same edge.
    labels: 0 free, 1 outer (S), 2 inner (T).  Bit 4 marks a breadcrumb while
    scanning for a common ancestor.
"""

from __future__ import annotations

from typing import Sequence

Edge = tuple[int, int, float]


def _half(x):
    return x // 2 if isinstance(x, int) else x / 2


def max_weight_matching(edges: Sequence[Edge], max_cardinality: bool = False) -> list[int]:
    """Return ``mate`` where ``mate[v]`` is v's partner or -1.

    With ``max_cardinality`` the result is the heaviest among the matchings of
    largest size.
    """
    if not edges:
        return []

    n_edge = len(edges)
    n = 1 + max(max(i, j) for i, j, _ in edges)
    for i, j, _ in edges:
        if i == j or i < 0 or j < 0:
            raise ValueError(f"invalid edge ({i}, {j})")
    max_w = max(0, max(w for _, _, w in edges))

    endpoint = [edges[p >> 1][p & 1] for p in range(2 * n_edge)]
    neighbend: list[list[int]] = [[] for _ in range(n)]
    for k, (i, j, _) in enumerate(edges):
        neighbend[i].append(2 * k + 1)
        neighbend[j].append(2 * k)

    mate = [-1] * n  # remote endpoint of the matched edge
    label = [0] * (2 * n)
    labelend = [-1] * (2 * n)
    inblossom = list(range(n))
    parent = [-1] * (2 * n)
    childs: list = [None] * (2 * n)
    base = list(range(n)) + [-1] * n
    endps: list = [None] * (2 * n)
    bestedge = [-1] * (2 * n)
    bestedges: list = [None] * (2 * n)
    unused = list(range(n, 2 * n))
    dual = [max_w] * n + [0] * n
    allowed = [False] * n_edge
    queue: list[int] = []

    def slack(k: int):
        i, j, w = edges[k]
        return dual[i] + dual[j] - 2 * w

    def leaves(b: int):
        if b < n:
            yield b
            return
        for t in childs[b]:
            if t < n:
                yield t
            else:
                yield from leaves(t)

    def assign_label(w: int, t: int, p: int) -> None:
        b = inblossom[w]
        label[w] = label[b] = t
        labelend[w] = labelend[b] = p
        bestedge[w] = bestedge[b] = -1
        if t == 1:
            queue.extend(leaves(b))
        else:
            # inner blossom: its mate becomes outer
            mb = mate[base[b]]
            assign_label(endpoint[mb], 1, mb ^ 1)

    def scan_blossom(v: int, w: int) -> int:
        """Trace back from v and w; return the base of a new blossom or -1."""
        path = []
        found = -1
        while v != -1 or w != -1:
            b = inblossom[v]
            if label[b] & 4:
                found = base[b]
                break
            path.append(b)
            label[b] = 5
            if labelend[b] == -1:
                v = -1
            else:
                v = endpoint[labelend[b]]
                b = inblossom[v]
                v = endpoint[labelend[b]]
            if w != -1:
                v, w = w, v
        for b in path:
            label[b] = 1
        return found

    def add_blossom(bbase: int, k: int) -> None:
        v, w, _ = edges[k]
        bb = inblossom[bbase]
        bv = inblossom[v]
        bw = inblossom[w]
        b = unused.pop()
        base[b] = bbase
        parent[b] = -1
        parent[bb] = b
        path: list[int] = []
        ends: list[int] = []
        childs[b] = path
        endps[b] = ends
        while bv != bb:
            parent[bv] = b
            path.append(bv)
            ends.append(labelend[bv])
            v = endpoint[labelend[bv]]
            bv = inblossom[v]
        path.append(bb)
        path.reverse()
        ends.reverse()
        ends.append(2 * k)
        while bw != bb:
            parent[bw] = b
            path.append(bw)
            ends.append(labelend[bw] ^ 1)
            w = endpoint[labelend[bw]]
            bw = inblossom[w]
        label[b] = 1
        labelend[b] = labelend[bb]
        dual[b] = 0
        for v in leaves(b):
            if label[inblossom[v]] == 2:
                # former inner vertices become outer and must be scanned
                queue.append(v)
            inblossom[v] = b
        best_to = [-1] * (2 * n)
        for bv in path:
            if bestedges[bv] is None:
                lists = [[p >> 1 for p in neighbend[u]] for u in leaves(bv)]
            else:
                lists = [bestedges[bv]]
            for lst in lists:
                for kk in lst:
                    i, j, _ = edges[kk]
                    if inblossom[j] == b:
                        i, j = j, i
                    bj = inblossom[j]
                    if bj != b and label[bj] == 1 and (best_to[bj] == -1 or slack(kk) < slack(best_to[bj])):
                        best_to[bj] = kk
            bestedges[bv] = None
            bestedge[bv] = -1
        bestedges[b] = [kk for kk in best_to if kk != -1]
        bestedge[b] = -1
        for kk in bestedges[b]:
            if bestedge[b] == -1 or slack(kk) < slack(bestedge[b]):
                bestedge[b] = kk

    def expand_blossom(b: int, endstage: bool) -> None:
        for s in childs[b]:
            parent[s] = -1
            if s < n:
                inblossom[s] = s
            elif endstage and dual[s] == 0:
                expand_blossom(s, endstage)
            else:
                for v in leaves(s):
                    inblossom[v] = s
        if not endstage and label[b] == 2:
            # relabel the even-length path from the entry child to the base
            entry = inblossom[endpoint[labelend[b] ^ 1]]
            j = childs[b].index(entry)
            if j & 1:
                j -= len(childs[b])
                step, trick = 1, 0
            else:
                step, trick = -1, 1
            p = labelend[b]
            while j != 0:
                label[endpoint[p ^ 1]] = 0
                label[endpoint[endps[b][j - trick] ^ trick ^ 1]] = 0
                assign_label(endpoint[p ^ 1], 2, p)
                allowed[endps[b][j - trick] >> 1] = True
                j += step
                p = endps[b][j - trick] ^ trick
                allowed[p >> 1] = True
                j += step
            bv = childs[b][j]
            label[endpoint[p ^ 1]] = label[bv] = 2
            labelend[endpoint[p ^ 1]] = labelend[bv] = p
            bestedge[bv] = -1
            j += step
            while childs[b][j] != entry:
                bv = childs[b][j]
                if label[bv] == 1:
                    j += step
                    continue
                v = -1
                for v in leaves(bv):
                    if label[v] != 0:
                        break
                if label[v] != 0:
                    label[v] = 0
                    label[endpoint[mate[base[bv]]]] = 0
                    assign_label(v, 2, labelend[v])
                j += step
        label[b] = labelend[b] = -1
        childs[b] = endps[b] = None
        base[b] = -1
        bestedges[b] = None
        bestedge[b] = -1
        unused.append(b)

    def augment_blossom(b: int, v: int) -> None:
        t = v
        while parent[t] != b:
            t = parent[t]
        if t >= n:
            augment_blossom(t, v)
        i = j = childs[b].index(t)
        if i & 1:
            j -= len(childs[b])
            step, trick = 1, 0
        else:
            step, trick = -1, 1
        while j != 0:
            j += step
            t = childs[b][j]
            p = endps[b][j - trick] ^ trick
            if t >= n:
                augment_blossom(t, endpoint[p])
            j += step
            t = childs[b][j]
            if t >= n:
                augment_blossom(t, endpoint[p ^ 1])
            mate[endpoint[p]] = p ^ 1
            mate[endpoint[p ^ 1]] = p
        childs[b] = childs[b][i:] + childs[b][:i]
        endps[b] = endps[b][i:] + endps[b][:i]
        base[b] = base[childs[b][0]]

    def augment_matching(k: int) -> None:
        v, w, _ = edges[k]
        for s, p in ((v, 2 * k + 1), (w, 2 * k)):
            while True:
                bs = inblossom[s]
                if bs >= n:
                    augment_blossom(bs, s)
                mate[s] = p
                if labelend[bs] == -1:
                    break
                t = endpoint[labelend[bs]]
                bt = inblossom[t]
                s = endpoint[labelend[bt]]
                j = endpoint[labelend[bt] ^ 1]
                if bt >= n:
                    augment_blossom(bt, j)
                mate[j] = labelend[bt]
                p = labelend[bt] ^ 1

    for _stage in range(n):
        label[:] = [0] * (2 * n)
        bestedge[:] = [-1] * (2 * n)
        bestedges[n:] = [None] * n
        allowed[:] = [False] * n_edge
        queue.clear()
        for v in range(n):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                assign_label(v, 1, -1)

        augmented = False
        while True:
            while queue and not augmented:
                v = queue.pop()
                for p in neighbend[v]:
                    k = p >> 1
                    w = endpoint[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    if not allowed[k]:
                        kslack = slack(k)
                        if kslack <= 0:
                            allowed[k] = True
                    if allowed[k]:
                        if label[inblossom[w]] == 0:
                            assign_label(w, 2, p ^ 1)
                        elif label[inblossom[w]] == 1:
                            b = scan_blossom(v, w)
                            if b >= 0:
                                add_blossom(b, k)
                            else:
                                augment_matching(k)
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < slack(bestedge[b]):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < slack(bestedge[w]):
                            bestedge[w] = k
            if augmented:
                break

            # no augmenting path on tight edges: choose a dual adjustment
            kind = -1
            delta = None
            dedge = dblossom = -1
            if not max_cardinality:
                kind = 1
                delta = min(dual[:n])
            for v in range(n):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    s = slack(bestedge[v])
                    if kind == -1 or s < delta:
                        delta, kind, dedge = s, 2, bestedge[v]
            for b in range(2 * n):
                if parent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    s = _half(slack(bestedge[b]))
                    if kind == -1 or s < delta:
                        delta, kind, dedge = s, 3, bestedge[b]
            for b in range(n, 2 * n):
                if base[b] >= 0 and parent[b] == -1 and label[b] == 2 and (kind == -1 or dual[b] < delta):
                    delta, kind, dblossom = dual[b], 4, b
            if kind == -1:
                # max-cardinality: no further improvement possible
                kind = 1
                delta = max(0, min(dual[:n]))

            for v in range(n):
                lb = label[inblossom[v]]
                if lb == 1:
                    dual[v] -= delta
                elif lb == 2:
                    dual[v] += delta
            for b in range(n, 2 * n):
                if base[b] >= 0 and parent[b] == -1:
                    if label[b] == 1:
                        dual[b] += delta
                    elif label[b] == 2:
                        dual[b] -= delta

            if kind == 1:
                break
            if kind == 2:
                allowed[dedge] = True
                i, j, _ = edges[dedge]
                if label[inblossom[i]] == 0:
                    i = j
                queue.append(i)
            elif kind == 3:
                allowed[dedge] = True
                queue.append(edges[dedge][0])
            else:
                expand_blossom(dblossom, False)

        if not augmented:
            break
        for b in range(n, 2 * n):
            if parent[b] == -1 and base[b] >= 0 and label[b] == 1 and dual[b] == 0:
                expand_blossom(b, True)

    return [endpoint[p] if p >= 0 else -1 for p in mate]


def min_weight_perfect_matching(weights: Sequence[Sequence[int]]) -> list[tuple[int, int]]:
    """Minimum-weight perfect matching of a complete graph given by a symmetric matrix.

    Weights are flipped to ``W + 1 - w`` so that the max-cardinality,
    maximum-weight matching is the cheapest perfect one.
    """
    n = len(weights)
    if n % 2:
        raise ValueError(f"perfect matching needs an even number of nodes, got {n}")
    if n == 0:
        return []
    if n == 2:
        return [(0, 1)]
    top = max(max(row) for row in weights) + 1
    edges = [(i, j, top - weights[i][j]) for i in range(n) for j in range(i + 1, n)]
    mate = max_weight_matching(edges, max_cardinality=True)
    pairs = sorted((i, j) for i, j in enumerate(mate) if i < j)
    if len(pairs) != n // 2:
        raise RuntimeError("blossom returned an imperfect matching on a complete graph")
    return pairs
