"""Independent reference computations used as test oracles.

Nothing here imports the package. Everything is plain Python over dicts
and nested lists so that agreement with the vectorized library code is
meaningful evidence rather than a re-run of the same arithmetic.
"""

import itertools
import math

FMT = "{:.9g}"


# -- information measures by direct summation ------------------------------

def marginal(joint, idx):
    out = {}
    for cell, p in joint.items():
        key = tuple(cell[i] for i in idx)
        out[key] = out.get(key, 0.0) + p
    return out


def entropy_direct(probs):
    return -sum(p * math.log2(p) for p in probs if p > 0)


def cmi_direct(joint, a, b, c=()):
    """sum_{a,b,c} p(a,b,c) log2[p(a,b,c) p(c) / (p(a,c) p(b,c))] over a cell dict."""
    a, b, c = list(a), list(b), list(c)
    pabc = marginal(joint, a + b + c)
    pac = marginal(joint, a + c)
    pbc = marginal(joint, b + c)
    pc = marginal(joint, c)
    na, nb = len(a), len(b)
    total = 0.0
    for key, p in pabc.items():
        if p <= 0:
            continue
        ka, kb, kc = key[:na], key[na:na + nb], key[na + nb:]
        total += p * math.log2(p * pc[kc] / (pac[ka + kc] * pbc[kb + kc]))
    return max(total, 0.0)


def table_to_cells(table):
    """Nested list (any depth) -> {index tuple: probability}."""
    cells = {}

    def walk(node, prefix):
        if isinstance(node, (list, tuple)):
            for i, sub in enumerate(node):
                walk(sub, prefix + (i,))
        else:
            cells[prefix] = float(node)

    walk(table, ())
    return cells


# -- joint laws, cell by cell ----------------------------------------------
# channel: nested list ch[x1][x2][y1][y2]

def inner_cells(p_u, p_v1_u, p_x1_v1, p_x2_u, ch):
    """Cells (u, v1, x1, x2, y1, y2)."""
    cells = {}
    for u, pu in enumerate(p_u):
        for v1, pv in enumerate(p_v1_u[u]):
            for x1, px1 in enumerate(p_x1_v1[v1]):
                for x2, px2 in enumerate(p_x2_u[u]):
                    for y1, row in enumerate(ch[x1][x2]):
                        for y2, py in enumerate(row):
                            cells[(u, v1, x1, x2, y1, y2)] = pu * pv * px1 * px2 * py
    return cells


def outer_cells(p_u, p_v1v2_u, p_x1_v1, p_x2_v2, ch):
    """Cells (u, v1, v2, x1, x2, y1, y2); p_v1v2_u[u][v1][v2]."""
    cells = {}
    for u, pu in enumerate(p_u):
        for v1, row_v1 in enumerate(p_v1v2_u[u]):
            for v2, pv in enumerate(row_v1):
                for x1, px1 in enumerate(p_x1_v1[v1]):
                    for x2, px2 in enumerate(p_x2_v2[v2]):
                        for y1, row in enumerate(ch[x1][x2]):
                            for y2, py in enumerate(row):
                                cells[(u, v1, v2, x1, x2, y1, y2)] = pu * pv * px1 * px2 * py
    return cells


# variable positions
IU, IV1, IX1, IX2, IY1, IY2 = range(6)
OU, OV1, OV2, OX1, OX2, OY1, OY2 = range(7)


def _clean(values):
    out = []
    for v in values:
        v = max(v, 0.0)
        out.append(0.0 if v < 1e-12 else v)
    return out


def inner_bounds(cells):
    """Right-hand sides for rows R1, R2, R0+R2, R1+R2, R0+R1+R2."""
    m = lambda a, b, c=(): cmi_direct(cells, a, b, c)
    leak = m([IV1], [IY2], [IX2, IU])
    return _clean([
        m([IV1], [IY1], [IX2, IU]) - leak,
        min(m([IX2], [IY1], [IV1, IU]), m([IX2], [IY2], [IU])),
        m([IU, IX2], [IY2]),
        m([IV1, IX2], [IY1], [IU]) - leak,
        m([IV1, IX2], [IY1]) - leak,
    ])


def outer_bounds(cells):
    """Right-hand sides for rows R0, R1, R2, R1+R2."""
    m = lambda a, b, c=(): cmi_direct(cells, a, b, c)
    leak = m([OV1], [OY2], [OU, OV2])
    return _clean([
        min(m([OU], [OY1]), m([OU], [OY2])),
        m([OV1], [OY1], [OU, OV2]) - leak,
        min(m([OV2], [OY1]), m([OV2], [OY2])),
        m([OV1, OV2], [OY1]) - leak,
    ])


INNER_ROWS = [(0, 1, 0), (0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
OUTER_ROWS = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 1, 1)]


# -- polytope vertices by intersection enumeration --------------------------

def _det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def vertices(rows, bounds, tol=1e-9):
    """Corners of {R >= 0, rows . R <= bounds} from every solvable plane triple (Cramer's rule)."""
    planes = [(list(r), b) for r, b in zip(rows, bounds)]
    planes += [([-1 if j == i else 0 for j in range(3)], 0.0) for i in range(3)]
    found = []
    for tri in itertools.combinations(planes, 3):
        a = [p[0] for p in tri]
        rhs = [p[1] for p in tri]
        d = _det3(a)
        if d == 0:
            continue
        point = []
        for col in range(3):
            m = [row[:] for row in a]
            for r in range(3):
                m[r][col] = rhs[r]
            point.append(_det3(m) / d)
        if all(sum(c * x for c, x in zip(coef, point)) <= b + tol * max(1.0, abs(b)) for coef, b in planes):
            found.append(tuple(0.0 if abs(x) < 1e-12 else max(x, 0.0) for x in point))
    return found


# -- lattice and reference sweeps -------------------------------------------

def simplex(size, k):
    """All probability vectors of length ``size`` with entries in multiples of 1/k."""
    out = []
    for combo in itertools.product(range(k + 1), repeat=size):
        if sum(combo) == k:
            out.append(tuple(c / k for c in combo))
    return out


def conditional_grid(rows, size, k):
    return list(itertools.product(simplex(size, k), repeat=rows))


def reference_inner_lines(ch, k, u_size=2, v1_size=2):
    x1_size, x2_size = len(ch), len(ch[0])
    lines = set()
    for p_u in simplex(u_size, k):
        for p_v1 in conditional_grid(u_size, v1_size, k):
            for p_x1 in conditional_grid(v1_size, x1_size, k):
                for p_x2 in conditional_grid(u_size, x2_size, k):
                    cells = inner_cells(p_u, p_v1, p_x1, p_x2, ch)
                    for v in vertices(INNER_ROWS, inner_bounds(cells)):
                        lines.add(tuple(v))
    return format_rows(lines)


def reference_outer_lines(ch, k, u_size=2, v1_size=2, v2_size=2):
    x1_size, x2_size = len(ch), len(ch[0])
    lines = set()
    for p_u in simplex(u_size, k):
        for flat in conditional_grid(u_size, v1_size * v2_size, k):
            p_v = [[[row[v2 * v1_size + v1] for v2 in range(v2_size)] for v1 in range(v1_size)]
                   for row in flat]
            for p_x1 in conditional_grid(v1_size, x1_size, k):
                for p_x2 in conditional_grid(v2_size, x2_size, k):
                    cells = outer_cells(p_u, p_v, p_x1, p_x2, ch)
                    for v in vertices(OUTER_ROWS, outer_bounds(cells)):
                        lines.add(tuple(v))
    return format_rows(lines)


def format_rows(points):
    """Unique points at 9 significant digits, sorted numerically."""
    uniq = {tuple(FMT.format(x) for x in p) for p in points}
    return [",".join(r) for r in sorted(uniq, key=lambda r: tuple(float(x) for x in r))]


# -- Pareto frontier ---------------------------------------------------------

def pareto(points):
    """O(n^2) scan: keep points that no other point weakly dominates with one strict gain."""
    keep = []
    for i, p in enumerate(points):
        dominated = False
        for j, q in enumerate(points):
            if i != j and all(b >= a for a, b in zip(p, q)) and any(b > a for a, b in zip(p, q)):
                dominated = True
                break
        if not dominated:
            keep.append(tuple(p))
    return sorted(set(keep))


# -- coding oracles ----------------------------------------------------------
# law: dict with p_u, p_v1_given_u, p_x1_given_v1, p_x2_given_u as nested lists

def _target_laws(law, ch):
    p_u, pv, px1, px2 = law["p_u"], law["p_v1_given_u"], law["p_x1_given_v1"], law["p_x2_given_u"]
    nu, nv, nx1, nx2 = len(p_u), len(pv[0]), len(px1[0]), len(px2[0])
    ny1, ny2 = len(ch[0][0]), len(ch[0][0][0])
    p1, p2 = {}, {}
    for u, v, a, b, y1, y2 in itertools.product(range(nu), range(nv), range(nx1), range(nx2),
                                                range(ny1), range(ny2)):
        p = p_u[u] * pv[u][v] * px1[v][a] * px2[u][b] * ch[a][b][y1][y2]
        p1[(u, v, b, y1)] = p1.get((u, v, b, y1), 0.0) + p
        p2[(u, b, y2)] = p2.get((u, b, y2), 0.0) + p
    return p1, p2


def typical(letters, law, eps):
    """Strong typicality of a list of joint letters against ``law`` (dict over the full alphabet)."""
    n = len(letters)
    counts = {}
    for a in letters:
        counts[a] = counts.get(a, 0) + 1
    size = len(law)
    for a, p in law.items():
        c = counts.get(a, 0)
        if c and p <= 0:
            return False
        if abs(c / n - p) > eps * p + eps / size + 1e-12:
            return False
    return all(a in law for a in counts)


class ReferenceDecoders:
    """Exhaustive joint-typicality scans over every message tuple."""

    def __init__(self, cb, law, ch, eps):
        self.u, self.v1, self.x2 = cb["u_words"], cb["v1_words"], cb["x2_words"]
        self.p1, self.p2 = _target_laws(law, ch)
        self.eps = eps
        self.m0, self.m1 = len(self.v1), len(self.v1[0])
        self.L, self.m2 = len(self.v1[0][0]), len(self.x2[0])

    def decode1(self, y1):
        hits = set()
        for w0, w1, l, w2 in itertools.product(range(self.m0), range(self.m1), range(self.L), range(self.m2)):
            letters = list(zip(self.u[w0], self.v1[w0][w1][l], self.x2[w0][w2], y1))
            if typical(letters, self.p1, self.eps):
                hits.add((w0, w1, w2))
        return hits.pop() if len(hits) == 1 else None

    def decode2(self, y2):
        hits = [(w0, w2) for w0, w2 in itertools.product(range(self.m0), range(self.m2))
                if typical(list(zip(self.u[w0], self.x2[w0][w2], y2)), self.p2, self.eps)]
        return hits[0] if len(hits) == 1 else None


def exact_error_probability(cb, law, ch, eps):
    """Union error probability summed over messages, bin index, X1 draws and both outputs.

    X1 is drawn symbol by symbol, so its sum factors into a per-position
    mixture q_i(y1, y2) = sum_x1 p(x1 | v1_i) p(y1, y2 | x1, x2_i).
    """
    dec = ReferenceDecoders(cb, law, ch, eps)
    px1 = law["p_x1_given_v1"]
    nx1, ny1, ny2 = len(ch), len(ch[0][0]), len(ch[0][0][0])
    n = len(cb["u_words"][0])
    ys1 = list(itertools.product(range(ny1), repeat=n))
    ys2 = list(itertools.product(range(ny2), repeat=n))
    d1 = {y: dec.decode1(y) for y in ys1}
    d2 = {y: dec.decode2(y) for y in ys2}
    weight = 1.0 / (dec.m0 * dec.m1 * dec.m2 * dec.L)
    success = 0.0
    for w0, w1, w2, l in itertools.product(range(dec.m0), range(dec.m1), range(dec.m2), range(dec.L)):
        v1 = dec.v1[w0][w1][l]
        x2 = dec.x2[w0][w2]
        q = [[[sum(px1[v1[i]][a] * ch[a][x2[i]][y1][y2] for a in range(nx1)) for y2 in range(ny2)]
              for y1 in range(ny1)] for i in range(n)]
        good1 = [y for y in ys1 if d1[y] == (w0, w1, w2)]
        good2 = [y for y in ys2 if d2[y] == (w0, w2)]
        for y1 in good1:
            for y2 in good2:
                p = weight
                for i in range(n):
                    p *= q[i][y1[i]][y2[i]]
                success += p
    return 1.0 - success


def total_enumeration_equivocation(cb, law, ch):
    """H(W1 | Y2^n) / n from the full joint table of (W0, W1, W2, l, X1^n, Y2^n)."""
    u, v1w, x2w = cb["u_words"], cb["v1_words"], cb["x2_words"]
    px1 = law["p_x1_given_v1"]
    m0, m1, L, m2 = len(v1w), len(v1w[0]), len(v1w[0][0]), len(x2w[0])
    n = len(u[0])
    nx1, ny1, ny2 = len(ch), len(ch[0][0]), len(ch[0][0][0])
    table = {}
    for w0, w1, w2, l in itertools.product(range(m0), range(m1), range(m2), range(L)):
        for x1 in itertools.product(range(nx1), repeat=n):
            for y2 in itertools.product(range(ny2), repeat=n):
                p = 1.0 / (m0 * m1 * m2 * L)
                for i in range(n):
                    a, b = x1[i], x2w[w0][w2][i]
                    p *= px1[v1w[w0][w1][l][i]][a] * sum(ch[a][b][y][y2[i]] for y in range(ny1))
                table[(w0, w1, w2, l, x1, y2)] = p
    p_w1y2, p_y2 = {}, {}
    for (w0, w1, w2, l, x1, y2), p in table.items():
        p_w1y2[(w1, y2)] = p_w1y2.get((w1, y2), 0.0) + p
        p_y2[y2] = p_y2.get(y2, 0.0) + p
    return (entropy_direct(p_w1y2.values()) - entropy_direct(p_y2.values())) / n


# -- less-noisy fine grid ----------------------------------------------------

def less_noisy_scan(ch, p_x1, v2_size, k):
    """Smallest I(V2;Y1) - I(V2;Y2) over the p(v2, x2) lattice, X1 independent from p_x1."""
    nx1, nx2 = len(ch), len(ch[0])
    worst = math.inf
    for flat in simplex(v2_size * nx2, k):
        cells = {}
        for v in range(v2_size):
            for b in range(nx2):
                pvb = flat[v * nx2 + b]
                if pvb == 0:
                    continue
                for a in range(nx1):
                    for y1, row in enumerate(ch[a][b]):
                        for y2, py in enumerate(row):
                            key = (v, y1, y2)
                            cells[key] = cells.get(key, 0.0) + pvb * p_x1[a] * py
        worst = min(worst, cmi_direct(cells, [0], [1]) - cmi_direct(cells, [0], [2]))
    return worst
