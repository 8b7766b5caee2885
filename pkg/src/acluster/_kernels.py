"""Hot simulation kernels with a compiled and a pure-Python backend.

Each kernel is written once as a plain function over numpy arrays and an
np.random.Generator.  When numba is importable and ACLUSTER_DISABLE_NUMBA is
unset, the same source is compiled with @njit; both backends consume
identical random streams, so a fixed seed yields identical outputs either
way.  Use get_kernel(name, backend) to force a specific path, e.g. for the
benchmark in benchmarks/bench_kernels.py.

Kernels return a status code (0 = ok); wrappers in harness raise on nonzero.
All integer state is int64 to keep wraparound semantics identical across
backends.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_ENV = "ACLUSTER_DISABLE_NUMBA"

try:
    if os.environ.get(DISABLE_ENV):
        _numba = None
    else:
        import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None


def numba_enabled() -> bool:
    return _numba is not None


def default_backend() -> str:
    return "numba" if _numba is not None else "pure"


# status codes shared by all kernels
OK = 0
ERR_POOL = 3
ERR_DRIFT = 4
ERR_STALL = 5


def _universal_counts(labels2d, out):
    """Query counts of the pivot strategy, one row of truth labels per trial.

    The block holding the largest remaining item is resolved first at a cost
    of (remaining - 1) queries, then removed; repeat until at most one item
    is left.
    """
    trials, n = labels2d.shape
    for t in range(trials):
        labels = labels2d[t]
        lookup = np.full(int(labels.max()) + 1, -1, dtype=np.int64)
        sizes = np.zeros(n, dtype=np.int64)
        blockat = np.full(n, -1, dtype=np.int64)
        nb = 0
        for i in range(n):
            b = lookup[labels[i]]
            if b < 0:
                b = nb
                lookup[labels[i]] = b
                nb += 1
            sizes[b] += 1
            blockat[i] = -1
        # mark each block at the position of its largest member
        seen = np.zeros(nb, dtype=np.int64)
        for i in range(n - 1, -1, -1):
            b = lookup[labels[i]]
            if seen[b] == 0:
                seen[b] = 1
                blockat[i] = b
        count = 0
        m = n
        for i in range(n - 1, -1, -1):
            b = blockat[i]
            if b >= 0:
                if m <= 1:
                    break
                count += m - 1
                m -= sizes[b]
        out[t] = count
    return OK


def _clique_counts(labels2d, k, out):
    """Query counts of the insertion strategy under k fixed classes.

    Each item probes existing blocks largest-first (ties to the lowest first
    member) and stops at its own block, or opens a new one after probing all.
    """
    trials, n = labels2d.shape
    for t in range(trials):
        labels = labels2d[t]
        present = np.zeros(k, dtype=np.int64)
        sizes = np.zeros(k, dtype=np.int64)
        reps = np.zeros(k, dtype=np.int64)
        c0 = labels[0]
        present[c0] = 1
        sizes[c0] = 1
        reps[c0] = 0
        count = 0
        for i in range(1, n):
            c = labels[i]
            if present[c] == 1:
                sc = sizes[c]
                rc = reps[c]
                ahead = 0
                for b in range(k):
                    if present[b] == 1 and (
                        sizes[b] > sc or (sizes[b] == sc and reps[b] < rc)
                    ):
                        ahead += 1
                count += ahead + 1
                sizes[c] += 1
            else:
                for b in range(k):
                    count += present[b]
                present[c] = 1
                sizes[c] = 1
                reps[c] = i
        out[t] = count
    return OK


def _random_counts(labels2d, rng, out, check_every):
    """Query counts of the uniform-unknown-supervertex-pair strategy.

    Per-trial state: union-find roots, the live-root list, negative
    adjacency as per-root record lists plus an open-addressing set of packed
    root pairs, and the count U of unknown root pairs.  Pairs are drawn by
    rejection from the live-root list (acceptance stays bounded away from
    zero because known pairs are paid for by an earlier query each), with a
    full enumeration fallback.

    check_every > 0 recomputes U from scratch every that many queries and
    reports drift; meant for small-n validation runs only.
    """
    trials, n = labels2d.shape
    rec_cap = 64 * n + 1024
    hcap = 1024
    while hcap < 8 * n:
        hcap <<= 1
    hmask = hcap - 1

    root = np.zeros(n, dtype=np.int64)
    size = np.zeros(n, dtype=np.int64)
    live = np.zeros(n, dtype=np.int64)
    pos = np.zeros(n, dtype=np.int64)
    eh = np.zeros(n, dtype=np.int64)
    et = np.zeros(n, dtype=np.int64)
    e_next = np.zeros(rec_cap, dtype=np.int64)
    e_vert = np.zeros(rec_cap, dtype=np.int64)
    hkeys = np.zeros(hcap, dtype=np.int64)
    scratch = np.zeros(n, dtype=np.int64)

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    def hslot(key):
        return (key ^ (key >> 13) ^ (key >> 27)) & hmask

    def hhas(key):
        s = hslot(key)
        while True:
            k = hkeys[s]
            if k == key:
                return True
            if k == -1:
                return False
            s = (s + 1) & hmask

    def hins(key):
        s = hslot(key)
        free = -1
        while True:
            k = hkeys[s]
            if k == key:
                return
            if k == -2 and free < 0:
                free = s
            if k == -1:
                if free >= 0:
                    s = free
                hkeys[s] = key
                return
            s = (s + 1) & hmask

    def hdel(key):
        s = hslot(key)
        while True:
            k = hkeys[s]
            if k == key:
                hkeys[s] = -2
                return True
            if k == -1:
                return False
            s = (s + 1) & hmask

    def pack(a, b):
        if a < b:
            return a * n + b
        return b * n + a

    for t in range(trials):
        labels = labels2d[t]
        for i in range(n):
            root[i] = i
            size[i] = 1
            live[i] = i
            pos[i] = i
            eh[i] = -1
            et[i] = -1
        hkeys[:] = -1
        ep = 0
        m = n
        U = n * (n - 1) // 2
        count = 0

        while U > 0:
            ru = -1
            rv = -1
            for _attempt in range(64):
                i = rng.integers(0, m)
                j = rng.integers(0, m)
                if i == j:
                    continue
                a = live[i]
                b = live[j]
                if hhas(pack(a, b)):
                    continue
                ru = a
                rv = b
                break
            if ru < 0:
                # acceptance collapsed; enumerate the unknown pairs directly
                want = rng.integers(0, U)
                seen = 0
                for i in range(m):
                    if ru >= 0:
                        break
                    for j in range(i + 1, m):
                        if not hhas(pack(live[i], live[j])):
                            if seen == want:
                                ru = live[i]
                                rv = live[j]
                                break
                            seen += 1
                if ru < 0:
                    return ERR_DRIFT

            count += 1
            if labels[ru] == labels[rv]:
                a = ru
                b = rv
                if size[a] < size[b]:
                    a, b = b, a
                common = 0
                sc_n = 0
                rec = eh[a]
                while rec != -1:
                    cc = find(e_vert[rec])
                    if hdel(pack(a, cc)):
                        scratch[sc_n] = cc
                        sc_n += 1
                        if hhas(pack(b, cc)):
                            common += 1
                    rec = e_next[rec]
                for i in range(sc_n):
                    hins(pack(a, scratch[i]))
                rec = eh[b]
                while rec != -1:
                    cc = find(e_vert[rec])
                    if hdel(pack(b, cc)):
                        if not hhas(pack(a, cc)):
                            hins(pack(a, cc))
                    rec = e_next[rec]
                # each absent third root loses one unknown pair, plus (a,b)
                U -= m - 1 - common
                if eh[b] != -1:
                    if eh[a] == -1:
                        eh[a] = eh[b]
                    else:
                        e_next[et[a]] = eh[b]
                    et[a] = et[b]
                root[b] = a
                size[a] += size[b]
                m -= 1
                last = live[m]
                live[pos[b]] = last
                pos[last] = pos[b]
            else:
                if ep + 2 > rec_cap:
                    return ERR_POOL
                U -= 1
                hins(pack(ru, rv))
                e_vert[ep] = rv
                e_next[ep] = -1
                if eh[ru] == -1:
                    eh[ru] = ep
                else:
                    e_next[et[ru]] = ep
                et[ru] = ep
                ep += 1
                e_vert[ep] = ru
                e_next[ep] = -1
                if eh[rv] == -1:
                    eh[rv] = ep
                else:
                    e_next[et[rv]] = ep
                et[rv] = ep
                ep += 1

            if check_every > 0 and count % check_every == 0:
                u_check = 0
                for i in range(m):
                    for j in range(i + 1, m):
                        if not hhas(pack(live[i], live[j])):
                            u_check += 1
                if u_check != U:
                    return ERR_DRIFT
            if count > n * n:
                return ERR_STALL
        out[t] = count
    return OK


# strategy codes for the small-n simulator
STRAT_CLIQUE = 0
STRAT_UNIVERSAL = 1
STRAT_CHORDAL_ANY = 2
STRAT_RANDOM = 3


def _smalln_runs(labels2d, strat, rng, counts, core, productive, excessive):
    """Full simulation with exact query classification, for n <= 12.

    Graph state lives in bitmasks over roots: nb[r] holds r's negative
    neighbors, im[r] the member items.  A negative answer is excessive when
    the two roots were already joined by an induced negative path on an even
    number of vertices, found by DFS over induced paths.
    """
    trials, n = labels2d.shape
    root = np.zeros(n, dtype=np.int64)
    size = np.zeros(n, dtype=np.int64)
    nb = np.zeros(n, dtype=np.int64)
    im = np.zeros(n, dtype=np.int64)
    stkv = np.zeros(n + 2, dtype=np.int64)
    stkc = np.zeros(n + 2, dtype=np.int64)
    stkm = np.zeros(n + 2, dtype=np.int64)
    cand_a = np.zeros(n * n, dtype=np.int64)
    cand_b = np.zeros(n * n, dtype=np.int64)

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    def even_induced_path(a, b):
        # DFS over induced paths a..b in the nb graph; True if one has an
        # even number of vertices (endpoints included)
        depth = 0
        stkv[0] = a
        stkm[0] = 1 << a
        stkc[0] = nb[a]
        while depth >= 0:
            c = stkc[depth]
            if c == 0:
                depth -= 1
                continue
            y = c & (-c)
            stkc[depth] = c & ~y
            yi = 0
            while (1 << yi) != y:
                yi += 1
            onpath = stkm[depth]
            tail = stkv[depth]
            if onpath & y:
                continue
            if nb[yi] & (onpath & ~(1 << tail)):
                continue
            if yi == b:
                if depth % 2 == 0:
                    return True
                continue
            depth += 1
            stkv[depth] = yi
            stkm[depth] = onpath | y
            stkc[depth] = nb[yi]
        return False

    for t in range(trials):
        labels = labels2d[t]
        for i in range(n):
            root[i] = i
            size[i] = 1
            nb[i] = 0
            im[i] = 1 << i
        U = n * (n - 1) // 2
        n_queries = 0
        n_core = 0
        n_prod = 0
        n_exc = 0

        while U > 0:
            qu = -1
            qv = -1
            if strat == STRAT_CLIQUE:
                for i in range(1, n):
                    ri = find(i)
                    if ri < i:
                        continue
                    bmask = 0
                    for j in range(i):
                        bmask |= 1 << find(j)
                    cand = bmask & ~nb[ri]
                    if cand == 0:
                        continue
                    best = -1
                    for r in range(n):
                        if cand & (1 << r):
                            if best < 0 or size[r] > size[best]:
                                best = r
                    qu = best
                    qv = i
                    break
            elif strat == STRAT_UNIVERSAL:
                rm = (1 << n) - 1
                while rm != 0 and qu < 0:
                    pivot = n - 1
                    while (rm >> pivot) & 1 == 0:
                        pivot -= 1
                    rp = find(pivot)
                    for v in range(n):
                        if (rm >> v) & 1 == 0:
                            continue
                        if (im[rp] >> v) & 1:
                            continue
                        if (nb[rp] >> find(v)) & 1:
                            continue
                        qu = v
                        qv = pivot
                        break
                    if qu < 0:
                        rm &= ~im[rp]
            elif strat == STRAT_CHORDAL_ANY:
                ncand = 0
                for a in range(n):
                    if root[a] != a:
                        continue
                    for b in range(a + 1, n):
                        if root[b] != b or (nb[a] >> b) & 1:
                            continue
                        blocked = nb[a] & nb[b]
                        seen = (1 << a) | blocked
                        frontier = 1 << a
                        hit = False
                        while frontier != 0 and not hit:
                            nxt = 0
                            for r in range(n):
                                if (frontier >> r) & 1:
                                    nxt |= nb[r]
                            if (nxt >> b) & 1:
                                hit = True
                                break
                            nxt &= ~seen
                            seen |= nxt
                            frontier = nxt
                        if not hit:
                            cand_a[ncand] = a
                            cand_b[ncand] = b
                            ncand += 1
                if ncand > 0:
                    pick = rng.integers(0, ncand)
                    qu = cand_a[pick]
                    qv = cand_b[pick]
            else:
                ncand = 0
                for a in range(n):
                    if root[a] != a:
                        continue
                    for b in range(a + 1, n):
                        if root[b] != b or (nb[a] >> b) & 1:
                            continue
                        cand_a[ncand] = a
                        cand_b[ncand] = b
                        ncand += 1
                if ncand > 0:
                    pick = rng.integers(0, ncand)
                    qu = cand_a[pick]
                    qv = cand_b[pick]

            if qu < 0:
                return ERR_STALL
            ra = find(qu)
            rb = find(qv)
            positive = labels[qu] == labels[qv]
            n_queries += 1
            if positive:
                n_core += 1
                keep = ra if ra < rb else rb
                gone = rb if ra < rb else ra
                nb[keep] |= nb[gone]
                im[keep] |= im[gone]
                size[keep] += size[gone]
                gbit = 1 << gone
                kbit = 1 << keep
                for w in range(n):
                    if root[w] == w and nb[w] & gbit:
                        nb[w] = (nb[w] & ~gbit) | kbit
                root[gone] = keep
            else:
                if even_induced_path(ra, rb):
                    n_exc += 1
                else:
                    n_prod += 1
                nb[ra] |= 1 << rb
                nb[rb] |= 1 << ra
            U = 0
            for a in range(n):
                if root[a] != a:
                    continue
                for b in range(a + 1, n):
                    if root[b] == b and (nb[a] >> b) & 1 == 0:
                        U += size[a] * size[b]
            if n_queries > 2 * n * n:
                return ERR_STALL

        counts[t] = n_queries
        core[t] = n_core
        productive[t] = n_prod
        excessive[t] = n_exc
    return OK


_IMPLS = {
    "universal_counts": _universal_counts,
    "clique_counts": _clique_counts,
    "random_counts": _random_counts,
    "smalln_runs": _smalln_runs,
}

_KERNELS: dict[str, dict[str, object]] = {}
for _name, _impl in _IMPLS.items():
    _KERNELS[_name] = {"pure": _impl}
    if _numba is not None:
        _KERNELS[_name]["numba"] = _numba.njit(cache=True)(_impl)


def backends() -> list[str]:
    return ["numba", "pure"] if _numba is not None else ["pure"]


def get_kernel(name: str, backend: str | None = None):
    if backend is None:
        backend = default_backend()
    table = _KERNELS[name]
    if backend not in table:
        raise ValueError(f"backend {backend!r} unavailable for kernel {name!r}")
    return table[backend]
