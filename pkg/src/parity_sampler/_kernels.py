"""Hot loops shared by the samplers and the enumeration oracles.

Conventions: a graph is passed as endpoint arrays ``eu, ev`` (int64) plus a
CSR adjacency ``indptr, nbr, nbr_e`` where ``nbr_e`` holds edge ids. Edge
configurations are uint8 arrays over the edge order. A self-loop appears
twice in its vertex's adjacency row.
"""
import numpy as np

from ._jit import njit

FLAG_CONN = 1
FLAG_IN1 = 2
FLAG_IN0 = 4


@njit
def uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit
def union_open(n, eu, ev, state, skip, parent):
    """Union-find over open edges other than ``skip``; returns the cluster count."""
    for v in range(n):
        parent[v] = v
    k = n
    for f in range(eu.shape[0]):
        if f == skip or state[f] == 0:
            continue
        a = uf_find(parent, eu[f])
        b = uf_find(parent, ev[f])
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            k -= 1
    return k


@njit
def component_labels(n, eu, ev, state):
    """Compact cluster labels 0..k-1, numbered by smallest vertex."""
    parent = np.empty(n, np.int64)
    union_open(n, eu, ev, state, -1, parent)
    labels = np.full(n, -1, np.int64)
    remap = np.full(n, -1, np.int64)
    k = 0
    for v in range(n):
        root = uf_find(parent, v)
        if remap[root] == -1:
            remap[root] = k
            k += 1
        labels[v] = remap[root]
    return labels


@njit
def spanning_forest_mask(n, eu, ev, state):
    parent = np.empty(n, np.int64)
    for v in range(n):
        parent[v] = v
    forest = np.zeros(eu.shape[0], np.uint8)
    for f in range(eu.shape[0]):
        if state[f] == 0:
            continue
        a = uf_find(parent, eu[f])
        b = uf_find(parent, ev[f])
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            forest[f] = 1
    return forest


@njit
def complete_on_forest(n, eu, ev, indptr, nbr, nbr_e, forest, par, out):
    """Toggle forest edges in ``out`` until every vertex parity in ``par`` is cleared.

    The chosen edges are the unique forest subset whose odd-degree set equals
    the initial ``par``. Returns False when some tree carries odd total parity
    (no such subset exists); ``par`` is consumed.
    """
    order = np.empty(n, np.int64)
    pedge = np.full(n, -1, np.int64)
    seen = np.zeros(n, np.uint8)
    cnt = 0
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = 1
        order[cnt] = s
        head = cnt
        cnt += 1
        while head < cnt:
            v = order[head]
            head += 1
            for k in range(indptr[v], indptr[v + 1]):
                f = nbr_e[k]
                if forest[f] == 0:
                    continue
                w = nbr[k]
                if seen[w] == 0:
                    seen[w] = 1
                    pedge[w] = f
                    order[cnt] = w
                    cnt += 1
    ok = True
    for i in range(n - 1, -1, -1):
        v = order[i]
        if par[v] == 0:
            continue
        f = pedge[v]
        if f < 0:
            ok = False
            continue
        out[f] ^= 1
        par[v] = 0
        w = eu[f]
        if w == v:
            w = ev[f]
        par[w] ^= 1
    return ok


@njit
def even_from_config(n, eu, ev, indptr, nbr, nbr_e, omega, target, coins, out):
    """Pick chords of ``omega`` by ``coins`` and complete them on a spanning forest.

    With ``target`` all zero this is a uniformly random even subset of
    ``omega`` when the coins are fair. With ``target`` marking a vertex set W
    the result has odd degree exactly on W: an even set plus the forest
    pairing of W.
    """
    m = eu.shape[0]
    forest = spanning_forest_mask(n, eu, ev, omega)
    par = np.zeros(n, np.uint8)
    for v in range(n):
        par[v] = target[v]
    for f in range(m):
        out[f] = 0
        if omega[f] and forest[f] == 0 and coins[f]:
            out[f] = 1
            if eu[f] != ev[f]:
                par[eu[f]] ^= 1
                par[ev[f]] ^= 1
    return complete_on_forest(n, eu, ev, indptr, nbr, nbr_e, forest, par, out)


@njit
def bridge_flags(n, eu, ev, indptr, nbr, nbr_e, state):
    """Mark the bridges of the open subgraph (iterative lowlink).

    Self-loops are never bridges; parallel open edges are not bridges.
    """
    m = eu.shape[0]
    out = np.zeros(m, np.uint8)
    disc = np.full(n, -1, np.int64)
    low = np.zeros(n, np.int64)
    st_v = np.empty(n, np.int64)
    st_pe = np.empty(n, np.int64)
    st_it = np.empty(n, np.int64)
    t = 0
    for s in range(n):
        if disc[s] != -1:
            continue
        disc[s] = t
        low[s] = t
        t += 1
        top = 0
        st_v[0] = s
        st_pe[0] = -1
        st_it[0] = indptr[s]
        top = 1
        while top > 0:
            v = st_v[top - 1]
            it = st_it[top - 1]
            if it < indptr[v + 1]:
                st_it[top - 1] = it + 1
                f = nbr_e[it]
                if state[f] == 0 or f == st_pe[top - 1]:
                    continue
                w = nbr[it]
                if w == v:
                    continue
                if disc[w] == -1:
                    disc[w] = t
                    low[w] = t
                    t += 1
                    st_v[top] = w
                    st_pe[top] = f
                    st_it[top] = indptr[w]
                    top += 1
                elif disc[w] < low[v]:
                    low[v] = disc[w]
            else:
                top -= 1
                if top > 0:
                    u = st_v[top - 1]
                    if low[v] < low[u]:
                        low[u] = low[v]
                    if low[v] > disc[u]:
                        out[st_pe[top]] = 1
    return out


@njit
def connected_off(indptr, nbr, nbr_e, state, e, a, b, mark, stamp, qa, qb):
    """Are ``a`` and ``b`` joined by open edges other than ``e``?

    Grows both clusters alternately and stops as soon as one is exhausted, so
    the cost tracks the smaller cluster. ``mark`` holds stamps; ``stamp`` is a
    one-element counter advanced by two per call.
    """
    if a == b:
        return True
    sa = stamp[0]
    sb = sa + 1
    stamp[0] = sa + 2
    mark[a] = sa
    mark[b] = sb
    qa[0] = a
    qb[0] = b
    ha = 0
    ta = 1
    hb = 0
    tb = 1
    while ha < ta and hb < tb:
        v = qa[ha]
        ha += 1
        for k in range(indptr[v], indptr[v + 1]):
            f = nbr_e[k]
            if f == e or state[f] == 0:
                continue
            w = nbr[k]
            if mark[w] == sb:
                return True
            if mark[w] != sa:
                mark[w] = sa
                qa[ta] = w
                ta += 1
        if ha >= ta:
            return False
        v = qb[hb]
        hb += 1
        for k in range(indptr[v], indptr[v + 1]):
            f = nbr_e[k]
            if f == e or state[f] == 0:
                continue
            w = nbr[k]
            if mark[w] == sa:
                return True
            if mark[w] != sb:
                mark[w] = sb
                qb[tb] = w
                tb += 1
    return False


@njit
def split_feasible(n, eu, ev, state, e, parent, oddc):
    """Can open edges be added to ``state`` (off ``e``) so that ``e`` becomes a
    bridge separating two clusters with odd W-count, all other clusters even?

    ``parent``/``oddc`` are the union-find forest and per-root W parities of
    ``state`` off ``e``. Assumes ``e`` is not a bridge of the full graph and
    its endpoints lie in different clusters. Contract clusters to nodes; the
    answer is yes iff some node on a simple path between the two end-clusters
    carries odd parity once the parities of everything hanging off it (via a
    cut node) are folded in. Those path nodes are the block containing a
    virtual edge between the two end-clusters.
    """
    m = eu.shape[0]
    cid = np.full(n, -1, np.int64)
    nc = 0
    for v in range(n):
        r = uf_find(parent, v)
        if cid[r] == -1:
            cid[r] = nc
            nc += 1
    par = np.zeros(nc, np.int64)
    for v in range(n):
        if parent[v] == v:
            par[cid[v]] = oddc[v]
    src = cid[uf_find(parent, eu[e])]
    dst = cid[uf_find(parent, ev[e])]

    hu = np.empty(m + 1, np.int64)
    hv = np.empty(m + 1, np.int64)
    nh = 0
    for f in range(m):
        if f == e or state[f]:
            continue
        x = cid[uf_find(parent, eu[f])]
        y = cid[uf_find(parent, ev[f])]
        if x != y:
            hu[nh] = x
            hv[nh] = y
            nh += 1
    virtual = nh
    hu[nh] = src
    hv[nh] = dst
    nh += 1

    deg = np.zeros(nc + 1, np.int64)
    for h in range(nh):
        deg[hu[h] + 1] += 1
        deg[hv[h] + 1] += 1
    ip = np.cumsum(deg)
    fill = ip[:-1].copy()
    adj = np.empty(2 * nh, np.int64)
    adj_h = np.empty(2 * nh, np.int64)
    for h in range(nh):
        x = hu[h]
        y = hv[h]
        adj[fill[x]] = y
        adj_h[fill[x]] = h
        fill[x] += 1
        adj[fill[y]] = x
        adj_h[fill[y]] = h
        fill[y] += 1

    disc = np.full(nc, -1, np.int64)
    low = np.zeros(nc, np.int64)
    st_v = np.empty(nc, np.int64)
    st_pe = np.empty(nc, np.int64)
    st_it = np.empty(nc, np.int64)
    estack = np.empty(nh, np.int64)
    on_path = np.zeros(nc, np.uint8)
    esp = 0
    disc[src] = 0
    low[src] = 0
    t = 1
    st_v[0] = src
    st_pe[0] = -1
    st_it[0] = ip[src]
    top = 1
    found = False
    while top > 0 and not found:
        v = st_v[top - 1]
        it = st_it[top - 1]
        if it < ip[v + 1]:
            st_it[top - 1] = it + 1
            h = adj_h[it]
            if h == st_pe[top - 1]:
                continue
            w = adj[it]
            if disc[w] == -1:
                estack[esp] = h
                esp += 1
                disc[w] = t
                low[w] = t
                t += 1
                st_v[top] = w
                st_pe[top] = h
                st_it[top] = ip[w]
                top += 1
            elif disc[w] < disc[v]:
                estack[esp] = h
                esp += 1
                if disc[w] < low[v]:
                    low[v] = disc[w]
        else:
            top -= 1
            if top > 0:
                u = st_v[top - 1]
                if low[v] < low[u]:
                    low[u] = low[v]
                if low[v] >= disc[u]:
                    tree_edge = st_pe[top]
                    start = esp
                    has_virtual = False
                    while True:
                        esp -= 1
                        h = estack[esp]
                        if h == virtual:
                            has_virtual = True
                        if h == tree_edge:
                            break
                    if has_virtual:
                        for k in range(esp, start):
                            h = estack[k]
                            on_path[hu[h]] = 1
                            on_path[hv[h]] = 1
                        found = True

    folded = np.zeros(nc, np.int64)
    for x in range(nc):
        if on_path[x]:
            folded[x] = par[x]
    # hanging pieces: components of H minus the path nodes; pieces outside
    # the component of src never touch the path and are skipped
    seen = np.zeros(nc, np.uint8)
    queue = np.empty(nc, np.int64)
    for x in range(nc):
        if on_path[x] or seen[x]:
            continue
        seen[x] = 1
        queue[0] = x
        head = 0
        tail = 1
        total = 0
        attach = -1
        while head < tail:
            y = queue[head]
            head += 1
            total += par[y]
            for k in range(ip[y], ip[y + 1]):
                if adj_h[k] == virtual:
                    continue
                z = adj[k]
                if on_path[z]:
                    attach = z
                elif seen[z] == 0:
                    seen[z] = 1
                    queue[tail] = z
                    tail += 1
        if attach >= 0:
            folded[attach] += total
    for x in range(nc):
        if on_path[x] and folded[x] % 2 == 1:
            return True
    return False


@njit
def w_status(n, eu, ev, state, e, wpar, parent, oddc):
    """W-parity bookkeeping for ``state`` off ``e``.

    Returns (flags, odd cluster count) where flags carry FLAG_CONN (endpoints
    of ``e`` joined off ``e``), FLAG_IN1 (W-even with ``e`` open) and FLAG_IN0
    (W-even with ``e`` closed).
    """
    union_open(n, eu, ev, state, e, parent)
    for v in range(n):
        oddc[v] = 0
    for v in range(n):
        if wpar[v]:
            r = uf_find(parent, v)
            oddc[r] ^= 1
    n_odd = 0
    for v in range(n):
        if parent[v] == v and oddc[v]:
            n_odd += 1
    ra = uf_find(parent, eu[e])
    rb = uf_find(parent, ev[e])
    flags = 0
    if n_odd == 0:
        flags |= FLAG_IN0 | FLAG_IN1
    if ra == rb:
        flags |= FLAG_CONN
    elif n_odd == 2 and oddc[ra] and oddc[rb]:
        flags |= FLAG_IN1
    return flags


@njit
def conditional(n, eu, ev, indptr, nbr, nbr_e, state, e, r, has_w, wpar,
                bridge, bridge_odd, mark, stamp, qa, qb, parent, oddc):
    """Heat-bath probability that ``e`` is open given ``state`` off ``e``.

    For the q=2 random-cluster weights this is r_e when the endpoints are
    joined off ``e`` and r_e/(2-r_e) otherwise. Under W-even conditioning an
    edge whose closure would break W-evenness is forced open; off the support
    the value is the largest conditional over supported configurations above
    ``state``. Returns (value, flags).
    """
    re = r[e]
    lo = re / (2.0 - re)
    a = eu[e]
    b = ev[e]
    if not has_w:
        if connected_off(indptr, nbr, nbr_e, state, e, a, b, mark, stamp, qa, qb):
            return re, FLAG_CONN | FLAG_IN1 | FLAG_IN0
        return lo, FLAG_IN1 | FLAG_IN0
    flags = w_status(n, eu, ev, state, e, wpar, parent, oddc)
    if flags & FLAG_CONN:
        return re, flags
    if flags & FLAG_IN1:
        if flags & FLAG_IN0:
            return lo, flags
        return 1.0, flags
    # off the support
    if bridge[e]:
        if bridge_odd[e]:
            return 1.0, flags
        return lo, flags
    if split_feasible(n, eu, ev, state, e, parent, oddc):
        return 1.0, flags
    return re, flags


@njit
def alpha_beta(n, eu, ev, indptr, nbr, nbr_e, lower, upper, e, singleton, r, has_w,
               wpar, bridge, bridge_odd, mark, stamp, qa, qb, parent, oddc):
    """Bracket [alpha, beta] for the conditional over all configurations in the sandwich.

    beta is the exact maximum: it is attained at one of the two bounds.
    alpha is exact when the sandwich is a single configuration off ``e``, when
    the lower bound already joins the endpoints (every member gives r_e), or
    when the upper bound lies in the support with ``e`` pivotal (every member
    is forced open); otherwise it falls back to the global floor r_e/(2-r_e).
    """
    cl, fl = conditional(n, eu, ev, indptr, nbr, nbr_e, lower, e, r, has_w, wpar,
                         bridge, bridge_odd, mark, stamp, qa, qb, parent, oddc)
    if singleton or (fl & FLAG_CONN):
        return cl, cl
    cu, fu = conditional(n, eu, ev, indptr, nbr, nbr_e, upper, e, r, has_w, wpar,
                         bridge, bridge_odd, mark, stamp, qa, qb, parent, oddc)
    beta = cl if cl > cu else cu
    re = r[e]
    if (fu & FLAG_IN1) and not (fu & FLAG_IN0):
        alpha = 1.0
    else:
        alpha = re / (2.0 - re)
    return alpha, beta


@njit
def sandwich_pass(n, eu, ev, indptr, nbr, nbr_e, r, has_w, wpar, bridge, bridge_odd,
                  log_e, log_u, m, lower, upper):
    """Run the bounding pair from time -m to 0 with the shared log.

    Entry k of the log drives the step from time -(k+1) to -k. Returns the
    number of coordinates where the bounds still differ.
    """
    ne = eu.shape[0]
    mark = np.full(n, -1, np.int64)
    stamp = np.zeros(1, np.int64)
    qa = np.empty(n, np.int64)
    qb = np.empty(n, np.int64)
    parent = np.empty(n, np.int64)
    oddc = np.empty(n, np.int64)
    for f in range(ne):
        lower[f] = 0
        upper[f] = 1
    ndiff = ne
    for k in range(m - 1, -1, -1):
        e = log_e[k]
        u = log_u[k]
        d0 = 1 if lower[e] != upper[e] else 0
        singleton = ndiff - d0 == 0
        a, b = alpha_beta(n, eu, ev, indptr, nbr, nbr_e, lower, upper, e, singleton, r,
                          has_w, wpar, bridge, bridge_odd, mark, stamp, qa, qb, parent, oddc)
        nl = 1 if u <= a else 0
        nu = 1 if u <= b else 0
        lower[e] = nl
        upper[e] = nu
        ndiff += (1 if nl != nu else 0) - d0
    return ndiff


@njit
def cftp_run(n, eu, ev, indptr, nbr, nbr_e, r, has_w, wpar, bridge, bridge_odd,
             log_e, log_u, m, max_updates, lower, upper):
    """Doubling search over start depths m, 2m, 4m, ... within the given log.

    Returns (status, depth, updates): status 0 coalesced at ``depth``, 1 the
    log is too short for ``depth`` (extend it and call again with that depth),
    2 the update budget ran out.
    """
    total = 0
    while m <= log_e.shape[0]:
        ndiff = sandwich_pass(n, eu, ev, indptr, nbr, nbr_e, r, has_w, wpar, bridge,
                              bridge_odd, log_e, log_u, m, lower, upper)
        total += m
        if ndiff == 0:
            return 0, m, total
        if total >= max_updates:
            return 2, m, total
        m *= 2
    return 1, m, total


@njit
def cluster_stats_all(n, eu, ev, wpar, masks):
    """Cluster count and number of W-odd clusters for every edge mask."""
    N = masks.shape[0]
    m = eu.shape[0]
    k_out = np.empty(N, np.int64)
    odd_out = np.empty(N, np.int64)
    parent = np.empty(n, np.int64)
    oddc = np.empty(n, np.int64)
    for i in range(N):
        mask = masks[i]
        for v in range(n):
            parent[v] = v
        k = n
        for f in range(m):
            if (mask >> f) & 1:
                a = uf_find(parent, eu[f])
                b = uf_find(parent, ev[f])
                if a != b:
                    if a < b:
                        parent[b] = a
                    else:
                        parent[a] = b
                    k -= 1
        for v in range(n):
            oddc[v] = 0
        for v in range(n):
            if wpar[v]:
                root = uf_find(parent, v)
                oddc[root] ^= 1
        n_odd = 0
        for v in range(n):
            if parent[v] == v and oddc[v]:
                n_odd += 1
        k_out[i] = k
        odd_out[i] = n_odd
    return k_out, odd_out
