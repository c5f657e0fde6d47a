"""numba kernels for the hot loops (distance search, sampling, decoding)."""
from __future__ import annotations

import numba as nb
import numpy as np

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@nb.njit(cache=True, inline="always")
def popcount64(x):
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return int((x * _H01) >> np.uint64(56))


@nb.njit(cache=True)
def popcount_row(row):
    s = 0
    for w in range(row.shape[0]):
        s += popcount64(row[w])
    return s


@nb.njit(cache=True)
def _is_logical(row, dual):
    # odd overlap with some dual logical
    for i in range(dual.shape[0]):
        par = 0
        for w in range(row.shape[0]):
            par ^= popcount64(row[w] & dual[i, w]) & 1
        if par:
            return True
    return False


@nb.njit(cache=True)
def isd_min_weight(gen, n, dual, trials, seed, pairs, trace_every):
    """Randomized information-set search for a minimum-weight logical.

    ``gen`` is a packed generator matrix of the kernel containing the logicals
    (stabilizers included), ``dual`` packs the conjugate logicals used to tell
    logical from stabilizer words.  With ``pairs`` set, sums of two systematic
    rows are also examined.
    """
    np.random.seed(seed)
    k, W = gen.shape
    best = n + 1
    best_row = np.zeros(W, dtype=np.uint64)
    ntrace = trials // trace_every if trace_every > 0 else 0
    trace = np.zeros(ntrace, dtype=np.int64)
    a = np.empty_like(gen)
    tmp = np.empty(W, dtype=np.uint64)
    for trial in range(trials):
        a[:, :] = gen
        perm = np.random.permutation(n)
        rank = 0
        for ci in range(n):
            if rank == k:
                break
            c = perm[ci]
            w = c >> 6
            bit = np.uint64(1) << np.uint64(c & 63)
            piv = -1
            for r in range(rank, k):
                if a[r, w] & bit:
                    piv = r
                    break
            if piv < 0:
                continue
            if piv != rank:
                for x in range(W):
                    t = a[piv, x]
                    a[piv, x] = a[rank, x]
                    a[rank, x] = t
            for r in range(k):
                if r != rank and (a[r, w] & bit):
                    for x in range(W):
                        a[r, x] ^= a[rank, x]
            rank += 1
        for r in range(rank):
            wt = popcount_row(a[r])
            if wt < best and _is_logical(a[r], dual):
                best = wt
                best_row[:] = a[r]
        if pairs:
            for r in range(rank):
                for s in range(r + 1, rank):
                    wt = 0
                    for x in range(W):
                        tmp[x] = a[r, x] ^ a[s, x]
                        wt += popcount64(tmp[x])
                    if wt < best and _is_logical(tmp, dual):
                        best = wt
                        best_row[:] = tmp
        if trace_every > 0 and (trial + 1) % trace_every == 0:
            trace[(trial + 1) // trace_every - 1] = best
    return best, best_row, trace


@nb.njit(cache=True, nogil=True)
def _xor_row(dst, src):
    for w in range(src.shape[0]):
        dst[w] ^= src[w]


@nb.njit(cache=True, nogil=True)
def sample_faults(shots, seed, grp_p, grp_ptr, grp_chan, chan_nout, chan_comp, comp_sector, comp_local,
                  det_x, res_x, log_x, det_z, res_z, log_z,
                  out_det_x, out_res_x, out_log_x, out_det_z, out_res_z, out_log_z, out_nfault):
    """Sample independent noise channels and XOR the effects of the fired outcomes.

    Channels are grouped by probability; inside a group the gaps between fired
    channels are geometric, so the cost scales with the number of faults.
    """
    np.random.seed(seed)
    for s in range(shots):
        nf = 0
        for g in range(grp_p.shape[0]):
            p = grp_p[g]
            if p <= 0.0:
                continue
            lo = grp_ptr[g]
            n = grp_ptr[g + 1] - lo
            logq = np.log1p(-p) if p < 1.0 else -np.inf
            pos = -1
            while True:
                u = 1.0 - np.random.random()
                pos += int(np.log(u) / logq) + 1 if p < 1.0 else 1
                if pos >= n:
                    break
                ch = grp_chan[lo + pos]
                o = np.random.randint(0, chan_nout[ch])
                nf += 1
                for k in range(chan_comp.shape[2]):
                    gid = chan_comp[ch, o, k]
                    if gid < 0:
                        break
                    loc = comp_local[gid]
                    if comp_sector[gid] == 0:
                        _xor_row(out_det_x[s], det_x[loc])
                        _xor_row(out_res_x[s], res_x[loc])
                        out_log_x[s] ^= log_x[loc]
                    else:
                        _xor_row(out_det_z[s], det_z[loc])
                        _xor_row(out_res_z[s], res_z[loc])
                        out_log_z[s] ^= log_z[loc]
        out_nfault[s] = nf


# ---------------------------------------------------------------------------
# power decoder


@nb.njit(cache=True, inline="always")
def _row_hash(row):
    h = np.uint64(1469598103934665603)
    for w in range(row.shape[0]):
        h ^= row[w]
        h *= np.uint64(1099511628211)
        h ^= h >> np.uint64(29)
    return h


@nb.njit(cache=True, nogil=True)
def table_lookup(keys, used, row):
    mask = np.uint64(keys.shape[0] - 1)
    slot = np.int64(_row_hash(row) & mask)
    W = row.shape[0]
    while used[slot]:
        same = True
        for w in range(W):
            if keys[slot, w] != row[w]:
                same = False
                break
        if same:
            return slot
        slot = np.int64((np.uint64(slot) + np.uint64(1)) & mask)
    return -1


@nb.njit(cache=True)
def build_syndrome_table(S, m, cap):
    """Hash table from XOR syndromes of index combinations (sizes 0..m, lexicographic) to the first combination."""
    n, W = S.shape
    keys = np.zeros((cap, W), dtype=np.uint64)
    vals = np.full((cap, max(m, 1)), -1, dtype=np.int64)
    used = np.zeros(cap, dtype=np.bool_)
    mask = np.uint64(cap - 1)
    acc = np.zeros((m + 1, W), dtype=np.uint64)
    idx = np.zeros(m + 1, dtype=np.int64)
    count = 0
    for size in range(m + 1):
        if size > n:
            break
        # iterate combinations of `size` indices in lexicographic order
        for j in range(size):
            idx[j] = j
        while True:
            for w in range(W):
                acc[0, w] = 0
            for j in range(size):
                for w in range(W):
                    acc[0, w] ^= S[idx[j], w]
            row = acc[0]
            slot = np.int64(_row_hash(row) & mask)
            found = False
            while used[slot]:
                same = True
                for w in range(W):
                    if keys[slot, w] != row[w]:
                        same = False
                        break
                if same:
                    found = True
                    break
                slot = np.int64((np.uint64(slot) + np.uint64(1)) & mask)
            if not found:
                used[slot] = True
                keys[slot] = row
                for j in range(size):
                    vals[slot, j] = idx[j]
                count += 1
            if size == 0:
                break
            j = size - 1
            while j >= 0 and idx[j] == n - size + j:
                j -= 1
            if j < 0:
                break
            idx[j] += 1
            for q in range(j + 1, size):
                idx[q] = idx[q - 1] + 1
    return keys, vals, used, count


@nb.njit(cache=True, nogil=True)
def power_search(t, S, keys, vals, used, k_max, w_per, w_table, budget, out_idx, best_idx):
    """Algorithms 1-2: pruned subset search against the table.

    Returns (hit, k, slot, best_k, nodes).  On a hit ``out_idx[:k]`` and the
    table entry at ``slot`` form the solution; otherwise ``best_idx[:best_k]``
    is the subset leaving the lightest remaining target.
    """
    n, W = S.shape
    best_w = popcount_row(t)
    best_k = 0
    nodes = 0
    slot = table_lookup(keys, used, t)
    if slot >= 0:
        return True, 0, slot, 0, nodes
    tt = np.empty((k_max + 1, W), dtype=np.uint64)
    idx = np.empty(k_max + 1, dtype=np.int64)
    for k in range(1, k_max + 1):
        if k > n:
            break
        w_max = (k - 1) * w_per + w_table
        tt[0] = t
        level = 0
        idx[0] = -1
        while level >= 0:
            idx[level] += 1
            i = idx[level]
            if i > n - (k - level):
                level -= 1
                continue
            nodes += 1
            if nodes > budget:
                return False, 0, -1, best_k, nodes
            w = 0
            for x in range(W):
                v = tt[level, x] ^ S[i, x]
                tt[level + 1, x] = v
                w += popcount64(v)
            if w > w_max - level * w_per:
                continue
            if level == k - 1:
                s = table_lookup(keys, used, tt[k])
                if s >= 0:
                    for j in range(k):
                        out_idx[j] = idx[j]
                    return True, k, s, best_k, nodes
                if w < best_w:
                    best_w = w
                    best_k = k
                    for j in range(k):
                        best_idx[j] = idx[j]
            else:
                level += 1
                idx[level] = idx[level - 1]
    return False, 0, -1, best_k, nodes


@nb.njit(cache=True, nogil=True)
def _apply_solution(hit, k, slot, best_k, out_idx, best_idx, vals, E, Esyn, corr, sig):
    """XOR the chosen recoveries into ``corr`` and their syndromes into ``sig``; returns the count."""
    cnt = 0
    if hit:
        for j in range(k):
            _xor_row(corr, E[out_idx[j]])
            _xor_row(sig, Esyn[out_idx[j]])
            cnt += 1
        for j in range(vals.shape[1]):
            q = vals[slot, j]
            if q < 0:
                break
            _xor_row(corr, E[q])
            _xor_row(sig, Esyn[q])
            cnt += 1
    else:
        for j in range(best_k):
            _xor_row(corr, E[best_idx[j]])
            _xor_row(sig, Esyn[best_idx[j]])
            cnt += 1
    return cnt


@nb.njit(cache=True, nogil=True)
def single_shot_batch(raw, res, log, rm, fm, check_cols, dual, budget,
                      out_fail, out_weight, out_fallback):
    """Round-by-round power decoding with carry-in of the accumulated correction.

    ``raw`` is (shots, rounds+1, words) raw outcome flips per round; the last
    round is decoded with the final model ``fm``, the others with ``rm``.
    Model tuples: (S, E, Esyn, keys, vals, used, k_max, w_per, w_table).
    """
    shots, R1, Wr = raw.shape
    Wn = res.shape[1]
    corr = np.zeros(Wn, dtype=np.uint64)
    sig = np.zeros(Wr, dtype=np.uint64)
    t = np.zeros(Wr, dtype=np.uint64)
    kmx = max(rm[6], fm[6]) + 1
    out_idx = np.zeros(kmx, dtype=np.int64)
    best_idx = np.zeros(kmx, dtype=np.int64)
    sres = np.zeros(Wr, dtype=np.uint64)
    for s in range(shots):
        corr[:] = 0
        sig[:] = 0
        weight = 0
        fb = 0
        for r in range(R1):
            if r < R1 - 1:
                S, E, Esyn, keys, vals, used, k_max, w_per, w_table = rm
            else:
                S, E, Esyn, keys, vals, used, k_max, w_per, w_table = fm
            any_bit = False
            for w in range(Wr):
                t[w] = raw[s, r, w] ^ sig[w]
                if t[w]:
                    any_bit = True
            if not any_bit:
                continue
            hit, k, slot, best_k, nodes = power_search(t, S, keys, vals, used, k_max, w_per, w_table,
                                                       budget, out_idx, best_idx)
            if not hit:
                fb += 1
            weight += _apply_solution(hit, k, slot, best_k, out_idx, best_idx, vals, E, Esyn, corr, sig)
        # residual syndrome of the true error
        sres[:] = 0
        for w in range(Wn):
            word = res[s, w]
            while word:
                low = word & (~word + np.uint64(1))
                q = w * 64 + popcount64(low - np.uint64(1))
                _xor_row(sres, check_cols[q])
                word &= word - np.uint64(1)
        bad = False
        for w in range(Wr):
            if sres[w] != sig[w]:
                bad = True
        lc = 0
        for i in range(dual.shape[0]):
            par = 0
            for w in range(Wn):
                par ^= popcount64(corr[w] & dual[i, w]) & 1
            lc |= par << i
        if (lc ^ log[s]) != 0:
            bad = True
        out_fail[s] = bad
        out_weight[s] = weight
        out_fallback[s] = fb


# ---------------------------------------------------------------------------
# BP+OSD


@nb.njit(cache=True, inline="always")
def _lowest_bit(row):
    for w in range(row.shape[0]):
        if row[w]:
            low = row[w] & (~row[w] + np.uint64(1))
            return w * 64 + popcount64(low - np.uint64(1))
    return -1


@nb.njit(cache=True, nogil=True)
def min_sum(syn, llr0, row_ptr, edge_col, col_ptr, col_edges, max_iter, scale, v2c, c2v, post, hard):
    """Scaled min-sum; returns True if the hard decision satisfies ``syn``."""
    m = row_ptr.shape[0] - 1
    N = llr0.shape[0]
    for e in range(edge_col.shape[0]):
        v2c[e] = llr0[edge_col[e]]
    for it in range(max_iter):
        for r in range(m):
            sgn = syn[r]
            min1 = np.inf
            min2 = np.inf
            arg = -1
            for e in range(row_ptr[r], row_ptr[r + 1]):
                v = v2c[e]
                a = abs(v)
                if v < 0:
                    sgn ^= 1
                if a < min1:
                    min2 = min1
                    min1 = a
                    arg = e
                elif a < min2:
                    min2 = a
            for e in range(row_ptr[r], row_ptr[r + 1]):
                mag = min2 if e == arg else min1
                s = sgn ^ (1 if v2c[e] < 0 else 0)
                c2v[e] = -scale * mag if s else scale * mag
        for c in range(N):
            tot = llr0[c]
            for q in range(col_ptr[c], col_ptr[c + 1]):
                tot += c2v[col_edges[q]]
            post[c] = tot
            for q in range(col_ptr[c], col_ptr[c + 1]):
                e = col_edges[q]
                v2c[e] = tot - c2v[e]
            hard[c] = 1 if tot < 0 else 0
        ok = True
        for r in range(m):
            par = 0
            for e in range(row_ptr[r], row_ptr[r + 1]):
                par ^= hard[edge_col[e]]
            if par != syn[r]:
                ok = False
                break
        if ok:
            return True
    return False


@nb.njit(cache=True, nogil=True)
def osd0(syn_packed, order, col_packed, basis, combos, sel, x):
    """Order-0 OSD: eliminate columns in ``order`` until the syndrome is in their span.

    Writes the solution indicator into ``x`` and returns False if the syndrome
    lies outside the column span.
    """
    W = syn_packed.shape[0]
    Wk = combos.shape[1]
    s_red = syn_packed.copy()
    s_comb = np.zeros(Wk, dtype=np.uint64)
    pivots = np.empty(basis.shape[0], dtype=np.int64)
    v = np.empty(W, dtype=np.uint64)
    comb = np.empty(Wk, dtype=np.uint64)
    x[:] = 0
    K = 0
    done = popcount_row(s_red) == 0
    for oc in range(order.shape[0]):
        if done or K == basis.shape[0]:
            break
        c = order[oc]
        for w in range(W):
            v[w] = col_packed[c, w]
        comb[:] = 0
        for k in range(K):
            p = pivots[k]
            if (v[p >> 6] >> np.uint64(p & 63)) & np.uint64(1):
                for w in range(W):
                    v[w] ^= basis[k, w]
                for w in range(Wk):
                    comb[w] ^= combos[k, w]
        piv = _lowest_bit(v)
        if piv < 0:
            continue
        comb[K >> 6] ^= np.uint64(1) << np.uint64(K & 63)
        basis[K] = v
        combos[K] = comb
        pivots[K] = piv
        sel[K] = c
        K += 1
        if (s_red[piv >> 6] >> np.uint64(piv & 63)) & np.uint64(1):
            for w in range(W):
                s_red[w] ^= v[w]
            for w in range(Wk):
                s_comb[w] ^= comb[w]
            done = popcount_row(s_red) == 0
    if not done:
        return False
    for k in range(K):
        if (s_comb[k >> 6] >> np.uint64(k & 63)) & np.uint64(1):
            x[sel[k]] = 1
    return True


@nb.njit(cache=True, nogil=True)
def bposd_batch(dets, log, num_det, row_ptr, edge_col, col_ptr, col_edges, col_packed, col_log, llr0,
                max_iter, scale, osd_always, out_fail, out_weight, out_osd, out_pred):
    """Joint BP+OSD decoding of a batch of packed detector vectors.

    ``out_osd`` is 0 (BP answer kept), 1 (OSD answer kept) or 2 (syndrome
    unmatchable).  With ``osd_always`` the OSD solution is computed even when
    BP converges and the one with the smaller total prior LLR is kept.
    """
    shots = dets.shape[0]
    E = edge_col.shape[0]
    N = llr0.shape[0]
    v2c = np.zeros(E)
    c2v = np.zeros(E)
    post = np.zeros(N)
    hard = np.zeros(N, dtype=np.int64)
    x = np.zeros(N, dtype=np.int64)
    syn = np.zeros(num_det, dtype=np.int64)
    basis = np.zeros((num_det, dets.shape[1]), dtype=np.uint64)
    combos = np.zeros((num_det, (num_det + 63) // 64), dtype=np.uint64)
    sel = np.zeros(num_det, dtype=np.int64)
    for s in range(shots):
        if popcount_row(dets[s]) == 0:
            out_fail[s] = log[s] != 0
            out_weight[s] = 0
            out_osd[s] = 0
            out_pred[s] = 0
            continue
        for r in range(num_det):
            syn[r] = (dets[s, r >> 6] >> np.uint64(r & 63)) & np.uint64(1)
        ok = min_sum(syn, llr0, row_ptr, edge_col, col_ptr, col_edges, max_iter, scale, v2c, c2v, post, hard)
        if ok and not osd_always:
            for c in range(N):
                x[c] = hard[c]
            out_osd[s] = 0
        else:
            order = np.argsort(post)
            if osd0(dets[s], order, col_packed, basis, combos, sel, x):
                out_osd[s] = 1
                if ok:
                    cost_bp = 0.0
                    cost_osd = 0.0
                    for c in range(N):
                        cost_bp += llr0[c] * hard[c]
                        cost_osd += llr0[c] * x[c]
                    if cost_bp <= cost_osd:
                        for c in range(N):
                            x[c] = hard[c]
                        out_osd[s] = 0
            elif ok:
                for c in range(N):
                    x[c] = hard[c]
                out_osd[s] = 0
            else:
                out_osd[s] = 2
        pred = np.uint8(0)
        wt = 0
        for c in range(N):
            if x[c]:
                pred ^= col_log[c]
                wt += 1
        out_pred[s] = pred
        out_weight[s] = wt
        out_fail[s] = (pred ^ log[s]) != 0 or out_osd[s] == 2
