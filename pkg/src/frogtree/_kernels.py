"""Compiled trial loops.

These replay the pure-Python engines draw for draw: same keys, same
SplitMix64 arithmetic, same scheduler bookkeeping, so a kernel trial and
the matching ``run_fm`` / ``run_fm_prime`` / ``run_rfm`` call agree on
every counter.  State lives in flat arrays indexed by heap code, which
caps the usable depth; callers check ``fits`` first and fall back to the
Python engines otherwise.

The optional follower tracks the coupled process on the larger tree
(modified FM(kd,p) for FM, RFM'(d+1,p) for RFM) and checks the coupling
invariants as it goes.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_TWO53 = 2.0 ** -53

MAX_CELLS = 1 << 27

# walk phases
_TOP, _CHK, _EXC = 0, 1, 2
# walk events, as in core.walks
_UP, _ESCAPE, _LOOP_DOWN, _LOOP_UP = 0, 1, 2, 3
# truncation codes
TR_STEP_CAP, TR_DEPTH_EXTINCT, TR_ALL_REMOVED = 0, 1, 2
# rfm stages
_ST_ROOT, _ST_UP, _ST_DOWN = 0, 1, 2

# violation kinds
V_BIJECTION = 1
V_DISPLACEMENT = 2
V_PROJECTION = 3
V_WAKE_AVAILABLE = 4
V_LEAF = 5
V_IDENTITY = 6
V_SLEEP_INEQ = 7
V_VERTEX_INEQ = 8
V_PAIRED_VERTEX = 9
V_ROOT_VISITS = 10
V_UNEXPECTED = 11
VIOLATION_NAMES = {
    V_BIJECTION: "bijection",
    V_DISPLACEMENT: "equal_displacement",
    V_PROJECTION: "block_projection",
    V_WAKE_AVAILABLE: "wake_availability",
    V_LEAF: "first_leaf_visit",
    V_IDENTITY: "identity_embedding",
    V_SLEEP_INEQ: "sleep_ineq",
    V_VERTEX_INEQ: "vertex_ineq",
    V_PAIRED_VERTEX: "paired_vertex",
    V_ROOT_VISITS: "root_visits",
    V_UNEXPECTED: "unexpected_move",
}

# fault injection codes, used only by the checker tests
FAULT_NONE = 0
FAULT_IGNORE_BLOCK = 1   # fm follower: uniform child of all kd
FAULT_SKIP_ROOT_UP = 2   # fm follower: ignore up-moves into the root
FAULT_ANY_CHILD = 1      # rfm follower: uniform child of all d+1
FAULT_FORGET_WAKE = 2    # rfm follower: do not record its wakes


def n_codes(d: int, depth: int) -> int:
    """Number of vertices of T_d at depth <= ``depth``."""
    return (d ** (depth + 1) - 1) // (d - 1)


@njit(inline="always", cache=True)
def _fin(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(inline="always", cache=True)
def _u01(z):
    return np.float64(_fin(z) >> _S11) * _TWO53


@njit(inline="always", cache=True)
def _mix(x):
    return _fin(x + _G)


@njit(cache=True)
def _walk_step(i, d, rho, q_exc, up_h, down_h, wc, wd, wf, wph, wq, wb, st):
    """Advance frog i's walk by one step; same draws as ``core.walks.frog_walk``."""
    code = wc[i]
    depth = wd[i]
    while True:
        ph = wph[i]
        if ph == _TOP:
            if wf[i] != 0 and depth != 0:
                st[i] += _G
                if _u01(st[i]) >= rho:
                    wf[i] = 0
                wq[i] = q_exc
            else:
                wf[i] = 0
                wq[i] = q_exc if depth != 0 else rho
            wph[i] = _CHK
        elif ph == _CHK:
            st[i] += _G
            if _u01(st[i]) < wq[i]:
                wb[i] = depth
                st[i] += _G
                code = code * d + 1 + np.int64(_u01(st[i]) * d)
                wc[i] = code
                wd[i] = depth + 1
                wph[i] = _EXC
                return _LOOP_DOWN
            wph[i] = _TOP
            if wf[i] != 0:
                wc[i] = (code - 1) // d
                wd[i] = depth - 1
                return _UP
            st[i] += _G
            wc[i] = code * d + 1 + np.int64(_u01(st[i]) * d)
            wd[i] = depth + 1
            return _ESCAPE
        else:
            st[i] += _G
            u = _u01(st[i])
            if u < up_h:
                wc[i] = (code - 1) // d
                wd[i] = depth - 1
                if depth - 1 == wb[i]:
                    wph[i] = _CHK
                return _LOOP_UP
            k = np.int64((u - up_h) / down_h * d)
            if k > d - 1:
                k = d - 1
            wc[i] = code * d + 1 + k
            wd[i] = depth + 1
            return _LOOP_DOWN


@njit(cache=True)
def _ancestor(code, depth, target, d):
    while depth > target:
        code = (code - 1) // d
        depth -= 1
    return code


@njit(cache=True)
def _violate(viol, tick, kind, frog, expected, actual):
    viol[0] = tick
    viol[1] = kind
    viol[2] = frog
    viol[3] = expected
    viol[4] = actual


@njit(cache=True)
def fm_trial(d, p, rho, cap, tmax, step_cap, fifo, silent, fk_pre, sched_key,
             follow, k, fol_pre, check, fault,
             woken, birth, wc, wd, wf, wph, wq, wb, st, pool,
             fcode, fdepth, fst, lwoken, lvisited, proj, svisited,
             res, viol):
    """One FM / FM' trial; with ``follow`` also the modified FM(kd,p) follower.

    res: root_visits, frogs_woken, steps, truncation, follower root visits,
    follower wakes, checks performed, violation flag.
    """
    if rho > 0.0:
        q_exc = (1.0 - p) * rho
        up_h = p / rho
    else:
        q_exc = 0.0
        up_h = 0.0
    down_h = 1.0 - up_h
    kd = k * d
    nf = 1
    birth[0] = 0
    wc[0] = 0
    wd[0] = 0
    wf[0] = 1
    wph[0] = _TOP
    wq[0] = 0.0
    wb[0] = 0
    st[0] = _mix(fk_pre ^ np.uint64(0))
    if follow:
        lwoken[:] = 0
        lvisited[:] = 0
        proj[:] = 0
        svisited[:] = 0
        fcode[0] = 0
        fdepth[0] = 0
        fst[0] = _mix(fol_pre ^ np.uint64(0))
    cap_ring = pool.shape[0]
    n = 1
    pool[0] = 0
    head = 0
    held = -1
    ss = sched_key
    root_visits = 0
    steps = 0
    lost = 0
    trunc = -1
    f_root = 0
    f_woken = 0
    checks = 0
    bad = 0
    i = 0
    while n > 0 or held >= 0:
        if steps >= step_cap:
            trunc = TR_STEP_CAP
            break
        if fifo:
            if held >= 0:
                pool[(head + n) % cap_ring] = held
                n += 1
            f = pool[head]
            head = (head + 1) % cap_ring
            n -= 1
            held = f
        else:
            ss += _G
            i = np.int64(_u01(ss) * n)
            f = pool[i]
        old_depth = wd[f]
        kind = _walk_step(f, d, rho, q_exc, up_h, down_h, wc, wd, wf, wph, wq, wb, st)
        steps += 1
        code = wc[f]
        depth = wd[f]
        if depth > cap:
            if fifo:
                held = -1
            else:
                n -= 1
                if i < n:
                    pool[i] = pool[n]
            lost += 1
            if silent and kind == _LOOP_DOWN:
                for j in range(wb[f] + 1, depth):
                    a = _ancestor(code, depth, j, d)
                    if j <= tmax and woken[a] == 0:
                        woken[a] = 1
                        birth[nf] = a
                        wc[nf] = a
                        wd[nf] = j
                        wf[nf] = 1
                        wph[nf] = _TOP
                        wq[nf] = 0.0
                        wb[nf] = 0
                        st[nf] = _mix(fk_pre ^ np.uint64(a))
                        if fifo:
                            pool[(head + n) % cap_ring] = nf
                        else:
                            pool[n] = nf
                        n += 1
                        nf += 1
            continue
        if follow:
            # mirror the move
            if depth < old_depth:
                if not (fault == FAULT_SKIP_ROOT_UP and depth == 0):
                    fcode[f] = (fcode[f] - 1) // kd
                    fdepth[f] -= 1
                if fdepth[f] == 0:
                    f_root += 1
            else:
                x = (code - 1) % d + 1
                fst[f] += _G
                u = _u01(fst[f])
                if fault == FAULT_IGNORE_BLOCK:
                    digit = np.int64(u * kd) + 1
                    if digit > kd:
                        digit = kd
                else:
                    off = np.int64(u * k)
                    if off > k - 1:
                        off = k - 1
                    digit = k * (x - 1) + off + 1
                fcode[f] = fcode[f] * kd + digit
                fdepth[f] += 1
                if check:
                    checks += 1
                    if (digit - 1) // k + 1 != x:
                        _violate(viol, steps, V_PROJECTION, f, x, (digit - 1) // k + 1)
                        bad = 1
                        break
            if check:
                checks += 1
                if fdepth[f] != depth:
                    _violate(viol, steps, V_DISPLACEMENT, f, depth, fdepth[f])
                    bad = 1
                    break
                if k == 1 and fcode[f] != code:
                    _violate(viol, steps, V_IDENTITY, f, code, fcode[f])
                    bad = 1
                    break
                if depth <= tmax and depth > 0:
                    fc = fcode[f]
                    first_leaf = lvisited[fc] == 0
                    if first_leaf:
                        lvisited[fc] = 1
                        was_leaf = proj[code] > 0
                        proj[code] += 1
                    else:
                        was_leaf = True
                    if was_leaf != (svisited[code] != 0):
                        _violate(viol, steps, V_LEAF, f, svisited[code], was_leaf)
                        bad = 1
                        break
                    svisited[code] = 1
        if depth == 0:
            root_visits += 1
            if follow and check:
                checks += 1
                if f_root != root_visits:
                    _violate(viol, steps, V_ROOT_VISITS, f, root_visits, f_root)
                    bad = 1
                    break
        elif depth <= tmax and woken[code] == 0:
            if not (silent and wph[f] == _EXC):
                woken[code] = 1
                birth[nf] = code
                wc[nf] = code
                wd[nf] = depth
                wf[nf] = 1
                wph[nf] = _TOP
                wq[nf] = 0.0
                wb[nf] = 0
                st[nf] = _mix(fk_pre ^ np.uint64(code))
                if follow:
                    fc = fcode[f]
                    if check:
                        checks += 2
                        # full projection of the follower's path
                        c2 = fc
                        c1 = code
                        for _ in range(depth):
                            x1 = (c1 - 1) % d + 1
                            x2 = (c2 - 1) % kd
                            if x2 // k + 1 != x1:
                                _violate(viol, steps, V_PROJECTION, f, x1, x2 // k + 1)
                                bad = 1
                                break
                            c1 = (c1 - 1) // d
                            c2 = (c2 - 1) // kd
                        if bad:
                            break
                        if lwoken[fc] != 0:
                            _violate(viol, steps, V_WAKE_AVAILABLE, f, 0, 1)
                            bad = 1
                            break
                    lwoken[fc] = 1
                    f_woken += 1
                    fcode[nf] = fc
                    fdepth[nf] = depth
                    fst[nf] = _mix(fol_pre ^ np.uint64(code))
                if fifo:
                    pool[(head + n) % cap_ring] = nf
                else:
                    pool[n] = nf
                n += 1
                nf += 1
    if silent and trunc == TR_STEP_CAP:
        m = n
        order = np.empty(m + (1 if held >= 0 else 0), dtype=np.int64)
        pos = 0
        if held >= 0:
            order[0] = held
            pos = 1
        for r in range(m):
            if fifo:
                order[pos + r] = pool[(head + r) % cap_ring]
            else:
                order[pos + r] = pool[r]
        for r in range(order.shape[0]):
            g = order[r]
            if wph[g] == _EXC:
                gc = wc[g]
                gd = wd[g]
                for j in range(wb[g] + 1, gd + 1):
                    a = _ancestor(gc, gd, j, d)
                    if j <= tmax and woken[a] == 0:
                        woken[a] = 1
                        birth[nf] = a
                        nf += 1
    if trunc < 0:
        trunc = TR_DEPTH_EXTINCT if lost > 0 else TR_ALL_REMOVED
    # reset the woken flags for the next trial
    for r in range(1, nf):
        woken[birth[r]] = 0
    res[0] = root_visits
    res[1] = nf - 1
    res[2] = steps
    res[3] = trunc
    res[4] = f_root
    res[5] = f_woken
    res[6] = checks
    res[7] = bad


@njit(inline="always", cache=True)
def _stack_u(pre, code, cnt):
    h = _mix(pre ^ np.uint64(code))
    return _u01(h + np.uint64(cnt) * _G)


@njit(cache=True)
def rfm_trial(d, rho, cap, t, step_cap, fifo, fresh, up_pre, down_pre, sched_key,
              follow, fol_pre, check, fault,
              ucnt, dcnt, visited, vch, touched,
              fr_code, fr_depth, fr_stage, pool,
              vpair, fvis, fvch, ftouched, fcode, fdepth, fst,
              tally_steps, tally_early, res, viol):
    """One RFM trial (no early-removal policy); with ``follow`` also RFM'(d+1,p).

    res: root_visits, woken, steps, truncation, hit_root, hit_visited,
    early, cap, a_event, follower root visits, follower wakes, follower
    hit_visited, follower early, follower cap, checks, violation flag.
    """
    D = d + 1
    alpha = 1.0 / D
    nt = 1
    touched[0] = 0
    visited[0] = 1
    nft = 1
    if follow:
        ftouched[0] = 0
        fvis[0] = 1
        vpair[0] = 0
        fcode[0] = 0
        fdepth[0] = 0
        fst[0] = _mix(fol_pre ^ np.uint64(0))
    nf = 1
    fr_code[0] = 0
    fr_depth[0] = 0
    fr_stage[0] = _ST_ROOT
    cap_ring = pool.shape[0]
    n = 1
    pool[0] = 0
    head = 0
    held = -1
    ss = sched_key
    root_visits = 0
    woken = 0
    steps = 0
    trunc = -1
    k_root = 0
    k_vis = 0
    k_cap = 0
    x2 = -1
    a_event = 0
    f_root = 0
    f_woken = 0
    f_vis = 0
    f_early = 0
    f_cap = 0
    checks = 0
    bad = 0
    i = 0
    while n > 0 or held >= 0:
        if steps >= step_cap:
            trunc = TR_STEP_CAP
            break
        if fifo:
            if held >= 0:
                pool[(head + n) % cap_ring] = held
                n += 1
            f = pool[head]
            head = (head + 1) % cap_ring
            n -= 1
            held = f
        else:
            ss += _G
            i = np.int64(_u01(ss) * n)
            f = pool[i]
        code = fr_code[f]
        depth = fr_depth[f]
        stage = fr_stage[f]
        steps += 1
        nc = 0
        drop = False
        up_move = False
        if stage == _ST_UP:
            ucnt[code] += 1
            u = _stack_u(up_pre, code, ucnt[code])
            if u < rho:
                up_move = True
                nc = (code - 1) // d
                if follow:
                    fcode[f] = (fcode[f] - 1) // D
                    fdepth[f] -= 1
                    if check:
                        checks += 2
                        if fdepth[f] != depth - 1:
                            _violate(viol, steps, V_DISPLACEMENT, f, depth - 1, fdepth[f])
                            bad = 1
                            break
                        if vpair[nc] != fcode[f]:
                            _violate(viol, steps, V_PAIRED_VERTEX, f, vpair[nc], fcode[f])
                            bad = 1
                            break
                if nc == 0:
                    root_visits += 1
                    k_root += 1
                    if follow:
                        f_root += 1
                    drop = True
                else:
                    fr_code[f] = nc
                    fr_depth[f] = depth - 1
            else:
                kk = np.int64((u - rho) / (1.0 - rho) * d)
                if kk > d - 1:
                    kk = d - 1
                fr_stage[f] = _ST_DOWN
                nc = code * d + kk + 1
        elif stage == _ST_DOWN:
            dcnt[code] += 1
            u = _stack_u(down_pre, code, dcnt[code])
            kk = np.int64(u * d)
            if kk > d - 1:
                kk = d - 1
            nc = code * d + kk + 1
        else:
            dcnt[0] += 1
            u = _stack_u(down_pre, 0, dcnt[0])
            kk = np.int64(u * d)
            if kk > d - 1:
                kk = d - 1
            nc = kk + 1
            fr_stage[f] = _ST_UP if fresh else _ST_DOWN
        if not up_move:
            nd = depth + 1
            fpos = 0
            if follow:
                fpos = fcode[f]
            if nd > cap:
                k_cap += 1
                if follow:
                    f_cap += 1
                drop = True
            else:
                if nd == 2:
                    if x2 < 0:
                        x2 = nc
                    elif nc != x2 and (nc - 1) // d == (x2 - 1) // d:
                        a_event = 1
                descending = fr_stage[f] == _ST_DOWN
                s_small = d - vch[code]
                s_large = 0
                if follow:
                    s_large = D - fvch[fpos]
                    if check:
                        checks += 1
                        if s_small + 1 != s_large:
                            _violate(viol, steps, V_SLEEP_INEQ, f, s_small + 1, s_large)
                            bad = 1
                            break
                if visited[nc] != 0:
                    if descending:
                        k_vis += 1
                        drop = True
                        if follow:
                            tally_steps[s_large] += 1
                            fst[f] += _G
                            if _u01(fst[f]) < alpha:
                                f_early += 1
                                tally_early[s_large] += 1
                            else:
                                f_vis += 1
                    else:
                        fr_code[f] = nc
                        fr_depth[f] = nd
                        if follow:
                            _violate(viol, steps, V_UNEXPECTED, f, 0, nc)
                            bad = 1
                            break
                elif descending and nd > t:
                    k_cap += 1
                    if follow:
                        f_cap += 1
                    drop = True
                else:
                    visited[nc] = 1
                    touched[nt] = nc
                    nt += 1
                    vch[code] += 1
                    fr_code[f] = nc
                    fr_depth[f] = nd
                    if follow:
                        tally_steps[s_large] += 1
                        fst[f] += _G
                        u = _u01(fst[f])
                        if fault == FAULT_ANY_CHILD:
                            jj = np.int64(u * D)
                            if jj > D - 1:
                                jj = D - 1
                            child = fpos * D + jj + 1
                        else:
                            jj = np.int64(u * s_large)
                            if jj > s_large - 1:
                                jj = s_large - 1
                            child = -1
                            for c in range(1, D + 1):
                                cc = fpos * D + c
                                if fvis[cc] == 0:
                                    if jj == 0:
                                        child = cc
                                        break
                                    jj -= 1
                        if check:
                            checks += 1
                            if child < 0 or fvis[child] != 0:
                                _violate(viol, steps, V_WAKE_AVAILABLE, f, 0, child)
                                bad = 1
                                break
                        fvis[child] = 1
                        ftouched[nft] = child
                        nft += 1
                        if fault != FAULT_FORGET_WAKE:
                            fvch[fpos] += 1
                        vpair[nc] = child
                        fcode[f] = child
                        fdepth[f] = nd
                        if check:
                            checks += 2
                            if (d - vch[code]) + 1 != D - fvch[fpos]:
                                _violate(viol, steps, V_VERTEX_INEQ, f,
                                         (d - vch[code]) + 1, D - fvch[fpos])
                                bad = 1
                                break
                            if vch[nc] != 0 or fvch[child] != 0:
                                _violate(viol, steps, V_VERTEX_INEQ, f, 0, 1)
                                bad = 1
                                break
                    if nd <= t:
                        woken += 1
                        fr_code[nf] = nc
                        fr_depth[nf] = nd
                        fr_stage[nf] = _ST_UP
                        if follow:
                            f_woken += 1
                            fcode[nf] = fcode[f]
                            fdepth[nf] = nd
                            fst[nf] = _mix(fol_pre ^ np.uint64(nc))
                        if fifo:
                            pool[(head + n) % cap_ring] = nf
                        else:
                            pool[n] = nf
                        n += 1
                        nf += 1
        if drop:
            if fifo:
                held = -1
            else:
                n -= 1
                if i < n:
                    pool[i] = pool[n]
        elif follow and check:
            checks += 2
            if fdepth[f] != fr_depth[f]:
                _violate(viol, steps, V_DISPLACEMENT, f, fr_depth[f], fdepth[f])
                bad = 1
                break
            if vpair[fr_code[f]] != fcode[f]:
                _violate(viol, steps, V_PAIRED_VERTEX, f, vpair[fr_code[f]], fcode[f])
                bad = 1
                break
    if follow and check and bad == 0:
        # sweep every paired vertex once more
        for r in range(nt):
            v = touched[r]
            checks += 1
            if (d - vch[v]) + 1 != D - fvch[vpair[v]]:
                _violate(viol, steps, V_VERTEX_INEQ, -1, (d - vch[v]) + 1, D - fvch[vpair[v]])
                bad = 1
                break
        checks += 1
        if f_root != root_visits:
            _violate(viol, steps, V_ROOT_VISITS, -1, root_visits, f_root)
            bad = 1
    if trunc < 0:
        trunc = TR_DEPTH_EXTINCT if k_cap > 0 else TR_ALL_REMOVED
    for r in range(nt):
        v = touched[r]
        visited[v] = 0
        vch[v] = 0
        ucnt[v] = 0
        dcnt[v] = 0
    if follow:
        for r in range(nft):
            v = ftouched[r]
            fvis[v] = 0
            fvch[v] = 0
    res[0] = root_visits
    res[1] = woken
    res[2] = steps
    res[3] = trunc
    res[4] = k_root
    res[5] = k_vis
    res[6] = 0
    res[7] = k_cap
    res[8] = a_event
    res[9] = f_root
    res[10] = f_woken
    res[11] = f_vis
    res[12] = f_early
    res[13] = f_cap
    res[14] = checks
    res[15] = bad
