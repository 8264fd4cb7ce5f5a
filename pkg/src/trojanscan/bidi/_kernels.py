"""UAX #9 level resolution and reordering over integer class arrays.

Class codes are the ``BidiClass`` integer values. Bracket data comes in as two
parallel arrays: ``bkey`` (pairing key, -1 when not a bracket) and ``btype``
(0 none, 1 opening, 2 closing). Everything here must stay inside the numba
nopython subset.
"""

import numpy as np

from .._accel import kernel

L, R, AL, EN, ES, ET, AN, CS, NSM, BN, B, S, WS, ON = range(14)
LRE, RLE, LRO, RLO, PDF, LRI, RLI, FSI, PDI = range(14, 23)

MAX_DEPTH = 125
BRACKET_STACK = 63
NEUTRAL = -1


@kernel
def is_removed(c):
    return c == BN or (c >= LRE and c <= PDF)


@kernel
def is_isolate_initiator(c):
    return c == LRI or c == RLI or c == FSI


@kernel
def is_neutral_or_isolate(c):
    return c == B or c == S or c == WS or c == ON or (c >= LRI and c <= PDI)


@kernel
def strong_dir(c):
    """L for L; R for R, AL, EN, AN (numbers count as R in N0/N1); else -1."""
    if c == L:
        return L
    if c == R or c == AL or c == EN or c == AN:
        return R
    return -1


@kernel
def match_isolates(cls, lo, hi):
    """For each isolate initiator, the index of its matching PDI (and back)."""
    match = np.full(hi - lo, -1, dtype=np.int32)
    stack = np.empty(hi - lo, dtype=np.int32)
    sp = 0
    for i in range(lo, hi):
        c = cls[i]
        if is_isolate_initiator(c):
            stack[sp] = i - lo
            sp += 1
        elif c == PDI and sp > 0:
            sp -= 1
            j = stack[sp]
            match[j] = i - lo
            match[i - lo] = j
    return match


@kernel
def first_strong(cls, lo, start, stop, match):
    """P2: first L/R/AL in [start, stop), skipping isolates. Returns L, R or -1."""
    i = start
    while i < stop:
        c = cls[lo + i]
        if c == L:
            return L
        if c == R or c == AL:
            return R
        if is_isolate_initiator(c):
            if match[i] < 0:
                return -1
            i = match[i]
        i += 1
    return -1


@kernel
def _resolve_sequence(seq, m, t, t0, lev, bkey, btype, sos, eos):
    """Apply W1-W7, N0-N2 and I1-I2 to one isolating run sequence in place."""
    level = lev[seq[0]]
    e = R if level & 1 else L
    ts = np.empty(m, dtype=np.int8)
    for k in range(m):
        ts[k] = t[seq[k]]

    # W1
    for k in range(m):
        if ts[k] == NSM:
            if k == 0:
                ts[k] = sos
            else:
                p = ts[k - 1]
                ts[k] = ON if (is_isolate_initiator(p) or p == PDI) else p
    # W2, W3
    last = sos
    for k in range(m):
        c = ts[k]
        if c == L or c == R or c == AL:
            last = c
        elif c == EN and last == AL:
            ts[k] = AN
    for k in range(m):
        if ts[k] == AL:
            ts[k] = R
    # W4
    for k in range(1, m - 1):
        c = ts[k]
        if c == ES:
            if ts[k - 1] == EN and ts[k + 1] == EN:
                ts[k] = EN
        elif c == CS:
            p = ts[k - 1]
            if (p == EN or p == AN) and ts[k + 1] == p:
                ts[k] = p
    # W5
    k = 0
    while k < m:
        if ts[k] == ET:
            j = k
            while j < m and ts[j] == ET:
                j += 1
            if (k > 0 and ts[k - 1] == EN) or (j < m and ts[j] == EN):
                for q in range(k, j):
                    ts[q] = EN
            k = j
        else:
            k += 1
    # W6
    for k in range(m):
        c = ts[k]
        if c == ES or c == ET or c == CS:
            ts[k] = ON
    # W7
    last = sos
    for k in range(m):
        c = ts[k]
        if c == L or c == R:
            last = c
        elif c == EN and last == L:
            ts[k] = L

    # N0: identify bracket pairs (BD16) ...
    sk_key = np.empty(BRACKET_STACK, dtype=np.int32)
    sk_pos = np.empty(BRACKET_STACK, dtype=np.int32)
    top = 0
    popen = np.empty(m, dtype=np.int32)
    pclose = np.empty(m, dtype=np.int32)
    npairs = 0
    for k in range(m):
        if ts[k] != ON:
            continue
        bt = btype[seq[k]]
        if bt == 1:
            if top == BRACKET_STACK:
                break
            sk_key[top] = bkey[seq[k]]
            sk_pos[top] = k
            top += 1
        elif bt == 2:
            key = bkey[seq[k]]
            s = top - 1
            while s >= 0:
                if sk_key[s] == key:
                    popen[npairs] = sk_pos[s]
                    pclose[npairs] = k
                    npairs += 1
                    top = s
                    break
                s -= 1
    if npairs > 0:
        order = np.argsort(popen[:npairs], kind="mergesort")
        # ... then resolve them in order of their opening bracket.
        for q in range(npairs):
            o = popen[order[q]]
            c = pclose[order[q]]
            found_e = False
            found_opp = False
            for k in range(o + 1, c):
                d = strong_dir(ts[k])
                if d == e:
                    found_e = True
                    break
                if d != -1:
                    found_opp = True
            if found_e:
                newt = e
            elif found_opp:
                prev = sos
                for k in range(o - 1, -1, -1):
                    d = strong_dir(ts[k])
                    if d != -1:
                        prev = d
                        break
                # c.1 opposite context keeps the opposite direction, c.2 otherwise e;
                # prev is always L or R so both cases reduce to prev.
                newt = prev
            else:
                continue
            ts[o] = newt
            ts[c] = newt
            for k in range(o + 1, m):
                if t0[seq[k]] != NSM:
                    break
                ts[k] = newt
            for k in range(c + 1, m):
                if t0[seq[k]] != NSM:
                    break
                ts[k] = newt

    # N1, N2
    k = 0
    while k < m:
        if is_neutral_or_isolate(ts[k]):
            j = k
            while j < m and is_neutral_or_isolate(ts[j]):
                j += 1
            lead = sos if k == 0 else strong_dir(ts[k - 1])
            trail = eos if j == m else strong_dir(ts[j])
            fill = lead if lead == trail else e
            for q in range(k, j):
                ts[q] = fill
            k = j
        else:
            k += 1

    # I1, I2
    for k in range(m):
        c = ts[k]
        i = seq[k]
        if level & 1 == 0:
            if c == R:
                lev[i] = level + 1
            elif c == AN or c == EN:
                lev[i] = level + 2
        elif c == L or c == EN or c == AN:
            lev[i] = level + 1


@kernel
def resolve_paragraph(cls, bkey, btype, lo, hi, para_dir, levels):
    """Resolve embedding levels for ``cls[lo:hi]`` (one paragraph) into ``levels``.

    ``para_dir`` is 0 (LTR), 1 (RTL) or 2 (first-strong). Returns the
    paragraph embedding level.
    """
    n = hi - lo
    match = match_isolates(cls, lo, hi)
    if para_dir == 2:
        para = 1 if first_strong(cls, lo, 0, n, match) == R else 0
    else:
        para = para_dir

    t = np.empty(n, dtype=np.int8)
    lev = np.empty(n, dtype=np.int8)
    for i in range(n):
        t[i] = cls[lo + i]

    # X1-X8
    st_level = np.empty(MAX_DEPTH + 2, dtype=np.int8)
    st_over = np.empty(MAX_DEPTH + 2, dtype=np.int8)
    st_iso = np.empty(MAX_DEPTH + 2, dtype=np.bool_)
    st_level[0] = para
    st_over[0] = NEUTRAL
    st_iso[0] = False
    sp = 1
    over_iso = 0
    over_emb = 0
    valid_iso = 0
    for i in range(n):
        c = cls[lo + i]
        cur = st_level[sp - 1]
        if c == RLE or c == LRE or c == RLO or c == LRO:
            lev[i] = cur
            nl = (cur + 1) | 1 if (c == RLE or c == RLO) else (cur + 2) & ~1
            if nl <= MAX_DEPTH and over_iso == 0 and over_emb == 0:
                st_level[sp] = nl
                st_over[sp] = R if c == RLO else (L if c == LRO else NEUTRAL)
                st_iso[sp] = False
                sp += 1
            elif over_iso == 0:
                over_emb += 1
        elif is_isolate_initiator(c):
            lev[i] = cur
            if st_over[sp - 1] != NEUTRAL:
                t[i] = st_over[sp - 1]
            if c == FSI:
                stop = match[i] if match[i] >= 0 else n
                rtl = first_strong(cls, lo, i + 1, stop, match) == R
            else:
                rtl = c == RLI
            nl = (cur + 1) | 1 if rtl else (cur + 2) & ~1
            if nl <= MAX_DEPTH and over_iso == 0 and over_emb == 0:
                valid_iso += 1
                st_level[sp] = nl
                st_over[sp] = NEUTRAL
                st_iso[sp] = True
                sp += 1
            else:
                over_iso += 1
        elif c == PDI:
            if over_iso > 0:
                over_iso -= 1
            elif valid_iso > 0:
                over_emb = 0
                while not st_iso[sp - 1]:
                    sp -= 1
                sp -= 1
                valid_iso -= 1
            lev[i] = st_level[sp - 1]
            if st_over[sp - 1] != NEUTRAL:
                t[i] = st_over[sp - 1]
        elif c == PDF:
            if over_iso == 0:
                if over_emb > 0:
                    over_emb -= 1
                elif not st_iso[sp - 1] and sp >= 2:
                    sp -= 1
            lev[i] = st_level[sp - 1]
        elif c == B:
            lev[i] = para
        elif c == BN:
            lev[i] = cur
        else:
            lev[i] = cur
            if st_over[sp - 1] != NEUTRAL:
                t[i] = st_over[sp - 1]

    # X9: retained characters, X10: level runs chained into sequences.
    nr = np.empty(n, dtype=np.int32)
    pos = np.full(n, -1, dtype=np.int32)
    cnt = 0
    for i in range(n):
        if not is_removed(cls[lo + i]):
            nr[cnt] = i
            pos[i] = cnt
            cnt += 1

    if cnt > 0:
        run_lo = np.empty(cnt, dtype=np.int32)
        run_hi = np.empty(cnt, dtype=np.int32)
        run_of = np.empty(cnt, dtype=np.int32)
        nruns = 0
        for k in range(cnt):
            if k == 0 or lev[nr[k]] != lev[nr[k - 1]]:
                run_lo[nruns] = k
                nruns += 1
            run_hi[nruns - 1] = k + 1
            run_of[k] = nruns - 1

        next_run = np.full(nruns, -1, dtype=np.int32)
        is_cont = np.zeros(nruns, dtype=np.bool_)
        for r in range(nruns):
            last = nr[run_hi[r] - 1]
            if is_isolate_initiator(cls[lo + last]) and match[last] >= 0:
                nxt = run_of[pos[match[last]]]
                next_run[r] = nxt
                is_cont[nxt] = True

        t0 = t.copy()
        xlev = lev.copy()  # sos/eos use pre-I1 levels
        bk = bkey[lo:hi]
        bt = btype[lo:hi]
        seq = np.empty(cnt, dtype=np.int32)
        for r in range(nruns):
            if is_cont[r]:
                continue
            m = 0
            q = r
            while q >= 0:
                for k in range(run_lo[q], run_hi[q]):
                    seq[m] = nr[k]
                    m += 1
                q = next_run[q]
            first = seq[0]
            lastc = seq[m - 1]
            level = xlev[first]
            k = pos[first]
            prev_level = xlev[nr[k - 1]] if k > 0 else para
            if is_isolate_initiator(cls[lo + lastc]):
                next_level = para
            else:
                k = pos[lastc]
                next_level = xlev[nr[k + 1]] if k + 1 < cnt else para
            sos = R if max(prev_level, level) & 1 else L
            eos = R if max(next_level, level) & 1 else L
            _resolve_sequence(seq, m, t, t0, lev, bk, bt, sos, eos)

    # Removed characters take the level of the preceding character.
    for i in range(n):
        if is_removed(cls[lo + i]):
            lev[i] = lev[i - 1] if i > 0 else para

    # L1
    trailing = True
    for i in range(n - 1, -1, -1):
        c = cls[lo + i]
        if c == B or c == S:
            lev[i] = para
            trailing = True
        elif trailing and (c == WS or is_isolate_initiator(c) or c == PDI or is_removed(c)):
            lev[i] = para
        else:
            trailing = False

    for i in range(n):
        levels[lo + i] = lev[i]
    return para


@kernel
def resolve(cls, bkey, btype, para_dir, levels):
    """Resolve a whole text, splitting paragraphs after each B.

    Returns the embedding level of the first paragraph.
    """
    n = cls.shape[0]
    first = -1
    lo = 0
    for i in range(n + 1):
        if i == n or cls[i] == B:
            hi = i + 1 if i < n else n
            if hi > lo or first < 0:
                p = resolve_paragraph(cls, bkey, btype, lo, hi, para_dir, levels)
                if first < 0:
                    first = p
            lo = hi
    return first


@kernel
def visual_order(cls, levels, lo, hi):
    """L2: logical indices (relative to ``lo``) in visual order, X9-removed excluded."""
    n = hi - lo
    order = np.empty(n, dtype=np.int32)
    lv = np.empty(n, dtype=np.int8)
    m = 0
    for i in range(n):
        if not is_removed(cls[lo + i]):
            order[m] = i
            lv[m] = levels[lo + i]
            m += 1
    if m == 0:
        return order[:0]
    highest = 0
    lowest_odd = 127
    for k in range(m):
        v = lv[k]
        if v > highest:
            highest = v
        if v & 1 and v < lowest_odd:
            lowest_odd = v
    level = highest
    while level >= lowest_odd and level > 0:
        k = 0
        while k < m:
            if lv[k] >= level:
                j = k
                while j < m and lv[j] >= level:
                    j += 1
                a = k
                b = j - 1
                while a < b:
                    tmp = order[a]
                    order[a] = order[b]
                    order[b] = tmp
                    tv = lv[a]
                    lv[a] = lv[b]
                    lv[b] = tv
                    a += 1
                    b -= 1
                k = j
            else:
                k += 1
        level -= 1
    return order[:m]
