"""JIT-compiled interpolation core for characteristic-2 fields.

This mirrors the reference implementation in rs_kv._koetter_reference but
runs the constraint loop in machine code.  Field multiplication uses the
context's doubled exp table (so no modular reduction on log sums) and
addition is XOR.  Binomial coefficients mod 2 reduce to a subset test on
bit patterns.

Kept in a separate module so the package still works (slower) when numba
is unavailable; rs_kv falls back to the reference path in that case.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def koetter_char2(xs, ys, aa, bb, w, ycap, exp2, log, q, capx):
    nb = ycap + 1
    G = np.zeros((nb, nb, capx), dtype=np.int64)
    wdeg = np.empty(nb, dtype=np.int64)
    xdeg = np.zeros(nb, dtype=np.int64)
    ydeg = np.empty(nb, dtype=np.int64)
    for j in range(nb):
        G[j, j, 0] = 1
        wdeg[j] = j * w
        ydeg[j] = j

    order = q - 1
    xpow = np.empty(capx + 1, dtype=np.int64)
    ypow = np.empty(nb + 1, dtype=np.int64)
    delta = np.empty(nb, dtype=np.int64)
    lw = np.empty((nb, capx), dtype=np.int64)  # log of wy[t]*wx[r], -1 if zero

    for ci in range(len(xs)):
        x = xs[ci]
        y = ys[ci]
        a = aa[ci]
        b = bb[ci]

        xmax = 0
        ymax = 0
        for j in range(nb):
            if xdeg[j] > xmax:
                xmax = xdeg[j]
            if ydeg[j] > ymax:
                ymax = ydeg[j]

        xpow[0] = 1
        for r in range(1, xmax + 1):
            xp = xpow[r - 1]
            if xp == 0 or x == 0:
                xpow[r] = 0
            else:
                xpow[r] = exp2[log[xp] + log[x]]
        ypow[0] = 1
        for t in range(1, ymax + 1):
            yp = ypow[t - 1]
            if yp == 0 or y == 0:
                ypow[t] = 0
            else:
                ypow[t] = exp2[log[yp] + log[y]]

        # log-weights of the Hasse term for exponent pair (t, r)
        for t in range(b, ymax + 1):
            if (t & b) == b:
                wyv = ypow[t - b]
            else:
                wyv = 0
            for r in range(a, xmax + 1):
                if wyv != 0 and (r & a) == a:
                    wxv = xpow[r - a]
                    if wxv != 0:
                        lw[t, r] = (log[wyv] + log[wxv]) % order
                    else:
                        lw[t, r] = -1
                else:
                    lw[t, r] = -1

        # discrepancies
        for j in range(nb):
            acc = 0
            for t in range(b, ydeg[j] + 1):
                if (t & b) != b or ypow[t - b] == 0:
                    continue
                for r in range(a, xdeg[j] + 1):
                    g = G[j, t, r]
                    if g != 0 and lw[t, r] >= 0:
                        acc ^= exp2[log[g] + lw[t, r]]
            delta[j] = acc

        jstar = -1
        for j in range(nb):
            if delta[j] != 0 and (jstar < 0 or wdeg[j] < wdeg[jstar]):
                jstar = j
        if jstar < 0:
            continue

        ds = delta[jstar]
        lds = log[ds]
        ysj = ydeg[jstar]
        xsj = xdeg[jstar]
        for j in range(nb):
            if j == jstar or delta[j] == 0:
                continue
            ldj = log[delta[j]]
            tmax = ydeg[j] if ydeg[j] > ysj else ysj
            rmax = xdeg[j] if xdeg[j] > xsj else xsj
            for t in range(tmax + 1):
                for r in range(rmax + 1):
                    gj = G[j, t, r]
                    gsv = G[jstar, t, r]
                    v = 0
                    if gj != 0:
                        v = exp2[lds + log[gj]]
                    if gsv != 0:
                        v ^= exp2[ldj + log[gsv]]
                    G[j, t, r] = v
            ydeg[j] = tmax
            xdeg[j] = rmax

        # g_jstar <- (X + x) g_jstar  (char 2)
        if xsj + 1 >= capx:
            return G[0, :1, :1], np.int64(-1), False
        if x == 0:
            for t in range(ysj + 1):
                for r in range(xsj, -1, -1):
                    G[jstar, t, r + 1] = G[jstar, t, r]
                G[jstar, t, 0] = 0
        else:
            lx = log[x]
            for t in range(ysj + 1):
                prev = np.int64(0)
                for r in range(xsj + 1):
                    g = G[jstar, t, r]
                    v = prev
                    if g != 0:
                        v ^= exp2[lx + log[g]]
                    G[jstar, t, r] = v
                    prev = g
                G[jstar, t, xsj + 1] = prev
        xdeg[jstar] = xsj + 1
        wdeg[jstar] += 1

    best = 0
    for j in range(1, nb):
        if wdeg[j] < wdeg[best]:
            best = j
    return G[best, : ydeg[best] + 1, : xdeg[best] + 1].copy(), wdeg[best], True
