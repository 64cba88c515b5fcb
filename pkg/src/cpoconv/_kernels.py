"""Compiled inner loops shared by the CPO, CPS and CSCC paths.

Everything here works on plain arrays for one image at a time. Structural
problems in a stream are reported through an integer status so the Python
wrappers can raise a proper exception.
"""
import numpy as np
from numba import njit

# int32 stream sentinels; both sit below every valid count and below -1
NPC = np.int32(np.iinfo(np.int32).min)
NPF = np.int32(np.iinfo(np.int32).min + 1)

KIND_NOP = 0
KIND_OVERLAP = 1
KIND_SINGLE = 2  # the Kw == 1 layout

MODE_CONV = 0
MODE_COUNT = 1
MODE_DECODE = 2

OK = 0
ERR_PTR_SHORT = 1
ERR_BAD_TAG = 2
ERR_BAD_COUNT = 3
ERR_DA_OVERRUN = 4
ERR_BAD_INDEX = 5
ERR_BAD_PATTERN = 6
ERR_DESYNC = 7
ERR_TRAILING = 8

STATUS_TEXT = {
    ERR_PTR_SHORT: "ptr stream ended inside a channel",
    ERR_BAD_TAG: "unexpected overlap-type tag in ptr",
    ERR_BAD_COUNT: "negative or decreasing cumulative count in ptr",
    ERR_DA_OVERRUN: "counts in ptr run past the end of DA",
    ERR_BAD_INDEX: "index outside the partition frame",
    ERR_BAD_PATTERN: "invalid set4 pattern code",
    ERR_DESYNC: "DA and IN streams out of step",
    ERR_TRAILING: "streams hold data beyond the last channel",
}

PATTERN_CODES = (7, 11, 13, 14, 15)


@njit(cache=True)
def pattern_size_code(pattern):
    """NZEs left after the first one; -1 flags an invalid code."""
    if pattern < 0:
        return 0
    if pattern == 15:
        return 3
    if pattern == 7 or pattern == 11 or pattern == 13 or pattern == 14:
        return 2
    return -1


@njit(cache=True)
def next_offset_code(pattern, g):
    """Row gap between the (g-1)th and gth set bit, lowest bit first; -1 if g is out of range."""
    seen = -1
    prev = -1
    for b in range(4):
        if (pattern >> b) & 1:
            seen += 1
            if seen == g:
                return b - prev
            prev = b
    return -1


@njit(cache=True)
def scatter(v, index, ptype, s, c, kh, kw, oh, ow, w, out):
    """One NZE against the row-major kernel vector: up to kh rows, ptype+1 columns.

    Returns the number of multiply-accumulates, or -1 when the NZE would land
    outside the output / kernel (corrupt index or partition).
    """
    col = index % kw
    row = index // kw
    if col - ptype < 0 or s + ptype >= ow:
        return -1
    nk = w.shape[1]
    macs = 0
    for l in range(kh):
        y = row - l
        if y >= 0 and y < oh:
            t = col + l * kw
            for i in range(ptype + 1):
                for k in range(nk):
                    out[k, y, s + i] += v * w[c, k, t - i]
            macs += (ptype + 1) * nk
    return macs


@njit(cache=True)
def _visit(mode, v, index, ptype, s, c, kh, kw, oh, ow, hp, w, out, dec, nd, stats):
    """Dispatch one decoded NZE. Returns the new decode cursor or -1 on error."""
    if index < 0 or index >= hp * kw:
        return -1
    if mode == MODE_DECODE:
        dec[nd, 0] = c
        dec[nd, 1] = index // kw
        dec[nd, 2] = s + index % kw
        dec[nd, 3] = ptype
        dec[nd, 4] = index
        nd += 1
        return nd
    if mode == MODE_CONV:
        m = scatter(v, index, ptype, s, c, kh, kw, oh, ow, w, out)
    else:
        col = index % kw
        if col - ptype < 0 or s + ptype >= ow:
            m = -1
        else:
            m = 0
            row = index // kw
            for l in range(kh):
                y = row - l
                if y >= 0 and y < oh:
                    m += (ptype + 1) * w.shape[1]
    if m < 0:
        return -1
    stats[0] += m
    stats[1] += 1
    return nd


@njit(cache=True)
def walk(ptr, da, inn, n_channels, kh, kw, oh, ow, hp, nop, first_tag, n_blocks,
         single, cps, mode, w, out, dec, dec_vals, stats):
    """Walk one image's ptr/DA/IN streams channel by channel.

    mode CONV accumulates into out[k, y, x]; COUNT only tallies MACs into
    stats[0]; DECODE writes (c, h, w, ptype, index) rows to dec and values to
    dec_vals. stats[1] counts scatter calls, stats[2] decoded entries.
    Returns (status, ptr cursor).
    """
    p = 0
    dbase = 0
    ibase = 0
    nd = 0
    nptr = ptr.shape[0]
    nda = da.shape[0]
    nin = inn.shape[0]
    for c in range(n_channels):
        if p >= nptr:
            return ERR_PTR_SHORT, p
        if ptr[p] == NPC:
            p += 1
            continue
        if single:
            if p + ow >= nptr:
                return ERR_PTR_SHORT, p
            if ptr[p] != 0:
                return ERR_BAD_TAG, p
            prev = 0
            for s in range(ow):
                cs = ptr[p + 1 + s]
                if cs == -1:
                    cs = prev
                elif cs < prev:
                    return ERR_BAD_COUNT, p + 1 + s
                if dbase + cs > nda or ibase + cs > nin:
                    return ERR_DA_OVERRUN, p + 1 + s
                for x in range(prev, cs):
                    if mode == MODE_DECODE:
                        dec_vals[nd] = da[dbase + x]
                    nd = _visit(mode, da[dbase + x], inn[ibase + x], 0, s, c, kh, kw,
                                oh, ow, hp, w, out, dec, nd, stats)
                    if nd < 0:
                        return ERR_BAD_INDEX, p + 1 + s
                prev = cs
            dbase += prev
            ibase += prev
            p += 1 + ow
            continue
        if nop:
            if p + 2 >= nptr:
                return ERR_PTR_SHORT, p
            if ptr[p] != 0:
                return ERR_BAD_TAG, p
            a = ptr[p + 1]
            b = ptr[p + 2]
            if a < 0 or b < a:
                return ERR_BAD_COUNT, p + 1
            if dbase + b > nda or ibase + b > nin:
                return ERR_DA_OVERRUN, p + 1
            for x in range(b):
                s = 0 if x < a else ow - 1
                if mode == MODE_DECODE:
                    dec_vals[nd] = da[dbase + x]
                nd = _visit(mode, da[dbase + x], inn[ibase + x], 0, s, c, kh, kw,
                            oh, ow, hp, w, out, dec, nd, stats)
                if nd < 0:
                    return ERR_BAD_INDEX, p + 1
            dbase += b
            ibase += b
            p += 3
        for bi in range(n_blocks):
            if p + 1 >= nptr:
                return ERR_PTR_SHORT, p
            tag = ptr[p]
            if tag != first_tag + bi:
                return ERR_BAD_TAG, p
            ptype = tag - 1
            if ptr[p + 1] == NPF:
                p += 2
                continue
            if p + ow >= nptr:
                return ERR_PTR_SHORT, p
            patterned = cps and ptype == kw - 1
            prev = 0
            ipos = ibase
            for s in range(ow):
                cs = ptr[p + 1 + s]
                if cs == -1:
                    cs = prev
                elif cs < prev:
                    return ERR_BAD_COUNT, p + 1 + s
                if dbase + cs > nda:
                    return ERR_DA_OVERRUN, p + 1 + s
                if patterned:
                    x = prev
                    while x < cs:
                        if ipos >= nin:
                            return ERR_DESYNC, p + 1 + s
                        index = inn[ipos]
                        if index < 0:
                            ipos += 1
                            if mode == MODE_DECODE:
                                dec_vals[nd] = da[dbase + x]
                            nd = _visit(mode, da[dbase + x], -index, ptype, s, c, kh, kw,
                                        oh, ow, hp, w, out, dec, nd, stats)
                            if nd < 0:
                                return ERR_BAD_INDEX, p + 1 + s
                            x += 1
                        else:
                            if ipos + 1 >= nin:
                                return ERR_DESYNC, p + 1 + s
                            pattern = inn[ipos + 1]
                            ipos += 2
                            extra = pattern_size_code(pattern)
                            if extra <= 0:
                                return ERR_BAD_PATTERN, p + 1 + s
                            if x + extra >= cs:
                                return ERR_DESYNC, p + 1 + s
                            for g in range(extra + 1):
                                if g > 0:
                                    index += kw * next_offset_code(pattern, g)
                                if mode == MODE_DECODE:
                                    dec_vals[nd] = da[dbase + x]
                                nd = _visit(mode, da[dbase + x], index, ptype, s, c, kh, kw,
                                            oh, ow, hp, w, out, dec, nd, stats)
                                if nd < 0:
                                    return ERR_BAD_INDEX, p + 1 + s
                                x += 1
                else:
                    if ibase + cs > nin:
                        return ERR_DESYNC, p + 1 + s
                    for x in range(prev, cs):
                        if mode == MODE_DECODE:
                            dec_vals[nd] = da[dbase + x]
                        nd = _visit(mode, da[dbase + x], inn[ibase + x], ptype, s, c, kh, kw,
                                    oh, ow, hp, w, out, dec, nd, stats)
                        if nd < 0:
                            return ERR_BAD_INDEX, p + 1 + s
                prev = cs
            dbase += prev
            ibase = ipos if patterned else ibase + prev
            p += 1 + ow
    if p != nptr or dbase != nda or ibase != nin:
        return ERR_TRAILING, p
    stats[2] = nd
    return OK, p


@njit(cache=True)
def _emit_column(x, c, q, local, pad_top, kw, da, inn, dl, il):
    """Append one column's NZEs top to bottom; returns the new (dl, il)."""
    ih = x.shape[1]
    for r in range(ih):
        v = x[c, r, q]
        if v != 0:
            da[dl] = v
            inn[il] = local + (r + pad_top) * kw
            dl += 1
            il += 1
    return dl, il


@njit(cache=True)
def _emit_column_set4(x, c, q, local, pad_top, kw, hp, da, inn, dl, il):
    """overlapKw column for CPS: set4 groups anchored at padded row 0.

    Groups with >= 3 NZEs become {first NZE index, pattern}; the members of
    groups with 1 or 2 NZEs are stored negated.
    """
    ih = x.shape[1]
    aux = np.empty(4, np.int32)
    for g0 in range(0, hp, 4):
        k = 0
        pattern = 0
        for b in range(4):
            r = g0 + b - pad_top
            if r < 0 or r >= ih:
                continue
            v = x[c, r, q]
            if v != 0:
                da[dl] = v
                dl += 1
                aux[k] = local + (g0 + b) * kw
                k += 1
                pattern += 1 << b
        if k >= 3:
            inn[il] = aux[0]
            inn[il + 1] = pattern
            il += 2
        else:
            for j in range(k):
                inn[il] = -aux[j]
                il += 1
    return dl, il


@njit(cache=True)
def encode_image(x, pad_top, pad_left, iw, hp, kw, ow, blk_kind, blk_tag, blk_start,
                 col_w, col_owner, col_local, cps, ptr, da, inn, bases):
    """Encode every channel of one (Ic, Ih, Iw) image.

    Output arrays are preallocated to their worst case; returns the used
    lengths (ptr, da, in, bases rows). Each bases row is
    (channel, tag, ptr offset, da offset, in offset).
    """
    n_channels = x.shape[0]
    nb = blk_kind.shape[0]
    pl = 0
    dl = 0
    il = 0
    bl = 0
    for c in range(n_channels):
        p0 = pl
        b0 = bl
        d0 = dl
        for b in range(nb):
            kind = blk_kind[b]
            tag = blk_tag[b]
            bases[bl, 0] = c
            bases[bl, 1] = tag
            bases[bl, 2] = pl
            bases[bl, 3] = dl
            bases[bl, 4] = il
            bl += 1
            start = dl
            e = blk_start[b]
            end = blk_start[b + 1]
            ptr[pl] = tag
            tag_pos = pl
            pl += 1
            if kind == KIND_NOP:
                first = 0
                while e < end:
                    if col_owner[e] != 0 and first == 0:
                        ptr[pl] = dl - start
                        pl += 1
                        first = 1
                    q = col_w[e] - pad_left
                    if q >= 0 and q < iw:
                        dl, il = _emit_column(x, c, q, col_local[e], pad_top, kw, da, inn, dl, il)
                    e += 1
                if first == 0:
                    ptr[pl] = dl - start
                    pl += 1
                ptr[pl] = dl - start
                pl += 1
                continue
            patterned = cps and kind == KIND_OVERLAP and tag == kw
            for s in range(ow):
                owned = False
                while e < end and col_owner[e] == s:
                    owned = True
                    q = col_w[e] - pad_left
                    if q >= 0 and q < iw:
                        if patterned:
                            dl, il = _emit_column_set4(x, c, q, col_local[e], pad_top, kw, hp,
                                                       da, inn, dl, il)
                        else:
                            dl, il = _emit_column(x, c, q, col_local[e], pad_top, kw,
                                                  da, inn, dl, il)
                    e += 1
                ptr[pl] = dl - start if owned else -1
                pl += 1
            if kind == KIND_OVERLAP and dl == start:
                pl = tag_pos + 1
                ptr[pl] = NPF
                pl += 1
        if dl == d0:
            pl = p0
            ptr[pl] = NPC
            pl += 1
            bl = b0
            bases[bl, 0] = c
            bases[bl, 1] = NPC
            bases[bl, 2] = pl - 1
            bases[bl, 3] = dl
            bases[bl, 4] = il
            bl += 1
    return pl, dl, il, bl


@njit(cache=True)
def cscc_spmv(offsets, values, cols, chan_start, n_channels, kh, kw, oh, w, out):
    """CSR rows of the per-channel partition-lowered matrix times the kernel.

    Row s of channel c holds the hp x kw partition starting at column s;
    column index q = h * kw + j. Each nonzero meets kernel row l at output
    row h - l of output column s.
    """
    ow = offsets.shape[1] - 1
    nk = w.shape[1]
    for c in range(n_channels):
        base = chan_start[c]
        for s in range(ow):
            for e in range(base + offsets[c, s], base + offsets[c, s + 1]):
                v = values[e]
                q = cols[e]
                h = q // kw
                j = q % kw
                for l in range(kh):
                    y = h - l
                    if y >= 0 and y < oh:
                        t = l * kw + j
                        for k in range(nk):
                            out[k, y, s] += v * w[c, k, t]
