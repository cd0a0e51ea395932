"""Numba kernels for the dictionary parsers and the bit-level container.

The dictionary is a symbol trie. Every dictionary word is a trie node, but
not every node is a word: a CASToRe word W+Y is inserted by extending the
path of W with the symbols of Y, so intermediate nodes may be bare prefixes.
Children live in one open-addressing hash table keyed by ``node * a + sym``,
which keeps memory at O(#nodes) for any alphabet size.
"""

import numpy as np
from numba import njit

EMPTY = -1

# extension kinds
EXT_WORD = 0
EXT_LITERAL = 1
EXT_NONE = 2

MAGIC = 0b1010
PREAMBLE_BITS = 4

# decode status codes
OK = 0
ERR_TRUNCATED = 1
ERR_MAGIC = 2
ERR_PREFIX_RANGE = 3
ERR_EXTENSION_RANGE = 4
ERR_LITERAL_RANGE = 5
ERR_OVERRUN = 6
ERR_EARLY_END = 7
ERR_VARINT = 8
ERR_NULL_EXTENSION = 9

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True)
def bit_length(v):
    b = 0
    while v > 0:
        v >>= 1
        b += 1
    return b


@njit(cache=True)
def _slot(key, shift):
    return np.int64((np.uint64(key) * _GOLDEN) >> np.uint64(shift))


@njit(cache=True)
def _table_bits(capacity):
    bits = 4
    while (1 << bits) < 2 * capacity:
        bits += 1
    return bits


@njit(cache=True)
def _find(keys, vals, shift, mask, key):
    h = _slot(key, shift)
    while True:
        k = keys[h]
        if k == key:
            return vals[h]
        if k == EMPTY:
            return -1
        h = (h + 1) & mask


@njit(cache=True)
def _put(keys, vals, shift, mask, key, val):
    h = _slot(key, shift)
    while keys[h] != EMPTY:
        h = (h + 1) & mask
    keys[h] = key
    vals[h] = val
    return h


@njit(cache=True)
def _new_trie(capacity):
    bits = _table_bits(capacity)
    size = 1 << bits
    keys = np.full(size, EMPTY, dtype=np.int64)
    vals = np.zeros(size, dtype=np.int64)
    word_of = np.zeros(capacity + 1, dtype=np.int64)
    word_node = np.zeros(capacity + 1, dtype=np.int64)
    return keys, vals, 64 - bits, size - 1, word_of, word_node


@njit(cache=True)
def _longest(sym, pos, end, a, keys, vals, shift, mask, word_of):
    # deepest word node on the trie path spelled by sym[pos:end]
    node = 0
    best = 0
    best_len = 0
    i = pos
    while i < end:
        child = _find(keys, vals, shift, mask, node * a + sym[i])
        if child < 0:
            break
        node = child
        i += 1
        if word_of[node] > 0:
            best = node
            best_len = i - pos
    return best, best_len


@njit(cache=True)
def _extend(sym, start, stop, node, a, keys, vals, shift, mask, n_nodes,
            undo_slots, n_undo):
    # walk/create the path sym[start:stop] below node; returns final node
    for i in range(start, stop):
        key = node * a + sym[i]
        child = _find(keys, vals, shift, mask, key)
        if child < 0:
            child = n_nodes[0]
            n_nodes[0] += 1
            h = _put(keys, vals, shift, mask, key, child)
            if n_undo[0] >= 0:
                undo_slots[n_undo[0]] = h
                n_undo[0] += 1
        node = child
    return node


@njit(cache=True)
def _castore_step(sym, pos, end, a, trie, n_nodes, n_words, undo_slots,
                  n_undo, undo_words, out3):
    """One greedy CASToRe step from ``pos``; returns the chunk length.

    ``out3`` receives (prefix id, extension kind, extension value).
    """
    keys, vals, shift, mask, word_of, word_node = trie
    wnode, wlen = _longest(sym, pos, end, a, keys, vals, shift, mask, word_of)
    if wlen == 0:
        node = _extend(sym, pos, pos + 1, 0, a, keys, vals, shift, mask,
                       n_nodes, undo_slots, n_undo)
        out3[0] = 0
        out3[1] = EXT_LITERAL
        out3[2] = sym[pos]
        chunk = 1
    else:
        wid = word_of[wnode]
        p2 = pos + wlen
        out3[0] = wid
        if p2 == end:
            out3[1] = EXT_NONE
            out3[2] = 0
            return wlen
        ynode, ylen = _longest(sym, p2, end, a, keys, vals, shift, mask,
                               word_of)
        if ylen == 0:
            node = _extend(sym, p2, p2 + 1, wnode, a, keys, vals, shift,
                           mask, n_nodes, undo_slots, n_undo)
            out3[1] = EXT_LITERAL
            out3[2] = sym[p2]
            chunk = wlen + 1
        else:
            node = _extend(sym, p2, p2 + ylen, wnode, a, keys, vals, shift,
                           mask, n_nodes, undo_slots, n_undo)
            out3[1] = EXT_WORD
            out3[2] = word_of[ynode]
            chunk = wlen + ylen
    n_words[0] += 1
    word_of[node] = n_words[0]
    word_node[n_words[0]] = node
    if n_undo[0] >= 0:
        undo_words[n_words[0]] = node
    return chunk


@njit(cache=True)
def pair_cost(t, kind, literal_bits):
    """Bits for the t-th pair (1-based) under the container cost rule."""
    b = bit_length(t)
    if kind == EXT_LITERAL:
        return b + 1 + literal_bits
    return b + 1 + b


@njit(cache=True)
def castore_pairs(sym, a):
    """Full CASToRe parse; returns (prefix ids, extension kinds, values)."""
    n = sym.shape[0]
    trie = _new_trie(n + 1)
    n_nodes = np.ones(1, dtype=np.int64)
    n_words = np.zeros(1, dtype=np.int64)
    no_undo = np.full(1, -1, dtype=np.int64)
    dummy = np.zeros(1, dtype=np.int64)
    prefix = np.empty(n, dtype=np.int64)
    kind = np.empty(n, dtype=np.int8)
    value = np.empty(n, dtype=np.int64)
    out3 = np.zeros(3, dtype=np.int64)
    pos = 0
    t = 0
    while pos < n:
        pos += _castore_step(sym, pos, n, a, trie, n_nodes, n_words, dummy,
                             no_undo, dummy, out3)
        prefix[t] = out3[0]
        kind[t] = out3[1]
        value[t] = out3[2]
        t += 1
    return prefix[:t].copy(), kind[:t].copy(), value[:t].copy()


@njit(cache=True)
def _undo(trie, undo_slots, n_undo, undo_words, saved_nodes, saved_words,
          n_nodes, n_words):
    keys = trie[0]
    word_of = trie[4]
    for j in range(n_undo[0] - 1, -1, -1):
        keys[undo_slots[j]] = EMPTY
    for w in range(saved_words + 1, n_words[0] + 1):
        word_of[undo_words[w]] = 0
    n_nodes[0] = saved_nodes
    n_words[0] = saved_words
    n_undo[0] = 0


@njit(cache=True)
def castore_cost_curve(sym, a, checkpoints):
    """Preamble-plus-pairs cost of the CASToRe parse of each prefix.

    ``checkpoints`` must be sorted and within [0, len(sym)]. The parse of
    a prefix coincides with the full parse up to the chunk crossing the
    checkpoint; that tail is parsed on the live dictionary and rolled back.
    """
    n = sym.shape[0]
    m = checkpoints.shape[0]
    out = np.zeros(m, dtype=np.int64)
    literal_bits = bit_length(a - 1)
    trie = _new_trie(n + 1)
    n_nodes = np.ones(1, dtype=np.int64)
    n_words = np.zeros(1, dtype=np.int64)
    n_undo = np.zeros(1, dtype=np.int64)
    undo_slots = np.zeros(n + 1, dtype=np.int64)
    undo_words = np.zeros(n + 2, dtype=np.int64)
    out3 = np.zeros(3, dtype=np.int64)
    cost = PREAMBLE_BITS
    pos = 0
    t = 0
    c = 0
    while c < m and checkpoints[c] <= 0:
        out[c] = cost
        c += 1
    while pos < n and c < m:
        saved_nodes = n_nodes[0]
        saved_words = n_words[0]
        n_undo[0] = 0
        chunk = _castore_step(sym, pos, n, a, trie, n_nodes, n_words,
                              undo_slots, n_undo, undo_words, out3)
        step_cost = pair_cost(t + 1, out3[1], literal_bits)
        if checkpoints[c] < pos + chunk:
            # evaluate truncated tails on the pre-step dictionary, then redo
            _undo(trie, undo_slots, n_undo, undo_words, saved_nodes,
                  saved_words, n_nodes, n_words)
            while c < m and checkpoints[c] < pos + chunk:
                end = checkpoints[c]
                tail_cost = 0
                tt = t
                p = pos
                while p < end:
                    p += _castore_step(sym, p, end, a, trie, n_nodes, n_words,
                                       undo_slots, n_undo, undo_words, out3)
                    tt += 1
                    tail_cost += pair_cost(tt, out3[1], literal_bits)
                _undo(trie, undo_slots, n_undo, undo_words, saved_nodes,
                      saved_words, n_nodes, n_words)
                out[c] = cost + tail_cost
                c += 1
            _castore_step(sym, pos, n, a, trie, n_nodes, n_words,
                          undo_slots, n_undo, undo_words, out3)
        cost += step_cost
        pos += chunk
        t += 1
        while c < m and checkpoints[c] == pos:
            out[c] = cost
            c += 1
    return out


@njit(cache=True)
def castore_window_costs(sym, a, window):
    """Independent CASToRe cost of each full window of ``window`` symbols."""
    n_windows = sym.shape[0] // window
    out = np.zeros(n_windows, dtype=np.int64)
    cp = np.array([window], dtype=np.int64)
    for w in range(n_windows):
        out[w] = castore_cost_curve(sym[w * window:(w + 1) * window], a, cp)[0]
    return out


@njit(cache=True)
def lz78_pairs(sym, a):
    """Classical incremental parse; same output layout as castore_pairs."""
    n = sym.shape[0]
    keys, vals, shift, mask, word_of, word_node = _new_trie(n + 1)
    prefix = np.empty(n, dtype=np.int64)
    kind = np.empty(n, dtype=np.int8)
    value = np.empty(n, dtype=np.int64)
    n_nodes = 1
    pos = 0
    t = 0
    while pos < n:
        node = 0
        while pos < n:
            child = _find(keys, vals, shift, mask, node * a + sym[pos])
            if child < 0:
                break
            node = child
            pos += 1
        prefix[t] = node
        if pos == n:
            kind[t] = EXT_NONE
            value[t] = 0
        else:
            _put(keys, vals, shift, mask, node * a + sym[pos], n_nodes)
            kind[t] = EXT_LITERAL
            value[t] = sym[pos]
            n_nodes += 1
            pos += 1
        t += 1
    return prefix[:t].copy(), kind[:t].copy(), value[:t].copy()


@njit(cache=True)
def pairs_cost(kind, a):
    literal_bits = bit_length(a - 1)
    total = PREAMBLE_BITS
    for i in range(kind.shape[0]):
        total += pair_cost(i + 1, kind[i], literal_bits)
    return total


# ---------------------------------------------------------------- bit I/O


@njit(cache=True)
def _write(buf, pos, value, nbits):
    for k in range(nbits - 1, -1, -1):
        if (value >> k) & 1:
            buf[pos >> 3] |= np.uint8(0x80 >> (pos & 7))
        pos += 1
    return pos


@njit(cache=True)
def varint_bits(v):
    groups = 1
    while v >= 128:
        v >>= 7
        groups += 1
    return 8 * groups


@njit(cache=True)
def _write_varint(buf, pos, v):
    while True:
        group = v & 0x7F
        v >>= 7
        if v > 0:
            pos = _write(buf, pos, group | 0x80, 8)
        else:
            return _write(buf, pos, group, 8)


@njit(cache=True)
def encode(prefix, kind, value, a, n):
    """Pack a parse into the container; returns (bytes array, bit length)."""
    total = varint_bits(a) + varint_bits(n) + pairs_cost(kind, a)
    buf = np.zeros((total + 7) // 8, dtype=np.uint8)
    literal_bits = bit_length(a - 1)
    pos = _write(buf, 0, MAGIC, PREAMBLE_BITS)
    pos = _write_varint(buf, pos, a)
    pos = _write_varint(buf, pos, n)
    for i in range(kind.shape[0]):
        b = bit_length(i + 1)
        pos = _write(buf, pos, prefix[i], b)
        if kind[i] == EXT_LITERAL:
            pos = _write(buf, pos, 1, 1)
            pos = _write(buf, pos, value[i], literal_bits)
        else:
            pos = _write(buf, pos, 0, 1)
            pos = _write(buf, pos, value[i] if kind[i] == EXT_WORD else 0, b)
    return buf, total


@njit(cache=True)
def _read(buf, pos, nbits, limit):
    # returns (value, new pos); new pos < 0 signals truncation
    if pos + nbits > limit:
        return 0, -1
    v = 0
    for _ in range(nbits):
        v = (v << 1) | ((buf[pos >> 3] >> (7 - (pos & 7))) & 1)
        pos += 1
    return v, pos


@njit(cache=True)
def _read_varint(buf, pos, limit):
    v = 0
    shift = 0
    for _ in range(9):
        g, pos = _read(buf, pos, 8, limit)
        if pos < 0:
            return 0, -1, ERR_TRUNCATED
        v |= (g & 0x7F) << shift
        shift += 7
        if g < 128:
            return v, pos, OK
    return 0, -1, ERR_VARINT


@njit(cache=True)
def read_header(buf):
    """Returns (status, bit offset, alphabet size, source length)."""
    limit = buf.shape[0] * 8
    magic, pos = _read(buf, 0, PREAMBLE_BITS, limit)
    if pos < 0:
        return ERR_TRUNCATED, 0, 0, 0
    if magic != MAGIC:
        return ERR_MAGIC, 0, 0, 0
    a, p2, st = _read_varint(buf, pos, limit)
    if st != OK:
        return st, pos, 0, 0
    n, p3, st = _read_varint(buf, p2, limit)
    if st != OK:
        return st, p2, 0, 0
    return OK, p3, a, n


@njit(cache=True)
def decode(buf, pos, a, n, limit):
    """Decode the pair payload starting at bit ``pos``.

    Returns (status, bit offset of the failing field or end, symbols).
    """
    out = np.empty(n, dtype=np.int64)
    starts = np.zeros(n + 2, dtype=np.int64)
    lengths = np.zeros(n + 2, dtype=np.int64)
    literal_bits = bit_length(a - 1)
    filled = 0
    t = 0
    while filled < n:
        t += 1
        b = bit_length(t)
        field = pos
        w, pos = _read(buf, pos, b, limit)
        if pos < 0:
            return ERR_TRUNCATED, field, out[:filled]
        if w >= t:
            return ERR_PREFIX_RANGE, field, out[:filled]
        wlen = lengths[w]
        if filled + wlen > n:
            return ERR_OVERRUN, field, out[:filled]
        start = filled
        ws = starts[w]
        for k in range(wlen):
            out[filled + k] = out[ws + k]
        filled += wlen
        field = pos
        flag, pos = _read(buf, pos, 1, limit)
        if pos < 0:
            return ERR_TRUNCATED, field, out[:filled]
        if flag == 1:
            field = pos
            c, pos = _read(buf, pos, literal_bits, limit)
            if pos < 0:
                return ERR_TRUNCATED, field, out[:filled]
            if c >= a:
                return ERR_LITERAL_RANGE, field, out[:filled]
            if filled + 1 > n:
                return ERR_OVERRUN, field, out[:filled]
            out[filled] = c
            filled += 1
        else:
            field = pos
            y, pos = _read(buf, pos, b, limit)
            if pos < 0:
                return ERR_TRUNCATED, field, out[:filled]
            if y >= t:
                return ERR_EXTENSION_RANGE, field, out[:filled]
            if y == 0:
                if w == 0:
                    return ERR_NULL_EXTENSION, field, out[:filled]
                if filled != n:
                    return ERR_EARLY_END, field, out[:filled]
                return OK, pos, out
            if w == 0:
                return ERR_NULL_EXTENSION, field, out[:filled]
            ylen = lengths[y]
            if filled + ylen > n:
                return ERR_OVERRUN, field, out[:filled]
            ys = starts[y]
            for k in range(ylen):
                out[filled + k] = out[ys + k]
            filled += ylen
        starts[t] = start
        lengths[t] = filled - start
    return OK, pos, out
