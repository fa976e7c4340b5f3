"""Numpy implementations of the hot kernels (used when the extension is absent)."""

import numpy as np

_CHUNK = 1 << 20


def _add_flat(a, b, sign, moduli, strides):
    if len(moduli) == 1:
        return (a + sign * b) % moduli[0]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    for n, s in zip(moduli, strides):
        out += (((a // s) % n + sign * ((b // s) % n)) % n) * s
    return out


def _row_chunks(n_rows, n_cols):
    step = max(1, _CHUNK // max(1, n_cols))
    for lo in range(0, n_rows, step):
        yield lo, min(n_rows, lo + step)


def conv_direct(idx_p, p, idx_q, q, moduli, strides, order, sign):
    idx_p = np.asarray(idx_p)
    idx_q = np.asarray(idx_q)
    p = np.asarray(p)
    q = np.asarray(q)
    moduli = [int(n) for n in moduli]
    strides = [int(s) for s in strides]
    parts_i, parts_v = [], []
    for lo, hi in _row_chunks(idx_p.size, idx_q.size):
        t = _add_flat(idx_p[lo:hi, None], idx_q[None, :], sign, moduli, strides).ravel()
        v = (p[lo:hi, None] * q[None, :]).ravel()
        parts_i.append(t)
        parts_v.append(v)
    t = np.concatenate(parts_i)
    v = np.concatenate(parts_v)
    uniq, inv = np.unique(t, return_inverse=True)
    return uniq.astype(np.int64), np.bincount(inv, weights=v, minlength=uniq.size)


def sumset_mask(idx_a, idx_b, moduli, strides, order, sign):
    idx_a = np.asarray(idx_a)
    idx_b = np.asarray(idx_b)
    moduli = [int(n) for n in moduli]
    strides = [int(s) for s in strides]
    mask = np.zeros(int(order), dtype=np.uint8)
    for lo, hi in _row_chunks(idx_a.size, idx_b.size):
        mask[_add_flat(idx_a[lo:hi, None], idx_b[None, :], sign, moduli, strides).ravel()] = 1
    return mask


def bohr_maxdist(weights, lcm, moduli, strides, order, cutoff):
    weights = np.asarray(weights, dtype=np.int64)
    order = int(order)
    out = np.zeros(order, dtype=np.int64)
    alive = np.arange(order, dtype=np.int64)
    coords = np.stack([(alive // s) % n for n, s in zip(moduli, strides)], axis=1)
    # filter characters in blocks: elements already past the cutoff drop out
    block = max(1, _CHUNK // max(1, order))
    for lo in range(0, weights.shape[0], block):
        if alive.size == 0:
            break
        w = weights[lo:lo + block]
        ph = (coords @ w.T) % lcm
        d = np.minimum(ph, lcm - ph).max(axis=1)
        best = np.maximum(out[alive], d)
        out[alive] = best
        keep = best <= cutoff
        alive = alive[keep]
        coords = coords[keep]
    return out
