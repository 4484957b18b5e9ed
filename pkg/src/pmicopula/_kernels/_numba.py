"""Numba-compiled versions of the hot kernels (see ``_numpy`` for the reference)."""
import math

import numpy as np
from numba import njit, prange

from ._numpy import _BVN_W, _BVN_X

_X0, _X1, _X2 = _BVN_X
_W0, _W1, _W2 = _BVN_W
_TWOPI = 2.0 * math.pi
_SQRT2 = math.sqrt(2.0)


@njit(cache=True)
def _phi(x):
    return 0.5 * math.erfc(-x / _SQRT2)


@njit(cache=True)
def _bvnu_scalar(h, k, r, x, w):
    hk = h * k
    bvn = 0.0
    if abs(r) < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r)
        for i in range(x.shape[0]):
            sn = math.sin(asr * (x[i] + 1.0) / 2.0)
            bvn += w[i] * math.exp((sn * hk - hs) / (1.0 - sn * sn))
            sn = math.sin(asr * (1.0 - x[i]) / 2.0)
            bvn += w[i] * math.exp((sn * hk - hs) / (1.0 - sn * sn))
        return bvn * asr / (2.0 * _TWOPI) + _phi(-h) * _phi(-k)
    if r < 0:
        k = -k
        hk = -hk
    if abs(r) < 1.0:
        as_ = (1.0 - r) * (1.0 + r)
        a = math.sqrt(as_)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        bvn = a * math.exp(-(bs / as_ + hk) / 2.0) * (
            1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0)
        if hk > -160.0:
            b = math.sqrt(bs)
            bvn -= math.exp(-hk / 2.0) * math.sqrt(_TWOPI) * _phi(-b / a) * b * (
                1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
        a = a / 2.0
        for i in range(x.shape[0]):
            xs = (a * (x[i] + 1.0)) ** 2
            rs = math.sqrt(1.0 - xs)
            bvn += a * w[i] * (math.exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs
                               - math.exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)))
            xs = as_ * (1.0 - x[i]) ** 2 / 4.0
            rs = math.sqrt(1.0 - xs)
            bvn += a * w[i] * math.exp(-(bs / xs + hk) / 2.0) * (
                math.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)))
        bvn = -bvn / _TWOPI
    if r > 0:
        return bvn + _phi(-max(h, k))
    return -bvn + max(0.0, _phi(-h) - _phi(-k))


@njit(cache=True, parallel=True)
def _bvn_loop(h, k, r, x, w, out):
    for i in prange(h.shape[0]):
        hi = h[i]
        ki = k[i]
        if hi == -np.inf or ki == -np.inf:
            out[i] = 0.0
        elif hi == np.inf:
            out[i] = _phi(ki)
        elif ki == np.inf:
            out[i] = _phi(hi)
        else:
            out[i] = _bvnu_scalar(-hi, -ki, r, x, w)


def bvn_cdf(h, k, r):
    h, k = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(k, dtype=float))
    shape = h.shape
    ar = abs(float(r))
    if ar < 0.3:
        x, w = _X0, _W0
    elif ar < 0.75:
        x, w = _X1, _W1
    else:
        x, w = _X2, _W2
    hf = np.ascontiguousarray(h.ravel())
    kf = np.ascontiguousarray(k.ravel())
    out = np.empty(hf.shape[0])
    _bvn_loop(hf, kf, float(r), x, w, out)
    return out.reshape(shape)


@njit(cache=True)
def _count_table(r1, r2, n):
    t = np.zeros((n + 1, n + 1), dtype=np.int64)
    for i in range(r1.shape[0]):
        t[r1[i], r2[i]] += 1
    for a in range(1, n + 1):
        for b in range(n + 1):
            t[a, b] += t[a - 1, b]
    for a in range(n + 1):
        for b in range(1, n + 1):
            t[a, b] += t[a, b - 1]
    return t


def count_table(r1, r2, n):
    return _count_table(np.asarray(r1, dtype=np.int64), np.asarray(r2, dtype=np.int64), int(n))


@njit(cache=True)
def _v_cdf(x, y):
    lin = 0.5 * (x + y) - 0.25
    lo = max(x + y - 1.0, 0.0)
    hi = min(x, y)
    return min(max(lin, lo), hi)


@njit(cache=True)
def _clip(z, lo, hi):
    return min(max(z, lo), hi)


@njit(cache=True)
def _v_inner(a, b, y):
    xs = np.empty(8)
    xs[0] = a
    xs[1] = b
    xs[2] = _clip(y, a, b)
    xs[3] = _clip(1.0 - y, a, b)
    xs[4] = _clip(y - 0.5, a, b)
    xs[5] = _clip(y + 0.5, a, b)
    xs[6] = _clip(0.5 - y, a, b)
    xs[7] = _clip(1.5 - y, a, b)
    xs.sort()
    acc = 0.0
    prev = _v_cdf(xs[0], y)
    for j in range(1, 8):
        cur = _v_cdf(xs[j], y)
        acc += 0.5 * (prev + cur) * (xs[j] - xs[j - 1])
        prev = cur
    return acc


@njit(cache=True, parallel=True)
def _v_rect_loop(a, b, c, d, out):
    for i in prange(a.shape[0]):
        ai, bi, ci, di = a[i], b[i], c[i], d[i]
        ys = np.empty(17)
        ys[0] = ci
        ys[1] = di
        cand = (ai, bi, 1.0 - ai, 1.0 - bi, ai - 0.5, ai + 0.5, bi - 0.5, bi + 0.5,
                0.5 - ai, 0.5 - bi, 1.5 - ai, 1.5 - bi, 0.25, 0.5, 0.75)
        for j in range(15):
            ys[2 + j] = _clip(cand[j], ci, di)
        ys.sort()
        acc = 0.0
        for j in range(16):
            y0 = ys[j]
            y1 = ys[j + 1]
            if y1 > y0:
                acc += (y1 - y0) * (_v_inner(ai, bi, y0) + 4.0 * _v_inner(ai, bi, 0.5 * (y0 + y1))
                                    + _v_inner(ai, bi, y1)) / 6.0
        out[i] = acc


def v_rect_integrals(a, b, c, d):
    a, b, c, d = (np.asarray(z, dtype=float).ravel() for z in (a, b, c, d))
    a, b, c, d = (np.ascontiguousarray(z) for z in np.broadcast_arrays(a, b, c, d))
    out = np.empty(a.shape[0])
    _v_rect_loop(a, b, c, d, out)
    return out


@njit(cache=True)
def _column_sums(cols, weights, fracs, n_cols):
    full = np.zeros(n_cols)
    part = np.zeros(n_cols)
    for i in range(cols.shape[0]):
        full[cols[i]] += weights[i]
        part[cols[i]] += weights[i] * fracs[i]
    return full, part


def weighted_column_sums(cols, weights, fracs, n_cols):
    return _column_sums(np.asarray(cols, dtype=np.int64), np.asarray(weights, dtype=float),
                        np.asarray(fracs, dtype=float), int(n_cols))
