"""Pure-numpy implementations of the hot kernels.

Every function here has a twin in ``_numba`` with the same signature and
the same results up to floating point reassociation.
"""
import numpy as np
from scipy.special import ndtr

# Gauss-Legendre half rules (nodes on [-1, 0)) used by the Genz bivariate
# normal algorithm, indexed by accuracy level.
_BVN_X = (
    np.array([-0.9324695142031522, -0.6612093864662647, -0.2386191860831970]),
    np.array([-0.9815606342467191, -0.9041172563704750, -0.7699026741943050,
              -0.5873179542866171, -0.3678314989981802, -0.1252334085114692]),
    np.array([-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
              -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
              -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
              -0.07652652113349733]),
)
_BVN_W = (
    np.array([0.1713244923791705, 0.3607615730481384, 0.4679139345726904]),
    np.array([0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
              0.2031674267230659, 0.2334925365383547, 0.2491470458134029]),
    np.array([0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
              0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
              0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
              0.1527533871307259]),
)
_TWOPI = 2.0 * np.pi


def _bvnu(h, k, r):
    """Upper orthant P(X > h, Y > k) for finite h, k arrays and scalar r."""
    ar = abs(r)
    level = 0 if ar < 0.3 else (1 if ar < 0.75 else 2)
    x = _BVN_X[level][:, None]
    w = _BVN_W[level][:, None]
    hk = h * k
    if ar < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = np.arcsin(r)
        sn = np.sin(asr * (x + 1.0) / 2.0)
        acc = np.sum(w * np.exp((sn * hk - hs) / (1.0 - sn * sn)), axis=0)
        sn = np.sin(asr * (1.0 - x) / 2.0)
        acc += np.sum(w * np.exp((sn * hk - hs) / (1.0 - sn * sn)), axis=0)
        return acc * asr / (2.0 * _TWOPI) + ndtr(-h) * ndtr(-k)

    if r < 0:
        k = -k
        hk = -hk
    bvn = np.zeros_like(h)
    if ar < 1.0:
        as_ = (1.0 - r) * (1.0 + r)
        a = np.sqrt(as_)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        bvn = a * np.exp(-(bs / as_ + hk) / 2.0) * (
            1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0)
        b = np.sqrt(bs)
        tail = np.exp(-hk / 2.0) * np.sqrt(_TWOPI) * ndtr(-b / a) * b * (
            1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
        bvn = bvn - np.where(hk > -160.0, tail, 0.0)
        a = a / 2.0
        xs = (a * (x + 1.0)) ** 2
        rs = np.sqrt(1.0 - xs)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t1 = a * w * (np.exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs
                          - np.exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)))
            xs = as_ * (1.0 - x) ** 2 / 4.0
            rs = np.sqrt(1.0 - xs)
            t2 = a * w * np.exp(-(bs / xs + hk) / 2.0) * (
                np.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)))
        bvn = -(bvn + np.sum(t1, axis=0) + np.sum(t2, axis=0)) / _TWOPI
    if r > 0:
        return bvn + ndtr(-np.maximum(h, k))
    return -bvn + np.maximum(0.0, ndtr(-h) - ndtr(-k))


def bvn_cdf(h, k, r):
    """P(X <= h, Y <= k) for a standard bivariate normal with correlation r."""
    h, k = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(k, dtype=float))
    shape = h.shape
    h = h.ravel()
    k = k.ravel()
    out = np.empty(h.shape)
    fin = np.isfinite(h) & np.isfinite(k)
    if fin.any():
        out[fin] = _bvnu(-h[fin], -k[fin], float(r))
    nf = ~fin
    if nf.any():
        hh, kk = h[nf], k[nf]
        val = np.where(hh == np.inf, ndtr(kk), ndtr(hh))
        val = np.where((hh == -np.inf) | (kk == -np.inf), 0.0, val)
        out[nf] = val
    return out.reshape(shape)


def count_table(r1, r2, n):
    """Cumulative count table T[a, b] = #{i : r1_i <= a, r2_i <= b}, a, b in 0..n."""
    t = np.zeros((n + 1, n + 1), dtype=np.int64)
    np.add.at(t, (np.asarray(r1, dtype=np.int64), np.asarray(r2, dtype=np.int64)), 1)
    return np.cumsum(np.cumsum(t, axis=0), axis=1)


def _v_cdf(x, y):
    lin = 0.5 * (x + y) - 0.25
    return np.clip(lin, np.maximum(x + y - 1.0, 0.0), np.minimum(x, y))


def _v_inner(a, b, y):
    # exact integral over x in [a, b] of V(x, y); V(., y) is piecewise linear
    kinks = np.stack([y, 1.0 - y, y - 0.5, y + 0.5, 0.5 - y, 1.5 - y], axis=-1)
    lo = a[..., None]
    hi = b[..., None]
    xs = np.concatenate([lo, np.clip(kinks, lo, hi), hi], axis=-1)
    xs.sort(axis=-1)
    vals = _v_cdf(xs, y[..., None])
    return np.sum(0.5 * (vals[..., 1:] + vals[..., :-1]) * np.diff(xs, axis=-1), axis=-1)


def v_rect_integrals(a, b, c, d):
    """Exact integrals of the invariant copula V over rectangles [a,b]x[c,d]."""
    a, b, c, d = (np.asarray(z, dtype=float).ravel() for z in (a, b, c, d))
    a, b, c, d = np.broadcast_arrays(a, b, c, d)
    c2 = c[:, None]
    d2 = d[:, None]
    cand = np.stack([a, b, 1.0 - a, 1.0 - b, a - 0.5, a + 0.5, b - 0.5, b + 0.5,
                     0.5 - a, 0.5 - b, 1.5 - a, 1.5 - b,
                     np.full_like(a, 0.25), np.full_like(a, 0.5), np.full_like(a, 0.75)],
                    axis=-1)
    ys = np.concatenate([c2, np.clip(cand, c2, d2), d2], axis=-1)
    ys.sort(axis=-1)
    y0 = ys[:, :-1]
    y1 = ys[:, 1:]
    ym = 0.5 * (y0 + y1)
    aa = np.broadcast_to(a[:, None], y0.shape)
    bb = np.broadcast_to(b[:, None], y0.shape)
    # Simpson is exact: the inner integral is quadratic between breakpoints
    f0 = _v_inner(aa, bb, y0)
    fm = _v_inner(aa, bb, ym)
    f1 = _v_inner(aa, bb, y1)
    return np.sum((y1 - y0) * (f0 + 4.0 * fm + f1) / 6.0, axis=-1)


def weighted_column_sums(cols, weights, fracs, n_cols):
    """Per-column sums of w and of w * frac; columns indexed 0..n_cols-1."""
    full = np.bincount(cols, weights=weights, minlength=n_cols)
    part = np.bincount(cols, weights=weights * fracs, minlength=n_cols)
    return full, part
