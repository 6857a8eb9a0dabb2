"""Matrix-free statevector kernels.

Every total Hamiltonian in this package decomposes as

    H = b * diag(D) + sum_i cx_i sigma_i^x + sum_i cy_i sigma_i^y
        + w * sum_p r_p sigma_{i_p}^x sigma_{j_p}^x

with real coefficients, so a single jitted routine covers all algorithm
variants. Loops are sequential on purpose: results are bit-reproducible
regardless of the caller's worker count.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def apply_terms(out, psi, diag, b, cx, cy, use_y, w, pair_masks, pair_signs):
    """out = H psi for the shared term decomposition."""
    dim = psi.shape[0]
    n = cx.shape[0]
    npairs = pair_masks.shape[0]
    for k in range(dim):
        acc = b * diag[k] * psi[k]
        if use_y:
            for i in range(n):
                amp = psi[k ^ (1 << i)]
                # sigma^y contributes -i z_i(k) times the flipped amplitude.
                if (k >> i) & 1:
                    acc += complex(cx[i], cy[i]) * amp
                else:
                    acc += complex(cx[i], -cy[i]) * amp
        else:
            for i in range(n):
                acc += cx[i] * psi[k ^ (1 << i)]
        if w != 0.0:
            pacc = 0j
            for p in range(npairs):
                pacc += pair_signs[p] * psi[k ^ pair_masks[p]]
            acc += w * pacc
        out[k] = acc
    return out


@njit(cache=True)
def rk4_step(psi, diag, t_step,
             b0, cx0, cy0, w0,
             bm, cxm, cym, wm,
             b1, cx1, cy1, w1,
             use_y, pair_masks, pair_signs,
             k1, k2, k3, k4, tmp):
    """One in-place RK4 step of i dpsi/dt = H(t) psi.

    The three coefficient sets belong to the step start, midpoint, and end.
    """
    dim = psi.shape[0]
    apply_terms(k1, psi, diag, b0, cx0, cy0, use_y, w0, pair_masks, pair_signs)
    for k in range(dim):
        k1[k] = -1j * k1[k]
        tmp[k] = psi[k] + 0.5 * t_step * k1[k]
    apply_terms(k2, tmp, diag, bm, cxm, cym, use_y, wm, pair_masks, pair_signs)
    for k in range(dim):
        k2[k] = -1j * k2[k]
        tmp[k] = psi[k] + 0.5 * t_step * k2[k]
    apply_terms(k3, tmp, diag, bm, cxm, cym, use_y, wm, pair_masks, pair_signs)
    for k in range(dim):
        k3[k] = -1j * k3[k]
        tmp[k] = psi[k] + t_step * k3[k]
    apply_terms(k4, tmp, diag, b1, cx1, cy1, use_y, w1, pair_masks, pair_signs)
    for k in range(dim):
        k4[k] = -1j * k4[k]
        psi[k] = psi[k] + (t_step / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])


def build_dense(n: int, diag: np.ndarray, b: float, cx: np.ndarray,
                cy: np.ndarray, w: float, pair_masks: np.ndarray,
                pair_signs: np.ndarray) -> np.ndarray:
    """Dense matrix of the same term decomposition (test oracles, spectra)."""
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=np.complex128)
    rows = np.arange(dim)
    mat[rows, rows] = b * diag
    for i in range(n):
        cols = rows ^ (1 << i)
        mat[rows, cols] += cx[i]
        if cy[i] != 0.0:
            z = 1.0 - 2.0 * ((rows >> i) & 1)
            mat[rows, cols] += -1j * z * cy[i]
    for p in range(pair_masks.shape[0]):
        cols = rows ^ pair_masks[p]
        mat[rows, cols] += w * pair_signs[p]
    return mat
