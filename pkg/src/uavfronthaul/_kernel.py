"""Compiled inner loop for the Monte-Carlo SINR evaluation.

One call processes a block of vibration draws for every antenna-size variant
at once; the per-draw trigonometry that does not depend on the array size is
shared across variants.  Pure function of its inputs, so results do not
depend on block scheduling.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_HALF_PI = np.pi / 2.0
# tan of the clamp angle pi/2 - 1e-6: per-axis differences beyond the pole
# saturate there (matching the scalar reference's angle clamping)
_TAN_CLAMP = 1.0 / np.tan(1e-6)


@njit(cache=True)
def _elem_norm(s, c, ca, sa, th3, ph3, gsl, fbr, iso):
    """Element gain normalized to 1 at boresight; direction given by
    sin/cos of the polar offset (s, c) and of the azimuth (ca, sa)."""
    if iso:
        return 1.0
    sv = s * sa
    if sv > 1.0:
        sv = 1.0
    elif sv < -1.0:
        sv = -1.0
    av = np.degrees(np.arcsin(sv))
    ah = np.degrees(np.arctan2(s * ca, c))
    att_v = 12.0 * (av / th3) ** 2
    if att_v > gsl:
        att_v = gsl
    att_h = 12.0 * (ah / ph3) ** 2
    if att_h > fbr:
        att_h = fbr
    att = att_v + att_h
    if att > fbr:
        att = fbr
    return 10.0 ** (-att / 10.0)


@njit(cache=True)
def _af_sq(n, kd, s, ca, sa):
    """Squared square-array factor at sin(theta)=s, azimuth (ca, sa)."""
    ux = 0.5 * kd * s * ca
    su = np.sin(ux)
    if abs(su) < 1e-9:
        fx = np.cos(n * ux) / np.cos(ux)
    else:
        fx = np.sin(n * ux) / (n * su)
    uy = 0.5 * kd * s * sa
    su = np.sin(uy)
    if abs(su) < 1e-9:
        fy = np.cos(n * uy) / np.cos(uy)
    else:
        fy = np.sin(n * uy) / (n * su)
    f = fx * fy
    return f * f


@njit(cache=True)
def _tan_diff(ta, tb):
    """tan(a - b) from tan(a), tan(b) for a, b in (-pi/2, pi/2).

    cos(a-b) shares the sign of the denominator 1 + tan(a)tan(b), so a
    negative denominator means |a-b| exceeds pi/2; the difference then
    saturates at the clamp angle instead of wrapping modulo pi.
    """
    den = 1.0 + ta * tb
    if den <= 0.0:
        return _TAN_CLAMP if ta >= tb else -_TAN_CLAMP
    return (ta - tb) / den


@njit(cache=True)
def sinr_block(zx, zy, sig_x, sig_y, u1,
               n_arr, kd, base11,
               ta, tb, icr, isr,
               iconst, ita, itb, kcr, ksr, kuav,
               th3, ph3, gsl, fbr, iso,
               noise_w, gamma_th,
               count, sum_sig, sum_intra, sum_inter, gammas):
    """Evaluate the SINR for a block of draws.

    zx, zy: (I, nd) standard normals; sig_x/sig_y jitter sigmas (radians).
    n_arr/base11: per antenna-size variant; iconst is (nv, K).
    Accumulates outage counts and power sums per variant into the provided
    arrays and writes per-draw SINR into gammas (nv, nd).
    """
    n_uav, nd = zx.shape
    nv = n_arr.shape[0]
    n_intra = ta.shape[0]
    n_inter = ita.shape[0]
    txi = np.empty(n_uav)
    tyi = np.empty(n_uav)
    sig = np.empty(nv)
    intra = np.empty(nv)
    inter = np.empty(nv)
    for d in range(nd):
        for i in range(n_uav):
            txi[i] = np.tan(sig_x * zx[i, d])
            tyi[i] = np.tan(sig_y * zy[i, d])
        tx1 = txi[u1]
        ty1 = tyi[u1]

        # target link: deviation equals the composite vibration angle
        t2 = tx1 * tx1 + ty1 * ty1
        s = np.sqrt(t2 / (1.0 + t2))
        c = 1.0 / np.sqrt(1.0 + t2)
        if t2 > 0.0:
            rt = np.sqrt(t2)
            ca = tx1 / rt
            sa = ty1 / rt
        else:
            ca = 1.0
            sa = 0.0
        ge = _elem_norm(s, c, ca, sa, th3, ph3, gsl, fbr, iso)
        for v in range(nv):
            sig[v] = base11[v] * ge * _af_sq(n_arr[v], kd, s, ca, sa)
            intra[v] = 0.0
            inter[v] = 0.0

        for j in range(n_intra):
            tdx = _tan_diff(ta[j], tx1)
            tdy = _tan_diff(tb[j], ty1)
            t2 = tdx * tdx + tdy * tdy
            s = np.sqrt(t2 / (1.0 + t2))
            c = 1.0 / np.sqrt(1.0 + t2)
            ge = _elem_norm(s, c, icr[j], isr[j], th3, ph3, gsl, fbr, iso)
            for v in range(nv):
                intra[v] += base11[v] * ge * _af_sq(n_arr[v], kd, s, icr[j], isr[j])

        for k in range(n_inter):
            i = kuav[k]
            tdx = _tan_diff(ita[k], -txi[i])
            tdy = _tan_diff(itb[k], -tyi[i])
            t2 = tdx * tdx + tdy * tdy
            s = np.sqrt(t2 / (1.0 + t2))
            c = 1.0 / np.sqrt(1.0 + t2)
            ge = _elem_norm(s, c, kcr[k], ksr[k], th3, ph3, gsl, fbr, iso)
            for v in range(nv):
                inter[v] += iconst[v, k] * ge * _af_sq(n_arr[v], kd, s, kcr[k], ksr[k])

        for v in range(nv):
            g = sig[v] / (intra[v] + inter[v] + noise_w)
            gammas[v, d] = g
            if g < gamma_th:
                count[v] += 1
            sum_sig[v] += sig[v]
            sum_intra[v] += intra[v]
            sum_inter[v] += inter[v]
