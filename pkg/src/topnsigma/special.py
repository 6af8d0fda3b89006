"""Error function, its inverse, and normal-CDF helpers.

``erf``/``erfc`` are a NumPy port of the rational approximations in
FreeBSD's libm (``msun/src/s_erf.c``, originally SunPro 1993).  The port
drops the split-exponent trick used there for the erfc tail, which costs at
most a few ulps in the exponent of the tail factor; the absolute error of
``erf`` stays below 1e-15 everywhere (checked against an independent
oracle in the test suite, contract 1e-14).

``erf_inv`` starts from Acklam's rational approximation to the inverse
normal CDF (documented max relative error 1.15e-9) and polishes with two
Newton steps on ``erf``, so the round trip |erf(erf_inv(y)) - y| stays
below 1e-12 on (-1, 1).

All functions accept scalars or arrays and return matching shapes.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

# --- erf/erfc coefficient tables (FreeBSD msun s_erf.c) -------------------

_ERX = 8.45062911510467529297e-01
_EFX = 1.28379167095512586316e-01

# erf on [0, 0.84375]
_PP = np.array([
    1.28379167095512558561e-01, -3.25042107247001499370e-01,
    -2.84817495755985104766e-02, -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
])
_QQ = np.array([
    1.0, 3.97917223959155352819e-01, 6.50222499887672944485e-02,
    5.08130628187576562776e-03, 1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
])

# erf on [0.84375, 1.25]
_PA = np.array([
    -2.36211856075265944077e-03, 4.14856118683748331666e-01,
    -3.72207876035701323847e-01, 3.18346619901161753674e-01,
    -1.10894694282396677476e-01, 3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
])
_QA = np.array([
    1.0, 1.06420880400844228286e-01, 5.40397917702171048937e-01,
    7.18286544141962662868e-02, 1.26171219808761642112e-01,
    1.36370839120290507362e-02, 1.19844998467991074170e-02,
])

# erfc on [1.25, 1/0.35]
_RA = np.array([
    -9.86494403484714822705e-03, -6.93858572707181764372e-01,
    -1.05586262253232909814e+01, -6.23753324503260060396e+01,
    -1.62396669462573470355e+02, -1.84605092906711035994e+02,
    -8.12874355063065934246e+01, -9.81432934416914548592e+00,
])
_SA = np.array([
    1.0, 1.96512716674392571292e+01, 1.37657754143519042600e+02,
    4.34565877475229228821e+02, 6.45387271733267880336e+02,
    4.29008140027567833386e+02, 1.08635005541779435134e+02,
    6.57024977031928170135e+00, -6.04244152148580987438e-02,
])

# erfc on [1/0.35, 28]
_RB = np.array([
    -9.86494292470009928597e-03, -7.99283237680523006574e-01,
    -1.77579549177547519889e+01, -1.60636384855821916062e+02,
    -6.37566443368389627722e+02, -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
])
_SB = np.array([
    1.0, 3.03380607434824582924e+01, 3.25792512996573918826e+02,
    1.53672958608443695994e+03, 3.19985821950859553908e+03,
    2.55305040643316442583e+03, 4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
])


def _polyval(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    # ascending-order evaluation via Horner
    acc = np.zeros_like(z)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def _erf_erfc(x, want_erfc: bool):
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    a = np.abs(x)
    sign = np.sign(x)
    out = np.empty_like(x)

    tiny = a < 2.0**-28
    small = (a >= 2.0**-28) & (a < 0.84375)
    mid = (a >= 0.84375) & (a < 1.25)
    med = (a >= 1.25) & (a < 1.0 / 0.35)
    big = (a >= 1.0 / 0.35) & (a < 28.0)
    huge = a >= 28.0

    if tiny.any():
        out[tiny] = x[tiny] + _EFX * x[tiny]
    if small.any():
        z = x[small] * x[small]
        y = _polyval(_PP, z) / _polyval(_QQ, z)
        out[small] = x[small] + x[small] * y
    if mid.any():
        s = a[mid] - 1.0
        val = _ERX + _polyval(_PA, s) / _polyval(_QA, s)
        out[mid] = val * sign[mid]
    for region, rp, sp in ((med, _RA, _SA), (big, _RB, _SB)):
        if region.any():
            xa = a[region]
            s = 1.0 / (xa * xa)
            r = np.exp(-xa * xa - 0.5625 + _polyval(rp, s) / _polyval(sp, s))
            out[region] = (1.0 - r / xa) * sign[region]
    if huge.any():
        out[huge] = sign[huge]

    if want_erfc:
        # recompute the tail regions directly so erfc keeps relative accuracy
        res = 1.0 - out
        for region, rp, sp in ((med, _RA, _SA), (big, _RB, _SB)):
            if region.any():
                xa = a[region]
                s = 1.0 / (xa * xa)
                r = np.exp(-xa * xa - 0.5625 + _polyval(rp, s) / _polyval(sp, s))
                pos = r / xa
                res[region] = np.where(sign[region] > 0, pos, 2.0 - pos)
        if huge.any():
            xa = a[huge]
            with np.errstate(under="ignore"):
                pos = np.where(xa < 40.0, np.exp(-xa * xa - 0.5625) / xa, 0.0)
            res[huge] = np.where(sign[huge] > 0, pos, 2.0)
        out = res

    return float(out[0]) if scalar else out


def erf(x):
    """Error function, absolute error below 1e-14."""
    return _erf_erfc(x, want_erfc=False)


def erfc(x):
    """Complementary error function 1 - erf(x), accurate in the tail."""
    return _erf_erfc(x, want_erfc=True)


# --- inverse: Acklam's inverse-normal-CDF rational approximation ----------

_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)
_ACK_LOW = 0.02425

_SQRT2 = np.sqrt(2.0)
_TWO_OVER_SQRT_PI = 2.0 / np.sqrt(np.pi)


def _acklam_ppf(q: np.ndarray) -> np.ndarray:
    a, b, c, d = _ACK_A, _ACK_B, _ACK_C, _ACK_D
    out = np.empty_like(q)

    low = q < _ACK_LOW
    high = q > 1.0 - _ACK_LOW
    central = ~(low | high)

    if central.any():
        qc = q[central] - 0.5
        r = qc * qc
        num = ((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]
        den = ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
        out[central] = qc * num / den
    for region, flip in ((low, 1.0), (high, -1.0)):
        if region.any():
            qt = q[region] if flip > 0 else 1.0 - q[region]
            r = np.sqrt(-2.0 * np.log(qt))
            num = ((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]
            den = (((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0
            out[region] = flip * num / den
    return out


def erf_inv(y):
    """Inverse error function on (-1, 1), Newton-polished.

    |erf(erf_inv(y)) - y| <= 1e-12 across the open interval.
    """
    y_arr = np.asarray(y, dtype=np.float64)
    scalar = y_arr.ndim == 0
    y_arr = np.atleast_1d(y_arr)
    if (np.abs(y_arr) >= 1.0).any() or np.isnan(y_arr).any():
        raise DomainError("erf_inv requires |y| < 1")

    # initial guess in normal-quantile units; the tail complement
    # (1 - |y|) / 2 is formed from y directly, which stays exact where
    # 0.5 * (1 + y) would round to 1
    a, b, c, d = _ACK_A, _ACK_B, _ACK_C, _ACK_D
    ay = np.abs(y_arr)
    x = np.empty_like(y_arr)
    central = ay <= 1.0 - 2.0 * _ACK_LOW
    if central.any():
        qc = 0.5 * y_arr[central]
        r = qc * qc
        num = ((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]
        den = ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
        x[central] = qc * num / den
    tail = ~central
    if tail.any():
        r = np.sqrt(-2.0 * np.log(0.5 * (1.0 - ay[tail])))
        num = ((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]
        den = (((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0
        x[tail] = -np.sign(y_arr[tail]) * num / den
    x /= _SQRT2

    # two Newton steps on erf(x) - y; skip where exp(x^2) would overflow
    # (|x| > 26 means 1 - |y| underflows and the seed is already ample)
    for _ in range(2):
        safe = np.abs(x) < 26.0
        step = np.where(
            safe,
            (erf(x) - y_arr) / _TWO_OVER_SQRT_PI * np.exp(np.where(safe, x * x, 0.0)),
            0.0,
        )
        x = x - step
    return float(x[0]) if scalar else x


def norm_cdf(z):
    """Standard normal CDF via erfc, accurate in both tails."""
    return 0.5 * erfc(-np.asarray(z, dtype=np.float64) / _SQRT2)


_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def norm_ppf(q):
    """Standard normal quantile function on (0, 1), Newton-polished.

    Handles the deep tails directly (down to q near the smallest normal
    double) rather than routing through erf_inv, whose argument 2q - 1
    would round to -1 there.
    """
    q_arr = np.asarray(q, dtype=np.float64)
    scalar = q_arr.ndim == 0
    q_arr = np.atleast_1d(q_arr)
    if ((q_arr <= 0.0) | (q_arr >= 1.0)).any() or np.isnan(q_arr).any():
        raise DomainError("norm_ppf requires 0 < q < 1")
    x = _acklam_ppf(q_arr)
    # Newton on Phi(x) - q; the erfc-based CDF keeps tail accuracy and the
    # density stays representable wherever q does
    for _ in range(2):
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
        step = np.where(pdf > 0.0, (norm_cdf(x) - q_arr) / np.where(pdf > 0.0, pdf, 1.0), 0.0)
        x = x - step
    return float(x[0]) if scalar else x
