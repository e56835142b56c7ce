from __future__ import annotations

import numpy as np


def line_fit(x, y, weights=None):
    """Least-squares line ``y = intercept + slope * x``.

    Returns ``(slope, intercept, r_squared)``; ``weights`` multiply the
    squared residuals.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    sw = np.sqrt(w)
    design = np.column_stack([np.ones_like(x), x]) * sw[:, None]
    (intercept, slope), *_ = np.linalg.lstsq(design, y * sw, rcond=None)
    resid = y - (intercept + slope * x)
    ybar = np.sum(w * y) / np.sum(w)
    ss_tot = np.sum(w * (y - ybar) ** 2)
    r2 = 1.0 - np.sum(w * resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)
