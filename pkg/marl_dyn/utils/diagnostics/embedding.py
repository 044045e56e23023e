import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from marl_dyn.utils.exceptions import ContractViolationError


def delay_embed(series, m: int, tau: int) -> np.ndarray:
    """Rows ``[s[h], s[h + tau], ..., s[h + (m - 1) tau]]`` for every admissible ``h``."""
    x = np.asarray(series, dtype=np.float64)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim != 1:
        raise ContractViolationError("series must be one-dimensional", operation="delay_embed")
    if m < 1 or tau < 1:
        raise ContractViolationError(f"need m >= 1 and tau >= 1, got m={m}, tau={tau}", operation="delay_embed")
    span = (m - 1) * tau
    if len(x) <= span:
        raise ContractViolationError(
            f"series of length {len(x)} is too short for m={m}, tau={tau}", operation="delay_embed"
        )
    return sliding_window_view(x, span + 1)[:, ::tau].copy()


def embed_columns(trace, m: int, tau: int) -> np.ndarray:
    """Delay-embed every column and concatenate the results side by side."""
    x = np.asarray(trace, dtype=np.float64)
    if x.ndim == 1:
        return delay_embed(x, m, tau)
    return np.hstack([delay_embed(column, m, tau) for column in x.T])
