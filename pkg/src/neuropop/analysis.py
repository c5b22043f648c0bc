"""Summaries of frequency trajectories used by the experiment checks."""

from __future__ import annotations

import numpy as np

from neuropop.trajectory import TrajectoryRecord


def first_below(rec: TrajectoryRecord, threshold: float) -> dict[str, int | None]:
    """Step at which each strategy first drops under ``threshold`` (None if never)."""
    out = {}
    for k, name in enumerate(rec.names):
        hits = np.flatnonzero(rec.freqs[:, k] < threshold)
        out[name] = int(rec.steps[hits[0]]) if len(hits) else None
    return out


def first_to_fall(rec: TrajectoryRecord, threshold: float = 0.05) -> str | None:
    """The strategy that drops under ``threshold`` strictly before all others."""
    times = {n: t for n, t in first_below(rec, threshold).items() if t is not None}
    if not times:
        return None
    earliest = min(times.values())
    leaders = [n for n, t in times.items() if t == earliest]
    return leaders[0] if len(leaders) == 1 else None


def peak(rec: TrajectoryRecord, name: str) -> tuple[int, float]:
    """(step, value) of the first maximum of one strategy's frequency."""
    col = rec.column(name)
    k = int(np.argmax(col))
    return int(rec.steps[k]), float(col[k])


def ipd_ordering(rec: TrajectoryRecord, low: float = 0.05, d_peak: float = 0.5) -> dict:
    """Check the qualitative IPD sequence: All-C dies out first, then All-D peaks before TFT."""
    d_step, d_value = peak(rec, "All-D")
    t_step, t_value = peak(rec, "TFT")
    first = first_to_fall(rec, low)
    result = {
        "first_to_fall": first,
        "all_d_peak": (d_step, d_value),
        "tft_peak": (t_step, t_value),
    }
    result["all_c_first"] = first == "All-C"
    result["all_d_peak_high"] = d_value > d_peak
    result["all_d_before_tft"] = d_step < t_step
    result["ok"] = result["all_c_first"] and result["all_d_peak_high"] and result["all_d_before_tft"]
    return result


def window_total_variation(freqs, window: int) -> np.ndarray:
    """Total variation distance between the mean frequencies of consecutive windows.

    ``freqs`` holds one row per step; a trailing partial window is dropped.
    """
    freqs = np.asarray(freqs)
    n = len(freqs) // window
    if n < 2:
        raise ValueError("need at least two full windows")
    means = freqs[: n * window].reshape(n, window, -1).mean(axis=1)
    return 0.5 * np.abs(np.diff(means, axis=0)).sum(axis=1)


def tft_atft_lock_in(rec: TrajectoryRecord, share: float = 0.95, each: float = 0.02, min_steps: int = 1000) -> bool:
    """True if TFT and ATFT together hold ``share`` of the population, both present,
    for at least ``min_steps`` consecutive recorded steps."""
    tft, atft = rec.column("TFT"), rec.column("ATFT")
    inside = (tft + atft >= share) & (tft >= each) & (atft >= each)
    start = None
    for k, flag in enumerate(inside):
        if flag:
            if start is None:
                start = rec.steps[k]
            if rec.steps[k] - start >= min_steps:
                return True
        else:
            start = None
    return False
