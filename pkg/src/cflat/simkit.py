"""Seeded Monte Carlo engine: channel sampling, ergodic-rate sweeps with
common random numbers across schemes, and high-SNR slope estimation.

Channel draws come from per-trial substreams of a splitmix64 generator, so a
trial's channel depends only on (master seed, trial index) and sweeps are
reproducible regardless of execution order or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import BlockFadingChannel, mac_sum_capacity, naive_rate
from .numfield import make_quadratic_field
from .svp import best_equation

__all__ = [
    "InsufficientPoints",
    "SweepConfig",
    "SweepResult",
    "sample_channels",
    "run_sweep",
    "dof_slope",
    "scheme_labels",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
DEFAULT_DOF_WINDOW = (30.0, 50.0)


class InsufficientPoints(ValueError):
    """Not enough SNR points inside the slope-estimation window."""


def _mix64(z: int) -> int:
    """splitmix64 finalizer: the documented 64-bit mixing function."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Tiny counter-based stream: state advances by the golden-ratio constant
    and each output is the mixed state."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def uniform(self) -> float:
        # 53-bit mantissa, in (0, 1]
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def normal_pair(self) -> tuple[float, float]:
        u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        return r * math.cos(2.0 * math.pi * u2), r * math.sin(2.0 * math.pi * u2)


def _trial_stream(master_seed: int, trial_index: int) -> SplitMix64:
    return SplitMix64(_mix64(master_seed ^ _mix64((trial_index + 1) * _GOLDEN)))


def sample_channels(master_seed: int, trial_index: int, n: int, L: int) -> np.ndarray:
    """i.i.d. standard normal (n, L) channel matrix from the per-trial
    substream, filled row-major from Box-Muller pairs."""
    stream = _trial_stream(master_seed, trial_index)
    vals = []
    while len(vals) < n * L:
        vals.extend(stream.normal_pair())
    return np.array(vals[: n * L]).reshape(n, L)


@dataclass(frozen=True)
class SweepConfig:
    n: int = 2
    L: int = 2
    snr_db: tuple[float, ...] = tuple(float(s) for s in range(0, 55, 5))
    trials: int = 2000
    schemes: tuple[str, ...] = (
        "mac",
        "naive_Z",
        "am_Z",
        "am_ring(3)",
        "am_ring(5)",
        "am_ring(7)",
    )
    master_seed: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.schemes:
            raise ValueError("at least one scheme required")
        if not all(math.isfinite(s) for s in self.snr_db):
            raise ValueError("snr_db values must be finite")
        for s in self.schemes:
            _parse_scheme(s)


def _parse_scheme(name: str):
    if name == "mac":
        return ("mac", None)
    if name == "naive_Z":
        return ("naive", None)
    if name == "am_Z":
        return ("am", None)
    if name.startswith("am_ring(") and name.endswith(")"):
        body = name[len("am_ring(") : -1]
        try:
            return ("am", int(body))
        except ValueError:
            pass
    raise ValueError(f"unknown scheme {name!r}")


def scheme_labels() -> tuple[str, ...]:
    return ("mac", "naive_Z", "am_Z", "am_ring(d)")


@dataclass(frozen=True)
class SweepResult:
    snr_db: tuple[float, ...]
    schemes: tuple[str, ...]
    trials: int
    seed: int
    mean: np.ndarray  # (schemes, snr)
    stderr: np.ndarray
    rates: np.ndarray  # (schemes, snr, trials)
    dof: dict

    def row(self, scheme: str, snr: float) -> tuple[float, float]:
        k = self.schemes.index(scheme)
        s = self.snr_db.index(snr)
        return float(self.mean[k, s]), float(self.stderr[k, s])


def _scheme_rate(kind, d_field, ch: BlockFadingChannel) -> float:
    if kind == "mac":
        return mac_sum_capacity(ch)
    if kind == "naive":
        return naive_rate(ch)[2]
    return best_equation(d_field, ch).rate_bits


def run_sweep(cfg: SweepConfig, threads: int = 1) -> SweepResult:
    """Evaluate every scheme on common channel draws: one draw per trial is
    shared across all schemes and SNR points.  Per-trial results land in a
    preallocated array, so means are independent of scheduling order."""
    parsed = [_parse_scheme(s) for s in cfg.schemes]
    fields = {
        d: make_quadratic_field(d) for _, d in parsed if d is not None
    }
    Ps = [10.0 ** (s / 10.0) for s in cfg.snr_db]
    rates = np.zeros((len(parsed), len(Ps), cfg.trials))

    def one_trial(t: int):
        h = sample_channels(cfg.master_seed, t, cfg.n, cfg.L)
        out = np.empty((len(parsed), len(Ps)))
        for si, P in enumerate(Ps):
            ch = BlockFadingChannel(h, P)
            for k, (kind, d) in enumerate(parsed):
                out[k, si] = _scheme_rate(kind, fields.get(d), ch)
        return t, out

    if threads == 0:
        import os

        threads = os.cpu_count() or 1
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for t, out in pool.map(one_trial, range(cfg.trials)):
                rates[:, :, t] = out
    else:
        for t in range(cfg.trials):
            rates[:, :, t] = one_trial(t)[1]

    mean = rates.mean(axis=2)
    if cfg.trials > 1:
        stderr = rates.std(axis=2, ddof=1) / math.sqrt(cfg.trials)
    else:
        stderr = np.zeros_like(mean)
    result = SweepResult(
        snr_db=tuple(cfg.snr_db),
        schemes=tuple(cfg.schemes),
        trials=cfg.trials,
        seed=cfg.master_seed,
        mean=mean,
        stderr=stderr,
        rates=rates,
        dof={},
    )
    dof = {}
    for name in cfg.schemes:
        try:
            dof[name] = dof_slope(result, name, DEFAULT_DOF_WINDOW)
        except InsufficientPoints:
            dof[name] = None
    result.dof.update(dof)
    return result


def dof_slope(
    result: SweepResult, scheme: str, window: tuple[float, float] = DEFAULT_DOF_WINDOW
) -> float:
    """Least-squares slope of the mean rate against (1/2) log2 P over the SNR
    window; the high-SNR value is the scheme's degrees of freedom."""
    k = result.schemes.index(scheme)
    xs, ys = [], []
    for s, snr in enumerate(result.snr_db):
        if window[0] <= snr <= window[1]:
            xs.append(0.5 * (snr / 10.0) * math.log2(10.0))
            ys.append(float(result.mean[k, s]))
    if len(xs) < 3:
        raise InsufficientPoints(
            f"need >= 3 SNR points in [{window[0]}, {window[1]}], got {len(xs)}"
        )
    return float(np.polyfit(xs, ys, 1)[0])
