"""Data-adaptive band splitting of the Bessel-domain spectrum.

The magnitude spectrum |C_m| is smoothed at a ladder of Gaussian scales; local
minima that persist across many scales mark boundaries between spectral
support regions. An automatic (Otsu) threshold on persistence separates
meaningful valleys from noise. The kept boundaries parameterize a Meyer-type
filter bank on the normalized axis [0, pi] whose squared responses sum to one
(tight frame), and each mode is synthesized from the coefficient vector
weighted by one squared response — so the modes sum back to the analyzed
window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInput,
    InvalidSpec,
    InvalidXi,
    NonFiniteInput,
    SpectrumTooShort,
)
from .fbse import FbseSpectrum, fbse_forward, fbse_inverse

#: Scale-space ladder: sigma_s = SCALE_BASE * SCALE_FACTOR**(s-1), s = 1..SCALE_COUNT.
SCALE_COUNT = 32
SCALE_BASE = 0.5
SCALE_FACTOR = 1.15

#: Smallest spectrum the boundary detector accepts.
MIN_SPECTRUM = 8


@dataclass(frozen=True)
class BoundarySet:
    """Band edges 0 = w_0 < w_1 < ... < w_N = pi plus the transition half-width xi."""

    omegas: np.ndarray
    xi: float

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        object.__setattr__(self, "omegas", om)
        if om.ndim != 1 or om.size < 2:
            raise InvalidSpec("need at least the two outer edges 0 and pi")
        if om[0] != 0.0 or abs(om[-1] - np.pi) > 1e-12:
            raise InvalidSpec("edges must start at 0 and end at pi")
        if np.any(np.diff(om) <= 0):
            raise InvalidSpec("edges must be strictly increasing")
        if not (0.0 < self.xi < 1.0):
            raise InvalidSpec("xi must lie in (0, 1)")

    @property
    def band_count(self) -> int:
        return self.omegas.size - 1


@dataclass(frozen=True)
class FilterBank:
    """Per-band responses sampled on the order grid; rows index bands."""

    responses: np.ndarray
    boundaries: BoundarySet

    def __post_init__(self):
        r = np.asarray(self.responses, dtype=float)
        object.__setattr__(self, "responses", r)
        if r.ndim != 2 or r.shape[0] != self.boundaries.band_count:
            raise InvalidSpec("responses must be (band_count, U)")


@dataclass(frozen=True)
class ModeSet:
    """Decomposition output: mode r in row r; modes sum to the analyzed window."""

    modes: np.ndarray
    boundaries: BoundarySet
    fs: float

    @property
    def mode_count(self) -> int:
        return self.modes.shape[0]


def _gaussian_smooth(values: np.ndarray, sigma: float) -> np.ndarray:
    radius = max(1, int(np.ceil(4.0 * sigma)))
    xs = np.arange(-radius, radius + 1, dtype=float)
    kernel = np.exp(-0.5 * (xs / sigma) ** 2)
    kernel /= kernel.sum()
    pad = min(radius, values.size - 1)
    padded = np.pad(values, radius, mode="reflect") if pad == radius else np.pad(
        values, radius, mode="edge"
    )
    return np.convolve(padded, kernel, mode="valid")


def _local_minima(values: np.ndarray) -> np.ndarray:
    # interior strict-left minima; a flat valley reports its left edge once
    v = values
    idx = np.where((v[1:-1] < v[:-2]) & (v[1:-1] <= v[2:]))[0] + 1
    return idx


def scale_space_persistence(magnitude: np.ndarray) -> list[tuple[int, int]]:
    """Track finest-scale local minima across the Gaussian scale ladder.

    Returns ``(position, persistence)`` per chain: position is the minimum's
    index at the finest scale, persistence the number of consecutive scales
    (1..SCALE_COUNT) at which a matching minimum survived. Matching is greedy
    nearest-neighbour within radius max(1, round(sigma)) of the next scale.
    """
    mag = np.asarray(magnitude, dtype=float)
    sigmas = SCALE_BASE * SCALE_FACTOR ** np.arange(SCALE_COUNT)
    current = _local_minima(_gaussian_smooth(mag, sigmas[0]))
    chains = [
        {"origin": int(p), "pos": int(p), "persistence": 1, "alive": True}
        for p in current
    ]
    for sigma in sigmas[1:]:
        smoothed = _gaussian_smooth(mag, sigma)
        minima = _local_minima(smoothed)
        claimed = np.zeros(minima.size, dtype=bool)
        radius = max(1, int(round(sigma)))
        for chain in chains:
            if not chain["alive"]:
                continue
            if minima.size == 0:
                chain["alive"] = False
                continue
            dist = np.abs(minima - chain["pos"])
            dist = np.where(claimed, np.inf, dist)
            j = int(np.argmin(dist))
            if dist[j] <= radius:
                claimed[j] = True
                chain["pos"] = int(minima[j])
                chain["persistence"] += 1
            else:
                chain["alive"] = False
    return [(c["origin"], c["persistence"]) for c in chains]


def otsu_threshold(values) -> int:
    """Two-class threshold over small nonnegative integers.

    Candidates are integers t in (min, max]; classes are {v < t} and {v >= t};
    the smallest t maximizing the between-class variance w0*w1*(mu0-mu1)^2 is
    returned. Distinct splits can tie exactly (e.g. {3,6,7,9,10} at t=7 and
    t=8), so the comparison runs in exact integer arithmetic — float argmax
    would break such ties by rounding noise instead of by "smallest t".
    Raises DegenerateInput when all values are equal.
    """
    v = np.asarray(values)
    if v.size < 2:
        raise InvalidSpec("need at least two values")
    if np.any(v != v.astype(int)) or np.any(v < 0):
        raise InvalidSpec("values must be nonnegative integers")
    v = v.astype(int)
    lo, hi = int(v.min()), int(v.max())
    if lo == hi:
        raise DegenerateInput("all values identical; no two-class split exists")
    counts = np.bincount(v - lo, minlength=hi - lo + 1)
    total = int(v.size)
    total_sum = int(v.sum())
    # sigma_b^2(t) = (s0*n1 - s1*n0)^2 / (N^2 * n0 * n1); N^2 is common, so
    # compare num/den by integer cross-multiplication
    best_t, best_num, best_den = None, -1, 1
    n0 = s0 = 0
    for offset, count in enumerate(counts[:-1].tolist()):
        n0 += count
        s0 += count * (lo + offset)
        n1 = total - n0
        s1 = total_sum - s0
        num = (s0 * n1 - s1 * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = lo + offset + 1, num, den
    return best_t


def _auto_xi(omegas: np.ndarray) -> float:
    # tight-frame bound: xi < min (w_{n+1}-w_n)/(w_{n+1}+w_n) over consecutive pairs
    ratios = np.diff(omegas) / (omegas[1:] + omegas[:-1])
    min_ratio = float(ratios.min())
    xi = min(max(0.9 * min_ratio, 0.01), 0.5)
    if xi >= min_ratio:  # the clip floor would break the bound it exists to protect
        xi = 0.9 * min_ratio
    return xi


def detect_boundaries(
    magnitude: np.ndarray, max_modes: int, xi: float | None = None
) -> BoundarySet:
    """Place band edges at persistent minima of the magnitude spectrum.

    The persistence threshold comes from :func:`otsu_threshold` (kept minima
    are the upper class, persistence >= t). When no two-class split exists
    (fewer than two chains, or all persistences tie) a chain is kept only if
    it survives at least half the scale ladder — flat and noise-like spectra
    collapse to a single band while a deep valley (which loses only the
    coarsest scales to bump merging) is retained. At most ``max_modes - 1``
    interior edges survive (strongest persistence first, lower position
    breaking ties). Positions map to the axis via w = pi * m / U for order m.
    """
    mag = np.asarray(magnitude, dtype=float)
    if mag.ndim != 1 or mag.size < MIN_SPECTRUM:
        raise SpectrumTooShort(f"need a 1-D spectrum of >= {MIN_SPECTRUM} points")
    if not np.all(np.isfinite(mag)):
        raise NonFiniteInput("spectrum contains non-finite values")
    if max_modes < 1:
        raise InvalidSpec("max_modes must be >= 1")
    chains = scale_space_persistence(mag)
    kept: list[tuple[int, int]] = []
    if chains:
        persistences = [p for _, p in chains]
        if len(persistences) >= 2 and len(set(persistences)) > 1:
            thr = otsu_threshold(persistences)
            kept = [(pos, p) for pos, p in chains if p >= thr]
        else:
            half = (SCALE_COUNT + 1) // 2
            kept = [(pos, p) for pos, p in chains if p >= half]
    if len(kept) > max_modes - 1:
        kept.sort(key=lambda c: (-c[1], c[0]))
        kept = kept[: max_modes - 1]
    positions = sorted(pos for pos, _ in kept)
    interior = [np.pi * (pos + 1) / mag.size for pos in positions]
    omegas = np.array([0.0, *interior, np.pi])
    if np.any(np.diff(omegas) <= 0):  # guard duplicate/edge-adjacent positions
        omegas = np.unique(omegas)
    chosen = _auto_xi(omegas) if xi is None else float(xi)
    return BoundarySet(omegas, chosen)


def _beta_poly(v: np.ndarray) -> np.ndarray:
    # smooth step on [0,1]: 35v^4 - 84v^5 + 70v^6 - 20v^7
    v = np.clip(v, 0.0, 1.0)
    return v**4 * (35.0 - 84.0 * v + 70.0 * v * v - 20.0 * v**3)


def _rise(grid: np.ndarray, omega: float, xi: float) -> np.ndarray:
    # 0 below (1-xi)w, sin(pi/2 beta) across the transition, 1 above (1+xi)w
    lo, hi = (1.0 - xi) * omega, (1.0 + xi) * omega
    out = np.ones_like(grid)
    out[grid <= lo] = 0.0
    band = (grid > lo) & (grid < hi)
    out[band] = np.sin(0.5 * np.pi * _beta_poly((grid[band] - lo) / (hi - lo)))
    return out


def _fall(grid: np.ndarray, omega: float, xi: float) -> np.ndarray:
    lo, hi = (1.0 - xi) * omega, (1.0 + xi) * omega
    out = np.zeros_like(grid)
    out[grid <= lo] = 1.0
    band = (grid > lo) & (grid < hi)
    out[band] = np.cos(0.5 * np.pi * _beta_poly((grid[band] - lo) / (hi - lo)))
    return out


def build_filter_bank(boundaries: BoundarySet, u: int) -> FilterBank:
    """Meyer-type responses on the order grid pi*m/U, m = 1..U.

    Band 0 is the scaling (low-pass) response; band r rises at w_r and falls
    at w_{r+1} (the last band stays flat up to pi). Squared responses sum to
    one everywhere provided xi < min (w_{n+1}-w_n)/(w_{n+1}+w_n); otherwise
    InvalidXi is raised.
    """
    if u < 2:
        raise InvalidSpec("need U >= 2 grid points")
    om, xi = boundaries.omegas, boundaries.xi
    n_bands = boundaries.band_count
    grid = np.pi * np.arange(1, u + 1) / u
    if n_bands == 1:
        return FilterBank(np.ones((1, u)), boundaries)
    ratios = np.diff(om) / (om[1:] + om[:-1])
    if xi >= ratios.min():
        raise InvalidXi(
            f"xi={xi:.6g} >= min edge ratio {ratios.min():.6g}; transitions overlap"
        )
    rows = [_fall(grid, om[1], xi)]
    for r in range(1, n_bands):
        resp = _rise(grid, om[r], xi)
        if r + 1 < n_bands:
            resp = resp * _fall(grid, om[r + 1], xi)
        rows.append(resp)
    return FilterBank(np.vstack(rows), boundaries)


def decompose(
    window: np.ndarray,
    fs: float,
    max_modes: int = 5,
    *,
    demean: bool = True,
    xi: float | None = None,
) -> ModeSet:
    """Split a window into data-adaptive oscillatory modes.

    The (optionally demeaned) window is expanded into Bessel-series
    coefficients; boundaries are detected on |C|; mode r is synthesized from
    C weighted by the squared band-r response. Modes therefore sum to the
    demeaned window to within the analysis roundtrip error.
    """
    y = np.asarray(window, dtype=float)
    if y.ndim != 1 or y.size < MIN_SPECTRUM:
        raise SpectrumTooShort(f"window must be 1-D with >= {MIN_SPECTRUM} samples")
    if demean:
        y = y - y.mean()
    spectrum = fbse_forward(y, fs)
    boundaries = detect_boundaries(spectrum.magnitude(), max_modes, xi=xi)
    bank = build_filter_bank(boundaries, spectrum.order_count)
    modes = np.vstack(
        [
            fbse_inverse(FbseSpectrum(spectrum.coeffs * resp * resp, fs))
            for resp in bank.responses
        ]
    )
    return ModeSet(modes, boundaries, fs)
