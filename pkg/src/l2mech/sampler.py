"""Exact samplers for the l2 mechanism and its baselines.

The l2 mechanism's noise has density proportional to
exp(-||y||_2 / sigma): a radius with the law sigma * Gamma(dim + 1)
thinned by a uniform Y^(1/dim) factor, times a uniform direction.  All
three pieces come from elementary draws, so the sampler needs no
rejection step and parallelizes coordinate-wise: each worker owns one
log-uniform (a summand of the Gamma radius) and one Gaussian coordinate
(a summand of the direction), and a manager combines them in two
deterministic phases.

Randomness is counter-based (numpy Philox keyed by (seed, stream_id)),
so a fresh RngState replays the identical sequence bit for bit, and
disjoint stream ids give independent streams for workers.  One
RngState instance advances across calls; share one per thread only.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RngState",
    "SampleBatch",
    "ParallelTrace",
    "sample_gamma",
    "sample_unit_ball",
    "sample_l2",
    "sample_l2_parallel",
    "sample_laplace",
    "sample_gaussian",
    "draw_batch",
]

_MAX_REDRAWS = 100


@dataclass(eq=False)
class RngState:
    """A (seed, stream_id) pair naming one deterministic random stream.

    The underlying generator is created lazily and then advances with
    use; construct a fresh RngState with the same pair to replay the
    stream from the start.  Instances are not thread-safe; give each
    worker its own stream_id instead.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        problems = []
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            problems.append("seed must be an integer in [0, 2^64)")
        if not (isinstance(self.stream_id, (int, np.integer)) and self.stream_id >= 0):
            problems.append("stream_id must be a nonnegative integer")
        if problems:
            raise ValueError("; ".join(problems))
        self.seed = int(self.seed)
        self.stream_id = int(self.stream_id)

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(
                entropy=self.seed, spawn_key=(self.stream_id,)
            )
            self._gen = np.random.Generator(np.random.Philox(seq))
        return self._gen


def _check_size(size) -> tuple[int, bool]:
    if size is None:
        return 1, True
    if not (isinstance(size, (int, np.integer)) and size >= 1):
        raise ValueError("size must be None or an integer >= 1")
    return int(size), False


def _check_center(center) -> np.ndarray:
    arr = np.asarray(center, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("center must be a 1-d vector with at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ValueError("center must be finite")
    return arr


def _check_scale(value: float, name: str) -> float:
    if not (np.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite")
    return float(value)


def sample_gamma(shape: int, scale: float, rng: RngState, size=None):
    """Gamma(shape, scale) draws as sums of shape exponentials.

    Uniforms are taken from (0, 1] (one minus the half-open generator
    output), so -log U is always finite and no redraw is ever needed.
    """
    if not (isinstance(shape, (int, np.integer)) and shape >= 1):
        raise ValueError("shape must be an integer >= 1")
    scale = _check_scale(scale, "scale")
    n, scalar = _check_size(size)
    u = 1.0 - rng.generator.random((n, int(shape)))
    vals = -scale * np.log(u).sum(axis=1)
    return float(vals[0]) if scalar else vals


def sample_unit_ball(dim: int, rng: RngState, size=None):
    """Uniform draws from the unit ball in R^dim.

    A Gaussian direction scaled to the sphere, then pulled inward by
    U^(1/dim).  An all-zero Gaussian row (probability zero, float
    possible) is redrawn.  Draw order per batch: the Gaussian block,
    then the radial uniforms.
    """
    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        raise ValueError("dim must be an integer >= 1")
    n, scalar = _check_size(size)
    gen = rng.generator
    x = gen.standard_normal((n, int(dim)))
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    for _ in range(_MAX_REDRAWS):
        bad = norms == 0.0
        if not bad.any():
            break
        k = int(bad.sum())
        x[bad] = gen.standard_normal((k, int(dim)))
        norms[bad] = np.sqrt(np.einsum("ij,ij->i", x[bad], x[bad]))
    else:
        raise RuntimeError("sample_unit_ball: persistent zero direction vector")
    pull = gen.random(n) ** (1.0 / dim)
    out = x * (pull / norms)[:, None]
    return out[0] if scalar else out


def sample_l2(center, sigma: float, rng: RngState, size=None):
    """Draws from the l2 mechanism centered at center with scale sigma.

    radius ~ Gamma(dim + 1, sigma) times a uniform point of the unit
    ball; the product's norm has the exp(-r/sigma) radial law, i.e. the
    radial CDF is the regularized lower incomplete gamma P(dim, r/sigma).
    """
    c = _check_center(center)
    sigma = _check_scale(sigma, "sigma")
    n, scalar = _check_size(size)
    d = c.size
    radius = sample_gamma(d + 1, sigma, rng, size=n)
    ball = sample_unit_ball(d, rng, size=n)
    out = c[None, :] + radius[:, None] * ball
    return out[0] if scalar else out


@dataclass(frozen=True)
class ParallelTrace:
    """Per-party contributions of one two-phase parallel draw.

    Phase one: worker i publishes -log U_i (its radius summand) and its
    Gaussian coordinate; the manager adds its own -log U and the radial
    uniform Y.  Phase two combines: radius = sigma * (sum of the log
    uniforms), direction = Gaussian vector / sqrt(sum_squares), pulled
    inward by Y^(1/dim).
    """

    worker_log_uniforms: np.ndarray
    worker_gauss: np.ndarray
    manager_uniform_y: float
    manager_log_uniform: float
    radius: float
    sum_squares: float


def sample_l2_parallel(
    center, sigma: float, worker_rngs: list[RngState], manager_rng: RngState
):
    """One l2-mechanism draw computed by dim workers plus a manager.

    Each worker uses only its own stream (one uniform, one Gaussian);
    the manager draws the extra radius summand and the radial uniform.
    Returns the sample and the full trace of contributions.  A zero
    direction vector triggers a global redraw round for all parties.
    """
    c = _check_center(center)
    sigma = _check_scale(sigma, "sigma")
    d = c.size
    if len(worker_rngs) != d:
        raise ValueError(f"need exactly {d} worker streams, got {len(worker_rngs)}")
    for _ in range(_MAX_REDRAWS):
        wlogs = np.empty(d)
        wgauss = np.empty(d)
        for i, w in enumerate(worker_rngs):
            gen = w.generator
            wlogs[i] = -math.log(1.0 - gen.random())
            wgauss[i] = gen.standard_normal()
        mgen = manager_rng.generator
        mlog = -math.log(1.0 - mgen.random())
        y = 1.0 - mgen.random()
        ss = float(np.dot(wgauss, wgauss))
        if ss > 0.0:
            break
    else:
        raise RuntimeError("sample_l2_parallel: persistent zero direction vector")
    radius = sigma * (float(wlogs.sum()) + mlog)
    out = c + radius * (y ** (1.0 / d)) * wgauss / math.sqrt(ss)
    trace = ParallelTrace(
        worker_log_uniforms=wlogs,
        worker_gauss=wgauss,
        manager_uniform_y=y,
        manager_log_uniform=mlog,
        radius=radius,
        sum_squares=ss,
    )
    return out, trace


def sample_laplace(center, scale: float, rng: RngState, size=None):
    """I.i.d. Laplace(scale) noise per coordinate around center.

    Mean squared l2 error is 2 * dim * scale^2.
    """
    c = _check_center(center)
    scale = _check_scale(scale, "scale")
    n, scalar = _check_size(size)
    out = c[None, :] + rng.generator.laplace(0.0, scale, size=(n, c.size))
    return out[0] if scalar else out


def sample_gaussian(center, sigma: float, rng: RngState, size=None):
    """I.i.d. N(0, sigma^2) noise per coordinate around center.

    Mean squared l2 error is dim * sigma^2.
    """
    c = _check_center(center)
    sigma = _check_scale(sigma, "sigma")
    n, scalar = _check_size(size)
    out = c[None, :] + sigma * rng.generator.standard_normal((n, c.size))
    return out[0] if scalar else out


@dataclass(frozen=True)
class SampleBatch:
    """A batch of mechanism outputs plus the metadata to reproduce it."""

    dim: int
    count: int
    values: np.ndarray
    mechanism: str
    sigma: float
    seed: int

    def __post_init__(self):
        problems = []
        if not (isinstance(self.dim, (int, np.integer)) and self.dim >= 1):
            problems.append("dim must be an integer >= 1")
        if not (isinstance(self.count, (int, np.integer)) and self.count >= 1):
            problems.append("count must be an integer >= 1")
        vals = np.asarray(self.values)
        if vals.shape != (self.count, self.dim):
            problems.append(
                f"values must have shape (count, dim) = ({self.count}, {self.dim})"
            )
        elif not np.all(np.isfinite(vals)):
            problems.append("values must be finite")
        if problems:
            raise ValueError("; ".join(problems))

    def to_csv(self) -> str:
        """RFC-4180 CSV: header x0..x{dim-1}, one row per sample."""
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow([f"x{j}" for j in range(self.dim)])
        for row in np.asarray(self.values):
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        """JSON envelope with the draw metadata and the value matrix."""
        payload = {
            "dim": int(self.dim),
            "count": int(self.count),
            "mechanism": self.mechanism,
            "sigma": float(self.sigma),
            "seed": int(self.seed),
            "values": [[float(v) for v in row] for row in np.asarray(self.values)],
        }
        return json.dumps(payload, indent=2)


def draw_batch(
    mechanism: str,
    dim: int,
    sigma: float,
    count: int,
    seed: int,
    stream_id: int = 0,
    center=None,
) -> SampleBatch:
    """Draw a SampleBatch for one of the named mechanisms.

    The default center is the origin.  The batch records (seed,
    stream_id applies only to the draw) so a rerun reproduces the
    values bit for bit.
    """
    if center is None:
        if not (isinstance(dim, (int, np.integer)) and dim >= 1):
            raise ValueError("dim must be an integer >= 1")
        center = np.zeros(int(dim))
    c = _check_center(center)
    if c.size != dim:
        raise ValueError("center length must equal dim")
    rng = RngState(seed, stream_id)
    samplers = {
        "l2": sample_l2,
        "laplace": sample_laplace,
        "gaussian": sample_gaussian,
    }
    if mechanism not in samplers:
        raise ValueError(f"mechanism must be one of {sorted(samplers)}")
    values = samplers[mechanism](c, sigma, rng, size=count)
    return SampleBatch(
        dim=int(dim),
        count=int(count),
        values=values,
        mechanism=mechanism,
        sigma=float(sigma),
        seed=int(seed),
    )
