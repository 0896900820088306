"""Flat ``key = value`` experiment configuration.

Grammar: one assignment per line, ``#`` starts a comment, blank lines are
ignored. Channel parameters use the ``channel.`` prefix; lists are comma
separated.

Keys (defaults in brackets):

    channel.n_tx, channel.n_rx, channel.alpha, channel.power, channel.sigma2   required
    channel.gain_cov     identity | scaled:<c> | file:<path>   [identity]
    seed                 unsigned 64-bit master seed            required
    subcommand           capacity|optimize|infodensity|bounds|coding|lemmas
    samples              Monte Carlo draws for capacity estimates [100000]
    trials               blocks per information-density experiment [2000]
    threads              worker threads or "auto"     [$GMFADING_THREADS or 1]
    out_dir              directory for CSV output                [.]
    draws                sample-average pool size for optimize   [4096]
    max_iters            optimizer iteration cap                 [500]
    tol                  optimizer step tolerance           [1e-6 * power]
    n_list               block lengths for infodensity     [64,128,256,512]
    alphas               memory factors for infodensity  [channel.alpha]
    lags                 lags for the covariance decay fit       [1,2,3,4,5,6]
    lag_trials           trials for the lag covariance           [100000]
    rates                coding rates in bits per channel use    [0.4,1.6]
    coding_n             coding block length                     [128]
    coding_trials        coding trials per rate                  [500]
    coding_mode          auto|explicit|ensemble                  [auto]
    gamma                threshold margin in bits, or auto       [auto]
    rhos                 tail-bound trace levels                 [0.5,1,2]
    deltas               tail-bound excess levels                [0.5,1]
    bound_n              tail-bound block lengths                [1,5,10]
    bound_trials         trials per tail-bound grid point        [100000]
    lemma_trials         randomised trials per matrix lemma      [1000]
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelParams
from .errors import GMFadingError, ParseError, ValidationError
from .rng import resolve_threads

SUBCOMMANDS = ("capacity", "optimize", "infodensity", "bounds", "coding", "lemmas")

_CHANNEL_KEYS = ("n_tx", "n_rx", "alpha", "power", "sigma2", "gain_cov")
_INT_KEYS = ("samples", "trials", "draws", "max_iters", "lag_trials", "coding_n",
             "coding_trials", "bound_trials", "lemma_trials")
_INT_LIST_KEYS = ("n_list", "lags", "bound_n")
_FLOAT_LIST_KEYS = ("alphas", "rates", "rhos", "deltas")
_OTHER_KEYS = ("seed", "subcommand", "threads", "out_dir", "tol", "coding_mode", "gamma")
KNOWN_KEYS = (
    {f"channel.{k}" for k in _CHANNEL_KEYS}
    | set(_INT_KEYS) | set(_INT_LIST_KEYS) | set(_FLOAT_LIST_KEYS) | set(_OTHER_KEYS)
)


@dataclass
class ExperimentConfig:
    channel: ChannelParams
    seed: int
    subcommand: str | None = None
    samples: int = 100_000
    trials: int = 2000
    threads: int = 1
    out_dir: Path = Path(".")
    draws: int = 4096
    max_iters: int = 500
    tol: float | None = None
    n_list: list = field(default_factory=lambda: [64, 128, 256, 512])
    alphas: list | None = None
    lags: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    lag_trials: int = 100_000
    rates: list = field(default_factory=lambda: [0.4, 1.6])
    coding_n: int = 128
    coding_trials: int = 500
    coding_mode: str = "auto"
    gamma: float | None = None
    rhos: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    deltas: list = field(default_factory=lambda: [0.5, 1.0])
    bound_n: list = field(default_factory=lambda: [1, 5, 10])
    bound_trials: int = 100_000
    lemma_trials: int = 1000


def _tokenize(text: str) -> dict:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError("missing key", line=lineno)
        if key not in KNOWN_KEYS:
            raise ParseError("unknown key", line=lineno, key=key)
        if key in entries:
            raise ParseError("duplicate key", line=lineno, key=key)
        entries[key] = (value, lineno)
    return entries


def load_gain_cov(spec: str, dim: int, base_dir: Path) -> np.ndarray:
    """Resolve ``identity``, ``scaled:<c>`` or ``file:<path>``.

    Files hold ``dim`` rows of ``2 * dim`` numbers, interleaved real and
    imaginary parts.
    """
    spec = spec.strip()
    if spec == "identity":
        return np.eye(dim, dtype=np.complex128)
    if spec.startswith("scaled:"):
        c = float(spec[len("scaled:"):])
        if c < 0:
            raise ValueError("scaled gain covariance needs c >= 0")
        return c * np.eye(dim, dtype=np.complex128)
    if spec.startswith("file:"):
        path = Path(spec[len("file:"):])
        if not path.is_absolute():
            path = base_dir / path
        raw = np.loadtxt(path, ndmin=2)
        if raw.shape != (dim, 2 * dim):
            raise ValueError(f"{path}: expected {dim}x{2 * dim} numbers, got {raw.shape}")
        return raw[:, 0::2] + 1j * raw[:, 1::2]
    raise ValueError(f"gain_cov must be identity, scaled:<c> or file:<path>, got {spec!r}")


def parse_config(text: str, base_dir=None) -> ExperimentConfig:
    """Parse and validate; every violated invariant is reported together."""
    entries = _tokenize(text)
    base_dir = Path(base_dir) if base_dir is not None else Path(".")
    problems = []
    values = {}

    def convert(key, fn, what):
        value, lineno = entries[key]
        try:
            values[key] = fn(value)
        except (ValueError, TypeError):
            problems.append(f"line {lineno}: {key} must be {what}, got {value!r}")

    def parse_list(cast):
        return lambda v: [cast(x) for x in v.split(",") if x.strip()]

    for key in ("channel.n_tx", "channel.n_rx"):
        if key in entries:
            convert(key, int, "an integer")
    for key in ("channel.alpha", "channel.power", "channel.sigma2"):
        if key in entries:
            convert(key, float, "a number")
    if "seed" in entries:
        convert("seed", int, "an integer")
    for key in _INT_KEYS:
        if key in entries:
            convert(key, int, "an integer")
    for key in _INT_LIST_KEYS:
        if key in entries:
            convert(key, parse_list(int), "a comma-separated list of integers")
    for key in _FLOAT_LIST_KEYS:
        if key in entries:
            convert(key, parse_list(float), "a comma-separated list of numbers")
    if "tol" in entries:
        convert("tol", float, "a number")
    if "gamma" in entries:
        convert("gamma", lambda v: None if v == "auto" else float(v), "a number or auto")
    for key in ("subcommand", "out_dir", "coding_mode", "channel.gain_cov"):
        if key in entries:
            values[key] = entries[key][0]
    if "threads" in entries:
        convert("threads", resolve_threads, "a positive integer or auto")

    for key in ("channel.n_tx", "channel.n_rx", "channel.alpha", "channel.power",
                "channel.sigma2", "seed"):
        if key not in entries:
            problems.append(f"missing required key {key}")

    n_tx = values.get("channel.n_tx")
    n_rx = values.get("channel.n_rx")
    for key, v in (("channel.n_tx", n_tx), ("channel.n_rx", n_rx)):
        if v is not None and v < 1:
            problems.append(f"{key} must be >= 1")
    alpha = values.get("channel.alpha")
    if alpha is not None and not 0.0 <= alpha < 1.0:
        problems.append(f"channel.alpha = {alpha} violates 0 ≤ α < 1")
    for a in values.get("alphas") or []:
        if not 0.0 <= a < 1.0:
            problems.append(f"alphas entry {a} violates 0 ≤ α < 1")
    if values.get("channel.sigma2") is not None and not values["channel.sigma2"] > 0:
        problems.append("channel.sigma2 must be > 0")
    if values.get("channel.power") is not None and not values["channel.power"] >= 0:
        problems.append("channel.power must be >= 0")
    seed = values.get("seed")
    if seed is not None and not 0 <= seed < 2 ** 64:
        problems.append("seed must be an unsigned 64-bit integer")
    for key in _INT_KEYS:
        if values.get(key) is not None and values[key] < 1:
            problems.append(f"{key} must be >= 1")
    for key in ("n_list", "bound_n"):
        if key in values and (not values[key] or min(values[key]) < 1):
            problems.append(f"{key} entries must be >= 1")
    if "lags" in values and (not values["lags"] or min(values["lags"]) < 0):
        problems.append("lags entries must be >= 0")
    for key in ("rhos", "deltas"):
        if key in values and (not values[key] or min(values[key]) <= 0):
            problems.append(f"{key} entries must be > 0")
    if "rates" in values and (not values["rates"] or min(values["rates"]) < 0):
        problems.append("rates entries must be >= 0")
    sub = values.get("subcommand")
    if sub is not None and sub not in SUBCOMMANDS:
        problems.append(f"subcommand must be one of {', '.join(SUBCOMMANDS)}")
    if values.get("coding_mode", "auto") not in ("auto", "explicit", "ensemble"):
        problems.append("coding_mode must be auto, explicit or ensemble")
    out_dir = Path(values.get("out_dir", "."))
    if not out_dir.is_absolute():
        out_dir = base_dir / out_dir
    probe = out_dir if out_dir.exists() else out_dir.parent
    if probe.exists() and not os.access(probe, os.W_OK):
        problems.append(f"out_dir {out_dir} is not writable")

    gain_cov = None
    if n_tx and n_rx and n_tx >= 1 and n_rx >= 1:
        try:
            gain_cov = load_gain_cov(values.get("channel.gain_cov", "identity"), n_tx * n_rx, base_dir)
        except (OSError, ValueError) as exc:
            problems.append(f"channel.gain_cov: {exc}")

    channel = None
    if not problems:
        try:
            channel = ChannelParams(n_tx, n_rx, values["channel.sigma2"], values["channel.power"],
                                    alpha, gain_cov)
        except (GMFadingError, ValueError) as exc:
            problems.append(f"channel: {exc}")
    if problems:
        raise ValidationError(problems)

    cfg = ExperimentConfig(channel=channel, seed=seed, subcommand=sub, out_dir=out_dir,
                           threads=values.get("threads", resolve_threads(None)))
    for key in _INT_KEYS + _INT_LIST_KEYS + _FLOAT_LIST_KEYS + ("tol", "gamma", "coding_mode"):
        if key in values:
            setattr(cfg, key, values[key])
    if cfg.alphas is None:
        cfg.alphas = [channel.alpha]
    return cfg
