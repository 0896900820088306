"""Chernoff power-tail bound and the auxiliary matrix and geometric-sum inequalities,
each paired with a randomised or exhaustive empirical check."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams
from .linalg import cholesky_psd, complex_normal, hermitian, operator_norm, random_hermitian, random_pd
from .rng import as_seed, run_chunks, substream

TAIL_CHUNK = 16384
_TAG_TAIL = 31
_TAG_LEMMA = 32


@dataclass(frozen=True)
class TailBoundReport:
    rho: float
    delta: float
    n: int
    bound: float
    empirical: float
    trials: int
    seed: int

    @property
    def stderr(self) -> float:
        p = self.empirical
        return float(np.sqrt(max(p * (1 - p), 0.0) / self.trials))

    @property
    def holds(self) -> bool:
        # binomial noise allowance matters only when the estimate sits at the bound
        return self.empirical <= self.bound + 3.0 * self.stderr


def power_tail_bound(rho: float, delta: float, n: int) -> float:
    """((1 + delta/rho) * 2**(-delta / (ln2 * rho)))**n."""
    if not rho > 0 or not delta > 0 or n < 1:
        raise InvalidParams("need rho > 0, delta > 0, n >= 1")
    r = delta / rho
    # 2**(-r / ln 2) == exp(-r)
    return float(np.exp(n * (np.log1p(r) - r)))


def power_tail_empirical(cov, n: int, delta: float, trials: int, rng=None,
                         rho: float | None = None, threads=None) -> TailBoundReport:
    """Estimate P[sum_i ||X_i||^2 >= n (rho + delta)] for X_i ~ CN(0, cov)."""
    cov = hermitian(np.atleast_2d(cov))
    L = cholesky_psd(cov)
    tr = float(np.trace(cov).real)
    if rho is None:
        rho = tr
    if not rho > 0:
        raise InvalidParams("rho must be > 0 (pass it explicitly when tr(cov) = 0)")
    if tr > rho * (1 + 1e-12):
        raise InvalidParams(f"tr(cov) = {tr:.6g} exceeds rho = {rho:.6g}")
    if trials < 1:
        raise InvalidParams("trials must be >= 1")
    seed = as_seed(rng)
    level = n * (rho + delta)
    d = L.shape[0]

    def chunk(r, size):
        X = complex_normal(r, (size, n, d)) @ L.T
        energy = np.sum(X.real ** 2 + X.imag ** 2, axis=(1, 2))
        return energy >= level

    hits = run_chunks(chunk, trials, TAIL_CHUNK, seed, _TAG_TAIL, threads)
    return TailBoundReport(
        rho=float(rho),
        delta=float(delta),
        n=int(n),
        bound=power_tail_bound(rho, delta, n),
        empirical=float(np.count_nonzero(hits) / trials),
        trials=int(trials),
        seed=seed,
    )


def norm_domination_margin(A) -> float:
    """lambda_min(||A|| I - A); non-negative for every Hermitian A."""
    A = hermitian(A)
    return float(np.linalg.eigvalsh(operator_norm(A) * np.eye(A.shape[0]) - A)[0])


def logdet_split_margin(A, B) -> float:
    """RHS minus LHS of log det(A+B) <= log det A + log det(I + B / lambda_min(A))."""
    A = hermitian(A)
    B = hermitian(B)
    lam_min = np.linalg.eigvalsh(A)[0]
    if not lam_min > 0:
        raise InvalidParams("A must be positive definite")
    lhs = np.linalg.slogdet(A + B)[1]
    rhs = np.linalg.slogdet(A)[1] + np.linalg.slogdet(np.eye(A.shape[0]) + B / lam_min)[1]
    return float((rhs - lhs) / np.log(2.0))


@dataclass
class LemmaReport:
    name: str
    trials: int
    violations: int
    worst_margin: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass
class MatrixLemmaReport:
    lemmas: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.lemmas)


def check_matrix_lemmas(trials: int, rng=None, dims=(2, 6)) -> MatrixLemmaReport:
    """Randomised trials of the norm-domination and log-det splitting inequalities."""
    if trials < 1:
        raise InvalidParams("trials must be >= 1")
    r = substream(as_seed(rng), _TAG_LEMMA)
    lo, hi = dims
    norm_margins = []
    split_margins = []
    for _ in range(trials):
        d = int(r.integers(lo, hi + 1))
        norm_margins.append(norm_domination_margin(random_hermitian(r, d)))
        A = random_pd(r, d)
        M = complex_normal(r, (d, int(r.integers(1, d + 1))))
        split_margins.append(logdet_split_margin(A, M @ M.conj().T))
    reports = []
    for name, margins, tol in (
        ("norm_domination", norm_margins, 1e-10),
        ("logdet_split", split_margins, 1e-9),
    ):
        m = np.asarray(margins)
        reports.append(LemmaReport(name, trials, int(np.count_nonzero(m < -tol)), float(m.min()), tol))
    return MatrixLemmaReport(reports)


def geometric_sums_direct(alpha: float, n: int) -> tuple[float, float]:
    lower = 0.0
    upper = 0.0
    for i in range(1, n + 1):
        for k in range(1, i):
            lower += alpha ** (i - k)
        for k in range(i + 1, n + 1):
            upper += alpha ** (k - i)
    return lower, upper


def geometric_sum_closed_form(alpha: float, n: int) -> float:
    return n * alpha / (1 - alpha) - alpha * (1 - alpha ** n) / (1 - alpha) ** 2


def geometric_sum_bounds(alpha: float, n: int) -> tuple[float, float, float]:
    """(sum_{k<i} alpha^(i-k), sum_{k>i} alpha^(k-i), n / (1 - alpha))."""
    if not 0 < alpha < 1:
        raise InvalidParams("alpha must lie in (0, 1)")
    if n < 1:
        raise InvalidParams("n must be >= 1")
    lower, upper = geometric_sums_direct(alpha, n)
    bound = n / (1 - alpha)
    if lower > bound or upper > bound:
        raise AssertionError(f"geometric sum exceeds n/(1-alpha) at alpha={alpha}, n={n}")
    return lower, upper, bound
