"""Statistical evidence that a single server learns nothing about A or theta.

The checks run the real encoders many times at a small prime and compare
empirical distributions: a chi-square test of share entries against the
uniform law (security), and a total-variation distance between the query
views produced under two different desired indices (privacy).  Negative
controls deliberately break the mask or skew the query so the tests can be
seen to fail.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .exponents import Variant, make_plan
from .field import Modulus, make_rng, sample_distinct_points
from .linalg import MatrixF, random_entries, random_matrix
from . import mds, replicated

DEFAULT_SAMPLES = 100_000
DEFAULT_Q = 101
SIGNIFICANCE = 0.01
TV_THRESHOLD = 0.02
COARSE_BINS = 10
# runs drawn per vectorized batch
_CHUNK = 10_000


@dataclass(frozen=True)
class AuditReport:
    test_name: str
    scheme: str
    sample_count: int
    statistic: float
    threshold: float
    passed: bool
    p_value: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _variant(scheme) -> Variant:
    return Variant.parse(scheme) if isinstance(scheme, str) else scheme


class _ServerView:
    """Draws what server ``server_index`` sees in many fresh protocol runs."""

    def __init__(self, scheme, A: MatrixF, theta: int, L: int, p: int, m: int, n: int,
                 server_index: int, rng: np.random.Generator, mask: bool = True,
                 skew: bool = False):
        self.variant = _variant(scheme)
        self.plan = make_plan(self.variant, p, m, n)
        self.A, self.theta, self.L = A, theta, L
        self.mod = A.modulus
        self.N = max(self.plan.recovery_threshold, server_index + 1, p * n)
        self.server_index = server_index
        self.rng = rng
        self.mask = mask
        self.skew = skew
        self.block = (A.rows // m, A.cols // p)
        if self.variant is not Variant.REPLICATED:
            # storage is placed once, before any query
            self.point = int(sample_distinct_points(self.N, rng, self.mod)[server_index])

    def _masks(self, runs: int) -> np.ndarray:
        if self.mask:
            return random_entries((runs,) + self.block, self.rng, self.mod)
        return np.zeros((runs,) + self.block, dtype=self.A.data.dtype)

    def _skewed(self, size) -> np.ndarray:
        # values confined to the low quarter of the field
        return self.rng.integers(1, max(2, self.mod.q // 4), size=size)

    def draw(self, runs: int) -> tuple[np.ndarray, np.ndarray]:
        """(query observations, share entries) for ``runs`` runs, one row per run."""
        i = self.server_index
        if self.variant is Variant.REPLICATED:
            queries, own = replicated.make_query_batch(self.theta, self.N, self.L, runs,
                                                       self.rng, self.mod)
            entries = queries[:, i, :].copy()
            if self.skew:
                others = [t for t in range(self.L) if t != self.theta]
                entries[:, others] = self._skewed((runs, len(others)))
            shares = replicated.encode_share_batch(self.A, self._masks(runs), self.plan, own[:, i])
            return entries, shares.reshape(runs, -1)
        shape = (runs, self.L - 1) + self.block
        if self.skew:
            decoys = self._skewed(shape).astype(self.A.data.dtype)
        else:
            decoys = random_entries(shape, self.rng, self.mod)
        points = np.full(runs, self.point, dtype=self.A.data.dtype)
        shares = replicated.encode_share_batch(self.A, self._masks(runs), self.plan, points)
        query = mds.layout_mds_query(shares, decoys, self.theta)
        return query.reshape(runs, -1), shares.reshape(runs, -1)

    def chunks(self, samples: int):
        done = 0
        while done < samples:
            runs = min(_CHUNK, samples - done)
            yield self.draw(runs)
            done += runs


def _default_A(q: int, seed: int, shape=(4, 4)) -> MatrixF:
    return random_matrix(*shape, make_rng(seed, "audit-input"), q)


def share_uniformity_test(scheme, A: Optional[MatrixF] = None, server_index: int = 0,
                          samples: int = DEFAULT_SAMPLES, q_small: int = DEFAULT_Q,
                          seed: int = 0, theta: int = 0, L: int = 2,
                          p: int = 2, m: int = 2, n: int = 1, mask: bool = True) -> AuditReport:
    """Chi-square test that every uploaded entry is uniform over F_q with A held fixed.

    For the replicated scheme the observation is the share f(a_i); for the
    MDS scheme it is the whole query tuple, decoys included.  Entries are
    pooled into one histogram since they are i.i.d. uniform under the null.
    ``mask=False`` zeroes the mask, the negative control.
    """
    mod = Modulus(q_small)
    if A is None:
        A = _default_A(mod.q, seed)
    view = _ServerView(scheme, A, theta, L, p, m, n, server_index,
                       make_rng(seed, "audit-share"), mask=mask)
    counts = np.zeros(mod.q, dtype=np.int64)
    variant = view.variant
    for query_obs, share in view.chunks(samples):
        obs = share if variant is Variant.REPLICATED else query_obs
        counts += np.bincount(obs.reshape(-1).astype(np.int64), minlength=mod.q)
    stat, pval = stats.chisquare(counts)
    name = "share_uniformity" if mask else "share_uniformity[no-mask]"
    return AuditReport(name, variant.value, samples, float(stat), SIGNIFICANCE,
                       bool(pval > SIGNIFICANCE), float(pval))


def _coarse_histogram(view: _ServerView, samples: int, bins: int) -> np.ndarray:
    q = view.mod.q
    hist = None
    for query_obs, share in view.chunks(samples):
        obs = np.concatenate([query_obs, share], axis=1).astype(np.int64)
        width = obs.shape[1]
        if hist is None:
            hist = np.zeros(width * bins, dtype=np.int64)
        cells = np.arange(width) * bins + obs * bins // q
        hist += np.bincount(cells.reshape(-1), minlength=width * bins)
    return hist


def query_indistinguishability_test(scheme, theta_a: int = 0, theta_b: int = 1,
                                    samples: int = DEFAULT_SAMPLES, q_small: int = DEFAULT_Q,
                                    seed: int = 0, A: Optional[MatrixF] = None,
                                    server_index: int = 0, L: int = 2,
                                    p: int = 2, m: int = 2, n: int = 1, bins: int = COARSE_BINS,
                                    threshold: float = TV_THRESHOLD,
                                    skew: bool = False) -> AuditReport:
    """Total-variation distance between one server's views under two indices.

    The view is the query together with the share, each coordinate cut into
    ``bins`` coarse buckets; the statistic is the TV distance between the two
    (coordinate, bucket) histograms.  A full joint histogram of the view is
    far too sparse to populate, so only these marginals are compared.
    ``skew=True`` draws the non-desired coordinates from a biased law, the
    negative control.
    """
    if theta_a == theta_b:
        raise ValueError("the two indices must differ")
    if not (0 <= theta_a < L and 0 <= theta_b < L):
        raise ValueError(f"indices must lie in [0, {L})")
    mod = Modulus(q_small)
    if A is None:
        A = _default_A(mod.q, seed)
    hists = []
    for label, theta in (("a", theta_a), ("b", theta_b)):
        view = _ServerView(scheme, A, theta, L, p, m, n, server_index,
                           make_rng(seed, f"audit-query-{label}"), skew=skew)
        hists.append(_coarse_histogram(view, samples, bins))
    pa, pb = (h / h.sum() for h in hists)
    tv = 0.5 * float(np.abs(pa - pb).sum())
    name = "query_indistinguishability" + ("[skewed]" if skew else "")
    return AuditReport(name, _variant(scheme).value, samples, tv, threshold, tv < threshold)
