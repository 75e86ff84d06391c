"""End-to-end experiments with simulated servers, stragglers and cost accounting."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

from .errors import ConfigInvalid
from .exponents import ExponentPlan, Variant, make_plan
from .field import MERSENNE_61, Modulus, make_rng, sample_distinct_points
from .linalg import MatrixF, random_matrix
from . import mds, replicated


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: Variant = Variant.REPLICATED
    t: int = 4
    s: int = 4
    r: int = 4
    p: int = 2
    m: int = 2
    n: int = 2
    L: int = 2
    N: int = 16
    theta: int = 0
    stragglers: int = 0
    q: int = MERSENNE_61
    seed: int = 0
    # optional separate seed for who straggles; defaults to ``seed``
    straggler_seed: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.scheme, str):
            object.__setattr__(self, "scheme", Variant.parse(self.scheme))

    def plan(self) -> ExponentPlan:
        return make_plan(self.scheme, self.p, self.m, self.n)

    def validate(self) -> ExponentPlan:
        """Check the config invariants and return its exponent plan."""
        dims = (self.t, self.s, self.r, self.p, self.m, self.n, self.L, self.N)
        if min(dims) < 1:
            raise ConfigInvalid(f"dimensions and counts must be positive: {dims}")
        if self.t % self.m or self.s % self.p or self.r % self.n:
            raise ConfigInvalid(f"need m | t, p | s, n | r; got t={self.t} m={self.m}, "
                                f"s={self.s} p={self.p}, r={self.r} n={self.n}")
        if self.L < 2:
            raise ConfigInvalid("library must hold at least two matrices")
        if not 0 <= self.theta < self.L:
            raise ConfigInvalid(f"theta={self.theta} outside [0, {self.L})")
        if self.stragglers < 0:
            raise ConfigInvalid("stragglers must be non-negative")
        try:
            Modulus(self.q)
        except ValueError as exc:
            raise ConfigInvalid(str(exc)) from None
        plan = self.plan()
        rc = plan.recovery_threshold
        if self.N - self.stragglers < rc:
            raise ConfigInvalid(f"N - stragglers = {self.N - self.stragglers} < R_c = {rc}")
        if self.scheme is not Variant.REPLICATED and self.N < self.p * self.n:
            raise ConfigInvalid(f"N={self.N} < pn={self.p * self.n}")
        points_needed = self.N + (self.L - 1 if self.scheme is Variant.REPLICATED else 0)
        if self.q - 1 < points_needed:
            raise ConfigInvalid(f"field mod {self.q} has too few nonzero points for {points_needed}")
        return plan

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scheme"] = self.scheme.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class CostReport:
    """Communication and storage, counted in field elements."""

    upload: int
    download: int
    storage_per_server: int
    recovery_threshold: int
    servers_used: int
    upload_broadcast: Optional[int] = None

    def to_dict(self) -> dict:
        return asdict(self)


def closed_form_costs(config: ExperimentConfig) -> CostReport:
    c = config
    rc = c.plan().recovery_threshold
    share = c.t * c.s // (c.m * c.p)
    download = rc * c.t * c.r // (c.m * c.n)
    if c.scheme is Variant.REPLICATED:
        return CostReport(c.N * share, download, c.L * c.s * c.r, rc, rc)
    return CostReport(c.L * c.N * share, download, c.L * c.s * c.r // (c.p * c.n), rc, rc,
                      upload_broadcast=(c.N + c.L - 1) * share)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    decoded: MatrixF
    expected: MatrixF
    match: bool
    costs: CostReport
    dropped_servers: list[int]
    responders: list[int] = field(default_factory=list)
    transcript: dict = field(default_factory=dict)

    def to_dict(self, include_matrices: bool = True, include_transcript: bool = False) -> dict:
        d = {
            "config": self.config.to_dict(),
            "match": self.match,
            "costs": self.costs.to_dict(),
            "dropped_servers": self.dropped_servers,
            "responders": self.responders,
        }
        if include_matrices:
            d["decoded"] = self.decoded.tolist()
        if include_transcript:
            d["transcript"] = self.transcript
        return d

    def to_json(self, include_matrices: bool = True, include_transcript: bool = False) -> str:
        return json.dumps(self.to_dict(include_matrices, include_transcript), sort_keys=True)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the full protocol once and compare against the direct product.

    Randomness comes from named sub-streams of ``config.seed``, so the result
    is a pure function of the config.  Straggling servers are a uniformly
    random subset; the rest answer in a random order and the decoder takes
    the earliest R_c answers.
    """
    plan = config.validate()
    mod = Modulus(config.q)
    seed = config.seed
    A = random_matrix(config.t, config.s, make_rng(seed, "input"), mod)
    lib_rng = make_rng(seed, "library")
    library = [random_matrix(config.s, config.r, lib_rng, mod) for _ in range(config.L)]

    straggler_seed = seed if config.straggler_seed is None else config.straggler_seed
    order = make_rng(straggler_seed, "stragglers").permutation(config.N).tolist()
    arrived = order[:config.N - config.stragglers]
    dropped = sorted(order[config.N - config.stragglers:])
    rc = plan.recovery_threshold
    block = (config.t // config.m, config.s // config.p)

    if config.scheme is Variant.REPLICATED:
        queries, points = replicated.make_queries(config.theta, config.N, config.L,
                                                  make_rng(seed, "points"), mod)
        Z = random_matrix(*block, make_rng(seed, "mask"), mod)
        shares = [replicated.encode_share(A, Z, plan, a) for a in points]
        responses = [
            replicated.ServerResponse(
                i, points[i],
                replicated.server_compute(shares[i],
                                          replicated.server_encode_library(library, queries[i], plan)))
            for i in arrived
        ]
        decoded = replicated.decode(responses, plan)
        upload = sum(s.size for s in shares)
        storage = sum(B.size for B in library)
        broadcast = None
        transcript = {"points": [int(a) for a in points],
                      "queries": [[int(a) for a in qry.entries] for qry in queries]}
    else:
        points = sample_distinct_points(config.N, make_rng(seed, "storage"), mod)
        stores = mds.encode_storage(library, plan, points)
        queries = mds.make_mds_queries(A, config.theta, config.L, plan, points,
                                       make_rng(seed, "mask"))
        responses = [
            replicated.ServerResponse(i, points[i], mds.mds_server_compute(stores[i], queries[i]))
            for i in arrived
        ]
        decoded = mds.mds_decode(responses, plan)
        upload = sum(qry.element_count for qry in queries)
        storage = max(s.element_count for s in stores)
        # decoys go out once; only the share position differs per server
        theta = config.theta
        decoy_size = sum(e.size for j, e in enumerate(queries[0].entries) if j != theta)
        broadcast = sum(qry[theta].size for qry in queries) + decoy_size
        transcript = {"points": [int(a) for a in points],
                      "storage": mds.storage_manifest(stores),
                      "query_shapes": [list(e.shape) for e in queries[0].entries]}

    used = responses[:rc]
    costs = CostReport(
        upload=upload,
        download=sum(r.y.size for r in used),
        storage_per_server=storage,
        recovery_threshold=rc,
        servers_used=len(used),
        upload_broadcast=broadcast,
    )
    transcript["response_shapes"] = {str(r.server_id): list(r.y.shape) for r in responses}
    transcript["arrival_order"] = arrived
    transcript["costs"] = costs.to_dict()
    expected = A @ library[config.theta]
    return ExperimentResult(config, decoded, expected, decoded == expected, costs, dropped,
                            [r.server_id for r in used], transcript)


TRADEOFF_HEADER = ["scheme", "p", "m", "n", "L", "norm_upload", "norm_download"]


def chang_tandon_costs(m: int, rc: int, L: int) -> tuple[float, float]:
    """Normalized (upload, download) of the Chang-Tandon baseline."""
    ratio = (m + 1) / rc
    return rc / m, (m + 1) / m * sum(ratio ** i for i in range(L))


def tradeoff_curve(scheme: str, L: int, grid: Iterable[tuple[int, ...]]) -> list[dict]:
    """Normalized upload/download points with N = R_c.

    ``grid`` holds (p, m, n) triples for the coded schemes and (m, R_c) pairs
    for ``chang-tandon``.  Uploads are normalized by |A| and downloads by
    |A B|.
    """
    rows = []
    key = scheme.strip().lower()
    for point in grid:
        if key == "chang-tandon":
            m, rc = point
            up, down = chang_tandon_costs(m, rc, L)
            rows.append(dict(scheme=key, p=1, m=m, n=1, L=L, norm_upload=up, norm_download=down))
            continue
        variant = Variant.REPLICATED if key in ("new", "replicated") else Variant.parse(key)
        p, m, n = point
        rc = make_plan(variant, p, m, n).recovery_threshold
        per_server = 1 if variant is Variant.REPLICATED else L
        rows.append(dict(scheme=variant.value, p=p, m=m, n=n, L=L,
                         norm_upload=per_server * rc / (m * p), norm_download=rc / (m * n)))
    return rows


def tradeoff_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TRADEOFF_HEADER, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
