"""Seeded instance generators and inequality-verification suites.

Each trial draws its own random stream from ``(seed, suite, trial index)``,
so a suite's reports do not depend on execution order or worker count, and
any single trial can be regenerated (or replayed from its serialized
instance) in isolation.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Callable

from . import documents as docs
from ._numbers import INF, fmt, parse
from .metric import (
    FiniteMetricMeasureSpace,
    c_star,
    c_star_probe,
    cz_decompose,
    distinct_balls,
    verify_cz,
)
from .oscillation import (
    bmo_discrete,
    bmo_interval_enclosure,
    bmo_monotone_interval,
    bmo_step_exact,
    mean_interval,
    oscillation,
    oscillation_interval,
)
from .rearrange import (
    MassDistribution,
    MeasureSpace,
    StepFunction1D,
    WeightedFunction,
    decreasing_rearrangement,
    pointwise_compare,
    step_eval,
)
from .transforms import absolute_value, compose, inner_truncation, outer_truncation

__all__ = [
    "GeneratorConfig",
    "TrialReport",
    "SUITES",
    "run_suite",
    "replay",
    "trial_rng",
    "verify_hardy_littlewood",
    "verify_klemes_korenovskii",
    "verify_main_theorem",
    "verify_lemma_osc",
    "verify_lem_pm",
    "verify_truncation_and_limits",
    "extremal_search",
]


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    max_atoms: int = 32
    max_pieces: int = 8
    max_points: int = 12
    value_lo: int = -4
    value_hi: int = 4
    weight_hi: int = 4
    max_denominator: int = 64
    metric: str = "grid"  # grid | tree
    grid_extent: int = 4
    grid_dims: int = 2
    kk_tol: str = "1/1000"
    kk_budget: int = 2000

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrialReport:
    suite: str
    seed: int
    trial: int
    status: str  # pass | fail | inconclusive
    lhs: str
    rhs: str
    instance: dict
    witness: dict | None = None
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrialReport":
        return cls(**d)


def trial_rng(seed: int, suite: str, trial: int) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{suite}:{trial}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


# -- generators --------------------------------------------------------------

def rand_rational(rng: random.Random, lo, hi, max_den: int) -> Fraction:
    q = rng.randint(1, max_den)
    return Fraction(rng.randint(math.ceil(lo * q), math.floor(hi * q)), q)


def rand_positive(rng: random.Random, hi, max_den: int) -> Fraction:
    q = rng.randint(1, max_den)
    return Fraction(rng.randint(1, hi * q), q)


def _values(rng, cfg: GeneratorConfig, n: int, lo=None, hi=None) -> list:
    lo = cfg.value_lo if lo is None else lo
    hi = cfg.value_hi if hi is None else hi
    # a small pool makes repeated values (and hence merging) common
    pool = [rand_rational(rng, lo, hi, cfg.max_denominator) for _ in range(max(1, n // 2 + 1))]
    return [rng.choice(pool) if rng.random() < 0.3 else rand_rational(rng, lo, hi, cfg.max_denominator)
            for _ in range(n)]


def gen_weighted(rng, cfg: GeneratorConfig, nonneg: bool = False, space: MeasureSpace | None = None) -> WeightedFunction:
    if space is None:
        n = rng.randint(1, cfg.max_atoms)
        space = MeasureSpace(tuple(f"a{i}" for i in range(n)),
                             tuple(rand_positive(rng, cfg.weight_hi, cfg.max_denominator) for _ in range(n)))
    vals = _values(rng, cfg, len(space), 0 if nonneg else None)
    return WeightedFunction(space, tuple(vals))


def gen_mass(rng, cfg: GeneratorConfig, tail=None) -> MassDistribution:
    n = rng.randint(1, cfg.max_atoms)
    vals = _values(rng, cfg, n)
    pairs = [(v, rand_positive(rng, cfg.weight_hi, cfg.max_denominator)) for v in vals]
    if tail is not None:
        pairs.append((tail, INF))
    return MassDistribution(tuple(pairs))


def gen_step(rng, cfg: GeneratorConfig, monotone: str | None = None, nonneg: bool = False) -> StepFunction1D:
    """Step function on (0, 1) with at most ``max_pieces`` pieces."""
    n = rng.randint(1, cfg.max_pieces)
    raw = [Fraction(rng.randint(1, cfg.max_denominator)) for _ in range(n)]
    total = sum(raw)
    vals = _values(rng, cfg, n, 0 if nonneg else None)
    if monotone == "decreasing":
        vals.sort(reverse=True)
    elif monotone == "increasing":
        vals.sort()
    return StepFunction1D.interval(tuple((l / total, v) for l, v in zip(raw, vals)))


def gen_metric_space(rng, cfg: GeneratorConfig) -> FiniteMetricMeasureSpace:
    n = rng.randint(1, cfg.max_points)
    ids = tuple(f"p{i}" for i in range(n))
    weights = tuple(rand_positive(rng, cfg.weight_hi, cfg.max_denominator) for _ in range(n))
    if cfg.metric == "grid":
        side = cfg.grid_extent + 1
        if n > side ** cfg.grid_dims:
            raise ValueError("grid too small for the requested number of points")
        cells = rng.sample(range(side ** cfg.grid_dims), n)
        pts = [tuple((c // side ** k) % side for k in range(cfg.grid_dims)) for c in cells]
        dist = tuple(tuple(Fraction(max(abs(a - b) for a, b in zip(p, q))) for q in pts) for p in pts)
    elif cfg.metric == "tree":
        parent = [None] + [rng.randrange(i) for i in range(1, n)]
        edge = [None] + [rand_positive(rng, 4, 8) for _ in range(1, n)]
        depth = [Fraction(0)] * n
        anc = [[0]] + [None] * (n - 1)
        for i in range(1, n):
            depth[i] = depth[parent[i]] + edge[i]
            anc[i] = anc[parent[i]] + [i]
        def d(i, j):
            common = [a for a, b in zip(anc[i], anc[j]) if a == b][-1]
            return depth[i] + depth[j] - 2 * depth[common]
        dist = tuple(tuple(d(i, j) for j in range(n)) for i in range(n))
    else:
        raise ValueError(f"unknown metric family {cfg.metric!r}")
    return FiniteMetricMeasureSpace(ids, weights, dist)


def _rand_subset(rng, ids) -> list:
    k = rng.randint(1, len(ids))
    return sorted(rng.sample(list(ids), k))


def _rand_point(rng, total: Fraction, max_den: int) -> Fraction:
    """Rational strictly inside (0, total)."""
    q = rng.randint(2, max_den)
    return total * Fraction(rng.randint(1, q - 1), q)


# -- suites ------------------------------------------------------------------

@dataclass(frozen=True)
class Suite:
    name: str
    generate: Callable
    check: Callable
    encode: Callable
    decode: Callable
    trials: int


def _hl_generate(rng, cfg):
    f = gen_weighted(rng, cfg)
    return f, _rand_subset(rng, f.space.ids)


def _hl_check(inst, cfg):
    f, A = inst
    star = decreasing_rearrangement(f)
    muA = f.space.measure(A)
    lhs = star.integral(0, muA)
    rhs = sum((f.space.weights[i] * abs(f.values[i]) for i in f.space.indices(A)), Fraction(0))
    return lhs, rhs, "pass" if lhs >= rhs else "fail", None


def _trunc_generate(rng, cfg):
    f = gen_weighted(rng, cfg)
    return f, [_rand_subset(rng, f.space.ids) for _ in range(3)]


def _trunc_check(inst, cfg):
    f, sets = inst
    failed = []
    star = decreasing_rearrangement(f)
    top = max(abs(v) for v in f.values)
    K = max(1, math.ceil(top))
    worst = None  # max of Omega(phi o f, A) - Omega(f, A) over maps and sets
    prev = None
    omegas = {}
    mu = f.space.total
    probes = [mu * Fraction(j, 7) for j in range(1, 7)]
    for k in range(1, K + 1):
        inner, outer = inner_truncation(k), outer_truncation(k)
        fk, gk = compose(inner, f), compose(outer, f)
        if decreasing_rearrangement(fk) != compose(inner, star):
            failed.append(f"inner_commutes[k={k}]")
        if decreasing_rearrangement(gk) != compose(outer, star):
            failed.append(f"outer_commutes[k={k}]")
        if tuple(a + b for a, b in zip(fk.values, gk.values)) != f.values:
            failed.append(f"decomposition[k={k}]")
        for A in sets:
            base = oscillation(f, A)
            for name, h in (("inner", fk), ("outer", gk)):
                diff = oscillation(h, A) - base
                worst = diff if worst is None else max(worst, diff)
                if diff > 0:
                    failed.append(f"{name}_contracts[k={k}]")
        fk_star = decreasing_rearrangement(fk)
        if prev is not None and not pointwise_compare(fk_star, prev)[0]:
            failed.append(f"monotone_in_k[k={k}]")
        prev = fk_star
        for t in probes:
            osc = oscillation_interval(fk_star, 0, t)
            omegas[(k, t)] = osc
            # the value at t/2 is a median of the decreasing function on (0, t)
            if mean_interval(fk_star, 0, t) - step_eval(fk_star, t / 2) > osc:
                failed.append(f"median_bound[k={k}]")
    if compose(inner_truncation(K), f) != f:
        failed.append("final_truncation_recovers_f")
    for t in probes:
        if oscillation_interval(star, 0, t) > max(omegas[(k, t)] for k in range(1, K + 1)):
            failed.append("monotone_limit")
    for A in sets:
        if oscillation(compose(absolute_value(), f), A) > 2 * oscillation(f, A):
            failed.append("absolute_value_factor_2")
    # flip identity for nonnegative bounded functions: Omega(f*, (t, mu)) = Omega((b - f)*, (0, mu - t))
    g = f.map(abs)
    beta = max(g.values)
    gs, flipped = decreasing_rearrangement(g), decreasing_rearrangement(g.map(lambda v: beta - v))
    for t in probes:
        if oscillation_interval(gs, t, mu) != oscillation_interval(flipped, 0, mu - t):
            failed.append("flip_identity")
    return worst, Fraction(0), "fail" if failed else "pass", ({"failed": sorted(set(failed))} if failed else None)


def _kk_generate(rng, cfg):
    kind = rng.randrange(5)
    if kind == 0:
        return gen_step(rng, cfg, rng.choice(["decreasing", "increasing"]), nonneg=True), True
    return gen_step(rng, cfg), False


def _kk_check(inst, cfg):
    f, monotone = inst
    lhs = bmo_monotone_interval(decreasing_rearrangement(f)).value
    enc = bmo_interval_enclosure(f, parse(cfg["kk_tol"]), cfg["kk_budget"], stop_at=lhs)
    rhs = f"[{fmt(enc.lo)}, {fmt(enc.hi)}]"
    witness = {"rhs_witness": [fmt(x) for x in enc.witness] if enc.witness else None,
               "evaluations": enc.evaluations}
    if lhs <= enc.lo:
        status = "pass"
    elif enc.hi < lhs:
        status = "fail"
    else:
        status = "inconclusive"
    if monotone:
        witness["monotone"] = True
        witness["ratio_one"] = enc.lo == enc.hi == lhs
        if not witness["ratio_one"]:
            status = "fail"
    return lhs, rhs, status, witness


def _osc_generate(rng, cfg):
    X = gen_metric_space(rng, cfg)
    g = gen_weighted(rng, cfg, nonneg=True, space=X)
    return X, g, _rand_point(rng, X.total, cfg.max_denominator)


def _osc_check(inst, cfg):
    X, g, t = inst
    star = decreasing_rearrangement(g)
    gamma = mean_interval(star, 0, t)
    lhs = oscillation_interval(star, 0, t)
    lam = c_star_probe(X)
    if gamma == 0:
        # g* vanishes on (0, t): nothing to decompose
        return lhs, Fraction(0), "pass" if lhs == 0 else "fail", {"none_needed": True}
    dec = cz_decompose(X, g, gamma, lam, check=True)
    if dec is None:
        return lhs, Fraction(0), "pass" if lhs == 0 else "fail", {"none_needed": True}
    rep = verify_cz(dec, g, gamma)
    rhs = dec.constant * max(oscillation(g, At.members) for _, At in dec.pairs)
    muE = sum((A.measure for A, _ in dec.pairs), Fraction(0))
    ok = rep.passed and lhs <= rhs and muE <= t
    witness = {"cz": rep.as_dict(), "mu_E": fmt(muE), "t": fmt(t), "constant": fmt(dec.constant),
               "lambda": fmt(lam), "pairs": len(dec.pairs)}
    return lhs, rhs, "pass" if ok else "fail", witness


def _pm_generate(rng, cfg):
    return gen_mass(rng, cfg, tail=Fraction(0))


def _pm_check(d, cfg):
    star = bmo_monotone_interval(decreasing_rearrangement(d)).value
    plus = bmo_monotone_interval(decreasing_rearrangement(d.positive_part())).value
    minus = bmo_monotone_interval(decreasing_rearrangement(d.negative_part())).value
    rhs = max(plus, minus)
    return star, rhs, "pass" if star <= rhs else "fail", {"plus": fmt(plus), "minus": fmt(minus)}


def _main_generate(rng, cfg):
    X = gen_metric_space(rng, cfg)
    return X, gen_weighted(rng, cfg, space=X)


def _main_check(inst, cfg):
    X, f = inst
    cs = c_star(X)
    norm = bmo_discrete(f, distinct_balls(X))
    lhs = bmo_monotone_interval(decreasing_rearrangement(f)).value
    rhs = cs * norm
    ratio = None if norm == 0 else fmt(lhs / norm)
    return lhs, rhs, "pass" if lhs <= rhs else "fail", {"c_star": fmt(cs), "ratio": ratio}


def _enc_weighted(inst):
    f, sets = inst
    return {"function": docs.emit_weighted(f), "sets": [[str(a) for a in s] for s in sets]}


def _dec_weighted(doc):
    return docs.parse_weighted(doc["function"]), [list(s) for s in doc["sets"]]


SUITES: dict[str, Suite] = {
    "hl": Suite("hl", _hl_generate, _hl_check,
                lambda i: {"function": docs.emit_weighted(i[0]), "set": list(i[1])},
                lambda d: (docs.parse_weighted(d["function"]), list(d["set"])), 1000),
    "kk": Suite("kk", _kk_generate, _kk_check,
                lambda i: {"function": docs.emit_step(i[0]), "monotone": i[1]},
                lambda d: (docs.parse_step(d["function"]), d["monotone"]), 500),
    "main": Suite("main", _main_generate, _main_check,
                  lambda i: {"function": docs.emit_weighted(i[1])},
                  lambda d: (lambda f: (f.space, f))(docs.parse_weighted(d["function"])), 500),
    "osc": Suite("osc", _osc_generate, _osc_check,
                 lambda i: {"function": docs.emit_weighted(i[1]), "t": fmt(i[2])},
                 lambda d: (lambda g: (g.space, g, parse(d["t"])))(docs.parse_weighted(d["function"])), 500),
    "pm": Suite("pm", _pm_generate, _pm_check, docs.emit_mass, docs.parse_mass, 500),
    "trunc": Suite("trunc", _trunc_generate, _trunc_check, _enc_weighted, _dec_weighted, 1000),
}


def _as_str(x) -> str:
    return x if isinstance(x, str) else fmt(x)


def run_trial(suite: str, cfg: GeneratorConfig, trial: int) -> TrialReport:
    s = SUITES[suite]
    inst = s.generate(trial_rng(cfg.seed, suite, trial), cfg)
    cdict = cfg.as_dict()
    lhs, rhs, status, witness = s.check(inst, cdict)
    return TrialReport(suite, cfg.seed, trial, status, _as_str(lhs), _as_str(rhs),
                       s.encode(inst), witness, cdict)


def _run_trial_args(args):
    return run_trial(*args)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("BMO_WORKERS", "1")))
    except ValueError:
        return 1


def run_suite(suite: str, cfg: GeneratorConfig, trials: int | None = None,
              workers: int | None = None) -> list[TrialReport]:
    """Run ``trials`` independent trials; output is sorted by trial index."""
    n = SUITES[suite].trials if trials is None else trials
    workers = _workers() if workers is None else workers
    jobs = [(suite, cfg, i) for i in range(n)]
    if workers <= 1 or n < 2:
        return [run_trial(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_trial_args, jobs, chunksize=max(1, n // (4 * workers))))


def replay(report: TrialReport | dict, *, regenerate: bool = True) -> TrialReport:
    """Re-check one trial from its serialized instance.

    With ``regenerate`` the instance is also rebuilt from ``(seed, suite,
    trial)`` and must serialize byte-identically to the stored one.
    """
    if isinstance(report, dict):
        report = TrialReport.from_dict(report)
    s = SUITES[report.suite]
    inst = s.decode(report.instance)
    if s.encode(inst) != report.instance:
        raise ValueError("stored instance does not round-trip")
    cfg = GeneratorConfig(**report.config) if report.config else GeneratorConfig(seed=report.seed)
    if regenerate:
        fresh = s.encode(s.generate(trial_rng(report.seed, report.suite, report.trial), cfg))
        if json.dumps(fresh, sort_keys=True) != json.dumps(report.instance, sort_keys=True):
            raise ValueError("instance regenerated from the seed differs from the stored one")
    lhs, rhs, status, witness = s.check(inst, cfg.as_dict())
    return TrialReport(report.suite, report.seed, report.trial, status, _as_str(lhs), _as_str(rhs),
                       report.instance, witness, cfg.as_dict())


def verify_hardy_littlewood(cfg: GeneratorConfig, trials: int = 1000) -> list[TrialReport]:
    """``int_0^{mu(A)} f* >= int_A |f|`` on random weighted functions and sets."""
    return run_suite("hl", cfg, trials)


def verify_klemes_korenovskii(cfg: GeneratorConfig, trials: int = 500, tol=None) -> list[TrialReport]:
    """``||f*|| <= ||f||`` on ``(0, 1)``: exact left side, enclosed right side."""
    if tol is not None:
        cfg = replace(cfg, kk_tol=fmt(Fraction(tol)))
    return run_suite("kk", cfg, trials)


def verify_main_theorem(cfg: GeneratorConfig, trials: int = 500) -> list[TrialReport]:
    """``||f*||_BMO <= c_* ||f||_BMO`` over closed balls of random metric spaces."""
    return run_suite("main", cfg, trials)


def verify_lemma_osc(cfg: GeneratorConfig, trials: int = 500) -> list[TrialReport]:
    return run_suite("osc", cfg, trials)


def verify_lem_pm(cfg: GeneratorConfig, trials: int = 500) -> list[TrialReport]:
    return run_suite("pm", cfg, trials)


def verify_truncation_and_limits(cfg: GeneratorConfig, trials: int = 1000) -> list[TrialReport]:
    return run_suite("trunc", cfg, trials)


# -- extremal search ---------------------------------------------------------

def _ratio_main(inst):
    X, f = inst
    norm = bmo_discrete(f, distinct_balls(X))
    if norm == 0:
        return None
    return bmo_monotone_interval(decreasing_rearrangement(f)).value / norm


def _ratio_kk(f):
    norm = bmo_step_exact(f).value
    if norm == 0:
        return None
    return bmo_monotone_interval(decreasing_rearrangement(f)).value / norm


def _mutate_main(rng, inst, cfg):
    X, f = inst
    vals = list(f.values)
    i = rng.randrange(len(vals))
    vals[i] = rand_rational(rng, cfg.value_lo, cfg.value_hi, cfg.max_denominator)
    if rng.random() < 0.3:
        w = list(X.weights)
        w[i] = rand_positive(rng, cfg.weight_hi, cfg.max_denominator)
        X = FiniteMetricMeasureSpace(X.ids, tuple(w), X.distances)
    return X, WeightedFunction(X, tuple(vals))


def _mutate_kk(rng, f, cfg):
    pieces = list(f.pieces)
    i = rng.randrange(len(pieces))
    l, v = pieces[i]
    if rng.random() < 0.5 or len(pieces) == 1:
        pieces[i] = (l, rand_rational(rng, cfg.value_lo, cfg.value_hi, cfg.max_denominator))
    else:
        j = (i + 1) % len(pieces)
        shift = l * Fraction(rng.randint(1, 7), 8)
        pieces[i] = (l - shift, v)
        pieces[j] = (pieces[j][0] + shift, pieces[j][1])
    return StepFunction1D.interval(pieces)


def extremal_search(cfg: GeneratorConfig, objective: str = "main_theorem_ratio",
                    strategy: str = "random", iters: int = 200) -> dict:
    """Best-found ``||f*|| / ||f||`` (a lower bound on the worst case, nothing more)."""
    if objective == "main_theorem_ratio":
        gen = _main_generate
        ratio, mutate = _ratio_main, _mutate_main
        encode = lambda i: docs.emit_weighted(i[1])
    elif objective == "kk_ratio":
        gen = lambda rng, c: gen_step(rng, c)
        ratio, mutate = _ratio_kk, _mutate_kk
        encode = docs.emit_step
    else:
        raise ValueError(f"unknown objective {objective!r}")
    if strategy not in ("random", "hill_climb"):
        raise ValueError(f"unknown strategy {strategy!r}")
    rng = trial_rng(cfg.seed, f"search:{objective}:{strategy}", 0)
    best, best_inst, skipped = None, None, 0
    current, current_r = None, None
    for it in range(iters):
        if strategy == "random" or current is None or (it % 50 == 0):
            cand = gen(rng, cfg)
        else:
            cand = mutate(rng, current, cfg)
        r = ratio(cand)
        if r is None:
            skipped += 1
            continue
        if current_r is None or r >= current_r or strategy == "random":
            current, current_r = cand, r
        if best is None or r > best:
            best, best_inst = r, cand
    out = {"version": docs.VERSION, "kind": "search_result", "objective": objective,
           "strategy": strategy, "seed": cfg.seed, "iters": iters, "skipped": skipped,
           "best_ratio": None if best is None else fmt(best),
           "instance": None if best_inst is None else encode(best_inst)}
    if objective == "main_theorem_ratio" and best_inst is not None:
        out["c_star"] = fmt(c_star(best_inst[0]))
    return out
