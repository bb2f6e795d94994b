"""Seeded randomized verification suites.

Each trial gets its own ``random.Random`` (Mersenne Twister) seeded with the
string ``"{seed}:{suite}:{index}"``, so a trial can be rerun alone and the
report does not depend on how the worker pool schedules trials.  A trial
returns None when it passes and a JSON-ready reproduction payload otherwise.
"""
from __future__ import annotations

import math
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ContractError
from .homeo import (
    Affine,
    Power,
    archimedean_witness,
    commutator,
    element_to_json,
    holder_compare,
    iterate,
)
from .predictor import (
    CheckResult,
    bad_set,
    build_amalgamated,
    embedding_violations,
    predict_weak,
    promotion_check,
    verify_anonymity,
    verify_welldefined,
)
from .rationals import format_rational
from .steps import (
    HoledFunction,
    PastFunction,
    StepFunction,
    holed_to_json,
    least_extension,
    orbit_witness,
    precompose,
    restrict,
    step_to_json,
    witness_from_tail,
)
from .glue import (
    GlueSpec,
    assemble_diffeo,
    blocking_demo,
    build_approach,
    certify_smooth_at_target,
    glue_deriv,
    glue_derivs,
    glue_eval,
    normalization,
    sup_norm,
)
from .glue.bump import adaptive_panels

DEFAULT_TRIALS = {
    "commutator": 1000,
    "holder": 200,
    "archimedean": 100,
    "anonymity": 200,
    "welldef": 100,
    "goodness": 100,
    "weak": 100,
    "amalgamate": 100,
    "promotion": 100,
    "glue": 20,
    "approach": 3,
    "diffeo": 1,
    "blocking": 5,
}


@dataclass
class RunConfig:
    seed: int = 0
    alphabet: tuple = ("a", "b", "c")
    trials: dict = field(default_factory=dict)
    quad_tol: float = 1e-9
    fd_tol_first: float = 1e-3
    fd_tol_higher: float = 1e-2
    depth: int = 20
    workers: int = 4
    out_dir: str = "."

    def __post_init__(self):
        env = os.environ.get("LAB_SEED")
        if env is not None:
            self.seed = int(env)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.quad_tol <= 0 or self.fd_tol_first <= 0 or self.fd_tol_higher <= 0:
            raise ValueError("tolerances must be positive")
        if len(self.alphabet) < 2:
            raise ValueError("the alphabet needs at least two states")

    def trials_for(self, suite: str) -> int:
        return self.trials.get(suite, DEFAULT_TRIALS[suite])

    def rng(self, suite: str, index: int) -> random.Random:
        return random.Random(f"{self.seed}:{suite}:{index}")


@dataclass
class SuiteReport:
    suite: str
    trials: int
    failures: list
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        # wall time stays out of the JSON so reports are byte-identical per seed
        return {"suite": self.suite, "trials": self.trials, "failures": self.failures,
                "passed": self.passed, **self.extra}


# ---------------------------------------------------------------- generators


def rand_rational(rng: random.Random, span: int = 20, den: int = 8) -> Fraction:
    return Fraction(rng.randint(-span * den, span * den), rng.randint(1, den))


def rand_positive(rng: random.Random, top: int = 12) -> Fraction:
    return Fraction(rng.randint(1, top), rng.randint(1, top))


def rand_affine(rng: random.Random) -> Affine:
    return Affine(rand_positive(rng), rand_rational(rng))


def rand_values(rng: random.Random, k: int, n: int) -> tuple:
    vals = [rng.randrange(n)]
    for _ in range(k):
        vals.append(rng.choice([s for s in range(n) if s != vals[-1]]))
    return tuple(vals)


def rand_step(rng: random.Random, n: int = 3, max_k: int = 5) -> StepFunction:
    k = rng.randint(0, max_k)
    pts = set()
    while len(pts) < k:
        pts.add(rand_rational(rng, 10, 6))
    return StepFunction(tuple(sorted(pts)), rand_values(rng, k, n))


def rand_past(rng: random.Random, n: int = 3, max_k: int = 5) -> PastFunction:
    H = rand_step(rng, n, max_k)
    if H.k and rng.random() < 0.8:
        t = H.breakpoints[-1] + rand_positive(rng, 6)
    else:
        t = rand_rational(rng, 12, 6)
    return restrict(H, t)


# ---------------------------------------------------------------- group trials


def trial_commutator(rng, cfg):
    g, h = rand_affine(rng), rand_affine(rng)
    c = commutator(g, h)
    if isinstance(c, Affine) and c.a == 1:
        return None
    return {"g": element_to_json(g), "h": element_to_json(h), "commutator": repr(c)}


def trial_holder(rng, cfg):
    if rng.random() < 0.5:
        g, h = Affine(1, rand_rational(rng)), Affine(1, rand_rational(rng))
        points = [rand_rational(rng, 50) for _ in range(10)]
    else:
        g, h = Power(rand_positive(rng)), Power(rand_positive(rng))
        points = [Fraction(rng.randint(1, 999), 1000) for _ in range(10)]
    answers = {holder_compare(g, h, x) for x in points}
    if len(answers) == 1:
        return None
    return {"g": element_to_json(g), "h": element_to_json(h), "points": [format_rational(x) for x in points],
            "answers": sorted(str(a) for a in answers)}


def trial_archimedean(rng, cfg):
    a = rand_positive(rng)
    b = a + rand_positive(rng, 30)
    x0 = rand_rational(rng)
    n = archimedean_witness(Affine(1, a), Affine(1, b), x0, max_n=10_000)
    bound = math.ceil(b / a) + 1
    if n is not None and n <= bound:
        return None
    return {"phi_offset": format_rational(a), "psi_offset": format_rational(b),
            "x0": format_rational(x0), "n": n, "bound": bound}


# ---------------------------------------------------------------- predictor trials


def _result_payload(res: CheckResult, **extra):
    return None if res.status == "ok" else {"status": res.status, **res.detail, **extra}


def trial_anonymity(rng, cfg):
    f = rand_past(rng, len(cfg.alphabet))
    phi = rand_affine(rng)
    return _result_payload(verify_anonymity(f, phi))


def trial_welldef(rng, cfg):
    f = rand_past(rng, len(cfg.alphabet))
    F = least_extension(f)
    phi1, phi2 = orbit_witness(F, f), witness_from_tail(F, f)
    if phi1 is None or phi2 is None:
        return {"status": "no-witness", "past": step_to_json(f)}
    # a skip would mean a constructed witness does not witness, so it counts
    return _result_payload(verify_welldefined(f, phi1, phi2))


def trial_goodness(rng, cfg):
    H = rand_step(rng, len(cfg.alphabet), 5)
    bs = bad_set(H)
    outside = [t for t in bs.certified if t not in H.breakpoints]
    violations = embedding_violations(H, bs.certified)
    if not outside and not violations:
        return None
    return {"total": step_to_json(H), "certified": [format_rational(t) for t in bs.certified],
            "outside_breakpoints": [format_rational(t) for t in outside],
            "embedding_violations": [[format_rational(s), format_rational(t)] for s, t in violations]}


def _mutate_above(rng, H: StepFunction, h, n: int) -> StepFunction:
    below = [(r, v) for r, v in zip(H.breakpoints, H.values[1:]) if r < h]
    pts = sorted({h + rand_positive(rng, 8) for _ in range(rng.randint(0, 4))} | ({h} if rng.random() < 0.5 else set()))
    bps = [r for r, _ in below] + pts
    vals = [H.values[0]] + [v for _, v in below] + [rng.randrange(n) for _ in pts]
    return StepFunction.build(bps, vals)


def trial_weak(rng, cfg):
    n = len(cfg.alphabet)
    H = rand_step(rng, n, 5)
    h = rng.choice(list(H.breakpoints) + [rand_rational(rng, 10, 6)])
    g = HoledFunction(H, h)
    g2 = HoledFunction(_mutate_above(rng, H, h, n), h)
    a, b = predict_weak(g), predict_weak(g2)
    if a == b:
        return None
    return {"holed": holed_to_json(g), "mutated": holed_to_json(g2), "predict": a, "predict_mutated": b}


AMALGAMATION_MAP = Affine(2, 0)


def trial_amalgamate(rng, cfg):
    n = len(cfg.alphabet)
    f = rand_past(rng, n)
    at_zero = restrict(rand_step(rng, n), Fraction(0))
    # pick s0 away from the last value so a wrong branch cannot pass by accident
    s0 = next(s for s in range(n) if s != at_zero.last_value)
    Q = build_amalgamated(AMALGAMATION_MAP, s0)
    k = rng.choice([-3, -2, -1, 1, 2, 3])
    z = Q.predict(at_zero)
    if f.cutoff == 0:
        a = b = Q.predict(f)
        ok = a == s0
    else:
        a, b = Q.predict(f), Q.predict(precompose(f, iterate(AMALGAMATION_MAP, k)))
        ok = a == b
    if ok and z == s0:
        return None
    return {"past": step_to_json(f), "k": k, "s0": s0, "predict": a, "predict_moved": b,
            "past_at_fixed_point": step_to_json(at_zero), "predict_at_fixed_point": z}


class PeriodicStep:
    """Step pattern repeated with a fixed period: ``pattern[floor(m * frac(x / period))]``."""

    def __init__(self, pattern, period):
        self.pattern = tuple(pattern)
        self.period = Fraction(period)

    def __call__(self, x):
        m = len(self.pattern)
        frac = (x / self.period) % 1
        return self.pattern[math.floor(m * frac)]


def trial_promotion(rng, cfg):
    n = len(cfg.alphabet)
    block = [rng.randrange(n) for _ in range(rng.randint(1, 3))]
    reps = rng.randint(1, 4)
    period = rand_positive(rng, 6)
    F = PeriodicStep(block * reps, period)
    psi = Affine(1, period)
    phi = Affine(1, period * rng.randint(1, reps) / reps)
    t = rand_rational(rng, 10)
    samples = [rand_rational(rng, 30, 12) for _ in range(60)]
    res = promotion_check(F, phi, psi, t, samples)
    # negative control: shifting by an off-grid amount breaks psi-invariance unless the pattern is flat
    off = Affine(1, period * Fraction(1, 2 * len(F.pattern) + 1))
    control = promotion_check(F, phi, off, t, samples + [Fraction(0)]) if len(set(block)) > 1 else None
    if res.status == "ok" and (control is None or control.status == "hypothesis-error"):
        return None
    return {"pattern": list(F.pattern), "period": format_rational(period), "phi": element_to_json(phi),
            "t": format_rational(t), "status": res.status,
            "control": None if control is None else control.status}


# ---------------------------------------------------------------- glue trials


def trial_glue(rng, cfg):
    spec = GlueSpec(rand_rational(rng, 5), rand_rational(rng, 5),
                    Fraction(rng.randint(1, 16), rng.randint(4, 32)), Fraction(rng.randint(1, 40), rng.randint(8, 64)))
    tol = cfg.quad_tol
    p, e = float(spec.p), float(spec.end)
    issues = []
    if abs(glue_eval(spec, p) - float(spec.q)) > tol:
        issues.append("value at p")
    if abs(glue_eval(spec, e) - float(spec.end_value)) > tol:
        issues.append("value at p + delta")
    for x in (p, e):
        if abs(glue_deriv(spec, x, 1) - 1.0) > tol:
            issues.append(f"slope at {x}")
        for k in range(2, 6):
            if abs(glue_deriv(spec, x, k)) > tol:
                issues.append(f"order {k} at {x}")
    xs = p + (e - p) * np.array([rng.random() for _ in range(50)])
    xs = np.clip(xs, p, e)
    if np.max(np.abs(glue_derivs(spec, xs, 1) - 1.0)) > float(spec.gamma) * sup_norm(0).value:
        issues.append("first derivative bound")
    for k in range(2, 6):
        bound = float(spec.gamma / spec.delta ** (k - 1)) * sup_norm(k - 1).value * (1 + 1e-6)
        if np.max(np.abs(glue_derivs(spec, xs, k))) > bound:
            issues.append(f"order {k} bound")
    return {"spec": spec.to_json(), "issues": issues} if issues else None


APPROACH_TARGETS = [(Fraction(1), Fraction(1)), (Fraction(0), Fraction(0)), (Fraction(3, 7), Fraction(-2, 5))]


def trial_approach(rng, cfg, index=0):
    target = APPROACH_TARGETS[index % len(APPROACH_TARGETS)]
    bad = []
    for side in ("left", "right"):
        seq = build_approach(target, side, 30)
        bad += [c.to_json() for c in seq.certificate if not c.holds]
    return {"target": [format_rational(t) for t in target], "failed": bad} if bad else None


def bump_normalization_error() -> float:
    """``|integral of b - 1|`` plus its error estimate, by a fresh pass over [0, 1]."""
    _, kron, err = adaptive_panels(0.0, 1.0, 1e-14)
    Z = normalization().Z
    return abs(kron.sum() / Z - 1.0) + err.sum() / Z


def diffeo_checks(G, tol: float, probes: int = 10_000, fd=(1e-3, 1e-2)) -> dict:
    issues = []
    for seq in (G.left, G.right):
        for n in range(1, G.depth):
            a, b = seq.piece(n), seq.piece(n + 1)
            joint = float(seq.p[n])
            if abs(glue_eval(a, joint) - glue_eval(b, joint)) > tol:
                issues.append(f"{seq.side} junction {n} value")
            if abs(glue_deriv(a, joint, 1) - 1) > tol or abs(glue_deriv(b, joint, 1) - 1) > tol:
                issues.append(f"{seq.side} junction {n} slope")
        for n in (1,):
            a = seq.piece(n)
            joint = float(seq.p[0])
            line = G.psi_left if seq.side == "left" else G.psi_right
            if abs(glue_eval(a, joint) - float(line(seq.p[0]))) > tol:
                issues.append(f"{seq.side} line junction")
    lo, hi = float(G.left.p[0]) - 1, float(G.right.p[0]) + 1
    xs = np.linspace(lo, hi, probes)
    if not np.all(np.diff(G.values(xs)) > 0):
        issues.append("not strictly increasing on probes")
    smooth = certify_smooth_at_target(G, orders=4, tol_first=fd[0], tol_higher=fd[1])
    if smooth["status"] != "pass":
        issues.append(f"smoothness certificate: {smooth['status']}")
    norm_err = bump_normalization_error()
    if norm_err > 1e-10:
        issues.append("bump normalization")
    return {"issues": issues, "smoothness": smooth, "normalization_error": norm_err}


def trial_diffeo(rng, cfg):
    G = assemble_diffeo((1, 1), cfg.depth)
    out = diffeo_checks(G, cfg.quad_tol, fd=(cfg.fd_tol_first, cfg.fd_tol_higher))
    return {"target": ["1/1", "1/1"], "issues": out["issues"]} if out["issues"] else None


def trial_blocking(rng, cfg):
    x, y = rand_rational(rng, 5, 7), rand_rational(rng, 5, 7)
    G = assemble_diffeo((x, y), cfg.depth)
    sample = []
    while len(sample) < 500:
        z = x + Fraction(rng.randint(-3000, 3000), 1000) + Fraction(rng.randint(0, 999), 10**6)
        if z != x and not G.in_truncated_zone(z):
            sample.append(z)
    cert = blocking_demo(x, y, cfg.depth, sample)
    ok = cert["status"] == "pass" and cert["witnessed"] == 500 and cert["chain"]
    return None if ok else {"x": format_rational(x), "y": format_rational(y),
                            "failures": cert["failures"], "status": cert["status"]}


SUITES: dict[str, Callable] = {
    "commutator": trial_commutator,
    "holder": trial_holder,
    "archimedean": trial_archimedean,
    "anonymity": trial_anonymity,
    "welldef": trial_welldef,
    "goodness": trial_goodness,
    "weak": trial_weak,
    "amalgamate": trial_amalgamate,
    "promotion": trial_promotion,
    "glue": trial_glue,
    "approach": trial_approach,
    "diffeo": trial_diffeo,
    "blocking": trial_blocking,
}


def _run_one(cfg: RunConfig, name: str, i: int):
    fn = SUITES[name]
    rng = cfg.rng(name, i)
    try:
        payload = fn(rng, cfg, i) if name == "approach" else fn(rng, cfg)
    except ContractError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
    return None if payload is None else {"trial": i, **payload}


def run_suite(name: str, cfg: RunConfig | None = None, trials: int | None = None) -> SuiteReport:
    """Run one suite; failures are listed in trial-index order."""
    cfg = cfg or RunConfig()
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    n = cfg.trials_for(name) if trials is None else trials
    start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        results = list(pool.map(lambda i: _run_one(cfg, name, i), range(n)))
    failures = [r for r in results if r is not None]
    return SuiteReport(name, n, failures, time.perf_counter() - start, {"seed": cfg.seed})
