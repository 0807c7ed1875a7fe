"""Command-line experiment runner: every harness writes <out>/<experiment>.json and .csv."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import adversary as adv
from .extract import (
    FixedChallengeProver,
    HonestQuantumProver,
    PartialKnowledgeProver,
    TwoResponseProver,
    coin_distinguisher,
    collapsing_game,
    extractor_bound_check,
    function_relation,
    graph_state,
    pair_fourier_distinguisher,
    projection_bound_check,
    qcur_check,
    random_bound_instance,
    random_two_part_instance,
    two_part_bound_check,
)
from .fiat_shamir import FSProof, PairEncoding, fs_reduce, honest_fs_adversary, reduction_acceptance, verify_fs_reduction
from .oracle import CapacityError, all_functions, sample_uniform, table_cap
from .qsim import dim_cap
from .reprogram import loss_constant, verify_lemma1, verify_thm1
from .seeding import frequency, trial_rng
from .sigma import ChallengeGuessingCheater, HonestProver, SchnorrProtocol, TwoResponseProtocol, soundness_game
from .signatures import (
    ChallengeGuessingForger,
    HonestSignerForger,
    JunkForger,
    KeyPair,
    RerandomizeForger,
    ReplayForger,
    Signature,
    SignatureScheme,
    cma_game,
    nma_game,
)

SCHEMA_VERSION = 1
SLACK = 1e-9

ADVERSARIES = (
    "classical-query",
    "classical-query-last",
    "superposed-uniform",
    "superposed-weighted",
    "guessing",
    "two-query-chain",
    "random-unitary",
)
PROVERS = ("honest", "fixed-challenge", "partial-knowledge", "two-response", "reduced-fs")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    out: str = "reports"
    X: int = 2
    n: int = 6
    q: int = 1
    C: int = 64
    t: int = 2
    trials: int = 1000
    members: int = 200
    oracles: int = 8
    exhaustive: bool = False
    adversary: str = "classical-query"
    predicate: str = "z=theta"
    dim_e: int = 1
    points: int = 4
    prover: str = "honest"
    forger: str = "guessing"
    max_sign_queries: int = 4
    lemma: str = "fvsv"
    proj_n: int = 6
    proj_m: int = 3
    dim: int = 16
    relation: str = "bijection"
    protocol: str = "schnorr"
    key: str | None = None
    message: str = "00"
    signature: str | None = None
    oracle_seed: int = 0
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        errors = []

        def need(ok, name, msg):
            if not ok:
                errors.append(f"{name}: {msg}")

        need(self.experiment in EXPERIMENTS, "experiment", f"unknown experiment {self.experiment!r}")
        need(isinstance(self.seed, int) and self.seed >= 0, "seed", "must be a non-negative integer")
        need(self.schema_version == SCHEMA_VERSION, "schema_version", f"expected {SCHEMA_VERSION}")
        need(self.X >= 1, "X", "must be >= 1")
        need(1 <= self.n <= 12, "n", "must be in 1..12")
        need(self.q in (0, 1, 2), "q", "must be 0, 1 or 2")
        need(self.C >= 2 and self.C & (self.C - 1) == 0 and self.C <= 64, "C", "must be a power of two in 2..64")
        need(1 <= self.t <= 8, "t", "must be in 1..8")
        need(self.trials >= 0, "trials", "must be >= 0")
        need(self.members >= 1, "members", "must be >= 1")
        need(self.oracles >= 1, "oracles", "must be >= 1")
        need(self.adversary in ADVERSARIES, "adversary", f"one of {', '.join(ADVERSARIES)}")
        need(self.predicate in adv.PREDICATES, "predicate", f"one of {', '.join(adv.PREDICATES)}")
        need(self.dim_e >= 1, "dim_e", "must be >= 1")
        need(1 <= self.points <= 16, "points", "must be in 1..16")
        need(self.prover in PROVERS + ("all",), "prover", f"one of {', '.join(PROVERS)}, all")
        need(self.lemma in ("fvsv", "fvsv2"), "lemma", "fvsv or fvsv2")
        need(self.proj_n >= 1 and self.proj_m >= 1 and self.dim >= 1, "proj_n/proj_m/dim", "must be >= 1")
        need(self.relation in ("bijection", "two-preimage", "coin"), "relation", "bijection, two-preimage or coin")
        need(self.protocol in ("schnorr", "two-response"), "protocol", "schnorr or two-response")
        need(self.max_sign_queries >= 0, "max_sign_queries", "must be >= 0")
        try:
            bytes.fromhex(self.message)
        except (TypeError, ValueError):
            errors.append("message: must be hex")
        if errors:
            raise ConfigError("; ".join(errors))

    @property
    def range_bits(self) -> int:
        return self.C.bit_length() - 1

    def schnorr(self) -> SchnorrProtocol:
        return SchnorrProtocol(challenge_bits=self.C.bit_length() - 1)


# -- shared helpers -------------------------------------------------------------------------


def _adversary(cfg: ExperimentConfig, rng) -> adv.OracleAlgorithm:
    dx, n = cfg.X, cfg.n
    w = np.arange(1, dx + 1, dtype=float)
    table: dict[str, Callable[[], adv.OracleAlgorithm]] = {
        "classical-query": lambda: adv.classical_query_adversary(0, dx, n),
        "classical-query-last": lambda: adv.classical_query_adversary(dx - 1, dx, n),
        "superposed-uniform": lambda: adv.superposed_query_adversary(np.full(dx, 1.0 / dx), n),
        "superposed-weighted": lambda: adv.superposed_query_adversary(w / w.sum(), n),
        "guessing": lambda: adv.guessing_adversary(0, (1 << n) - 1, dx, n),
        "two-query-chain": lambda: adv.two_query_chain_adversary(0, dx, n),
        "random-unitary": lambda: adv.random_unitary_adversary(int(rng.integers(2**31)), cfg.q, dx, n, cfg.dim_e),
    }
    return table[cfg.adversary]()


def _within(p: float, expected: float, trials: int) -> bool:
    sigma = math.sqrt(max(expected * (1 - expected), 0.0) / max(trials, 1))
    return abs(p - expected) <= 3 * sigma + SLACK


def _schnorr_key(sigma: SchnorrProtocol, rng) -> tuple[int, int]:
    w = int(rng.integers(1, sigma.r))
    return pow(sigma.g, w, sigma.p), w


def _honest_fs(cfg: ExperimentConfig, sigma: SchnorrProtocol, rng):
    x, w = _schnorr_key(sigma, rng)
    ys = [int(y) for y in rng.choice(sigma.r, size=cfg.points, replace=False)]
    enc = PairEncoding([x], [pow(sigma.g, y, sigma.p) for y in ys])
    return honest_fs_adversary(sigma, enc, w, [(x, y) for y in ys]), enc, x, w


Result = tuple[dict, list[dict], bool]


# -- experiments ----------------------------------------------------------------------------


def run_lemma1(cfg: ExperimentConfig) -> Result:
    rng = trial_rng(cfg.seed, 0)
    A = _adversary(cfg, rng)
    V = adv.PREDICATES[cfg.predicate]
    if cfg.exhaustive:
        oracles = list(all_functions(cfg.X, cfg.n))
    else:
        oracles = [sample_uniform(cfg.X, cfg.n, trial_rng(cfg.seed, 1, k)) for k in range(cfg.oracles)]
    rows = []
    for h, H in enumerate(oracles):
        for x0 in range(cfg.X):
            rep = verify_lemma1(A, H, x0, V)
            rows.append(dict(oracle=h, x0=x0, lhs=rep.lhs, term1=rep.term1, term2=rep.term2, bound=rep.bound, holds=rep.holds))
    holds = all(r["holds"] for r in rows)
    summary = dict(adversary=A.name, q=A.q, oracles=len(oracles), cells=len(rows), min_gap=min(r["lhs"] - r["bound"] for r in rows))
    return summary, rows, holds


def run_thm1(cfg: ExperimentConfig) -> Result:
    rng = trial_rng(cfg.seed, 0)
    A = _adversary(cfg, rng)
    rep = verify_thm1(A, adv.PREDICATES[cfg.predicate], cfg.members, rng)
    d = rep.to_dict()
    rows = [dict(x0=i, lhs=l, success=s) for i, (l, s) in enumerate(zip(rep.lhs_per_x0, rep.success_per_x0))]
    return d, rows, bool(rep.holds and rep.per_x0_holds and rep.family_matches_uniform)


def run_fsreduce(cfg: ExperimentConfig) -> Result:
    sigma = cfg.schnorr()
    rng = trial_rng(cfg.seed, 0)
    A, enc, x, _ = _honest_fs(cfg, sigma, rng)
    H = sample_uniform(enc.domain_size, cfg.range_bits, rng)
    rep = verify_fs_reduction(A, sigma, enc, H)
    freq, err = reduction_acceptance(A, sigma, enc, cfg.trials, cfg.seed) if cfg.trials else (float("nan"), 0.0)
    target = 1.0 / loss_constant(A.q) - 1.0 / (2 * (A.q + 1) * sigma.challenge_size)
    sampled_ok = cfg.trials == 0 or freq >= target - 3 * err
    rows = [
        dict(x0=i, sigma_success=s, fs_success=f, bound=b)
        for i, (s, f, b) in enumerate(zip(rep.sigma_success_per_x0, rep.fs_success_per_x0, rep.bound_per_x0))
    ]
    summary = dict(exact=rep.to_dict(), sampled_acceptance=freq, sampled_stderr=err, sampled_target=target, instance=x)
    return summary, rows, bool(rep.holds and sampled_ok)


def run_sigma_run(cfg: ExperimentConfig) -> Result:
    sigma = cfg.schnorr()
    x, w = _schnorr_key(sigma, trial_rng(cfg.seed, 0))
    C = sigma.challenge_size
    honest = soundness_game(sigma, HonestProver(sigma, x, w), "static", x, cfg.trials, cfg.seed)
    cheat = soundness_game(sigma, ChallengeGuessingCheater(sigma), "adaptive", None, cfg.trials, cfg.seed + 1)
    rows = [
        dict(prover="honest", mode="static", **honest.to_dict(), expected=1.0, holds=honest.hits == cfg.trials),
        dict(prover="challenge-guessing", mode="adaptive", **cheat.to_dict(), expected=1 / C,
             holds=_within(cheat.frequency, 1 / C, cfg.trials)),
    ]
    return dict(instance=x), rows, all(r["holds"] for r in rows)


def _prover(name: str, cfg: ExperimentConfig, rng):
    sigma = cfg.schnorr()
    x, w = _schnorr_key(sigma, rng)
    if name == "honest":
        return HonestQuantumProver(sigma, x, w)
    if name == "fixed-challenge":
        return FixedChallengeProver(sigma, x, int(rng.integers(sigma.challenge_size)))
    if name == "partial-knowledge":
        return PartialKnowledgeProver(sigma, x, w)
    if name == "two-response":
        return TwoResponseProver(TwoResponseProtocol(sigma), x, w)
    A, enc, _, _ = _honest_fs(cfg, sigma, rng)
    return fs_reduce(A, sigma, enc, sample_uniform(enc.domain_size, cfg.range_bits, rng))


def run_sigma_extract(cfg: ExperimentConfig) -> Result:
    names = PROVERS if cfg.prover == "all" else (cfg.prover,)
    rows, ok = [], True
    for k, name in enumerate(names):
        P = _prover(name, cfg, trial_rng(cfg.seed, 0, k))
        rep = extractor_bound_check(P, cfg.t, cfg.trials, cfg.seed + k)
        row = dict(prover=name, **{key: v for key, v in rep.to_dict().items() if key not in ("prover", "reasons")})
        row["reasons"] = json.dumps(rep.reasons, sort_keys=True)
        unique = name != "two-response"
        # only provers with unique responses fall under the extractor bound
        row["checked"] = unique
        if name == "honest":
            row["honest_target"] = 1 - 2 * cfg.t**2 / cfg.C
            row["holds"] = bool(rep.holds and rep.extraction >= row["honest_target"])
        row["holds"] = bool(row["holds"]) if unique else True
        ok &= row["holds"]
        rows.append(row)
    return dict(provers=list(names)), rows, ok


def _scheme(cfg: ExperimentConfig) -> SignatureScheme:
    return SignatureScheme(cfg.schnorr())


def _oracle(cfg: ExperimentConfig, scheme: SignatureScheme):
    return scheme.random_oracle(trial_rng(cfg.oracle_seed, 0))


def _load_json(path: str | None, what: str) -> dict:
    if path is None:
        raise ConfigError(f"{what}: a file path is required")
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"{what}: cannot read {path}: {e}") from None


def run_keygen(cfg: ExperimentConfig) -> Result:
    scheme = _scheme(cfg)
    kp = scheme.keygen(trial_rng(cfg.seed, 0))
    path = Path(cfg.key or Path(cfg.out) / "key.json")
    _write_json(path, kp.to_dict())
    holds = scheme.base.relation(kp.pk, kp.sk[1])
    return dict(pk=kp.pk, key_file=str(path)), [dict(pk=kp.pk, valid=holds)], holds


def run_sign(cfg: ExperimentConfig) -> Result:
    scheme = _scheme(cfg)
    key = _load_json(cfg.key, "key")
    sk = tuple(key["sk"])
    m = bytes.fromhex(cfg.message)
    H = _oracle(cfg, scheme)
    sig = scheme.sign(H, sk, m, trial_rng(cfg.seed, 0))
    path = Path(cfg.signature or Path(cfg.out) / "signature.json")
    _write_json(path, sig.to_dict())
    ok = scheme.verify(H, key["pk"], m, sig)
    return dict(signature_file=str(path), **sig.to_dict()), [dict(message=m.hex(), **sig.to_dict(), valid=ok)], ok


def run_verify(cfg: ExperimentConfig) -> Result:
    scheme = _scheme(cfg)
    key = _load_json(cfg.key, "key")
    raw = _load_json(cfg.signature, "signature")
    m = bytes.fromhex(cfg.message)
    try:
        sig = Signature(m, FSProof(int(raw["a"]), int(raw["z"])))
        ok = scheme.verify(_oracle(cfg, scheme), int(key["pk"]), m, sig)
    except (KeyError, TypeError, ValueError):
        ok = False
    return dict(valid=ok), [dict(message=m.hex(), valid=ok)], ok


def run_nma(cfg: ExperimentConfig) -> Result:
    scheme = _scheme(cfg)
    C, r = scheme.base.challenge_size, scheme.base.r
    forgers = {
        "honest": (HonestSignerForger, 1.0),
        "guessing": (lambda: ChallengeGuessingForger(cfg.q or 1), 1 - (1 - 1 / C) ** (cfg.q or 1)),
        "junk": (JunkForger, 1 / r),
    }
    if cfg.forger not in forgers:
        raise ConfigError(f"forger: one of {', '.join(forgers)} for nma-game")
    make, expected = forgers[cfg.forger]
    res = nma_game(scheme, make(), cfg.trials, cfg.seed)
    holds = _within(res.frequency, expected, cfg.trials)
    row = dict(**res.to_dict(), expected=expected, holds=holds)
    return dict(forger=cfg.forger, expected=expected), [row], holds


def run_cma(cfg: ExperimentConfig) -> Result:
    scheme = _scheme(cfg)
    forgers = {"replay": ReplayForger, "rerandomize": RerandomizeForger, "honest": lambda: HonestSignerForger(b"\x09")}
    if cfg.forger not in forgers:
        raise ConfigError(f"forger: one of {', '.join(forgers)} for cma-game")
    res = cma_game(scheme, forgers[cfg.forger](), cfg.max_sign_queries, cfg.trials, cfg.seed)
    if cfg.forger == "honest":
        holds = res.forgeries == cfg.trials
    else:
        holds = res.forgeries == 0
    return dict(forger=cfg.forger), [dict(**res.to_dict(), holds=holds)], holds


def run_bounds(cfg: ExperimentConfig) -> Result:
    rows = []
    for k in range(cfg.trials):
        rng = trial_rng(cfg.seed, k)
        if cfg.lemma == "fvsv":
            P, psi = random_bound_instance(rng, cfg.proj_n, cfg.dim)
            res = projection_bound_check(P, psi, cfg.t)
            shape = dict(n=P.shape[0], m=1, dim=P.shape[-1])
        else:
            P, psi = random_two_part_instance(rng, cfg.proj_n, cfg.proj_m, cfg.dim)
            res = two_part_bound_check(P, psi)
            shape = dict(n=P.shape[0], m=P.shape[1], dim=P.shape[-1])
        rows.append(dict(instance=k, **shape, V=res.V, F=res.F, bound=res.bound, holds=res.holds))
    holds = all(r["holds"] for r in rows)
    violations = sum(not r["holds"] for r in rows)
    return dict(lemma=cfg.lemma, instances=len(rows), violations=violations), rows, holds


def run_collapse(cfg: ExperimentConfig) -> Result:
    if cfg.relation == "bijection":
        f = [(3 * x + 1) % 4 for x in range(4)]
        R, st = function_relation(f, 4), graph_state(f, 4, dS=2)
        A2, expected = pair_fourier_distinguisher(2, 4, 4, 0, 1), 0.0
    elif cfg.relation == "two-preimage":
        R, st = function_relation([0, 0], 1), graph_state([0, 0], 1, dS=2)
        A2, expected = pair_fourier_distinguisher(2, 2, 1, 0, 1), 0.5
    else:
        R, st = function_relation([0, 0], 1), graph_state([0, 0], 1, dS=2)
        A2, expected = coin_distinguisher(2, 2, 1), 0.0
    rep = collapsing_game(R, st, A2, cfg.trials, cfg.seed, name=cfg.relation)
    holds = abs(rep.advantage - expected) <= 3 * rep.stderr + SLACK
    return dict(expected=expected, **rep.to_dict()), [dict(**rep.to_dict(), expected=expected, holds=holds)], holds


def run_qcur(cfg: ExperimentConfig) -> Result:
    base = cfg.schnorr()
    rng = trial_rng(cfg.seed, 0)
    x, _ = _schnorr_key(base, rng)
    a = pow(base.g, int(rng.integers(base.r)), base.p)
    c = int(rng.integers(base.challenge_size))
    sigma = base if cfg.protocol == "schnorr" else TwoResponseProtocol(base)
    expected = 0.0 if cfg.protocol == "schnorr" else 0.5
    rep = qcur_check(sigma, x, a, c, cfg.trials, cfg.seed)
    holds = abs(rep.advantage - expected) <= 3 * rep.stderr + SLACK
    return dict(expected=expected, x=x, a=a, c=c, **rep.to_dict()), [dict(**rep.to_dict(), expected=expected, holds=holds)], holds


EXPERIMENTS: dict[str, Callable[[ExperimentConfig], Result]] = {
    "lemma1": run_lemma1,
    "thm1": run_thm1,
    "fsreduce": run_fsreduce,
    "sigma-run": run_sigma_run,
    "sigma-extract": run_sigma_extract,
    "keygen": run_keygen,
    "sign": run_sign,
    "verify": run_verify,
    "nma-game": run_nma,
    "cma-game": run_cma,
    "bounds": run_bounds,
    "collapse-game": run_collapse,
    "qcur": run_qcur,
}


# -- report writing -----------------------------------------------------------------------


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, (bytes, bytearray)):
        return o.hex()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n")


def _write_csv(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    cols: list[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _jsonable(v) if isinstance(v, (np.generic, bytes)) else v for k, v in r.items()})


def constants(cfg: ExperimentConfig) -> dict:
    q = cfg.q
    return {
        "loss_constant_2(q+1)(2q+3)": loss_constant(q),
        "lemma1_additive_1/(2(q+1)|Y|)": 1.0 / (2 * (q + 1) * (1 << cfg.n)),
        "thm1_additive_1/(2max(q,1)|Y|)": 1.0 / (2 * max(q, 1) * (1 << cfg.n)),
        "extractor_loss_t^2/|C|": cfg.t**2 / cfg.C,
        "slack": SLACK,
        "table_cap": table_cap(),
        "dim_cap": dim_cap(),
        "seed_split": "default_rng(SeedSequence([seed, *counters]))",
    }


def run(cfg: ExperimentConfig) -> int:
    summary, rows, holds = EXPERIMENTS[cfg.experiment](cfg)
    out = Path(cfg.out)
    report = {
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg.experiment,
        "config": dataclasses.asdict(cfg),
        "constants": constants(cfg),
        "summary": summary,
        "holds": bool(holds),
    }
    _write_json(out / f"{cfg.experiment}.json", report)
    _write_csv(out / f"{cfg.experiment}.csv", rows)
    print(f"{cfg.experiment}: {'holds' if holds else 'VIOLATED'} -> {out / (cfg.experiment + '.json')}")
    return 0 if holds else 1


# -- argument parsing -----------------------------------------------------------------------

_FLAGS: dict[str, dict[str, Any]] = {
    "out": dict(type=str),
    "X": dict(type=int, flag="--X"),
    "n": dict(type=int),
    "q": dict(type=int),
    "C": dict(type=int, flag="--C"),
    "t": dict(type=int),
    "trials": dict(type=int),
    "members": dict(type=int),
    "oracles": dict(type=int),
    "adversary": dict(type=str, choices=ADVERSARIES),
    "predicate": dict(type=str),
    "dim_e": dict(type=int),
    "points": dict(type=int),
    "prover": dict(type=str),
    "forger": dict(type=str),
    "max_sign_queries": dict(type=int),
    "lemma": dict(type=str, choices=("fvsv", "fvsv2")),
    "proj_n": dict(type=int),
    "proj_m": dict(type=int),
    "dim": dict(type=int),
    "relation": dict(type=str),
    "protocol": dict(type=str),
    "key": dict(type=str),
    "message": dict(type=str),
    "signature": dict(type=str),
    "oracle_seed": dict(type=int),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qromlab", description="Seeded verification experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--seed", type=int, default=None, help="master seed (mandatory here or in --config)")
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--exhaustive", action="store_true", default=None)
        for field_name, spec in _FLAGS.items():
            spec = dict(spec)
            flag = spec.pop("flag", "--" + field_name.replace("_", "-"))
            p.add_argument(flag, dest=field_name, default=None, **spec)
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    values: dict[str, Any] = {}
    if ns.config:
        raw = _load_json(ns.config, "config")
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be an object")
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"config: unknown fields {', '.join(unknown)}")
        values.update(raw)
        if values.get("experiment", ns.experiment) != ns.experiment:
            raise ConfigError("experiment: config names a different experiment")
    for name in list(_FLAGS) + ["seed", "exhaustive"]:
        v = getattr(ns, name, None)
        if v is not None:
            values[name] = v
    values["experiment"] = ns.experiment
    if values.get("seed") is None:
        raise ConfigError("seed: mandatory (pass --seed or set it in the config)")
    return ExperimentConfig(**values)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return run(cfg)
    except (ConfigError, TypeError) as e:
        parser.error(str(e))
    except CapacityError as e:
        print(f"capacity error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
