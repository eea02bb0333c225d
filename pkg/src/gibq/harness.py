"""End-to-end norm-inflation experiments and estimate bookkeeping.

Every asymptotic comparison from the construction is turned into a logged
ratio: the six parameter conditions, the multilinear estimate lines, and
the lower bound on the first Picard term.  Nothing here asserts a
universal constant; pass windows live in the caller's configuration.

The measured solution norm can come from three methods: the truncated
power series (which refuses to report when its ledger is not decaying),
the fixed-point iteration, or the independent RK4 oracle.  At desk-scale
parameters the scheduled horizon sits outside the contraction regime, so
the RK4 route is the honest default for solution norms; the series ledger
is still recorded run by run.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .construction import (
    CUBE_CENTERS,
    BumpData,
    InflationParams,
    make_bump,
    perturbed_data,
    sample_base_data,
    schedule,
    schedule_from_N,
)
from .errors import ConfigError, SeriesDivergenceError
from .flow import InitialPair, duhamel, linear_flow
from .lattice import SpectralField, bracket
from .norms import NormSpec, norm
from .oracle import closure_from_depth, rk4_solve, xi1_closed_form
from .series import fixed_point, partial_sum

SCHEMA_VERSION = 1


# ----------------------------------------------------------------------
# scalar ledgers
# ----------------------------------------------------------------------

def g_weight(s: float, A: int) -> float:
    """Low-frequency bracket mass: 1, (log A)^(1/2) or A^(1/2+s) by the
    position of s relative to -1/2."""
    if s < -0.5:
        return 1.0
    if s == -0.5:
        return math.sqrt(math.log(A))
    return float(A) ** (0.5 + s)


def f_weight(s: float, q: float, A: int) -> float:
    """lq norm of the bracket weight over the integer cube [-A/2, A/2]."""
    xs = np.arange(-(A // 2), A // 2 + 1)
    vals = bracket(xs) ** s
    if math.isinf(q):
        return float(np.max(vals))
    return float(np.sum(vals**q) ** (1.0 / q))


@dataclass
class ConditionRecord:
    name: str
    lhs: float
    rhs: float
    measured: float | None = None

    @property
    def margin(self) -> float:
        return self.lhs / self.rhs if self.rhs else math.inf

    @property
    def holds(self) -> bool:
        return self.margin < 1.0

    def as_dict(self) -> dict:
        return {
            "name": self.name, "lhs": self.lhs, "rhs": self.rhs,
            "margin": self.margin, "holds": self.holds,
            "measured": self.measured,
        }


@dataclass
class LemmaLine:
    name: str
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs else math.inf

    def as_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "ratio": self.ratio}


@dataclass
class EstimateLedger:
    g_s_of_A: float
    f_sq_of_A: dict
    conditions: list = field(default_factory=list)
    lemma_lines: list = field(default_factory=list)
    xi1_lower_ratio: float | None = None

    def condition(self, name: str) -> ConditionRecord:
        for rec in self.conditions:
            if rec.name == name:
                return rec
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "g_s_of_A": self.g_s_of_A,
            "f_sq_of_A": self.f_sq_of_A,
            "conditions": [c.as_dict() for c in self.conditions],
            "lemma_lines": [l.as_dict() for l in self.lemma_lines],
            "xi1_lower_ratio": self.xi1_lower_ratio,
        }


def check_conditions(params: InflationParams,
                     base: InitialPair | None) -> EstimateLedger:
    """Evaluate parameter conditions (i)-(vi) with measured companions.

    Failures are recorded, never raised.  When sigma < s the powers of A
    in (iii), (iv) and (v) switch to the sigma variant.
    """
    n, k, s, A, N, R, T = (params.n, params.k, params.s, params.A,
                           params.N, params.R, params.T)
    sig = min(params.sigma, s)
    gs = g_weight(s, A)
    fs = {q: f_weight(s, qv, A)
          for q, qv in (("1", 1.0), ("2", 2.0), ("inf", math.inf))}

    base_h0 = norm(base, NormSpec("sobolev_pair", 0.0)) if base else 0.0
    base_fl1 = norm(base, NormSpec("wiener_pair")) if base else 0.0

    conds = [
        ConditionRecord("i: perturbation below 1/n",
                        n * R * math.sqrt(A) * N**s, 1.0),
        ConditionRecord("ii: contraction quantity",
                        T**2 * R ** (k - 1) * A ** (k - 1), 1.0,
                        measured=0.5 * T**2 * (4.0 * (A + 1) * R) ** (k - 1)),
        ConditionRecord("iii-a: base H0 small",
                        base_h0, R * A ** (0.5 + sig)),
        ConditionRecord("iii-b: base Wiener small", base_fl1, R * A),
        ConditionRecord("iv: tail below main term",
                        T**4 * (R * A) ** (2 * (k - 1)) * R * gs,
                        T**2 * R**k * A ** (k - 0.5 + sig)),
        ConditionRecord("v: main term above n",
                        float(n), T**2 * R**k * A ** (k - 0.5 + sig)),
        ConditionRecord("vi: cube separation", 64.0 * A, float(N)),
    ]
    return EstimateLedger(g_s_of_A=gs, f_sq_of_A=fs, conditions=conds)


# ----------------------------------------------------------------------
# resonant split
# ----------------------------------------------------------------------

@dataclass
class ResonantSplit:
    sigma1: list      # k-tuples of cube centres (multiples of N) summing to 0
    sigma2: list
    i1: SpectralField
    i2: SpectralField

    def reconstruction(self, scale: float) -> SpectralField:
        return (self.i1 + self.i2).scale(scale)


def resonant_split(bump: BumpData, horizon: float) -> ResonantSplit:
    """Partition the first Picard term by whether the contributing cube
    centres sum to zero.  Supports: i1 inside the k*A cube around zero, i2
    inside cubes around the nonzero multiples of N."""
    k = bump.params.k
    tuples = list(itertools.product(CUBE_CENTERS, repeat=k))
    sigma1 = [t for t in tuples if sum(t) == 0]
    sigma2 = [t for t in tuples if sum(t) != 0]
    if not sigma1 or not sigma2:
        raise ValueError(
            f"degenerate resonant split for k={k}: "
            f"|Sigma1|={len(sigma1)}, |Sigma2|={len(sigma2)}"
        )
    i1 = xi1_closed_form(bump, horizon, unit_amplitude=True,
                         centre_filter=lambda c: sum(c) == 0)
    i2 = xi1_closed_form(bump, horizon, unit_amplitude=True,
                         centre_filter=lambda c: sum(c) != 0)
    return ResonantSplit(sigma1=sigma1, sigma2=sigma2, i1=i1, i2=i2)


# ----------------------------------------------------------------------
# inflation runs
# ----------------------------------------------------------------------

def family_label(spec_dict: dict) -> str:
    fam = spec_dict["family"]
    q = spec_dict.get("q", math.inf)
    if fam in ("sobolev", "w_s2inf"):
        return fam
    qtxt = "inf" if (q is None or math.isinf(float(q))) else f"{float(q):g}"
    return f"{fam}_q{qtxt}"


def _family_spec(spec_dict: dict, s: float) -> NormSpec:
    q = spec_dict.get("q", math.inf)
    q = math.inf if q in (None, "inf") else float(q)
    return NormSpec(spec_dict["family"], s=s, q=q)


@dataclass
class InflationReport:
    schema_version: int
    params: dict
    seed: int | None
    families: list
    perturbation: dict          # label -> norm of the perturbation pair
    xi_terms_at_T: list         # per j: dict of norms of the full-data term
    xi1_bump: dict              # norms of the bump's first Picard term
    i1_hs: float
    i2_hs: float
    i2_over_i1: float
    split_reconstruction_error: float
    tail_sum_hs: float          # sum_{j>=2} H^s norms of the full-data terms
    ledger: dict
    series_ledger: list
    series_ratios: list
    series_converged: bool
    solution_method: str
    solution_norms: dict | None
    runtime_seconds: float = 0.0

    def as_dict(self, include_runtime: bool = False) -> dict:
        doc = {
            "schema_version": self.schema_version,
            "params": self.params,
            "seed": self.seed,
            "families": self.families,
            "perturbation": self.perturbation,
            "xi_terms_at_T": self.xi_terms_at_T,
            "xi1_bump": self.xi1_bump,
            "i1_hs": self.i1_hs,
            "i2_hs": self.i2_hs,
            "i2_over_i1": self.i2_over_i1,
            "split_reconstruction_error": self.split_reconstruction_error,
            "tail_sum_hs": self.tail_sum_hs,
            "ledger": self.ledger,
            "series_ledger": self.series_ledger,
            "series_ratios": self.series_ratios,
            "series_converged": self.series_converged,
            "solution_method": self.solution_method,
            "solution_norms": self.solution_norms,
        }
        if include_runtime:
            doc["runtime_seconds"] = self.runtime_seconds
        return doc


def run_inflation(params: InflationParams,
                  base_seed: int | None = None,
                  base_amplitude: float = 0.0,
                  base_decay: float = 0.25,
                  families: list | None = None,
                  max_gen: int = 4,
                  degree: int = 16,
                  method: str = "rk4",
                  rk4_depth: int = 18,
                  rk4_steps: int = 400,
                  rk4_tail_tol: float = 1e-10,
                  fp_tol: float = 1e-9) -> InflationReport:
    """One full experiment at fixed parameters.

    Builds the perturbed data, computes series terms up to max_gen,
    evaluates every recorded quantity, and measures the solution norm by
    the requested method.  The series/fixed-point methods raise
    SeriesDivergenceError when the term ledger is not decaying; the rk4
    method never needs the series to converge.
    """
    t_start = time.perf_counter()
    if families is None:
        families = [{"family": "sobolev"}]
    if max_gen < 2:
        raise ValueError("max_gen must be >= 2")
    lattice = params.lattice(max_gen=max(max_gen, 8),
                             ode_depth=max(20, rk4_depth + 2))
    bump = make_bump(params, lattice)
    if base_seed is not None and base_amplitude > 0:
        base = sample_base_data(base_seed, base_decay, base_amplitude, lattice)
    else:
        base = InitialPair.zero(lattice)
    data = perturbed_data(base, bump)

    hs_pair = NormSpec("sobolev_pair", params.s)
    hs = NormSpec("sobolev", params.s)
    hsig = NormSpec("sobolev", params.sigma)
    h0_pair = NormSpec("sobolev_pair", 0.0)

    ledger = check_conditions(params, base if base_amplitude > 0 else None)

    # perturbation norms (the bump is the perturbation)
    perturbation = {
        "sobolev_pair": norm(bump.phi, hs_pair),
        "w_s2inf_pair": norm(bump.phi, NormSpec("w_s2inf", params.s)),
    }
    for fdict in families:
        spec = _family_spec(fdict, params.s)
        perturbation[family_label(fdict)] = norm(bump.phi, spec)

    # series terms of the full data
    acc = partial_sum(data, params.k, max_gen, params.T, degree)
    final = acc.partial.nodes.size - 1
    term_fields = [t.trajectory.fields[final] for t in acc.terms]
    xi_rows = []
    for j, f in enumerate(term_fields):
        row = {"j": j, "sobolev": norm(f, hs), "fl1_sup": acc.ledger[j]}
        for fdict in families:
            row[family_label(fdict)] = norm(f, _family_spec(fdict, params.s))
        xi_rows.append(row)
    tail_sum_hs = float(sum(row["sobolev"] for row in xi_rows if row["j"] >= 2))

    # first Picard term of the bump alone, Duhamel path
    flow_bump = linear_flow(bump.phi, params.T, degree)
    xi1_bump_field = duhamel([flow_bump] * params.k, params.T, degree)
    xi1_bump = {
        "sobolev": norm(xi1_bump_field, hs),
        "sobolev_sigma": norm(xi1_bump_field, hsig),
    }
    for fdict in families:
        xi1_bump[family_label(fdict)] = norm(
            xi1_bump_field, _family_spec(fdict, params.s))

    # resonant split (closed-form path) and its reconstruction error
    split = resonant_split(bump, params.T)
    recon = split.reconstruction(params.R ** params.k)
    denom = max(xi1_bump_field.sup(), 1e-300)
    recon_err = (recon - xi1_bump_field).sup() / denom
    i1_hs = norm(split.i1, hs)
    i2_hs = norm(split.i2, hs)

    # lower-bound ratio for the first Picard term in the target regularity
    pred = (params.R ** params.k * params.T**2
            * params.A ** (params.k - 0.5 + params.sigma))
    ledger.xi1_lower_ratio = xi1_bump["sobolev_sigma"] / pred

    # multilinear estimate lines at t = T
    lines = [LemmaLine("perturbation vs R N^s A^(1/2)",
                       perturbation["sobolev_pair"],
                       params.R * params.N**params.s * math.sqrt(params.A))]
    base_hs = norm(base, hs_pair) if base_amplitude > 0 else 0.0
    base_h0 = norm(base, h0_pair) if base_amplitude > 0 else 0.0
    lines.append(LemmaLine(
        "linear term vs base + R A^(1/2) N^s",
        xi_rows[0]["sobolev"],
        base_hs + params.R * math.sqrt(params.A) * params.N**params.s,
    ))
    if base_amplitude > 0:
        # difference of first terms: all argument tuples with >= 1 base slot
        flow_base = linear_flow(base, params.T, degree)
        diff_field = _mixed_first_term(flow_base, flow_bump, params.k,
                                       params.T, degree)
        lines.append(LemmaLine(
            "mixed first-term remainder",
            norm(diff_field, hs),
            params.T**2 * params.R ** (params.k - 1)
            * params.A ** (params.k - 1) * base_h0,
        ))
    for j in range(2, max_gen + 1):
        rhs = (params.T ** (2 * j) * (params.R * params.A) ** ((params.k - 1) * j)
               * (base_h0 + params.R * ledger.g_s_of_A))
        lines.append(LemmaLine(f"term j={j} vs tail bound",
                               xi_rows[j]["sobolev"], rhs))
    ledger.lemma_lines = lines

    # solution norm by the requested method
    ratios = acc.ratios()
    converged = all(r < 1.0 for r in ratios)
    solution_norms = None
    solution_field = None
    if method == "series":
        if not converged:
            raise SeriesDivergenceError(
                "series ledger not decaying at these parameters; "
                "use method='rk4' for the solution norm",
                ratios,
            )
        solution_field = acc.partial.fields[final]
    elif method == "fixed-point":
        traj = fixed_point(data, params.k, params.T, fp_tol, degree)
        solution_field = traj.fields[-1]
    elif method == "rk4":
        closure = closure_from_depth(data, params.k, depth=rk4_depth)
        traj, diag = rk4_solve(data, params.T, params.T / rk4_steps,
                               closure, k=params.k, tail_tol=rk4_tail_tol)
        if diag.blowup_time is not None:
            solution_norms = {
                "status": "blow-up before horizon",
                "blowup_time": diag.blowup_time,
                "max_tail_fraction": diag.max_tail_fraction,
            }
        else:
            solution_field = traj.fields[-1]
    elif method == "none":
        pass
    else:
        raise ConfigError(f"unknown method {method!r}")
    if solution_field is not None:
        solution_norms = {"sobolev": norm(solution_field, hs),
                          "sobolev_sigma": norm(solution_field, hsig)}
        if method == "rk4":
            solution_norms["max_tail_fraction"] = diag.max_tail_fraction
        for fdict in families:
            solution_norms[family_label(fdict)] = norm(
                solution_field, _family_spec(fdict, params.s))

    return InflationReport(
        schema_version=SCHEMA_VERSION,
        params=params.as_dict(),
        seed=base_seed,
        families=[family_label(f) for f in families],
        perturbation=perturbation,
        xi_terms_at_T=xi_rows,
        xi1_bump=xi1_bump,
        i1_hs=i1_hs,
        i2_hs=i2_hs,
        i2_over_i1=i2_hs / i1_hs if i1_hs else math.inf,
        split_reconstruction_error=recon_err,
        tail_sum_hs=tail_sum_hs,
        ledger=ledger.as_dict(),
        series_ledger=[float(x) for x in acc.ledger],
        series_ratios=[float(r) for r in ratios],
        series_converged=converged,
        solution_method=method,
        solution_norms=solution_norms,
        runtime_seconds=time.perf_counter() - t_start,
    )


def _mixed_first_term(flow_base, flow_bump, k: int, horizon: float,
                      degree: int) -> SpectralField:
    """Sum of first-order Duhamel terms with at least one base argument."""
    total = None
    for pattern in itertools.product((0, 1), repeat=k):
        if all(p == 1 for p in pattern):
            continue
        args = [flow_bump if p else flow_base for p in pattern]
        piece = duhamel(args, horizon, degree)
        total = piece if total is None else total + piece
    return total


# ----------------------------------------------------------------------
# sweeps
# ----------------------------------------------------------------------

_CONFIG_KEYS = {
    "k", "s", "sigma", "delta", "n_list", "N_list", "families", "seed",
    "J", "p", "method", "base_amplitude", "base_decay", "rk4_depth",
    "rk4_steps", "rk4_tail_tol",
}

_REQUIRED_KEYS = {"k", "s", "families", "seed", "J", "p", "method"}


def validate_config(config: dict) -> dict:
    """Schema-check an inflation sweep configuration."""
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(config) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = _REQUIRED_KEYS - set(config)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    has_n = "n_list" in config
    has_N = "N_list" in config
    if has_n == has_N:
        raise ConfigError("exactly one of n_list or N_list is required")
    if config["method"] not in ("series", "fixed-point", "rk4", "none"):
        raise ConfigError(f"unknown method {config['method']!r}")
    if not isinstance(config["families"], list) or not all(
        isinstance(f, dict) and "family" in f for f in config["families"]
    ):
        raise ConfigError("families must be a list of {family, q} objects")
    if float(config["s"]) >= 0:
        raise ConfigError("s must be negative")
    return config


def config_hash(config: dict) -> str:
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


CSV_COLUMNS = [
    "index_kind", "index", "N", "R", "T", "A", "delta", "s", "sigma", "k",
    "seed", "J", "method", "perturbation_hs_pair", "perturbation_w_s2inf",
    "xi1_bump_hs", "xi1_bump_hsigma", "xi1_lower_ratio", "i1_hs", "i2_hs",
    "i2_over_i1", "tail_sum_hs", "solution_hs", "series_converged",
    "series_max_ratio", "cond_i", "cond_ii", "cond_iii_a", "cond_iii_b",
    "cond_iv", "cond_v", "cond_vi", "error",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def sweep(config: dict, threads: int = 0):
    """Run the configured sweep; returns (reports, csv_text, manifest).

    threads > 1 runs sweep points in a thread pool (the heavy work releases
    the GIL inside the FFTs); outputs are assembled in config order either
    way, so the CSV bytes are independent of parallelism.
    """
    config = validate_config(config)
    indices = config.get("n_list") or config.get("N_list")
    kind = "n" if "n_list" in config else "N"
    families = config["families"]
    labels = [family_label(f) for f in families]
    columns = list(CSV_COLUMNS)
    for lab in labels:
        columns += [f"pert_{lab}", f"xi1_{lab}", f"solution_{lab}"]

    def one_run(value):
        if kind == "n":
            params = schedule(int(value), int(config["k"]),
                              float(config["s"]),
                              sigma=config.get("sigma"),
                              delta_hint=config.get("delta"))
        else:
            params = schedule_from_N(int(value), int(config["k"]),
                                     float(config["s"]),
                                     sigma=config.get("sigma"),
                                     delta_hint=config.get("delta"))
        return run_inflation(
            params,
            base_seed=int(config["seed"]),
            base_amplitude=float(config.get("base_amplitude", 0.0)),
            base_decay=float(config.get("base_decay", 0.25)),
            families=families,
            max_gen=int(config["J"]),
            degree=int(config["p"]),
            method=config["method"],
            rk4_depth=int(config.get("rk4_depth", 18)),
            rk4_steps=int(config.get("rk4_steps", 400)),
            rk4_tail_tol=float(config.get("rk4_tail_tol", 1e-10)),
        )

    outcomes = []
    if threads and threads > 1 and len(indices) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(one_run, value) for value in indices]
            for future in futures:
                try:
                    outcomes.append((future.result(), None))
                except Exception as exc:
                    outcomes.append((None, exc))
    else:
        for value in indices:
            try:
                outcomes.append((one_run(value), None))
            except Exception as exc:  # isolate per-run failures
                outcomes.append((None, exc))

    reports = []
    rows = []
    for value, (report, exc) in zip(indices, outcomes):
        row = {c: None for c in columns}
        row["index_kind"] = kind
        row["index"] = value
        reports.append(report)
        if report is not None:
            _fill_row(row, report, labels)
        else:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)

    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    csv_text = "\n".join(lines) + "\n"
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "config_hash": config_hash(config),
        "rows": len(rows),
        "columns": columns,
    }
    return reports, csv_text, manifest


def _fill_row(row: dict, report: InflationReport, labels: list):
    p = report.params
    row.update({
        "N": p["N"], "R": p["R"], "T": p["T"], "A": p["A"],
        "delta": p["delta"], "s": p["s"], "sigma": p["sigma"], "k": p["k"],
        "seed": report.seed, "J": len(report.xi_terms_at_T) - 1,
        "method": report.solution_method,
        "perturbation_hs_pair": report.perturbation["sobolev_pair"],
        "perturbation_w_s2inf": report.perturbation["w_s2inf_pair"],
        "xi1_bump_hs": report.xi1_bump["sobolev"],
        "xi1_bump_hsigma": report.xi1_bump["sobolev_sigma"],
        "xi1_lower_ratio": report.ledger["xi1_lower_ratio"],
        "i1_hs": report.i1_hs, "i2_hs": report.i2_hs,
        "i2_over_i1": report.i2_over_i1,
        "tail_sum_hs": report.tail_sum_hs,
        "solution_hs": (report.solution_norms or {}).get("sobolev"),
        "series_converged": report.series_converged,
        "series_max_ratio": max(report.series_ratios, default=0.0),
        "error": "",
    })
    for name, col in (("i: perturbation below 1/n", "cond_i"),
                      ("ii: contraction quantity", "cond_ii"),
                      ("iii-a: base H0 small", "cond_iii_a"),
                      ("iii-b: base Wiener small", "cond_iii_b"),
                      ("iv: tail below main term", "cond_iv"),
                      ("v: main term above n", "cond_v"),
                      ("vi: cube separation", "cond_vi")):
        for rec in report.ledger["conditions"]:
            if rec["name"] == name:
                row[col] = rec["margin"]
    for lab in labels:
        row[f"pert_{lab}"] = report.perturbation.get(lab)
        row[f"xi1_{lab}"] = report.xi1_bump.get(lab)
        row[f"solution_{lab}"] = (report.solution_norms or {}).get(lab)
