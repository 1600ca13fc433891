"""Command-line interface.

Subcommands: analyze, ratios, mink, schedule, verify, generate-family, jw.
Exit codes: 0 success, 1 verification failure, 2 input error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import anticommuting as ac
from . import bounds as bd
from . import lcu
from . import oracle
from . import pauli as pl
from .errors import AnticommError, BudgetExceeded
from .hamiltonian import FermionIntegrals, Hamiltonian, jordan_wigner, load_hamiltonian, serialize
from .pauli import PauliString
from .structure import analyze, cancellation_report, default_extra_count

log = logging.getLogger("anticomm")

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

ANALYZE_COLUMNS = ("label", "n_qubits", "L", "alpha", "alpha_comm", "alpha_anti", "q2", "alpha3", "alpha3_r",
                   "alpha3_star", "alpha4", "e_epsilon", "q3", "q4", "epsilon_A", "epsilon_method",
                   "alpha3_method", "alpha4_method", "pairwise_anticommuting")
MINK_COLUMNS = ("molecule_label", "epsilon", "t", "r", "K_original", "K_refined2", "K_modified")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    inputs: list[Path] = field(default_factory=list)
    schemes: list[str] = field(default_factory=lambda: ["original", "refined2"])
    k_grid: list[int] = field(default_factory=lambda: list(range(2, 41)))
    eps_grid: list[float] = field(default_factory=lambda: [10.0 ** -e for e in range(6, 21)])
    t_mode: str = "ln2"
    t: float | None = None
    extra_unitaries: str = "max"
    dense_cap: int = pl.DENSE_CAP
    out: Path | None = None
    seed: int = 0
    workers: int = 1

    def time_for(self, h: Hamiltonian) -> float:
        if self.t_mode == "explicit":
            if self.t is None:
                raise ValueError("--t-mode explicit needs --t")
            return self.t
        if self.t_mode == "ln2":
            return bd.LN2 / h.alpha
        if self.t_mode == "n":
            return float(h.n_qubits)
        raise ValueError(f"unknown t mode {self.t_mode!r}")

    def extra_count(self, h: Hamiltonian) -> int:
        if self.extra_unitaries == "max":
            return default_extra_count(h.L)
        return int(self.extra_unitaries)


def parse_k_grid(text: str) -> list[int]:
    """``"2:40"`` (inclusive range), ``"2:40:2"`` or ``"10,20,30"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            lo, hi = bits[0], bits[1]
            step = bits[2] if len(bits) > 2 else 1
            out.extend(range(lo, hi + 1, step))
        elif part:
            out.append(int(part))
    if not out or min(out) < 1:
        raise ValueError("K grid must be non-empty with K >= 1")
    return out


def parse_eps_grid(text: str) -> list[float]:
    """``"1e-6:1e-20"`` (every decade in between) or ``"1e-3,1e-6"``."""
    out: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            a, b = (float(v) for v in part.split(":"))
            ea, eb = round(math.log10(a)), round(math.log10(b))
            step = -1 if eb < ea else 1
            out.extend(float(f"1e{e}") for e in range(ea, eb + step, step))
        elif part:
            out.append(float(part))
    if not out or min(out) <= 0:
        raise ValueError("accuracy grid must be non-empty and positive")
    return out


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def _write_csv(rows: list[dict], columns: Sequence[str], dest: Path | None, name: str) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    text = buf.getvalue()
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.mkdir(parents=True, exist_ok=True)
        (dest / name).write_text(text, encoding="utf-8")


def _load_all(cfg: RunConfig) -> list[Hamiltonian]:
    if not cfg.inputs:
        raise ValueError("no --input given")
    return [load_hamiltonian(Path(p)) for p in cfg.inputs]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def analyze_row(h: Hamiltonian, cfg: RunConfig) -> dict:
    s = analyze(h, cfg.workers)
    rep = cancellation_report(h, cfg.extra_count(h), s, workers=cfg.workers)
    if s.pairwise_anticommuting:
        eps, eps_m = 0.0, "structure"
    else:
        eps, eps_m = ac.epsilon_A(h, cfg.dense_cap)
    row = {"label": h.label, "n_qubits": h.n_qubits, "L": h.L, "epsilon_A": eps, "epsilon_method": eps_m,
           "pairwise_anticommuting": s.pairwise_anticommuting}
    row.update(rep.to_dict())
    log.debug("%s: alpha3 via %s, alpha4 via %s", h.label, row.get("alpha3_method"), row.get("alpha4_method"))
    return row


def cmd_analyze(cfg: RunConfig) -> int:
    rows = [analyze_row(h, cfg) for h in _load_all(cfg)]
    _write_csv(rows, ANALYZE_COLUMNS, cfg.out, "analyze.csv")
    return EXIT_OK


def _bound_inputs(h: Hamiltonian, cfg: RunConfig, schemes: Sequence[str]) -> bd.BoundInputs:
    s = analyze(h, cfg.workers)
    if not any(x in schemes for x in ("refined3", "refined4", "modified")):
        return bd.BoundInputs(alpha=h.alpha, alpha_comm=s.alpha_comm, label=h.label)
    rep = cancellation_report(h, cfg.extra_count(h), s, workers=cfg.workers)
    return bd.BoundInputs.from_report(rep, h.label)


def cmd_ratios(cfg: RunConfig) -> int:
    rows = []
    for h in _load_all(cfg):
        inputs = _bound_inputs(h, cfg, cfg.schemes)
        t = cfg.time_for(h)
        table = bd.ratio_table(inputs, cfg.k_grid, cfg.schemes, t)
        rows.extend(vars(r) for r in table)
        if cfg.out is not None:
            cfg.out.mkdir(parents=True, exist_ok=True)
            for scheme in cfg.schemes:
                pts = [(r.K, r.ratio_vs_original) for r in table if r.scheme == scheme]
                name = f"{h.label or 'hamiltonian'}_{scheme}.dat"
                body = "# K ratio_vs_original\n" + "".join(f"{k} {v!r}\n" for k, v in pts)
                (cfg.out / name).write_text(body, encoding="utf-8")
    _write_csv(rows, bd.RATIO_COLUMNS, cfg.out, "ratios.csv")
    return EXIT_OK


def cmd_mink(cfg: RunConfig) -> int:
    rows = []
    for h in _load_all(cfg):
        inputs = _bound_inputs(h, cfg, ("modified",))
        t = cfg.time_for(h)
        r = bd.segment_count(h.alpha, t)
        for eps in cfg.eps_grid:
            row = {"molecule_label": h.label, "epsilon": eps, "t": t, "r": r}
            for scheme in ("original", "refined2", "modified"):
                row[f"K_{scheme}"] = bd.min_K(scheme, inputs, t, eps)
            rows.append(row)
    _write_csv(rows, MINK_COLUMNS, cfg.out, "mink.csv")
    return EXIT_OK


def cmd_schedule(cfg: RunConfig, K: int, scheme: str) -> int:
    out = []
    for h in _load_all(cfg):
        t = cfg.time_for(h)
        s = analyze(h)
        entry = {"label": h.label, "t": t, "alpha": h.alpha, "beta_s": h.beta_s}
        if scheme == "exact" or (scheme == "auto" and s.pairwise_anticommuting):
            if not s.pairwise_anticommuting:
                raise ac.NotAnticommutingError("exact schedule needs pairwise anticommuting terms")
            entry["scheme"] = "exact"
            entry["schedule"] = ac.schedule(t, h.alpha, h.beta_s).to_dict()
        else:
            sch = "original" if scheme == "auto" else scheme
            E = cfg.extra_count(h)
            plan = lcu.plan_simulation(h, t, K, sch, E if sch == "modified" else None)
            entry.update(plan.to_dict())
            if h.L >= 4:
                entry["gate_cost"] = lcu.plan_gate_cost(h, plan).to_dict()
        out.append(entry)
    text = json.dumps(out if len(out) > 1 else out[0], indent=2) + "\n"
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / "schedule.json").write_text(text, encoding="utf-8")
    return EXIT_OK


# -- verify ------------------------------------------------------------------

@dataclass
class Check:
    name: str
    measured: float
    bound: float
    tol: float = 1e-12

    @property
    def ok(self) -> bool:
        return self.bound - self.measured >= -self.tol

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        return f"{tag} {self.name}: measured={self.measured:.6e} bound={self.bound:.6e} margin={self.bound - self.measured:.3e}"


def random_hamiltonian(rng: np.random.Generator, n: int, L: int, label: str = "") -> Hamiltonian:
    """Random distinct non-identity Pauli terms with coefficients in [-1, 1]."""
    L = min(L, 4 ** n - 1)
    seen: set[tuple[int, int]] = set()
    terms = []
    while len(terms) < L:
        x, z = int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n))
        if (x, z) == (0, 0) or (x, z) in seen:
            continue
        seen.add((x, z))
        c = float(rng.uniform(0.05, 1.0)) * (1 if rng.random() < 0.5 else -1)
        terms.append((c, PauliString(n, x, z)))
    return Hamiltonian.from_terms(terms, n, label)


def verify_hamiltonian(h: Hamiltonian, cfg: RunConfig, Ks: Sequence[int] = (2, 3, 5, 8), corrupt: float = 1.0) -> list[Check]:
    conf = oracle.OracleConfig(n_max=cfg.dense_cap)
    checks: list[Check] = []
    tag = h.label or "H"
    H = h.dense(cfg.dense_cap)
    s = analyze(h)
    rep = cancellation_report(h, cfg.extra_count(h), s)
    for m, bound in ((2, rep.alpha_comm), (3, rep.alpha3), (4, rep.alpha4)):
        checks.append(Check(f"{tag} ||H^{m}|| <= alpha{m}", oracle.spectral_norm(np.linalg.matrix_power(H, m), conf),
                            corrupt * bound))
    t = bd.LN2 / h.alpha
    U0 = oracle.expm_dense(H, t)
    inputs = bd.BoundInputs.from_report(rep)
    mi = None
    for K in Ks:
        meas = oracle.spectral_norm(lcu.build_truncated(h, t, K).dense(cfg.dense_cap) - U0, conf)
        checks.append(Check(f"{tag} truncated K={K} <= refined2",
                            meas, corrupt * bd.refined_delta_order2(h.alpha, s.alpha_comm, t, K)))
        if K % 2 == 1:
            mi = mi or lcu.ModifiedInputs.compute(h, cfg.extra_count(h), s)
            plan = lcu.build_modified(h, t, K, cfg.extra_count(h), mi)
            meas = oracle.spectral_norm(plan.dense(cfg.dense_cap) - U0, conf)
            checks.append(Check(f"{tag} modified K={K} <= modified bound", meas,
                                corrupt * bd.modified_delta(inputs.with_(e_epsilon=mi.extra.e_epsilon), t, K)))
    tp = 0.5 / h.alpha
    meas = oracle.spectral_norm(oracle.pf1_product(h, tp, 1, conf) - oracle.expm_dense(H, tp), conf)
    checks.append(Check(f"{tag} PF1 <= commutator bound", meas, corrupt * bd.pf1_bound(h, tp, 1, s, mode="exact",
                                                                                    cap=cfg.dense_cap)))
    if s.pairwise_anticommuting:
        for tt in (0.1, 1.0, 5.0):
            tt = tt / h.beta_s
            coeffs = ac.exact_coefficients(h, tt)
            meas = oracle.spectral_norm(coeffs.dense(cfg.dense_cap) - oracle.expm_dense(H, tt), conf)
            checks.append(Check(f"{tag} exact anticommuting t={tt:.4g}", meas, corrupt * 1e-10, tol=0.0))
    return checks


def cmd_verify(cfg: RunConfig, count: int, corrupt: float) -> int:
    hams: list[Hamiltonian] = []
    if cfg.inputs:
        hams = _load_all(cfg)
    else:
        rng = np.random.default_rng(cfg.seed)
        for i in range(count):
            n = int(rng.integers(1, 5))
            hams.append(random_hamiltonian(rng, n, int(rng.integers(2, 9)), f"random-{i}"))
        hams.append(ac.generate_family(4, list(rng.uniform(0.1, 1.0, 4)), "family-4"))
    failed = 0
    total = 0
    for h in hams:
        if h.n_qubits > cfg.dense_cap:
            print(f"SKIP {h.label}: {h.n_qubits} qubits exceeds dense cap {cfg.dense_cap}")
            continue
        for c in verify_hamiltonian(h, cfg, corrupt=corrupt):
            total += 1
            failed += not c.ok
            print(c.line())
    print(f"{total - failed}/{total} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


# -- generators ----------------------------------------------------------------

def cmd_generate_family(n: int, coeffs: list[float] | None, eps_A: float | None, seed: int | None,
                        out: Path | None) -> int:
    if coeffs is None and seed is not None:
        coeffs = list(np.random.default_rng(seed).uniform(0.1, 1.0, n))
    h = ac.perturbed_family(n, eps_A, coeffs) if eps_A else ac.generate_family(n, coeffs)
    _emit_text(serialize(h), out)
    return EXIT_OK


def load_integrals(path: Path) -> FermionIntegrals:
    """``.npz`` with arrays ``one_body`` (and optional ``two_body``) or JSON with the same keys."""
    if path.suffix == ".npz":
        with np.load(path) as data:
            one = data["one_body"]
            two = data["two_body"] if "two_body" in data else None
    else:
        data = json.loads(path.read_text(encoding="utf-8"))
        one = np.asarray(data["one_body"], dtype=float)
        two = np.asarray(data["two_body"], dtype=float) if data.get("two_body") is not None else None
    return FermionIntegrals(one.shape[0], one, two)


def cmd_jw(cfg: RunConfig) -> int:
    if len(cfg.inputs) != 1:
        raise ValueError("jw takes exactly one --input")
    path = Path(cfg.inputs[0])
    h = jordan_wigner(load_integrals(path), label=path.stem)
    _emit_text(serialize(h), cfg.out if cfg.out is None or cfg.out.suffix else cfg.out / f"{path.stem}.txt")
    return EXIT_OK


def _emit_text(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, t_default: str = "ln2") -> None:
    p.add_argument("--input", action="append", default=[], type=Path, help="term-list file (repeatable)")
    p.add_argument("--t-mode", choices=("explicit", "ln2", "n"), default=t_default,
                   help="evolution time: --t value, ln2/alpha, or number of qubits")
    p.add_argument("--t", type=float, help="time for --t-mode explicit")
    p.add_argument("--extra-unitaries", default="max",
                   help="extra unitaries E for the modified scheme: 'max' (2^w-L-1) or an integer")
    p.add_argument("--dense-cap", type=int, default=pl.DENSE_CAP)
    p.add_argument("--out", type=Path, help="output directory (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anticomm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="commutation structure and cancellation parameters")
    _common(p)

    p = sub.add_parser("ratios", help="error-bound ratios versus the original scheme")
    _common(p)
    p.add_argument("--k-grid", default="2:40")
    p.add_argument("--scheme", default="original,refined2",
                   help="comma-separated subset of " + ",".join(bd.SCHEMES))

    p = sub.add_parser("mink", help="minimum truncation order per accuracy")
    _common(p, t_default="n")
    p.add_argument("--eps-grid", default="1e-6:1e-20")

    p = sub.add_parser("schedule", help="segment schedule and LCU plan summary as JSON")
    _common(p, t_default="explicit")
    p.add_argument("--scheme", default="auto", choices=("auto", "exact", "original", "modified"))
    p.add_argument("--K", type=int, default=11)

    p = sub.add_parser("verify", help="check bounds against the dense oracle")
    _common(p)
    p.add_argument("--count", type=int, default=20, help="random Hamiltonians when no --input is given")
    p.add_argument("--corrupt-bound", type=float, default=1.0, help=argparse.SUPPRESS)

    p = sub.add_parser("generate-family", help="write the pairwise-anticommuting family as a term list")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--coeffs", type=lambda s: [float(v) for v in s.split(",")])
    p.add_argument("--eps-A", type=float, help="perturb with c*Z0 so that ||H^2 - beta_s^2 I|| = eps_A")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, help="output file (default: stdout)")

    p = sub.add_parser("jw", help="Jordan-Wigner transform of integrals (.npz or .json)")
    p.add_argument("--input", action="append", default=[], type=Path)
    p.add_argument("--out", type=Path)
    return parser


def _config(args) -> RunConfig:
    cfg = RunConfig(inputs=list(getattr(args, "input", [])), out=getattr(args, "out", None))
    for name in ("t_mode", "t", "extra_unitaries", "dense_cap", "seed", "workers"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if cfg.extra_unitaries != "max":
        if int(cfg.extra_unitaries) < 0:
            raise ValueError("--extra-unitaries must be 'max' or a non-negative integer")
    if getattr(args, "k_grid", None):
        cfg.k_grid = parse_k_grid(args.k_grid)
    if getattr(args, "eps_grid", None):
        cfg.eps_grid = parse_eps_grid(args.eps_grid)
    if args.command == "ratios":
        cfg.schemes = [s.strip() for s in args.scheme.split(",") if s.strip()]
        bad = [s for s in cfg.schemes if s not in bd.SCHEMES]
        if bad or not cfg.schemes:
            raise ValueError(f"unknown scheme(s) {bad}")
    if cfg.t_mode == "explicit" and args.command in ("ratios", "mink", "schedule") and cfg.t is None:
        raise ValueError("--t-mode explicit needs --t")
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "generate-family":
            return cmd_generate_family(args.n, args.coeffs, args.eps_A, args.seed, args.out)
        cfg = _config(args)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "ratios":
            return cmd_ratios(cfg)
        if args.command == "mink":
            return cmd_mink(cfg)
        if args.command == "schedule":
            return cmd_schedule(cfg, args.K, args.scheme)
        if args.command == "verify":
            return cmd_verify(cfg, args.count, args.corrupt_bound)
        if args.command == "jw":
            return cmd_jw(cfg)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (AnticommError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    parser.error(f"unknown command {args.command}")
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
