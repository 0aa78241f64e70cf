"""Command-line driver: ``nks <command> --config path [--r N] [--grid N] [--out dir]``.

Exit codes: 0 when every check of the command passes, 1 for configuration
errors, 2 when a refinement study fails to converge or an exclusion fails.
"""
import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, asdict, fields
from pathlib import Path

import numpy as np

from . import model as mdl
from . import reduced_kw as rkw
from . import reporting
from . import spectral as sp
from . import type2prime as t2p
from . import weitzenbock as wz

log = logging.getLogger("nks")

EXIT_OK, EXIT_CONFIG, EXIT_FAILED = 0, 1, 2

COMMANDS = ("model-verify", "spectrum", "indicial-report", "type2prime", "weitzenbock", "oracle")

# finest grid of each refinement study; coarser levels halve it
DEFAULT_GRID = {
    "model-verify": 256,
    "spectrum": 1024,
    "indicial-report": 1024,
    "type2prime": 1024,
    "weitzenbock": 32,
    "oracle": 1024,
}

DEFAULT_TOLERANCES = {
    "min_order": 1.8,          # model residual refinement order
    "model_rel": 1e-3,         # finest-grid residual relative to field scale
    "boundary": 1e-3,          # Type II' boundary values
    "oracle": 1e-6,            # inverse-square oracle, scalar m = 0
    "oracle_m1": 1e-4,         # scalar m = 1
    "torus": 1e-8,
    "halfspace": 1e-6,
    "omega": 1e-10,            # integrated boundary terms relative to the action
    "flux_exponent": 0.05,     # tolerance on the fitted flux power
}


class ConfigError(ValueError):
    pass


def _is_pow2(n):
    return isinstance(n, int) and not isinstance(n, bool) and n > 0 and n & (n - 1) == 0


@dataclass
class RunConfig:
    command: str
    r_weight: int = 1
    group: str = "SO3"
    grid: int = None
    m_max: int = None
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "out"
    diagonal_weights: list = field(default_factory=list)
    torus_n: int = 16
    halfspace_n: int = 32
    band_limit: int = 3
    control_exponents: list = field(default_factory=lambda: [0.5, -1.5])
    control_amplitude: float = 0.3

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.grid is None:
            self.grid = DEFAULT_GRID[self.command]
        self.tolerances = {**DEFAULT_TOLERANCES, **(self.tolerances or {})}
        self.validate()

    def validate(self):
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerances {sorted(unknown)}")
        for k, v in self.tolerances.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"tolerance {k} must be a positive number, got {v!r}")
        if not _is_pow2(self.grid) or not 32 <= self.grid <= 4096:
            raise ConfigError(f"grid must be a power of two in [32, 4096], got {self.grid!r}")
        for name in ("r_weight", "seed", "torus_n", "halfspace_n", "band_limit"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ConfigError(f"{name} must be a nonnegative integer, got {v!r}")
        if self.m_max is not None and (not isinstance(self.m_max, int) or self.m_max < self.r_weight + 2):
            raise ConfigError(f"m_max must be an integer >= r_weight + 2, got {self.m_max!r}")
        # lattice sizes of the four-dimensional identity checks are bounded by memory, not refinement
        if not _is_pow2(self.torus_n) or not 8 <= self.torus_n <= 32:
            raise ConfigError(f"torus_n must be a power of two in [8, 32], got {self.torus_n!r}")
        if self.halfspace_n % 8 or not 24 <= self.halfspace_n <= 64:
            raise ConfigError(f"halfspace_n must be a multiple of 8 in [24, 64], got {self.halfspace_n!r}")
        if not all(isinstance(w, int) and w >= 0 for w in self.diagonal_weights):
            raise ConfigError("diagonal_weights must be nonnegative integers")
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in self.control_exponents):
            raise ConfigError("control_exponents must be numbers")
        if not self.control_amplitude > 0:
            raise ConfigError("control_amplitude must be positive")
        try:
            self.params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def params(self):
        return mdl.ModelParams(self.r_weight, mdl.Group(self.group))

    def grids(self, levels=3):
        g = tuple(self.grid // 2 ** j for j in reversed(range(levels)))
        if g[0] < 8:
            raise ConfigError(f"grid {self.grid} is too coarse for {levels} refinement levels")
        return g

    def hashed(self):
        """Everything that determines the results; the output directory does not."""
        d = asdict(self)
        d.pop("out")
        return d


def load_config(path, command, overrides):
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if raw.get("command", command) != command:
        raise ConfigError(f"config is for {raw['command']!r}, not {command!r}")
    raw = {k: v for k, v in raw.items() if k != "command"}
    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config fields {sorted(unknown)}")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(command=command, **raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class Outcome:
    ok: bool
    files: list
    summary: str


class Runner:
    def __init__(self, cfg):
        self.cfg = cfg
        self.hash = reporting.config_hash(cfg.hashed())
        self.conventions = dict(t2p.SIGN_CONVENTIONS)
        self.out = Path(cfg.out)

    def csv(self, name, columns, rows):
        return reporting.write_csv(self.out / name, columns, rows, self.hash, self.conventions)

    def json(self, name, doc):
        return reporting.write_json(self.out / name, doc, self.hash, self.conventions)

    # ------------------------------------------------------------ commands

    def model_verify(self):
        cfg, p = self.cfg, self.cfg.params()
        res = rkw.verify_model(p, grids=cfg.grids(), min_order=cfg.tolerances["min_order"],
                               rel_tol=cfg.tolerances["model_rel"])
        rows = []
        for name, k in zip(("X", "Y", "Z", "mu"), range(4)):
            for n, norm in zip(res.grids, res.norms[:, k]):
                rows.append((p.weight, name, n, float(norm), res.scale, float(norm) / res.scale,
                             res.orders[k]))
        files = [self.csv("model_verify.csv", ("r_weight", "residual", "n_grid", "sup_norm", "field_scale",
                                               "relative", "observed_order"), rows)]
        sign, mus = rkw.resolve_phi1_sign()
        files.append(self.json("phi1_sign.json", {
            "criterion": "moment map sup norm on a coarse annular grid, weight 1",
            "moment_map_sup": {f"{s:+d}": float(v) for s, v in sorted(mus.items())},
            "selected": sign,
            "in_use": mdl.PHI1_SIGN,
        }))
        ok = res.passed and sign == mdl.PHI1_SIGN
        orders = ", ".join(f"{o:.3g}" for o in res.orders)
        return Outcome(ok, files, f"weight {p.weight}: orders [{orders}], finest/scale "
                                  f"{res.norms[-1].max() / res.scale:.3g}")

    def spectrum(self):
        cfg, p = self.cfg, self.cfg.params()
        base = cfg.grids()[0]
        scan = sp.gamma0(p, m_max=cfg.m_max, n=base)
        files = [self.csv("spectrum.csv", sp.CSV_COLUMNS, sp.csv_rows(p.weight, scan.table))]
        ok = scan.converged and scan.gamma0 > 2
        summary = f"weight {p.weight}: gamma0 {scan.gamma0:.10g} at {scan.argmin}"
        if cfg.diagonal_weights:
            weights = sorted(cfg.diagonal_weights)
            values = [sp.diagonal_gamma0(mdl.ModelParams(w), n=cfg.grid // 2) for w in weights]
            excess = [v - 2 for v in values]
            decreasing = all(a > b for a, b in zip(excess, excess[1:]))
            rows = [(w, v, e, decreasing) for w, v, e in zip(weights, values, excess)]
            files.append(self.csv("diagonal_gamma0.csv",
                                  ("r_weight", "gamma0_diagonal", "excess_over_2", "decreasing"), rows))
            ok = ok and decreasing and all(e > 0 for e in excess)
        return Outcome(ok, files, summary)

    def indicial_report(self):
        cfg, p = self.cfg, self.cfg.params()
        rep = t2p.indicial_report(p, n=256, m_max=cfg.m_max, grids=cfg.grids(),
                                  tol=cfg.tolerances["boundary"])
        files = [self.json("indicial_report.json", rep.to_json())]
        return Outcome(rep.ok, files, f"weight {p.weight}: exclusions {rep.exclusions}")

    def type2prime(self):
        cfg, p = self.cfg, self.cfg.params()
        tol = cfg.tolerances["boundary"]
        rows, ok = [], True
        for case, solve, target in (("beta", t2p.solve_f, 0.5), ("alpha", t2p.solve_h, -1.0)):
            for e in range(p.weight):
                r = solve(p, e, cfg.grids())
                within = abs(r.value - target) <= tol
                ok &= within
                for n, raw in zip(r.grids, r.raw):
                    rows.append((p.weight, case, e, n, raw, r.value, target, r.order, r.residual,
                                 r.min_eigenvalue, within))
        columns = ("r_weight", "case", "exponent", "n_grid", "boundary_value", "richardson_estimate",
                   "target", "observed_order", "solve_residual", "shifted_min_eigenvalue",
                   "within_tolerance")
        files = [self.csv("type2prime.csv", columns, rows)]
        return Outcome(ok, files, f"weight {p.weight}: {len(rows) // 3} boundary problems")

    def weitzenbock(self):
        cfg, p = self.cfg, self.cfg.params()
        tol = cfg.tolerances
        rows, ok = [], True

        torus = wz.torus_grid(cfg.torus_n)
        tor = wz.identity_closed_torus(wz.random_band_limited_pair(torus, seed=cfg.seed, kmax=cfg.band_limit))
        rows.append(("closed_torus", cfg.torus_n, tor.lhs, tor.rhs, tor.rel_error, ""))
        ok &= tor.rel_error <= tol["torus"]

        half = wz.halfspace_grid(cfg.halfspace_n)
        hs = wz.identity_halfspace(wz.interior_supported_pair(half, seed=cfg.seed))
        rows.append(("halfspace", cfg.halfspace_n, hs.lhs, hs.rhs, hs.rel_error, ""))
        omega_rel = abs(hs.omega) / max(abs(hs.lhs), abs(hs.ipp))
        rows.append(("omega_integral", cfg.halfspace_n, hs.omega, 0.0, omega_rel, ""))
        ok &= hs.rel_error <= tol["halfspace"] and omega_rel <= tol["omega"]

        model = wz.boundary_term_scaling(wz.model_fields_fn(p))
        rows.append(("flux_model", len(model.radii), model.fluxes[-1], 0.0, abs(model.fluxes[-1]),
                     model.exponent))
        ok &= model.vanishes
        if p.weight > 0:
            mode = wz.exceptional_alpha_mode(p, 0, amplitude=cfg.control_amplitude)
            alpha = wz.boundary_term_scaling(wz.model_fields_fn(p, mode))
            rows.append(("flux_alpha_t0", len(alpha.radii), alpha.fluxes[-1], 0.0,
                         abs(alpha.fluxes[-1]), alpha.exponent))
            ok &= alpha.vanishes
        flagged = []
        for lam in cfg.control_exponents:
            amp = cfg.control_amplitude
            ctl = wz.boundary_term_scaling(wz.model_fields_fn(p, wz.synthetic_control_mode(lam, amp)))
            expect = wz.control_flux_oracle(lam, ctl.radii[-1], amp)
            rel = abs(ctl.fluxes[-1] - expect) / abs(expect)
            rows.append((f"flux_control_{lam:+g}", len(ctl.radii), ctl.fluxes[-1], expect, rel, ctl.exponent))
            ok &= abs(ctl.exponent - wz.control_exponent(lam)) <= tol["flux_exponent"]
            ok &= rel <= tol["boundary"]
            # a control whose flux does not vanish as eps -> 0 must be reported
            if not ctl.vanishes:
                flagged.append(lam)
        ok &= flagged == [lam for lam in cfg.control_exponents if wz.control_exponent(lam) <= 0]
        files = [self.csv("weitzenbock.csv", ("check_name", "n_grid", "lhs", "rhs", "rel_error",
                                              "observed_order"), rows)]
        return Outcome(ok, files, f"torus {tor.rel_error:.2e}, halfspace {hs.rel_error:.2e}, "
                                  f"flagged controls {flagged}")

    def oracle(self):
        cfg = self.cfg
        tol = cfg.tolerances
        rows, ok = [], True
        target = sp.j1_first_zero() ** 2
        g2 = cfg.grids(2)
        vals = [float(sp.inverse_square_oracle(n).eigvals(1)[0]) for n in g2]
        est = sp.richardson(*vals)
        rel = abs(est - target) / target
        for n, v in zip(g2, vals):
            rows.append(("inverse_square", 0, n, v, est, target, rel, ""))
        ok &= rel <= tol["oracle"]
        for m, exact, t in ((0, 2.0, tol["oracle"]), (1, 6.0, tol["oracle_m1"])):
            cv = sp.converge(lambda n: sp.scalar_hemisphere(m, n).eigvals(1)[0], cfg.grids()[0])
            err = abs(cv.estimate - exact) / exact
            for n, v in zip(cv.grids, cv.values):
                rows.append(("hemisphere_dirichlet", m, n, v, cv.estimate, exact, err, cv.order))
            ok &= err <= t
        op = sp.scalar_hemisphere(0, cfg.grid)
        _, vec = op.eigpairs(1)
        corr = sp.weighted_correlation(vec[:, 0], np.cos(op.x), op.w)
        rows.append(("eigenvector_correlation_cos", 0, cfg.grid, corr, corr, 1.0, 1.0 - corr, ""))
        ok &= corr >= 0.999
        columns = ("check_name", "m", "n_grid", "value", "richardson_estimate", "target", "rel_error",
                   "observed_order")
        return Outcome(ok, [self.csv("oracle.csv", columns, rows)], f"j1 zero^2 rel error {rel:.2e}")

    def run(self):
        handler = getattr(self, self.cfg.command.replace("-", "_"))
        return handler()


def build_parser():
    ap = argparse.ArgumentParser(prog="nks", description="Model knot solution checks and reports.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--r", type=int, dest="r_weight", help="override r_weight")
    ap.add_argument("--grid", type=int, help="override the finest grid of the refinement study")
    ap.add_argument("--out", help="override the output directory")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, args.command,
                          {"r_weight": args.r_weight, "grid": args.grid, "out": args.out})
    except ConfigError as exc:
        print(f"nks: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        outcome = Runner(cfg).run()
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"nks: {cfg.command} failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    for path in outcome.files:
        log.info("wrote %s", path)
    status = "ok" if outcome.ok else "FAILED"
    print(f"{cfg.command}: {status} ({outcome.summary})")
    return EXIT_OK if outcome.ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
