"""Temporal convergence study against a fine-step reference solution."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .config import prepare
from .diagnostics import h1, hcurl, l2
from .errors import ConfigError, NumericalBlowup

NORMS = ("l2_psi", "h1_psi", "hcurl_a")


@dataclass(frozen=True)
class ConvergenceReport:
    taus: tuple
    errors: dict  # norm name -> tuple of errors, one per tau
    rates: dict  # norm name -> tuple of log2 ratios of successive errors
    t_compare: float
    tau_ref: float

    def rows(self):
        out = []
        for i, tau in enumerate(self.taus):
            row = {"tau": tau}
            for k in NORMS:
                row[k] = self.errors[k][i]
                row[f"{k}_rate"] = self.rates[k][i - 1] if i > 0 else float("nan")
            out.append(row)
        return out

    def write_csv(self, path):
        rows = self.rows()
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["tau", *NORMS])
            w.writeheader()
            for r in rows:
                w.writerow({k: repr(v) for k, v in r.items()})

    def format(self):
        lines = [f"{'tau':>10} " + " ".join(f"{k:>12} {'rate':>6}" for k in NORMS)]
        for r in self.rows():
            cells = []
            for k in NORMS:
                rate = r[f"{k}_rate"]
                cells.append(f"{r[k]:12.4e} {'' if math.isnan(rate) else f'{rate:6.2f}':>6}")
            lines.append(f"{r['tau']:10.4g} " + " ".join(cells))
        return "\n".join(lines)


def rates_from_errors(errors):
    """``log2(e_i / e_{i+1})`` for a ladder whose steps halve."""
    e = np.asarray(errors, dtype=float)
    return tuple(float(v) for v in np.log2(e[:-1] / e[1:]))


def _steps_to(t, tau):
    n = int(round(t / tau))
    if n < 1 or abs(n * tau - t) > 1e-9 * max(1.0, t):
        raise ConfigError(f"tau={tau!r} does not divide t={t!r}", "scheme.tau")
    return n


def _final_state(cfg, tau, t_compare):
    c = cfg.with_changes(scheme={"tau": tau, "n_steps": _steps_to(t_compare, tau)})
    setup = prepare(c)
    res = setup.stepper.run(setup.state)
    if res.halted:
        raise res.error if res.error is not None else NumericalBlowup("run halted", res.state.n)
    return setup.grid, res.state


def convergence_study(base_config, tau_ladder, tau_ref, t_compare=0.064):
    """Errors of each ladder member at ``t_compare`` against the ``tau_ref`` run."""
    ladder = tuple(float(t) for t in tau_ladder)
    if not ladder:
        raise ConfigError("empty tau ladder", "converge.ladder")
    if tau_ref > min(ladder) / 4 * (1 + 1e-12):
        raise ConfigError("tau_ref must be <= min(ladder)/4", "converge.ref")
    for tau in ladder:
        _steps_to(t_compare, tau)
    grid, ref = _final_state(base_config, tau_ref, t_compare)
    errs = {k: [] for k in NORMS}
    for tau in ladder:
        _, st = _final_state(base_config, tau, t_compare)
        errs["l2_psi"].append(l2(st.psi - ref.psi, grid))
        errs["h1_psi"].append(h1(st.psi - ref.psi, grid))
        errs["hcurl_a"].append(hcurl(st.a - ref.a, grid))
    return ConvergenceReport(ladder, {k: tuple(v) for k, v in errs.items()},
                             {k: rates_from_errors(v) for k, v in errs.items()},
                             float(t_compare), float(tau_ref))
