"""System files, the analysis pipeline and report rendering."""

import csv
import io
import json

import numpy as np

from . import __version__
from .catalog import get_entry
from .errors import ConditionVFailure, GerochPencilError, ParseError, StageError
from .geroch import check_condition_v, project_M, solve_geroch_space, split_basis
from .pencil import Sampling, analyze_k, sh_sweep
from .reduction import base_reduction
from .subsidiary import (
    assign_constraint_velocities,
    inherited_modes,
    subsidiary_kronecker,
    subsidiary_sh_sweep,
    subsidiary_symbol,
    verify_intertwining,
)
from .tensor_core import (
    DEFAULT_TOL,
    GramForm,
    build_symbol,
    check_condition_N0,
    check_no_algebraic_constraints,
    time_slab,
)

SYSTEM_KEYS = ("name", "n_space", "e", "u", "symbol")


# -- system files -----------------------------------------------------------

def system_to_dict(symbol, generator=None):
    out = {
        "name": symbol.name,
        "n_space": symbol.n_space,
        "e": symbol.e,
        "u": symbol.u,
        "symbol": symbol.coeffs.tolist(),
    }
    if generator:
        out["generator"] = generator
    return out


def dumps_system(symbol, generator=None):
    return json.dumps(system_to_dict(symbol, generator), indent=2) + "\n"


def loads_system(text):
    """Parse a system file; returns (symbol, generator or None)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"system file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or any(key not in data for key in SYSTEM_KEYS):
        raise ParseError(f"system file must contain the keys {', '.join(SYSTEM_KEYS)}")
    try:
        symbol = build_symbol(data["n_space"], data["e"], data["u"], np.array(data["symbol"], dtype=float),
                              name=str(data["name"]))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad symbol array: {exc}") from exc
    return symbol, data.get("generator")


def load_system(path):
    with open(path, encoding="utf-8") as fh:
        return loads_system(fh.read())


def catalog_system_text(name, lapse=1.0, shift=(0.0, 0.0, 0.0)):
    entry = get_entry(name, lapse, shift)
    generator = {"catalog": name, **entry.params} if entry.params else {"catalog": name}
    return dumps_system(entry.symbol, generator)


def named_objects(symbol, generator):
    """Named Geroch basis and reduction when the generator reproduces the symbol exactly."""
    if not generator or "catalog" not in generator:
        return None
    try:
        entry = get_entry(generator["catalog"], generator.get("lapse", 1.0), generator.get("shift", (0.0, 0.0, 0.0)))
    except (GerochPencilError, ValueError, TypeError):
        return None
    if entry.named_pair is None or not np.array_equal(entry.symbol.coeffs, symbol.coeffs):
        return None
    return entry


def load_gram(path, u):
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    G = np.array(data["G"] if isinstance(data, dict) else data, dtype=float)
    if G.shape != (u, u):
        raise ParseError(f"Gram matrix must be {u}x{u}")
    return GramForm(G)


# -- number formatting ------------------------------------------------------

def _r(x):
    """Round to 12 significant digits so reports do not carry rounding noise."""
    x = float(x)
    if not np.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    y = float(f"{x:.12g}")
    return 0.0 if y == 0.0 else y


def _num(v):
    v = complex(v)
    if abs(v.imag) <= 1e-8 * max(1.0, abs(v)):
        return _r(v.real)
    return [_r(v.real), _r(v.imag)]


def structure_dict(st):
    return {
        "jordan": [[_num(v), n] for v, n in st.jordan],
        "higher_jordan": [[_num(v), sz] for v, sz in st.higher_jordan],
        "l_blocks": {str(m): n for m, n in st.l_blocks},
        "zero_rows": st.zero_rows,
        "verified": st.verified,
        "deficit": st.deficit,
        "text": st.describe(),
        "counting_identities": list(st.counting_identities()),
    }


# -- pipeline ---------------------------------------------------------------

class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, et, ev, tb):
        if ev is not None and isinstance(ev, (GerochPencilError, ValueError, np.linalg.LinAlgError)) \
                and not isinstance(ev, StageError):
            raise StageError(self.name, ev) from ev
        return False


def prepare(symbol, generator=None, tol=DEFAULT_TOL):
    """Conditions, Geroch basis and reduction; returns (context, conditions)."""
    cond = {}
    with _Stage("conditions"):
        rep = check_condition_N0(symbol, tol=tol)
        cond["N0_rank"] = rep.rank
        cond["N0_full_rank"] = rep.ok
        cond["no_algebraic_constraints"] = check_no_algebraic_constraints(symbol, tol)
    entry = named_objects(symbol, generator)
    with _Stage("geroch"):
        space = solve_geroch_space(symbol, tol)
        cond["geroch_dim"] = int(space.shape[0])
        computed = split_basis(space, symbol, tol=tol)
        cond["c"] = computed.c
        cond["m"] = computed.m
        cond["count_matches_e_minus_u"] = computed.c == symbol.c
        cond["condition1"] = True
    with _Stage("reduction"):
        if entry is not None:
            geroch, pair, source = entry.named_geroch, entry.named_pair, "named"
        else:
            pair = base_reduction(symbol, geroch=computed, tol=tol)
            geroch, source = computed, "computed"
        res = pair.residuals(time_slab(symbol), geroch.C0)
        cond["reduction_residuals"] = {key: _r(val) for key, val in res.items()}
    with _Stage("projected_M"):
        if geroch.M_proj is None:
            geroch = project_M(geroch, pair, symbol)
    return {"symbol": symbol, "geroch": geroch, "pair": pair, "source": source}, cond


def _sample_record(ctx, k, gram, tol, sub_rec=None, index=None):
    symbol, geroch, pair = ctx["symbol"], ctx["geroch"], ctx["pair"]
    res = analyze_k(symbol, pair, geroch, k, gram, tol)
    rec = {}
    if index is not None:
        rec["index"] = index
    rec["k"] = [_r(x) for x in res["k"][1:]]
    rec["dims"] = list(res["dims"].as_tuple())
    rec["eigenvalues"] = [[_num(r.value), r.multiplicity] for r in res["records"]]
    rec["structure"] = structure_dict(res["structure"])
    rec["min_cos"] = _r(res["min_cos"])
    rec["angle_cosines"] = [[_num(a.value), [_r(x) for x in a.cosines]] for a in res["angles"]]
    rec["max_eig_imag"] = _r(res["max_imag"])
    rec["cond_eigvec_A"] = _r(res["cond_A"])
    if res["angle_error"]:
        rec["angle_error"] = res["angle_error"]
    if geroch.c:
        cv = check_condition_v(geroch, symbol, k, tol)
        rec["condition_v"] = cv.ok
        rec["y"] = cv.y
        try:
            st = subsidiary_kronecker(symbol, geroch, pair, None, k, tol)
            rec["subsidiary_structure"] = structure_dict(st)
        except ConditionVFailure as exc:
            rec["subsidiary_structure"] = structure_dict(exc.extended)
            rec["subsidiary_structure"]["extended_pencil"] = True
            rec["deficiency_count"] = int(exc.deficiency.shape[1])
    if sub_rec is not None:
        rec["ss_eigenvalues"] = [_num(v) for v in sub_rec["eigenvalues"]]
        rec["ss_cond_number"] = _r(sub_rec["cond"])
        rec["ss_defect"] = sub_rec["defect"]
        rec["ss_diagonalizable"] = bool(sub_rec["diagonalizable"])
        if sub_rec["error"]:
            rec["ss_error"] = sub_rec["error"]
    return rec


def analyze(symbol, generator=None, samples=200, seed=0, tol=DEFAULT_TOL, gram=None, threshold=1e-3,
            constant_N=None, cond_threshold=1e8, jobs=1, gram_label="identity", policy_label="default"):
    ctx, cond = prepare(symbol, generator, tol)
    geroch, pair = ctx["geroch"], ctx["pair"]
    sampling = Sampling(samples, seed)
    with _Stage("pencil_sweep"):
        sweep = sh_sweep(symbol, pair, geroch, gram, sampling, threshold, tol, jobs, raise_complex=False)
    with _Stage("subsidiary_sweep"):
        if geroch.c:
            ss = subsidiary_sh_sweep(symbol, geroch, pair, sampling=sampling, constant_N=constant_N,
                                     cond_threshold=cond_threshold, tol=tol, jobs=jobs)
            ss_recs = ss.samples
        else:
            ss, ss_recs = None, [None] * samples
    with _Stage("report"):
        records = [_sample_record(ctx, s["k"], gram, tol, sub, i)
                   for i, (s, sub) in enumerate(zip(sweep.samples, ss_recs))]
    cv_all = all(r.get("condition_v", True) for r in records)
    dims = sorted({tuple(r["dims"]) for r in records})
    basis_note = "C may be shifted by N M without changing the constraints" if geroch.m else ""
    report = {
        "tool": {"name": "geroch-pencil", "version": __version__},
        "system": {"name": symbol.name, "n_space": symbol.n_space, "e": symbol.e, "u": symbol.u, "c": symbol.c},
        "settings": {
            "samples": samples, "seed": seed, "tol": tol, "angle_threshold": threshold,
            "ss_cond_threshold": cond_threshold, "gram": gram_label, "velocity_policy": policy_label,
            "basis_source": ctx["source"], "k_norm": "euclidean",
        },
        "conditions": cond,
        "geroch": {"c": geroch.c, "m": geroch.m, "note": basis_note},
        "verdicts": {
            "hyperbolic": {"value": sweep.hyperbolic, "samples": samples, "seed": seed, "tol": tol,
                           "max_eig_imag": _r(max((r["max_eig_imag"] for r in records), default=0.0))},
            "SH": {"value": sweep.sh, "samples": samples, "seed": seed, "tol": tol, "threshold": threshold,
                   "min_cos": _r(sweep.min_cos), "all_certified": sweep.certified_all,
                   "kernel_dims_constant": sweep.dims_constant, "kernel_dims_seen": [list(d) for d in dims]},
            "SS_SH": {"value": True if ss is None else ss.ss_sh, "samples": samples, "seed": seed,
                      "mode": "vacuous" if ss is None else ss.mode, "cond_threshold": cond_threshold,
                      "max_cond": 1.0 if ss is None else _r(ss.max_cond)},
            "condition_v": {"value": cv_all, "samples": samples, "seed": seed, "tol": tol},
        },
        "samples": records,
    }
    return report


def all_verdicts_true(report):
    v = report["verdicts"]
    return all(v[key]["value"] for key in ("hyperbolic", "SH", "SS_SH"))


def single_k(symbol, k, generator=None, tol=DEFAULT_TOL, gram=None, rng_seed=0):
    ctx, cond = prepare(symbol, generator, tol)
    geroch, pair = ctx["geroch"], ctx["pair"]
    with _Stage("single_k"):
        rec = _sample_record(ctx, k, gram, tol)
        rec["conditions"] = cond
        rec["basis_source"] = ctx["source"]
        if geroch.c:
            sub = subsidiary_symbol(geroch, pair, None, k)
            rec["B"] = [[_r(x) for x in row] for row in sub.B]
            pi, _ = inherited_modes(symbol, geroch, pair, k, tol)
            rec["pi"] = [_num(v) for v in pi]
            lams = np.random.default_rng(rng_seed).standard_normal(5)
            rec["intertwining_residual"] = _r(verify_intertwining(symbol, pair, geroch, None, k, lams))
            try:
                assigned = assign_constraint_velocities(symbol, geroch, pair, k, tol=tol)
                rec["assigned_rho"] = [_r(x) for x in assigned.rho_values]
                rec["assigned_B_eigenvalues"] = sorted(_num(v) for v in np.linalg.eigvals(assigned.B).real)
            except GerochPencilError as exc:
                rec["assignment_error"] = f"{type(exc).__name__}: {exc}"
    return rec


def dumps_report(report):
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def render_text(report):
    """Human readable summary of an analyze report."""
    out = io.StringIO()
    sysd, cond, v = report["system"], report["conditions"], report["verdicts"]
    out.write(f"system {sysd['name']}: n={sysd['n_space']} e={sysd['e']} u={sysd['u']} c={sysd['c']}\n")
    out.write(f"N0 rank {cond['N0_rank']} (full: {cond['N0_full_rank']}), "
              f"no algebraic constraints: {cond['no_algebraic_constraints']}\n")
    out.write(f"Geroch space dim {cond['geroch_dim']}: c={cond['c']} m={cond['m']} "
              f"({report['settings']['basis_source']} basis)\n")
    s = report["settings"]
    out.write(f"samples {s['samples']} seed {s['seed']} tol {s['tol']:g}\n")
    if report["samples"]:
        first = report["samples"][0]
        out.write(f"kernel dims (d,r,s) seen: {v['SH']['kernel_dims_seen']}\n")
        out.write(f"structure at sample 0: {first['structure']['text']}\n")
        if "subsidiary_structure" in first:
            out.write(f"subsidiary structure at sample 0: {first['subsidiary_structure']['text']}\n")
    out.write(f"min cosine {v['SH']['min_cos']} (threshold {v['SH']['threshold']})\n")
    for key in ("hyperbolic", "SH", "SS_SH", "condition_v"):
        out.write(f"{key}: {'true' if v[key]['value'] else 'false'}\n")
    return out.getvalue()


def render_single_text(rec):
    out = io.StringIO()
    out.write(f"k = {rec['k']}\n(d,r,s) = {tuple(rec['dims'])}\n")
    out.write(f"eigenvalues: {rec['eigenvalues']}\n")
    out.write(f"structure: {rec['structure']['text']}\n")
    if "subsidiary_structure" in rec:
        out.write(f"subsidiary: {rec['subsidiary_structure']['text']}\n")
    out.write(f"cosines: {rec['angle_cosines']}\n")
    if "intertwining_residual" in rec:
        out.write(f"intertwining residual: {rec['intertwining_residual']}\n")
    return out.getvalue()


def write_csv(report, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        n = report["system"]["n_space"]
        names = [f"k{x}" for x in "xyz"[:n]] if n <= 3 else [f"k{i}" for i in range(1, n + 1)]
        w.writerow(names + ["min_cos", "max_eig_imag", "ss_cond_number"])
        for rec in report["samples"]:
            w.writerow(rec["k"] + [rec["min_cos"], rec["max_eig_imag"], rec.get("ss_cond_number", 1.0)])
