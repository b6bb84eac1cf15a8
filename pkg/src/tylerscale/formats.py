"""File formats used by the command-line surface.

All floats are written with %.17g so values round-trip exactly and
output bytes are identical across runs with identical inputs.
"""

import json

import numpy as np

from .errors import ParseError

_FLOAT_FMT = "%.17g"


def _fmt(x):
    return _FLOAT_FMT % float(x)


def write_matrix_csv(path, m):
    """Row-major comma-separated matrix, no header."""
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    with open(path, "w", encoding="ascii") as fh:
        for row in m:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _parse_rows(lines, what):
    rows = []
    width = None
    for lineno, line in lines:
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = text.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ParseError(f"{what}: row {lineno} has {len(fields)} fields, expected {width}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise ParseError(f"{what}: row {lineno} has a non-numeric field") from None
    if not rows:
        raise ParseError(f"{what}: no data rows")
    return np.array(rows, dtype=np.float64)


def read_matrix_csv(path):
    with open(path, "r", encoding="ascii") as fh:
        return _parse_rows(enumerate(fh, start=1), str(path))


def read_samples_csv(path, transpose=False):
    """Samples CSV: one sample per row (or per column with transpose)."""
    data = read_matrix_csv(path)
    return data.T.copy() if transpose else data


def write_samples_csv(path, x):
    write_matrix_csv(path, x)


def write_sidecar(path, meta):
    """One-line key=value metadata sidecar, keys in the given order."""
    line = ",".join(f"{k}={v}" for k, v in meta.items())
    with open(path, "w", encoding="ascii") as fh:
        fh.write(line + "\n")


def write_trace_csv(path, trace):
    """Trace CSV with header iter,f,grad_norm,step_dist and a status comment."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("iter,f,grad_norm,step_dist\n")
        for r in trace.iterations:
            fh.write(f"{r.index},{_fmt(r.f_value)},{_fmt(r.grad_norm)},{_fmt(r.step_distance)}\n")
        fh.write(f"#status={trace.status.value}\n")


def read_trace_csv(path):
    """Rows and status string of a trace CSV."""
    rows = []
    status = None
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            text = line.strip()
            if text.startswith("#status="):
                status = text.split("=", 1)[1]
            elif text and not text.startswith(("iter", "#")):
                idx, f, g, d = text.split(",")
                rows.append((int(idx), float(f), float(g), float(d)))
    return rows, status


def verdict_json(verdict, n, p):
    """Verdict as a deterministic one-line JSON document."""
    w = verdict.witness
    doc = {
        "status": verdict.status.value,
        "witness": list(w.indices) if w else None,
        "k": w.k if w else None,
        "m": w.m if w else None,
        "kn_over_p": (w.k * n / p) if w else None,
    }
    return json.dumps(doc, sort_keys=True)


def write_verdict_jsonl(path, verdict, n, p):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(verdict_json(verdict, n, p) + "\n")


DIAGNOSTIC_KEYS = ("eps", "lambda", "sigma1", "sigma2", "size", "cheeger_ub", "n", "p", "seed")


def diagnostics_record(report, cheeger_ub, n, p, seed):
    """Flat diagnostics record in the fixed key order."""
    return {
        "eps": report.eps,
        "lambda": report.lam,
        "sigma1": report.sigma1,
        "sigma2": report.sigma2,
        "size": report.size,
        "cheeger_ub": cheeger_ub,
        "n": n,
        "p": p,
        "seed": seed,
    }


def write_diagnostics_text(path, record):
    with open(path, "w", encoding="ascii") as fh:
        for k in DIAGNOSTIC_KEYS:
            v = record[k]
            fh.write(f"{k}={v if isinstance(v, int) else _fmt(v)}\n")


def write_diagnostics_csv(path, record):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(DIAGNOSTIC_KEYS) + "\n")
        fh.write(",".join(
            str(record[k]) if isinstance(record[k], int) else _fmt(record[k])
            for k in DIAGNOSTIC_KEYS) + "\n")


def write_sweep_results_csv(path, rows):
    """Sweep rows (n, trial, err_op, err_frob, iters, status)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("n,trial,err_op,err_frob,iters,status\n")
        for n, trial, err_op, err_frob, iters, status in rows:
            fh.write(f"{n},{trial},{_fmt(err_op)},{_fmt(err_frob)},{iters},{status}\n")


def write_sweep_medians_csv(path, medians):
    """Per-n medians: rows (n, median_err_op, median_err_frob)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("n,median_err_op,median_err_frob\n")
        for n, mo, mf in medians:
            fh.write(f"{n},{_fmt(mo)},{_fmt(mf)}\n")
