"""Text tables and CSV/JSON writers.

Files carry 12 significant digits, terminal tables 4.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

from .circuit import InputReport, SweepRow
from .fock import QubitDensityMatrix

SWEEP_HEADER = ("alpha", "K", "V", "K2plusV2", "purity", "p_success")
METRICS_HEADER = (
    "input", "P_HH", "P_HV", "P_VH", "P_VV", "F_M", "F_QND", "F_QSP", "K", "p_success",
)

# Published measurements (ideal simulation does not model the apparatus noise
# behind these; printed for comparison only).
REFERENCE_TABLE = {
    "H": {"P_HH": 0.97, "P_HV": 0.024, "P_VH": 0.007, "P_VV": 0.0005},
    "V": {"P_HH": 0.012, "P_HV": 0.00013, "P_VH": 0.18, "P_VV": 0.81},
    "D+": {"P_HH": 0.44, "P_HV": 0.016, "P_VH": 0.10, "P_VV": 0.44},
    "R+": {"P_HH": 0.46, "P_HV": 0.022, "P_VH": 0.104, "P_VV": 0.41},
}
REFERENCE_F_QSP_AVERAGE = 0.88
REFERENCE_PURITY = {"no measurement": 0.89, "strong measurement": 0.51}
REFERENCE_LABEL = "reported (experimental)"


def file_num(x: float) -> str:
    return f"{x:.12g}"


def term_num(x: float) -> str:
    if abs(x) < 5e-13:
        x = 0.0
    return f"{x:.4g}"


def _sig(x: float) -> float:
    return float(file_num(x))


def sweep_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([file_num(x) for x in (r.alpha, r.k, r.v, r.k2_plus_v2, r.purity, r.p_success)])
    return buf.getvalue()


def sweep_json(rows: Iterable[SweepRow]) -> dict:
    return {
        "rows": [
            dict(zip(SWEEP_HEADER, (_sig(x) for x in (r.alpha, r.k, r.v, r.k2_plus_v2, r.purity, r.p_success))))
            for r in rows
        ]
    }


def metrics_csv(reports: Iterable[InputReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    for r in reports:
        j = r.joint
        w.writerow(
            [r.name]
            + [file_num(x) for x in (j.p_hh, j.p_hv, j.p_vh, j.p_vv, r.f_m, r.f_qnd, r.f_qsp, r.k, r.p_success)]
        )
    return buf.getvalue()


def metrics_json(reports: Sequence[InputReport]) -> dict:
    out = {"inputs": [r.to_json() for r in reports]}
    if len(reports) > 1:
        out["F_QSP_average"] = _sig(sum(r.f_qsp for r in reports) / len(reports))
    return out


def densmat_json(rho: QubitDensityMatrix, purity: float, alpha: float | None = None) -> dict:
    out = {"rho": rho.to_json(), "purity": _sig(purity)}
    if alpha is not None:
        out = {"alpha": _sig(alpha), **out}
    return out


def densmat_csv(rho: QubitDensityMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("row", "col", "re", "im"))
    labels = ("H", "V")
    for i in range(2):
        for k in range(2):
            z = rho.entries[i, k]
            w.writerow((labels[i], labels[k], file_num(z.real), file_num(z.imag)))
    return buf.getvalue()


def write_text(path: str | Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_json(path: str | Path, data) -> None:
    write_text(path, json.dumps(data, indent=2) + "\n")


def _grid(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
    fmt = "  ".join(f"{{:<{w}}}" if i == 0 else f"{{:>{w}}}" for i, w in enumerate(widths))
    lines = [fmt.format(*header)]
    lines += [fmt.format(*row) for row in rows]
    return "\n".join(lines)


def metrics_table(reports: Sequence[InputReport]) -> str:
    header = ["", *(r.name for r in reports)]
    rows = []
    for label, get in (
        ("P_HH", lambda r: r.joint.p_hh),
        ("P_HV", lambda r: r.joint.p_hv),
        ("P_VH", lambda r: r.joint.p_vh),
        ("P_VV", lambda r: r.joint.p_vv),
        ("F_M", lambda r: r.f_m),
        ("F_QND", lambda r: r.f_qnd),
        ("F_QSP", lambda r: r.f_qsp),
        ("K", lambda r: r.k),
        ("p_success", lambda r: r.p_success),
    ):
        rows.append([label, *(term_num(get(r)) for r in reports)])
    return _grid(header, rows)


def reference_table() -> str:
    names = list(REFERENCE_TABLE)
    rows = [
        [key, *(term_num(REFERENCE_TABLE[n][key]) for n in names)]
        for key in ("P_HH", "P_HV", "P_VH", "P_VV")
    ]
    rows.append(["F_QSP avg", term_num(REFERENCE_F_QSP_AVERAGE), *([""] * (len(names) - 1))])
    return _grid([REFERENCE_LABEL, *names], rows)


def densmat_table(rho: QubitDensityMatrix) -> str:
    rows = []
    for label, row in zip(("H", "V"), rho.entries):
        rows.append([label, *(f"{term_num(z.real)}{'+' if z.imag >= 0 else '-'}{term_num(abs(z.imag))}i" for z in row)])
    return _grid(["rho", "H", "V"], rows)
