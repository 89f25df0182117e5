"""Serialization of transcripts, reports and curves, plus figure rendering.

Reports are UTF-8 JSON with a fixed field order. Complex numbers are written
as ``[re, im]`` pairs and every float is rounded to 12 significant digits so
that identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .locc import Branch, GateRecord, HaltRecord, MeasurementRecord, MessageRecord, Transcript
from .qstate import StateVector

REPORT_DIR_ENV = "CATPORT_REPORT_DIR"
CSV_COLUMNS = ("r", "alpha2", "entropy", "negativity_AB2", "negativity_AB1")


def num(x: float) -> float:
    """Round to 12 significant digits (and fold -0.0 into 0.0)."""
    return float(f"{float(x):.12g}") + 0.0


def cnum(z: complex) -> list:
    z = complex(z)
    return [num(z.real), num(z.imag)]


def state_json(state: StateVector | None):
    if state is None:
        return None
    return {"labels": list(map(str, state.labels)), "amplitudes": [cnum(a) for a in state.amplitudes]}


def ket_string(state: StateVector, tol: float = 1e-9) -> str:
    """Compact Dirac form, e.g. ``0.6|00> + 0.8|11>``."""
    n = state.num_qubits
    terms = []
    for idx, amp in enumerate(state.amplitudes):
        if abs(amp) <= tol:
            continue
        re, im = num(amp.real), num(amp.imag)
        if abs(im) <= tol:
            coeff = f"{re:.6g}"
        elif abs(re) <= tol:
            coeff = f"{im:.6g}i"
        else:
            coeff = f"({re:.6g}{im:+.6g}i)"
        terms.append(f"{coeff}|{idx:0{n}b}>")
    return " + ".join(terms) if terms else "0"


def event_json(ev) -> dict:
    if isinstance(ev, GateRecord):
        out = {"type": "gate", "party": ev.party, "qubits": list(map(str, ev.labels)), "gate": ev.name}
        if ev.depends:
            out["depends_on"] = list(ev.depends)
        return out
    if isinstance(ev, MeasurementRecord):
        return {
            "type": "measurement",
            "party": ev.party,
            "qubits": list(map(str, ev.labels)),
            "basis": ev.basis,
            "outcome": ev.outcome_name,
            "probability": num(ev.probability),
        }
    if isinstance(ev, MessageRecord):
        m = ev.message
        return {
            "type": "message",
            "sender": m.sender,
            "recipients": list(m.recipients),
            "key": m.key,
            "payload": m.payload_name,
            "bits": m.bit_count,
        }
    if isinstance(ev, HaltRecord):
        return {"type": "halt", "key": ev.key, "reason": ev.reason}
    raise TypeError(f"unknown transcript event {ev!r}")


def event_line(ev) -> str:
    if isinstance(ev, GateRecord):
        cond = f"  [given {', '.join(ev.depends)}]" if ev.depends else ""
        return f"gate     {ev.party:<8} {ev.name:<8} on {','.join(map(str, ev.labels))}{cond}"
    if isinstance(ev, MeasurementRecord):
        return (
            f"measure  {ev.party:<8} {ev.basis:<8} on {','.join(map(str, ev.labels))}"
            f" -> {ev.outcome_name} (p={num(ev.probability):.12g})"
        )
    if isinstance(ev, MessageRecord):
        m = ev.message
        return f"message  {m.sender} -> {','.join(m.recipients)}: {m.key}={m.payload_name} ({m.bit_count} bit{'' if m.bit_count == 1 else 's'})"
    if isinstance(ev, HaltRecord):
        return f"halt     {ev.key}: {ev.reason}"
    raise TypeError(f"unknown transcript event {ev!r}")


def transcript_text(transcript: Transcript) -> str:
    owners = " ".join(f"{p.name}[{','.join(map(str, p.qubits))}]" for p in transcript.parties)
    lines = [f"protocol: {transcript.protocol}", f"parties:  {owners}"]
    lines += [event_line(ev) for ev in transcript.events]
    return "\n".join(lines)


def branch_json(branch: Branch, *, with_events: bool = True) -> dict:
    out = {
        "outcomes": {k: n for (k, _), n in zip(branch.outcomes, branch.outcome_names)},
        "probability": num(branch.probability),
        "success": bool(branch.success),
        "fidelity": None if branch.fidelity is None else num(branch.fidelity),
        "final_state": state_json(branch.final_state),
    }
    if with_events:
        out["events"] = [event_json(ev) for ev in branch.transcript.events]
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def report_dir(explicit: str | os.PathLike | None = None) -> Path:
    return Path(explicit or os.environ.get(REPORT_DIR_ENV) or "reports")


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


# -- curves -----------------------------------------------------------------


def csv_text(rows: Iterable[dict]) -> str:
    """CSV with the documented column order; columns absent from every row are omitted."""
    rows = list(rows)
    present = [c for c in CSV_COLUMNS if any(c in row for row in rows)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(present)
    for row in rows:
        writer.writerow([f"{num(row[c]):.12g}" for c in present])
    return buf.getvalue()


def plot_curve(rows: Sequence[dict], x: str, ys: Sequence[str], path: Path, title: str = "") -> Path:
    """Render ``ys`` against ``x`` to an image file (format from the suffix)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = {
        "r": r"overlap $r = |\langle\phi|\phi'\rangle|$",
        "alpha2": r"$|\alpha|^2$",
        "entropy": "entanglement (ebits)",
        "negativity_AB2": r"$N(A{:}B_2)$",
        "negativity_AB1": r"$N(A{:}B_1)$",
    }
    fig, ax = plt.subplots(figsize=(5.0, 3.6), dpi=120)
    xs = [row[x] for row in rows]
    for y in ys:
        ax.plot(xs, [row[y] for row in rows], marker="o", markersize=2.5, linewidth=1.2, label=labels.get(y, y))
    ax.set_xlabel(labels.get(x, x))
    if len(ys) == 1:
        ax.set_ylabel(labels.get(ys[0], ys[0]))
    else:
        ax.legend(frameon=False)
    if title:
        ax.set_title(title, fontsize=10)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps PNG output reproducible
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def amplitudes_from_json(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs])
