"""Bit-stable CSV/JSON emission and the work-sample record format.

All floats are written with 17 significant digits and '.' decimals so that
re-running a command with the same configuration and seed yields
byte-identical files, and re-parsing plus re-emitting any table is the
identity.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .protocol import ProtocolSpec, SpamModel, WorkSampleSet
from .qubit import ThermalSpec


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def render_csv(fieldnames: list[str], rows: list[dict]) -> str:
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(format_value(row[name]) for name in fieldnames))
    return "\n".join(lines) + "\n"


def render_json(rows: list[dict]) -> str:
    prepared = []
    for row in rows:
        record = {}
        for key, value in row.items():
            if isinstance(value, (np.integer,)):
                value = int(value)
            elif isinstance(value, (np.floating,)):
                value = float(value)
            record[key] = value
        prepared.append(record)
    return json.dumps(prepared, indent=2) + "\n"


def write_table(path: Path, fieldnames: list[str], rows: list[dict], fmt: str = "csv") -> None:
    path = Path(path)
    if fmt == "csv":
        path.write_text(render_csv(fieldnames, rows))
    elif fmt == "json":
        path.write_text(render_json(rows))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_csv_table(path: Path) -> tuple[list[str], list[dict]]:
    """Parse an emitted CSV back into (fieldnames, rows of strings)."""
    lines = Path(path).read_text().splitlines()
    body = [line for line in lines if line and not line.startswith("#")]
    fieldnames = body[0].split(",")
    rows = [dict(zip(fieldnames, line.split(","))) for line in body[1:]]
    return fieldnames, rows


SAMPLES_FIELDS = ["run_index", "total_work"]


def write_samples(path: Path, samples: WorkSampleSet) -> None:
    """One total per row, preceded by a comment header carrying the setup."""
    spec = samples.spec
    header = {
        "kind": spec.kind,
        "n_steps": spec.n_steps,
        "beta": spec.thermal.beta,
        "omega_start": spec.omega_start,
        "omega_end": spec.omega_end,
        "runs": samples.runs,
        "seed": samples.seed,
        "first_excited_counts": ",".join(str(int(c)) for c in samples.first_excited_counts),
        "flip_counts": ",".join(str(int(c)) for c in samples.flip_counts),
    }
    if samples.spam is not None:
        header["spam_bright"] = samples.spam.p_bright_given_0
        header["spam_dark"] = samples.spam.p_dark_given_1
    lines = [f"# {key}={format_value(value)}" for key, value in header.items()]
    rows = [
        {"run_index": i, "total_work": float(w)}
        for i, w in enumerate(samples.totals)
    ]
    Path(path).write_text("\n".join(lines) + "\n" + render_csv(SAMPLES_FIELDS, rows))


def read_samples(path: Path) -> WorkSampleSet:
    lines = Path(path).read_text().splitlines()
    header: dict[str, str] = {}
    for line in lines:
        if line.startswith("# ") and "=" in line:
            key, _, value = line[2:].partition("=")
            header[key] = value
    thermal = ThermalSpec.from_beta(float(header["beta"]))
    spec = ProtocolSpec(
        kind=header["kind"],
        n_steps=int(header["n_steps"]),
        thermal=thermal,
        omega_start=float(header["omega_start"]),
        omega_end=float(header["omega_end"]),
    )
    spam = None
    if "spam_bright" in header:
        spam = SpamModel(
            p_bright_given_0=float(header["spam_bright"]),
            p_dark_given_1=float(header["spam_dark"]),
        )
    _, rows = read_csv_table(path)
    totals = np.array([float(r["total_work"]) for r in rows])
    return WorkSampleSet(
        totals=totals,
        first_excited_counts=np.array(
            [int(c) for c in header["first_excited_counts"].split(",")], dtype=np.int64
        ),
        flip_counts=np.array(
            [int(c) for c in header["flip_counts"].split(",")], dtype=np.int64
        ),
        seed=int(header["seed"]),
        spec=spec,
        spam=spam,
    )
