"""Report assembly: one JSON document per run, optional CSV flattening.

The document layout is fixed so that identical configurations produce
byte-identical files except for the generated_at stamp in meta.
"""

from __future__ import annotations

import csv
import io
import json
from datetime import datetime, timezone

from . import __version__
from .census import SlopeFit

SCHEMA_ORDER = (
    "meta",
    "instance",
    "fibers",
    "counts",
    "slopes",
    "scan",
    "audits",
    "verdicts",
)


def make_meta(config: dict, seed) -> dict:
    return {
        "version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "config": {k: config[k] for k in sorted(config)},
    }


def verdict(check: str, passed: bool, details: str) -> dict:
    return {"check": check, "pass": bool(passed), "details": details}


def slope_dict(label: str, fit: SlopeFit) -> dict:
    rnd = lambda v: None if v is None else round(v, 6)
    return {
        "label": label,
        "slope": rnd(fit.slope),
        "intercept": rnd(fit.intercept),
        "residual_rms": rnd(fit.residual_rms),
        "kappa": rnd(fit.kappa),
        "rounded_dim": fit.rounded_dim,
        "stable": fit.stable,
        "used": [[p, c] for p, c in fit.used],
        "skipped": [[p, c] for p, c in fit.skipped],
    }


def count_entry(kind: str, p: int, label: str, value: int, **extra) -> dict:
    entry = {"kind": kind, "p": p, "label": label, "value": int(value)}
    for k in sorted(extra):
        entry[k] = extra[k]
    return entry


def assemble(
    meta: dict,
    instance: dict | None = None,
    fibers: list | None = None,
    counts: list | None = None,
    slopes: list | None = None,
    scan: dict | None = None,
    audits: list | None = None,
    verdicts: list | None = None,
) -> dict:
    parts = {
        "meta": meta,
        "instance": instance or {},
        "fibers": fibers or [],
        "counts": counts or [],
        "slopes": slopes or [],
        "scan": scan or {},
        "audits": audits or [],
        "verdicts": verdicts or [],
    }
    return {k: parts[k] for k in SCHEMA_ORDER}


def render(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def strip_volatile(text: str) -> str:
    """Report text minus the timestamp line, for byte comparisons."""
    lines = [ln for ln in text.splitlines() if '"generated_at"' not in ln]
    return "\n".join(lines) + "\n"


def csv_rows(doc: dict) -> list:
    rows = [["section", "kind", "p", "label", "value"]]
    for c in doc.get("counts", []):
        rows.append(["counts", c.get("kind"), c.get("p"), c.get("label"), c.get("value")])
    for s in doc.get("slopes", []):
        for key in ("slope", "kappa", "residual_rms", "rounded_dim"):
            rows.append(["slopes", "", "", f"{s.get('label')}:{key}", s.get(key)])
    return rows


def render_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(csv_rows(doc))
    return buf.getvalue()


def write_report(doc: dict, path: str, with_csv: bool = False) -> None:
    with open(path, "w") as fh:
        fh.write(render(doc))
    if with_csv:
        stem = path[:-5] if path.endswith(".json") else path
        with open(stem + ".csv", "w") as fh:
            fh.write(render_csv(doc))
