"""CSV / JSON readers and writers for every table the package produces.

Floats are written with ``repr`` so a write-read cycle is exact and output
bytes depend only on the values.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import jsonschema
import numpy as np

from weightcraft.datagen import BEHAVIORS, K, EngagementTable, GroundTruth, NoiseSpec, group_attributes
from weightcraft.errors import ValidationError
from weightcraft.estimation import EstimationReport
from weightcraft.rankeval import SchemeResult
from weightcraft.sim import NItemsRow, SweepRow

ENGAGEMENT_CSV = "engagement.csv"
GROUND_TRUTH_CSV = "ground_truth.csv"
METADATA_FILE = "metadata.txt"

ENGAGEMENT_COLUMNS = ("url_id", "period", "group_id", "age", "gender", "pol", "views") + BEHAVIORS
GROUND_TRUTH_COLUMNS = ("url_id",) + tuple(f"beta_{b}" for b in BEHAVIORS) + ("latent_value", "misinfo", "domain_quality")
NITEMS_COLUMNS = ("sim_id", "w1_theory", "w1_empirical", "auc")
RANK_EVAL_COLUMNS = ("scheme", "period", "top_k", "total_value", "misinfo_rate", "mean_domain_quality")
WEIGHTS_COLUMNS = ("scheme", "period") + tuple(f"w_{b}" for b in BEHAVIORS)
REQUIRED_METADATA = ("sigma_views", "sigma_likes", "sigma_reaction")

_VECTOR6 = {"type": "array", "items": {"type": "number"}, "minItems": K, "maxItems": K}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["period", "vf_hat", "variance_hat", "beta_hat"],
    "properties": {
        "period": {"type": "integer", "minimum": 0},
        "vf_hat": _VECTOR6,
        "variance_hat": {**_VECTOR6, "items": {"type": "number", "minimum": 0}},
        "beta_hat": {
            "type": "object",
            "propertyNames": {"pattern": "^[0-9]+$"},
            "additionalProperties": {**_VECTOR6, "items": {"type": "number", "minimum": 0, "maximum": 1}},
        },
        "n_boot_urls": {"type": "integer", "minimum": 0},
        "n_boot_samples": {"type": "integer", "minimum": 0},
        "vf_flags": {"type": "array", "items": {"type": "boolean"}},
    },
}


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path, expected: Optional[Sequence[str]] = None) -> Tuple[List[str], List[List[str]]]:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"missing file {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path} is empty") from None
        rows = list(reader)
    if expected is not None and tuple(header) != tuple(expected):
        raise ValidationError(f"{path}: header {header} differs from expected {list(expected)}")
    return header, rows


# --- dataset -----------------------------------------------------------------


def write_metadata(path, table: EngagementTable, extra: Optional[Dict[str, object]] = None) -> Path:
    if table.noise is None:
        raise ValidationError("table has no noise metadata to write")
    items = {
        "sigma_views": table.noise.sigma_views,
        "sigma_likes": table.noise.sigma_likes,
        "sigma_reaction": table.noise.sigma_reaction,
        "min_views": float(table.min_views),
        "view_scale": float(table.view_scale),
        "behaviors": ",".join(table.behavior_names),
    }
    items.update(extra or {})
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in items.items():
            fh.write(f"{key}={_fmt(value)}\n")
    return path


def read_metadata(path) -> Dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"missing metadata file {path} (noise sigmas are required)")
    meta = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValidationError(f"{path}:{lineno}: expected key=value")
            meta[key.strip()] = value.strip()
    missing = [k for k in REQUIRED_METADATA if k not in meta]
    if missing:
        raise ValidationError(f"{path}: metadata lacks {missing}")
    return meta


def write_dataset(out_dir, table: EngagementTable, truth: GroundTruth, extra_metadata: Optional[Dict[str, object]] = None) -> List[Path]:
    out_dir = Path(out_dir)
    rows = (
        (u, p, g, *group_attributes(g), v, *c)
        for u, p, g, v, c in zip(table.url_id, table.period, table.group_id, table.views, table.counts)
    )
    eng = write_csv(out_dir / ENGAGEMENT_CSV, ENGAGEMENT_COLUMNS, rows)
    gt_rows = (
        (u, *b, lv, bool(m), q)
        for u, b, lv, m, q in zip(truth.url_id, truth.beta_true, truth.latent_value, truth.misinfo, truth.domain_quality)
    )
    gt = write_csv(out_dir / GROUND_TRUTH_CSV, GROUND_TRUTH_COLUMNS, gt_rows)
    meta = write_metadata(out_dir / METADATA_FILE, table, extra_metadata)
    return [eng, gt, meta]


def read_engagement(path, metadata: Optional[Dict[str, str]] = None) -> EngagementTable:
    header, rows = read_csv(path)
    missing = [c for c in ("url_id", "period", "group_id", "views") + BEHAVIORS if c not in header]
    if missing:
        raise ValidationError(f"{path}: missing columns {missing}")
    col = {name: i for i, name in enumerate(header)}
    try:
        arr = np.array([[r[col[c]] for c in ("url_id", "period", "group_id", "views") + BEHAVIORS] for r in rows], dtype=float).reshape(-1, 4 + K)
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed row ({exc})") from None
    noise, min_views, view_scale = None, 0.0, float("nan")
    if metadata is not None:
        noise = NoiseSpec(float(metadata["sigma_views"]), float(metadata["sigma_likes"]), float(metadata["sigma_reaction"]))
        min_views = float(metadata.get("min_views", 0.0))
        view_scale = float(metadata.get("view_scale", "nan"))
    order = np.lexsort((arr[:, 2], arr[:, 1], arr[:, 0]))
    arr = arr[order]
    return EngagementTable(
        url_id=arr[:, 0].astype(np.int64),
        period=arr[:, 1].astype(np.int64),
        group_id=arr[:, 2].astype(np.int64),
        views=arr[:, 3].copy(),
        counts=arr[:, 4:].copy(),
        noise=noise,
        min_views=min_views,
        view_scale=view_scale,
    )


def read_ground_truth(path) -> GroundTruth:
    _, rows = read_csv(path, GROUND_TRUTH_COLUMNS)
    arr = np.array(rows, dtype=float).reshape(-1, len(GROUND_TRUTH_COLUMNS))
    return GroundTruth(
        url_id=arr[:, 0].astype(np.int64),
        beta_true=arr[:, 1 : 1 + K].copy(),
        latent_value=arr[:, 1 + K].copy(),
        misinfo=arr[:, 2 + K].astype(bool),
        domain_quality=arr[:, 3 + K].copy(),
    )


def read_dataset(data_dir, require_truth: bool = False) -> Tuple[EngagementTable, Optional[GroundTruth]]:
    """Engagement table (with noise metadata) and, when present, ground truth."""
    data_dir = Path(data_dir)
    meta = read_metadata(data_dir / METADATA_FILE)
    table = read_engagement(data_dir / ENGAGEMENT_CSV, meta)
    truth = None
    if (data_dir / GROUND_TRUTH_CSV).is_file():
        truth = read_ground_truth(data_dir / GROUND_TRUTH_CSV)
    elif require_truth:
        raise ValidationError(f"missing ground truth {data_dir / GROUND_TRUTH_CSV}")
    return table, truth


# --- estimation reports ------------------------------------------------------


def report_to_json(report: EstimationReport) -> dict:
    return {
        "period": int(report.period),
        "vf_hat": [float(v) for v in report.vf_hat],
        "variance_hat": [float(v) for v in report.variance_hat],
        "beta_hat": {str(int(u)): [float(v) for v in b] for u, b in sorted(report.beta_hat.items())},
        "n_boot_urls": int(report.n_boot_urls),
        "n_boot_samples": int(report.n_boot_samples),
        "vf_flags": [bool(f) for f in report.vf_flags],
    }


def validate_report(doc: dict) -> None:
    try:
        jsonschema.validate(doc, REPORT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"report does not match schema: {exc.message}") from None


def report_filename(period: int) -> str:
    return f"report_{int(period):03d}.json"


def write_report(path, report: EstimationReport) -> Path:
    doc = report_to_json(report)
    validate_report(doc)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return path


def read_report(path) -> EstimationReport:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"missing estimation report {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    validate_report(doc)
    return EstimationReport(
        period=int(doc["period"]),
        beta_hat={int(u): np.array(b, dtype=float) for u, b in doc["beta_hat"].items()},
        vf_hat=np.array(doc["vf_hat"], dtype=float),
        variance_hat=np.array(doc["variance_hat"], dtype=float),
        n_boot_urls=int(doc.get("n_boot_urls", 0)),
        n_boot_samples=int(doc.get("n_boot_samples", 0)),
        vf_flags=tuple(doc.get("vf_flags", [False] * K)),
    )


def read_reports(reports_dir, periods: Iterable[int]) -> Dict[int, EstimationReport]:
    reports_dir = Path(reports_dir)
    return {int(t): read_report(reports_dir / report_filename(t)) for t in periods}


# --- experiment tables -------------------------------------------------------


def sweep_header(k: int) -> Tuple[str, ...]:
    return ("axis",) + tuple(f"w_user_{j + 1}" for j in range(k)) + tuple(f"w_prod_{j + 1}" for j in range(k)) + ("user_utility", "producer_welfare")


def write_sweep_csv(path, rows: Sequence[SweepRow]) -> Path:
    """One row per grid point; the ``axis`` column holds the swept value."""
    k = len(rows[0].w_user) if rows else 0
    return write_csv(path, sweep_header(k), ((r.axis_value, *r.w_user, *r.w_prod, r.user_utility, r.producer_welfare) for r in rows))


def read_sweep_csv(path) -> List[SweepRow]:
    header, rows = read_csv(path)
    k = (len(header) - 3) // 2
    if tuple(header) != sweep_header(k):
        raise ValidationError(f"{path}: not a sweep table")
    out = []
    for r in rows:
        v = [float(x) for x in r]
        out.append(SweepRow(v[0], tuple(v[1 : 1 + k]), tuple(v[1 + k : 1 + 2 * k]), v[1 + 2 * k], v[2 + 2 * k]))
    return out


def write_nitems_csv(path, rows: Sequence[NItemsRow]) -> Path:
    return write_csv(path, NITEMS_COLUMNS, ((r.sim_id, r.w1_theory, r.w1_empirical, r.auc) for r in rows))


def read_nitems_csv(path) -> List[NItemsRow]:
    _, rows = read_csv(path, NITEMS_COLUMNS)
    return [NItemsRow(int(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in rows]


def write_rank_eval_csv(path, results: Sequence[SchemeResult]) -> Path:
    return write_csv(
        path,
        RANK_EVAL_COLUMNS,
        ((r.scheme, r.period, r.top_k, r.total_value, r.misinfo_rate, r.mean_domain_quality) for r in results),
    )


def read_rank_eval_csv(path) -> List[dict]:
    _, rows = read_csv(path, RANK_EVAL_COLUMNS)
    return [
        {
            "scheme": r[0],
            "period": int(r[1]),
            "top_k": int(r[2]),
            "total_value": float(r[3]),
            "misinfo_rate": float(r[4]),
            "mean_domain_quality": float(r[5]),
        }
        for r in rows
    ]


def write_weights_csv(path, results: Sequence[SchemeResult]) -> Path:
    return write_csv(path, WEIGHTS_COLUMNS, ((r.scheme, r.period, *np.asarray(r.weights)) for r in results))


def read_weights_csv(path) -> List[Tuple[str, int, np.ndarray]]:
    _, rows = read_csv(path, WEIGHTS_COLUMNS)
    return [(r[0], int(r[1]), np.array(r[2:], dtype=float)) for r in rows]


def ensure_writable_dir(path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"cannot create output directory {path}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise ValidationError(f"output directory {path} is not writable")
    return path
