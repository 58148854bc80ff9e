"""CSV results with '#' metadata comments, and gnuplot scripts that plot them."""
from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

from .errors import HeaderMismatch
from .scenario import METRICS, ScenarioKind


def format_number(value) -> str:
    """9 significant digits; integers stay integers, NaN renders as ``nan``."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = format(value, ".9g")
    return "0" if text == "-0" else text


def _metadata_lines(metadata: dict, reproducible: bool) -> list[str]:
    lines = []
    for key, value in metadata.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True, separators=(",", ":"))
        lines.append(f"# {key}: {value}")
    if not reproducible:
        stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        lines.append(f"# generated_utc: {stamp}")
    return lines


def render_csv(rows, metadata: dict, metric_names=None, reproducible: bool = False) -> str:
    """CSV text: metadata comments, then an RFC-4180 header and one line per row."""
    rows = list(rows)
    if metric_names is None:
        metric_names = list(rows[0].metrics) if rows else []
    buf = io.StringIO()
    for line in _metadata_lines(metadata, reproducible):
        buf.write(line.replace("\r", " ").replace("\n", " ") + "\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["sweep_value", *metric_names])
    for row in rows:
        writer.writerow([format_number(row.sweep_value)]
                        + [format_number(row.metrics[m]) for m in metric_names])
    return buf.getvalue()


def emit_csv(rows, metadata: dict, path, metric_names=None, reproducible: bool = False) -> Path:
    path = Path(path)
    text = render_csv(rows, metadata, metric_names, reproducible)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def read_header(csv_path) -> list[str]:
    """Column names of a results CSV, skipping the metadata comments."""
    with open(csv_path, newline="") as fh:
        for line in fh:
            if not line.startswith("#") and line.strip():
                return next(csv.reader([line]))
    return []


# (title, x label, left-axis columns and label, right-axis columns and label)
_LAYOUTS = {
    ScenarioKind.ELEVATION_MASK_SWEEP: (
        "Positioning error and signal quality vs elevation mask", "Elevation mask (deg)",
        ("rms_error_m",), "RMS position error (m)", ("mean_snr_db",), "Mean SNR (dB)"),
    ScenarioKind.POWER_SPLIT_SWEEP: (
        "Ergodic rate vs communication power allocation", "omega_c^2",
        ("c_nav", "c_com"), "Ergodic rate (bit/s)", (), ""),
    ScenarioKind.RIS_DISTANCE_SWEEP: (
        "Positioning error and ergodic rate vs satellite-RIS distance", "Satellite-RIS distance (m)",
        ("rms_error_m", "pdop"), "RMS error (m) / PDoP", ("c_nav", "c_com"), "Ergodic rate (bit/s)"),
    ScenarioKind.INDOOR_DISTANCE_SWEEP: (
        "Indoor positioning error vs mean RIS-user distance", "Mean RIS-user distance (m)",
        ("rms_error_m",), "RMS position error (m)", ("pdop",), "PDoP"),
}


def plot_script(header, scenario_kind, csv_name: str, image_name: str) -> str:
    kind = ScenarioKind(scenario_kind)
    expected = ["sweep_value", *METRICS[kind]]
    if list(header) != expected:
        raise HeaderMismatch(f"CSV header {list(header)} does not match {kind.value}: {expected}")
    title, xlabel, left, ylabel, right, y2label = _LAYOUTS[kind]
    col = {name: i + 1 for i, name in enumerate(header)}
    lines = [
        f"# plots {csv_name} ({kind.value})",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set datafile missing 'nan'",
        "set key autotitle columnheader",
        "set terminal pngcairo size 900,600" if image_name.endswith(".png") else "set terminal dumb",
        "set termoption noenhanced",
        f"set output '{image_name}'",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        "set key outside bottom center horizontal",
        "set grid",
    ]
    if right:
        lines += [f"set y2label '{y2label}'", "set ytics nomirror", "set y2tics"]
    plots = [f"'{csv_name}' using 1:{col[c]} with linespoints title '{c}' axes x1y1"
             for c in left]
    plots += [f"'{csv_name}' using 1:{col[c]} with linespoints title '{c}' axes x1y2"
              for c in right]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def emit_plot_script(csv_path, scenario_kind, script_path=None, image_name=None) -> Path:
    """Write a gnuplot script next to ``csv_path`` (``.gp`` suffix by default)."""
    csv_path = Path(csv_path)
    header = read_header(csv_path)
    script_path = Path(script_path) if script_path else csv_path.with_suffix(".gp")
    image = image_name or csv_path.with_suffix(".png").name
    text = plot_script(header, scenario_kind, csv_path.name, image)
    script_path.write_text(text)
    return script_path
