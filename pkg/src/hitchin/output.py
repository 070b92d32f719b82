"""CSV, summary, manifest and SVG writers used by the command-line front end.

CSV files carry a header row and 6 significant digits.  The manifest and
config formats are flat ``key = value`` lines with ``#`` comments.
"""

from __future__ import annotations

import csv
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import PreconditionError

DIGITS = 6


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.{DIGITS}g}"


def fmt_complex(z) -> str:
    z = complex(z)
    return f"{fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}i"


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def radial_csv(profile, path) -> Path:
    cols = (profile.r, profile.psi, profile.dpsi_dr, profile.absF)
    return write_csv(path, ["r", "psi", "dpsi_dr", "absF"], zip(*cols))


def scan_csv(table, path) -> Path:
    return write_csv(path, ["B", "flux_over_pi"], table)


def heatmap_csv(field, path) -> Path:
    z = field.spec.z
    cols = (z.real.ravel(), z.imag.ravel(), field.psi.ravel(), field.absF.ravel())
    return write_csv(path, ["x", "y", "psi", "absF"], zip(*cols))


def surface_csv(scan, path) -> Path:
    """One row per lattice node in row-major order; failed samples are nan."""
    iso = scan.sample_grid("iso_spread")
    gauge = scan.sample_grid("resid_gauge")
    c = scan.coords.ravel()
    cols = (c.real, c.imag, scan.omega.ravel(), scan.curvature.ravel(), iso.ravel(), gauge.ravel())
    header = ["coord_re", "coord_im", "omega", "curvature", "iso_spread", "resid_gauge"]
    return write_csv(path, header, zip(*cols))


def _value(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower() if v is not None else "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    if isinstance(v, (complex, np.complexfloating)):
        return fmt_complex(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_value(x) for x in v) + "]"
    return f'"{v}"'


def summary_block(data: dict) -> str:
    """JSON-like plain text; complex numbers print as a+bi."""
    lines = ["{"]
    items = list(data.items())
    for k, (key, v) in enumerate(items):
        sep = "," if k < len(items) - 1 else ""
        lines.append(f'  "{key}": {_value(v)}{sep}')
    lines.append("}")
    return "\n".join(lines)


# -- manifest and config ---------------------------------------------------------


def write_manifest(path, command: str, params: dict) -> Path:
    """Resolved parameters; only the commented first line depends on the clock."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    lines = [f"# written {stamp}", f"command = {command}"]
    for key in sorted(params):
        v = params[key]
        if v is None:
            continue
        lines.append(f"{key} = {v}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_config(path) -> dict[str, str]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for no, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PreconditionError(f"{path}:{no}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise PreconditionError(f"{path}:{no}: empty key")
        out[key.replace("-", "_")] = value
    return out


# -- SVG ------------------------------------------------------------------------------


def _diverging(t: float) -> str:
    """Blue (t = -1) through white to red (t = +1)."""
    t = max(-1.0, min(1.0, t))
    if t >= 0:
        r, g, b = 255, int(255 * (1 - t)), int(255 * (1 - t))
    else:
        r, g, b = int(255 * (1 + t)), int(255 * (1 + t)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def _sequential(t: float) -> str:
    """t in [0, 1] -> white to dark blue."""
    t = min(max(t, 0.0), 1.0)
    return "#%02x%02x%02x" % (int(255 - 224 * t), int(255 - 177 * t), int(255 - 99 * t))


def svg_heatmap(
    coords: np.ndarray,
    values: np.ndarray,
    path,
    title: str = "",
    cell: int = 16,
    diverging: bool = True,
    max_cells: int = 128,
) -> Path:
    """Heatmap; NaN cells are grey.

    ``diverging`` uses a blue-white-red scale symmetric about 0, otherwise a
    linear scale from min to max.  Arrays larger than ``max_cells`` per side
    are subsampled.
    """
    values = np.asarray(values, dtype=float)
    c = np.asarray(coords)
    stride = max(1, -(-max(values.shape) // max_cells))
    values = values[::stride, ::stride]
    ny, nx = values.shape
    cell = max(2, min(cell, 512 // max(nx, ny)))
    finite = np.isfinite(values)
    lo = float(np.nanmin(values)) if finite.any() else 0.0
    hi = float(np.nanmax(values)) if finite.any() else 1.0
    scale = max(abs(lo), abs(hi)) or 1.0
    span = (hi - lo) or 1.0
    legend = f"|max| = {fmt(scale)}" if diverging else f"min = {fmt(lo)}, max = {fmt(hi)}"
    pad = 30
    W, H = nx * cell + 2 * pad, ny * cell + 2 * pad
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
        f'<text x="{pad}" y="{pad - 10}" font-size="12">{title} ({legend})</text>',
    ]
    for i in range(ny):
        for j in range(nx):
            v = values[i, j]
            if not np.isfinite(v):
                colour = "#bbbbbb"
            elif diverging:
                colour = _diverging(v / scale)
            else:
                colour = _sequential((v - lo) / span)
            # row 0 is the lowest Im value: draw it at the bottom
            y = pad + (ny - 1 - i) * cell
            parts.append(
                f'<rect x="{pad + j * cell}" y="{y}" width="{cell}" height="{cell}" fill="{colour}"/>'
            )
    parts.append(
        f'<text x="{pad}" y="{H - 8}" font-size="10">re: [{fmt(c.real.min())}, {fmt(c.real.max())}]'
        f"  im: [{fmt(c.imag.min())}, {fmt(c.imag.max())}]</text>"
    )
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path


def svg_line(x, y, path, xlabel: str = "x", ylabel: str = "y", width: int = 480, height: int = 320) -> Path:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pad = 40
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = min(0.0, float(y.min())), float(y.max())
    sx = (width - 2 * pad) / ((x1 - x0) or 1.0)
    sy = (height - 2 * pad) / ((y1 - y0) or 1.0)
    pts = " ".join(f"{pad + (a - x0) * sx:.2f},{height - pad - (b - y0) * sy:.2f}" for a, b in zip(x, y))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="2"/>',
        f'<text x="{width / 2}" y="{height - 8}" font-size="12">{xlabel} [{fmt(x0)}, {fmt(x1)}]</text>',
        f'<text x="4" y="{pad - 10}" font-size="12">{ylabel} [{fmt(y0)}, {fmt(y1)}]</text>',
        "</svg>",
    ]
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path
