"""Deterministic text formatting for ledgers, reports, and snapshots.

Every float is emitted with 17 significant digits via ``%.17g``, which
round-trips IEEE doubles exactly, so repeated identical runs produce
byte-identical files.
"""

from __future__ import annotations

import numpy as np


def fmt(x) -> str:
    """Format one float with 17 significant digits, locale-independent."""
    return "%.17g" % float(x)


def fmt_row(values) -> str:
    return ",".join(fmt(v) for v in values)


def ledger_header(n_components: int) -> str:
    vols = ",".join(f"volume_{k + 1}" for k in range(n_components))
    return f"t,area,{vols},dissipation,max_v,reach,deficit"


def ledger_csv(rows, n_components: int) -> str:
    lines = [ledger_header(n_components)]
    for r in rows:
        vals = [r.t, r.area, *r.volumes, r.dissipation, r.max_normal_speed,
                r.reach, r.isoperimetric_deficit]
        lines.append(fmt_row(vals))
    return "\n".join(lines) + "\n"


def interface_text(interface) -> str:
    """Plain-text record: per component, a ``center`` line and a ``coeffs``
    line, components separated by a blank line."""
    blocks = []
    for curve in interface.components:
        center = "center " + " ".join(fmt(c) for c in curve.center)
        coeffs = "coeffs " + " ".join(fmt(c) for c in curve.rho_coeffs)
        blocks.append(center + "\n" + coeffs + "\n")
    return "\n".join(blocks)


def parse_interface_text(text: str):
    """Inverse of :func:`interface_text`; returns list of (center, coeffs)."""
    blocks = [b for b in text.split("\n\n") if b.strip()]
    out = []
    for block in blocks:
        lines = [ln.strip() for ln in block.strip().splitlines() if ln.strip()]
        if len(lines) != 2 or not lines[0].startswith("center ") \
                or not lines[1].startswith("coeffs "):
            raise ValueError("malformed interface block: %r" % block)
        center = np.array([float(v) for v in lines[0].split()[1:]])
        coeffs = np.array([float(v) for v in lines[1].split()[1:]])
        if center.shape != (2,):
            raise ValueError("center line must hold exactly two floats")
        out.append((center, coeffs))
    return out


def interface_svg(interface, samples_per_component: int = 512) -> str:
    """SVG snapshot: unit-scaled viewBox, one path per component."""
    from .geometry import component_points

    paths = []
    all_pts = []
    for curve in interface.components:
        pts = component_points(curve, samples_per_component)
        all_pts.append(pts)
        d = "M " + " L ".join(f"{fmt(p[0])} {fmt(p[1])}" for p in pts) + " Z"
        paths.append(f'<path d="{d}" fill="none" stroke="black" '
                     f'stroke-width="0.01" />')
    pts = np.concatenate(all_pts)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    pad = 0.05 * max(hi - lo)
    vb = (lo[0] - pad, lo[1] - pad, hi[0] - lo[0] + 2 * pad, hi[1] - lo[1] + 2 * pad)
    body = "\n".join(paths)
    return ('<svg xmlns="http://www.w3.org/2000/svg" viewBox="'
            + " ".join(fmt(v) for v in vb) + '">\n' + body + "\n</svg>\n")


def json_like(obj, indent: int = 0) -> str:
    """Minimal JSON emitter with %.17g floats and fixed key order (insertion
    order of the dict), so report files are byte-stable."""
    pad = "  " * indent
    if isinstance(obj, dict):
        items = [f'{pad}  "{k}": {json_like(v, indent + 1).lstrip()}'
                 for k, v in obj.items()]
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [json_like(v, indent + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return pad + "[" + ", ".join(it.lstrip() for it in items) + "]"
        return pad + "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return pad + ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return pad + str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return pad + fmt(obj)
    if isinstance(obj, str):
        return pad + '"' + obj + '"'
    raise TypeError(f"cannot serialize {type(obj)}")
