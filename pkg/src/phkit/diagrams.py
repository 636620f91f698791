"""Reading and writing persistence diagrams (CSV, JSON) and SVG plots."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Optional
from xml.sax.saxutils import escape

from .errors import DataError, ParseError
from .reduce import PersistenceDiagram, PersistencePair

CSV_HEADER = ("dim", "birth", "death")


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def diagram_to_csv(pd: PersistenceDiagram) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in pd.pairs:
        w.writerow((p.dim, _fmt(p.birth), _fmt(p.death)))
    return buf.getvalue()


def write_diagram_csv(pd: PersistenceDiagram, path) -> None:
    Path(path).write_text(diagram_to_csv(pd), encoding="utf-8")


def read_diagram_csv(path, maxdim: Optional[int] = None) -> PersistenceDiagram:
    """Parse a ``dim,birth,death`` file; ``maxdim`` defaults to the largest dim present."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows or tuple(c.strip() for c in rows[0]) != CSV_HEADER:
        raise ParseError("expected header 'dim,birth,death'", row=1, path=path)
    pairs = []
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, found {len(row)}", row=k, path=path)
        try:
            dim = int(row[0])
        except ValueError:
            raise ParseError(f"bad dimension {row[0]!r}", row=k, column=1, path=path) from None
        vals = []
        for c in (1, 2):
            try:
                vals.append(float(row[c]))
            except ValueError:
                raise ParseError(f"bad value {row[c]!r}", row=k, column=c + 1, path=path) from None
        birth, death = vals
        if dim < 0 or math.isnan(birth) or math.isnan(death) or math.isinf(birth) or death < birth:
            raise ParseError("need dim >= 0, finite birth and birth <= death", row=k, path=path)
        pairs.append(PersistencePair(dim, birth, death))
    top = max((p.dim for p in pairs), default=0)
    return PersistenceDiagram(pairs, top if maxdim is None else maxdim)


def _one_based(simplex) -> Optional[list]:
    return None if simplex is None else [int(v) + 1 for v in simplex]


def diagram_to_json(pd: PersistenceDiagram, labels=(), metadata: Optional[dict] = None,
                    fc=None) -> str:
    """JSON mirror of the CSV with labels and metadata. Vertex numbers are
    one-based. Passing the complex ``fc`` adds the diagram's generators, each
    chain written as a list of simplices."""

    def num(x):
        return "inf" if math.isinf(x) else float(x)

    out = {
        "maxdim": pd.maxdim,
        "labels": list(labels),
        "metadata": metadata or {},
        "pairs": [
            {"dim": p.dim, "birth": num(p.birth), "death": num(p.death),
             "birth_simplex": _one_based(p.birth_simplex),
             "death_simplex": _one_based(p.death_simplex)}
            for p in pd.pairs
        ],
    }
    if fc is not None:
        def chain(dim, positions):
            return [_one_based(fc.simplices[dim][i]) for i in positions]

        out["generators"] = [
            {"dim": g.dim, "birth_simplex": _one_based(fc.simplices[g.dim][g.birth_index]),
             "cycle": chain(g.dim, g.cycle),
             "death_simplex": (_one_based(fc.simplices[g.dim + 1][g.death_index])
                               if g.death_index is not None else None),
             "bounding_chain": (chain(g.dim + 1, g.bounding_chain)
                                if g.bounding_chain is not None else None)}
            for _, g in sorted(pd.generators.items())
        ]
    return json.dumps(out, indent=1, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# SVG
# --------------------------------------------------------------------------

WIDTH, HEIGHT, MARGIN = 480, 480, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _extent(pd: PersistenceDiagram) -> float:
    finite = [v for p in pd.pairs for v in (p.birth, p.death) if not math.isinf(v)]
    top = max(finite, default=0.0)
    return top * 1.05 if top > 0 else 1.0


def _axes(lines: list, hi: float, xlabel: str, ylabel: str, yticks: bool = True) -> None:
    x0, y0, x1, y1 = MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN
    lines.append(f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    lines.append(f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for k in range(5):
        v = hi * k / 4
        x = x0 + (x1 - x0) * k / 4
        lines.append(f'<text x="{x:.2f}" y="{y0 + 16}" font-size="10" text-anchor="middle">{v:.3g}</text>')
        if yticks:
            y = y0 - (y0 - y1) * k / 4
            lines.append(f'<text x="{x0 - 6}" y="{y + 3:.2f}" font-size="10" text-anchor="end">{v:.3g}</text>')
    lines.append(f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 12}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    lines.append(f'<text x="14" y="{(y0 + y1) / 2}" font-size="12" text-anchor="middle" '
                 f'transform="rotate(-90 14 {(y0 + y1) / 2})">{escape(ylabel)}</text>')


def _svg(lines: list, title: str) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<title>{escape(title)}</title>",
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    return "\n".join(head + lines + ["</svg>"]) + "\n"


def diagram_svg(pd: PersistenceDiagram, dims=None, title: str = "persistence diagram") -> str:
    """Birth on x, death on y; infinite bars drawn as hollow squares on the diagonal."""
    hi = _extent(pd)
    span_x, span_y = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(v):
        return MARGIN + span_x * v / hi

    def sy(v):
        return HEIGHT - MARGIN - span_y * v / hi

    lines = []
    _axes(lines, hi, "birth", "death")
    lines.append(f'<line class="diagonal" x1="{sx(0):.2f}" y1="{sy(0):.2f}" x2="{sx(hi):.2f}" '
                 f'y2="{sy(hi):.2f}" stroke="gray" stroke-dasharray="4 3"/>')
    for p in pd.pairs:
        if dims is not None and p.dim not in dims:
            continue
        color = COLORS[p.dim % len(COLORS)]
        if p.is_infinite:
            x, y = sx(p.birth), sy(p.birth)
            lines.append(f'<rect class="infinite" data-dim="{p.dim}" x="{x - 4:.2f}" y="{y - 4:.2f}" '
                         f'width="8" height="8" fill="none" stroke="{color}"/>')
        else:
            lines.append(f'<circle class="pair" data-dim="{p.dim}" data-birth="{p.birth!r}" '
                         f'data-death="{p.death!r}" cx="{sx(p.birth):.2f}" cy="{sy(p.death):.2f}" '
                         f'r="3.5" fill="{color}"/>')
    return _svg(lines, title)


def barcode_svg(pd: PersistenceDiagram, dims=None, title: str = "barcode") -> str:
    """One horizontal segment per pair, grouped by dimension; infinite bars run
    to the right edge and end in an arrow head."""
    hi = _extent(pd)
    pairs = [p for p in pd.pairs if dims is None or p.dim in dims]
    span_x = WIDTH - 2 * MARGIN
    step = (HEIGHT - 2 * MARGIN) / max(len(pairs), 1)
    lines = []
    _axes(lines, hi, "filtration value", "bars", yticks=False)
    for k, p in enumerate(pairs):
        y = MARGIN + step * (k + 0.5)
        x0 = MARGIN + span_x * p.birth / hi
        x1 = WIDTH - MARGIN if p.is_infinite else MARGIN + span_x * p.death / hi
        color = COLORS[p.dim % len(COLORS)]
        cls = "infinite" if p.is_infinite else "pair"
        lines.append(f'<line class="{cls}" data-dim="{p.dim}" x1="{x0:.2f}" y1="{y:.2f}" '
                     f'x2="{x1:.2f}" y2="{y:.2f}" stroke="{color}" stroke-width="2"/>')
        if p.is_infinite:
            lines.append(f'<polygon points="{x1:.2f},{y:.2f} {x1 - 6:.2f},{y - 3:.2f} '
                         f'{x1 - 6:.2f},{y + 3:.2f}" fill="{color}"/>')
    return _svg(lines, title)
