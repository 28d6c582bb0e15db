"""SVG plots of a triangulated point set on the azimuth/elevation plane.

Plots are equirectangular: azimuth on x (0..360, counter-clockwise
convention), elevation on y (90 at the top). When a query was answered in
a rotated frame, plot the rotated frame so the enclosing triangle is the
one actually used.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

from .geometry import Direction, Triangulation
from .interpolation import InterpolationPlan

_STYLE = """\
.frame { fill: white; stroke: #444; stroke-width: 1; }
.edge { stroke: #99b; stroke-width: 0.7; }
.point { fill: #336; }
.enclosing { fill: rgba(220,80,60,0.25); stroke: #c43; stroke-width: 1.6; }
.selected { fill: none; stroke: #c43; stroke-width: 1.6; }
.query { fill: #0a0; }
.caption, .tick { font: 11px sans-serif; fill: #222; }
"""

_W, _H = 680, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 50, 25, 25, 55


def _x(az: float) -> float:
    return _LEFT + (az / 360.0) * (_W - _LEFT - _RIGHT)


def _y(el: float) -> float:
    return _TOP + ((90.0 - el) / 180.0) * (_H - _TOP - _BOTTOM)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def triangulation_svg(
    tri: Triangulation,
    query: Direction | None = None,
    plan: InterpolationPlan | None = None,
    caption: str = "",
) -> str:
    """Render the triangulation (and optionally a query + its plan) as SVG.

    A 3-entry plan is drawn as a filled triangle (class "enclosing");
    shorter plans mark the selected vertices (class "selected"). Vertex
    indices in the plan refer to tri.vertices.
    """
    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(_W),
        height=str(_H),
        viewBox=f"0 0 {_W} {_H}",
    )
    ET.SubElement(svg, "style").text = _STYLE
    ET.SubElement(
        svg,
        "rect",
        {
            "class": "frame",
            "x": _fmt(_LEFT),
            "y": _fmt(_TOP),
            "width": _fmt(_W - _LEFT - _RIGHT),
            "height": _fmt(_H - _TOP - _BOTTOM),
        },
    )

    for az in (0, 90, 180, 270, 360):
        t = ET.SubElement(
            svg,
            "text",
            {"class": "tick", "x": _fmt(_x(az) - 8), "y": _fmt(_H - _BOTTOM + 14)},
        )
        t.text = str(az)
    for el in (-90, 0, 90):
        t = ET.SubElement(
            svg,
            "text",
            {"class": "tick", "x": _fmt(_LEFT - 28), "y": _fmt(_y(el) + 4)},
        )
        t.text = str(el)

    # frame_coords carries the plotted frame's plane coordinates (equal to
    # the vertex directions in the base frame, transformed in rotated ones)
    azs = [float(v) for v in tri.frame_coords[:, 0]]
    els = [float(v) for v in tri.frame_coords[:, 1]]

    mesh = ET.SubElement(svg, "g", {"class": "mesh"})
    for a, b in tri.edges():
        ET.SubElement(
            mesh,
            "line",
            {
                "class": "edge",
                "x1": _fmt(_x(azs[a])),
                "y1": _fmt(_y(els[a])),
                "x2": _fmt(_x(azs[b])),
                "y2": _fmt(_y(els[b])),
            },
        )

    if plan is not None:
        idxs = [i for i, _ in plan.entries]
        if len(idxs) == 3:
            pts = " ".join(f"{_fmt(_x(azs[i]))},{_fmt(_y(els[i]))}" for i in idxs)
            ET.SubElement(svg, "polygon", {"class": "enclosing", "points": pts})
        else:
            for i in idxs:
                ET.SubElement(
                    svg,
                    "circle",
                    {
                        "class": "selected",
                        "cx": _fmt(_x(azs[i])),
                        "cy": _fmt(_y(els[i])),
                        "r": "7",
                    },
                )

    points = ET.SubElement(svg, "g", {"class": "points"})
    for az, el in zip(azs, els):
        ET.SubElement(
            points,
            "circle",
            {"class": "point", "cx": _fmt(_x(az)), "cy": _fmt(_y(el)), "r": "3"},
        )

    if query is not None:
        ET.SubElement(
            svg,
            "circle",
            {
                "class": "query",
                "cx": _fmt(_x(query.azimuth_deg)),
                "cy": _fmt(_y(query.elevation_deg)),
                "r": "4.5",
            },
        )

    if caption:
        t = ET.SubElement(
            svg,
            "text",
            {"class": "caption", "x": _fmt(_LEFT), "y": _fmt(_H - 12)},
        )
        t.text = caption

    return ET.tostring(svg, encoding="unicode")


def write_triangulation_svg(path, tri, query=None, plan=None, caption="") -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(triangulation_svg(tri, query, plan, caption), encoding="utf-8")
