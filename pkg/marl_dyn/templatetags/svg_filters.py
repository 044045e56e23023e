import math

from django import template

from marl_dyn.conf.settings import marl_dyn_settings

register = template.Library()


def format_coord(value, precision=None) -> str:
    digits = marl_dyn_settings.PLOT_PRECISION if precision is None else int(precision)
    text = f"{float(value):.{digits}f}"
    # Avoid "-0.000" so identical geometry always prints identically.
    return text[1:] if text.startswith("-") and float(text) == 0.0 else text


@register.filter
def coord(value, precision=None):
    """Format an SVG coordinate with the configured number of decimals"""
    return format_coord(value, precision)


@register.filter
def number(value, digits=4):
    """Axis-label formatting"""
    if value is None:
        return ""
    return f"{float(value):.{int(digits)}g}"


@register.simple_tag
def points_attr(points):
    """``x1,y1 x2,y2 ...`` for polyline/polygon ``points`` attributes"""
    return " ".join(f"{format_coord(x)},{format_coord(y)}" for x, y in points)


@register.simple_tag
def star_points(cx, cy, radius):
    """Five-pointed star centred on (cx, cy)"""
    vertices = []
    for k in range(10):
        r = radius if k % 2 == 0 else radius * 0.4
        angle = -math.pi / 2 + k * math.pi / 5
        vertices.append((cx + r * math.cos(angle), cy + r * math.sin(angle)))
    return points_attr(vertices)
