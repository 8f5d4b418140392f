"""Plain-text chart descriptions: coordinates, domain and quadrature.

A manifest is a line-oriented file.  ``#`` starts a comment, blank lines
are ignored, and the remaining lines are, in any order:

    kind: immersion            (or: cone)
    n: 2                       number of parameters
    ambient: 3                 number of coordinates
    x1 = cos(t1) * sin(t2)     one line per coordinate
    x2 = @chart                cone manifests mark the affine slot
    t1 in [0, 2*pi) periodic   one line per parameter
    t2 in (0, pi) open
    grid: 16                   optional quadrature settings
    max_levels: 6
    tol_conv: 1e-9
    tol_cert: 1e-6

Interval bounds are constant expressions, so ``pi`` and arithmetic are
fine.  Periodic intervals are written ``[a, b)``, open ones ``(a, b)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import (DomainError, ExprDomainError, ExprSyntaxError,
                     ManifestError)
from .expr import const_value, parse
from .geometry import ConeChart, ImmersionChart
from .integrate import DomainSpec, Interval, QuadratureSpec

__all__ = ["Manifest", "parse_manifest", "load_manifest"]

_SETTING = re.compile(
    r"(kind|n|ambient|grid|max_levels|tol_conv|tol_cert)\s*:\s*(\S+)$")
_COMPONENT = re.compile(r"x(\d+)\s*=\s*(.+)$")
_INTERVAL = re.compile(r"t(\d+)\s+in\s+(.+?)\s*(periodic|open)$")

_QUAD_KEYS = ("grid", "max_levels", "tol_conv", "tol_cert")


@dataclass(frozen=True)
class Manifest:
    kind: str
    chart: Union[ImmersionChart, ConeChart]
    domain: DomainSpec
    quad: QuadratureSpec


def _fail(lineno: int, message: str) -> ManifestError:
    return ManifestError(f"line {lineno}: {message}",
                         location={"line": lineno})


def _constant(text: str, lineno: int) -> float:
    try:
        value = const_value(parse(text, 0))
    except (ExprSyntaxError, ExprDomainError) as exc:
        raise _fail(lineno, f"bad bound {text!r}: {exc.message}") from exc
    if value is None:
        raise _fail(lineno, f"bound {text!r} is not constant")
    return float(value)


def _split_bounds(body: str, lineno: int):
    """Pick apart "[a, b)" into brackets and the two bound strings."""
    if len(body) < 4 or body[0] not in "[(" or body[-1] not in ")]":
        raise _fail(lineno, f"malformed interval {body!r}")
    inner = body[1:-1]
    depth = 0
    split = -1
    for i, ch in enumerate(inner):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch == "," and depth == 0:
            if split >= 0:
                raise _fail(lineno, "interval needs exactly two bounds")
            split = i
    if split < 0:
        raise _fail(lineno, "interval needs exactly two bounds")
    return body[0], body[-1], inner[:split].strip(), inner[split + 1:].strip()


def parse_manifest(text: str) -> Manifest:
    settings = {}
    components = {}
    intervals = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SETTING.fullmatch(line)
        if m:
            key = m.group(1)
            if key in settings:
                raise _fail(lineno, f"duplicate setting {key!r}")
            settings[key] = (lineno, m.group(2))
            continue
        m = _COMPONENT.fullmatch(line)
        if m:
            index = int(m.group(1))
            if index in components:
                raise _fail(lineno, f"duplicate coordinate x{index}")
            components[index] = (lineno, m.group(2).strip())
            continue
        m = _INTERVAL.fullmatch(line)
        if m:
            index = int(m.group(1))
            if index in intervals:
                raise _fail(lineno, f"duplicate interval for t{index}")
            intervals[index] = (lineno, m.group(2).strip(), m.group(3))
            continue
        raise _fail(lineno, f"unrecognized line {line!r}")

    def require(key: str) -> tuple:
        if key not in settings:
            raise ManifestError(f"missing required setting {key!r}",
                                location={"line": None})
        return settings[key]

    def as_int(key: str, pair: tuple) -> int:
        lineno, txt = pair
        try:
            return int(txt)
        except ValueError:
            raise _fail(lineno, f"{key} must be an integer, got {txt!r}")

    def as_float(key: str, pair: tuple) -> float:
        lineno, txt = pair
        try:
            return float(txt)
        except ValueError:
            raise _fail(lineno, f"{key} must be a number, got {txt!r}")

    kind_line, kind = require("kind")
    if kind not in ("immersion", "cone"):
        raise _fail(kind_line, f"kind must be immersion or cone, "
                               f"got {kind!r}")
    n = as_int("n", require("n"))
    if n < 1:
        raise _fail(settings["n"][0], "n must be at least 1")
    ambient = as_int("ambient", require("ambient"))

    if sorted(components) != list(range(1, ambient + 1)):
        raise ManifestError(
            f"need coordinates x1..x{ambient}, got "
            f"{['x%d' % i for i in sorted(components)]}",
            location={"line": None})
    if sorted(intervals) != list(range(1, n + 1)):
        raise ManifestError(
            f"need intervals for t1..t{n}, got "
            f"{['t%d' % i for i in sorted(intervals)]}",
            location={"line": None})

    coords = []
    slots = []
    for index in range(1, ambient + 1):
        lineno, rhs = components[index]
        if rhs == "@chart":
            slots.append((index - 1, lineno))
            coords.append(None)
            continue
        try:
            coords.append(parse(rhs, n))
        except ExprSyntaxError as exc:
            raise _fail(lineno, f"bad expression for x{index}: "
                                f"{exc.message}") from exc

    if kind == "cone":
        if len(slots) != 1:
            raise ManifestError(
                f"cone manifests mark exactly one coordinate as @chart, "
                f"got {len(slots)}", location={"line": None})
        if ambient < n + 1:
            raise _fail(settings["ambient"][0],
                        "cone manifests need ambient >= n + 1")
        chart = ConeChart(coords, n)
    else:
        if slots:
            raise _fail(slots[0][1], "@chart is only valid in cone "
                                     "manifests")
        try:
            chart = ImmersionChart(coords, n)
        except ValueError as exc:
            raise ManifestError(str(exc), location={"line": None}) from exc

    built = []
    for index in range(1, n + 1):
        lineno, body, style = intervals[index]
        open_br, close_br, lo_txt, hi_txt = _split_bounds(body, lineno)
        want = ("[", ")") if style == "periodic" else ("(", ")")
        if (open_br, close_br) != want:
            raise _fail(lineno, f"{style} intervals are written "
                                f"{want[0]}a, b{want[1]}")
        lo = _constant(lo_txt, lineno)
        hi = _constant(hi_txt, lineno)
        try:
            built.append(Interval(lo, hi, periodic=(style == "periodic")))
        except DomainError as exc:
            raise _fail(lineno, exc.message) from exc
    domain = DomainSpec(tuple(built))

    quad_kwargs = {}
    for key in _QUAD_KEYS:
        if key in settings:
            quad_kwargs[key] = (as_int(key, settings[key])
                                if key in ("grid", "max_levels")
                                else as_float(key, settings[key]))
    try:
        quad = QuadratureSpec(**quad_kwargs)
    except ValueError as exc:
        raise ManifestError(str(exc), location={"line": None}) from exc

    return Manifest(kind=kind, chart=chart, domain=domain, quad=quad)


def load_manifest(path) -> Manifest:
    with open(path) as fh:
        return parse_manifest(fh.read())
