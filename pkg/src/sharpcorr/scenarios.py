"""Scenario registry and the small expression language scenarios are written in.

A scenario file is plain text, one scenario per line::

    # name | family | lo | hi | expression | description
    linear | monotone | 0 | 1 | 2*x + 1 | Linear

Blank lines and ``#`` comments are ignored. Bounds may themselves be
constant expressions (``pi/2``). A file whose first non-blank character is
``[`` is read as a JSON list of objects with the same keys instead.

Expressions use ``x`` as the only variable, the operators ``+ - * / **``,
the constants ``pi`` and ``e`` and the functions listed in :data:`FUNCTIONS`.
"""
from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Literal

import numpy as np
from scipy import special

__all__ = [
    "Scenario",
    "ScenarioError",
    "FUNCTIONS",
    "compile_expression",
    "parse_scenarios",
    "load_scenarios",
    "dump_scenarios",
    "scenario_registry",
]

Family = Literal["monotone", "non_monotone"]
FAMILIES: tuple[str, ...] = ("monotone", "non_monotone")


class ScenarioError(ValueError):
    pass


def _recip(f: Callable) -> Callable:
    return lambda v: 1.0 / f(v)


FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "exp": np.exp,
    "log": np.log,
    "log2": np.log2,
    "log10": np.log10,
    "sqrt": np.sqrt,
    "cbrt": np.cbrt,
    "abs": np.abs,
    "sign": np.sign,
    "pow": np.power,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "cot": _recip(np.tan),
    "sec": _recip(np.cos),
    "csc": _recip(np.sin),
    "asin": np.arcsin,
    "acos": np.arccos,
    "atan": np.arctan,
    "acot": lambda v: np.arctan(1.0 / v),
    "asec": lambda v: np.arccos(1.0 / v),
    "acsc": lambda v: np.arcsin(1.0 / v),
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "coth": _recip(np.tanh),
    "sech": _recip(np.cosh),
    "csch": _recip(np.sinh),
    "asinh": np.arcsinh,
    "acosh": np.arccosh,
    "atanh": np.arctanh,
    "acoth": lambda v: np.arctanh(1.0 / v),
    "asech": lambda v: np.arccosh(1.0 / v),
    "acsch": lambda v: np.arcsinh(1.0 / v),
    "erf": special.erf,
    "ndtr": special.ndtr,
}

CONSTANTS = {"pi": math.pi, "e": math.e}

_BINOPS: dict[type, Callable] = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


def _build(node: ast.AST, src: str) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(node, ast.Expression):
        return _build(node.body, src)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        c = float(node.value)
        return lambda x: np.full_like(x, c)
    if isinstance(node, ast.Name):
        if node.id == "x":
            return lambda x: x
        if node.id in CONSTANTS:
            c = CONSTANTS[node.id]
            return lambda x: np.full_like(x, c)
        raise ScenarioError(f"unknown name {node.id!r} in {src!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _build(node.operand, src)
        if isinstance(node.op, ast.USub):
            return lambda x: -inner(x)
        return inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left = _build(node.left, src)
        right = _build(node.right, src)
        return lambda x: op(left(x), right(x))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        fn = FUNCTIONS.get(node.func.id)
        if fn is None:
            raise ScenarioError(f"unknown function {node.func.id!r} in {src!r}")
        args = [_build(a, src) for a in node.args]
        return lambda x: fn(*(a(x) for a in args))
    raise ScenarioError(f"unsupported syntax in {src!r}: {ast.dump(node)[:60]}")


def compile_expression(src: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an expression in ``x`` into a vectorised function.

    >>> f = compile_expression("2*x + 1")
    >>> f(np.array([0.0, 1.0]))
    array([1., 3.])
    """
    try:
        tree = ast.parse(src.strip(), mode="eval")
    except SyntaxError as exc:
        raise ScenarioError(f"cannot parse expression {src!r}: {exc.msg}") from None
    fn = _build(tree, src)

    def f(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        with np.errstate(all="ignore"):
            return np.asarray(fn(x), dtype=np.float64)

    return f


def _constant(src: str | float) -> float:
    if isinstance(src, (int, float)):
        return float(src)
    value = compile_expression(src)(np.zeros(1))[0]
    if not np.isfinite(value):
        raise ScenarioError(f"bound {src!r} is not finite")
    return float(value)


@dataclass(frozen=True)
class Scenario:
    """A generating function ``y = f(x)`` on ``[lo, hi]``.

    Sampling treats the domain as open: singular endpoints such as
    ``acoth`` at 1 are allowed so long as ``f`` is finite inside.
    """

    name: str
    expression: str
    lo: float
    hi: float
    family: str = "monotone"
    description: str = ""
    f: Callable[[np.ndarray], np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ScenarioError(f"{self.name}: unknown family {self.family!r}")
        if not self.lo < self.hi:
            raise ScenarioError(f"{self.name}: empty domain [{self.lo}, {self.hi}]")
        object.__setattr__(self, "f", compile_expression(self.expression))

    def probe(self, points: int = 2001) -> np.ndarray:
        """``f`` on a grid of interior points of the domain."""
        t = (np.arange(points) + 0.5) / points
        return self.f(self.lo + (self.hi - self.lo) * t)

    def validate(self) -> None:
        v = self.probe()
        if not np.all(np.isfinite(v)):
            raise ScenarioError(f"{self.name}: f is not finite on ({self.lo}, {self.hi})")
        if np.ptp(v) == 0:
            raise ScenarioError(f"{self.name}: f is constant on its domain")
        if self.family == "monotone":
            d = np.diff(v)
            slack = 1e-12 * np.abs(v).max()
            if not (np.all(d >= -slack) or np.all(d <= slack)):
                raise ScenarioError(f"{self.name}: declared monotone but f is not")

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "lo": self.lo,
            "hi": self.hi,
            "expression": self.expression,
            "description": self.description,
        }


def _from_fields(d: dict, where: str) -> Scenario:
    try:
        s = Scenario(
            name=str(d["name"]).strip(),
            expression=str(d["expression"]).strip(),
            lo=_constant(d["lo"]),
            hi=_constant(d["hi"]),
            family=str(d.get("family", "monotone")).strip(),
            description=str(d.get("description", "")).strip(),
        )
        s.validate()
    except KeyError as exc:
        raise ScenarioError(f"{where}: missing field {exc.args[0]!r}") from None
    except ScenarioError as exc:
        raise ScenarioError(f"{where}: {exc}") from None
    return s


def parse_scenarios(text: str, source: str = "<text>") -> list[Scenario]:
    """Parse scenario definitions from the text or JSON layout."""
    if text.lstrip().startswith("["):
        try:
            items = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{source}: invalid JSON: {exc}") from None
        out = [_from_fields(d, f"{source}[{i}]") for i, d in enumerate(items)]
    else:
        out = []
        keys = ("name", "family", "lo", "hi", "expression", "description")
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("|")]
            if len(parts) not in (5, 6):
                raise ScenarioError(
                    f"{source}:{lineno}: expected 5 or 6 '|'-separated fields, got {len(parts)}"
                )
            out.append(_from_fields(dict(zip(keys, parts)), f"{source}:{lineno}"))
    names = [s.name for s in out]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ScenarioError(f"{source}: duplicate scenario names {dupes}")
    return out


def load_scenarios(path: str | Path) -> list[Scenario]:
    path = Path(path)
    return parse_scenarios(path.read_text(encoding="utf-8"), str(path))


def dump_scenarios(scenarios: Iterable[Scenario], fmt: str = "text") -> str:
    scenarios = list(scenarios)
    if fmt == "json":
        return json.dumps([s.as_dict() for s in scenarios], indent=2) + "\n"
    lines = ["# name | family | lo | hi | expression | description"]
    for s in scenarios:
        lines.append(
            f"{s.name} | {s.family} | {s.lo!r} | {s.hi!r} | {s.expression} | {s.description}"
        )
    return "\n".join(lines) + "\n"


_REGISTRY: dict[str, list[Scenario]] = {}


def scenario_registry(family: str = "monotone") -> list[Scenario]:
    """The built-in scenarios: 50 monotone or 16 non-monotone."""
    if family not in FAMILIES:
        raise ScenarioError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if family not in _REGISTRY:
        text = resources.files("sharpcorr.data").joinpath(f"scenarios_{family}.txt").read_text(
            encoding="utf-8"
        )
        _REGISTRY[family] = parse_scenarios(text, f"scenarios_{family}.txt")
    return list(_REGISTRY[family])
