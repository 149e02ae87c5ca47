"""Expression language and scene files.

Expressions are parsed by recursive descent with the grammar

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-'? power
    power  := atom ('^' factor)?
    atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'

so '^' is right-associative and binds tighter than unary minus.  There
is no implicit multiplication.  Recognized functions: sin, cos, tan,
exp, log, sqrt, sinh, cosh (one argument) and atan2 (two arguments).
The name pi is a constant.  Errors carry the offending position.

Scene files are line-oriented UTF-8 with '#' comments and four
sections: [defs] (named expressions over the ambient coordinates),
[ambient] (dimension, coordinate names, frame matrix whose column j
holds the chart components of frame vector j), [surface] (parameter
names, immersion map, orientation sign), [domain] (per-parameter
range and sample count).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import jets
from .jets import Jet

UNARY_FNS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh")
BINARY_FNS = ("atan2",)


class ParseError(ValueError):
    """Syntax or validation error with a character position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.message = message
        self.pos = pos


class SceneError(ValueError):
    """Scene file error with a line number."""

    def __init__(self, message: str, line: int = 0):
        if line:
            super().__init__(f"{message} (line {line})")
        else:
            super().__init__(message)
        self.message = message
        self.line = line


class EvalError(ValueError):
    """Expression evaluation failure (unbound name, domain violation)."""


# -- AST ----------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    fn: str
    arg: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


PI = Pi()


# -- tokenizer ----------------------------------------------------------

_OPS = set("+-*/^(),")


def _tokenize(text: str):
    """Yields (kind, text, pos) triples; kind in NUM NAME OP END."""
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            out.append(("NUM", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(("NAME", text[i:j], i))
            i = j
            continue
        if ch in _OPS:
            out.append(("OP", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    out.append(("END", "", n))
    return out


# -- parser -------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, allowed_names):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.allowed = allowed_names

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def accept_op(self, *ops):
        kind, text, _ = self.peek()
        if kind == "OP" and text in ops:
            return self.advance()
        return None

    def parse(self):
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "END":
            raise ParseError(f"unexpected {text!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while True:
            t = self.accept_op("+", "-")
            if t is None:
                return e
            e = Binary(t[1], e, self.term())

    def term(self):
        e = self.factor()
        while True:
            t = self.accept_op("*", "/")
            if t is None:
                return e
            e = Binary(t[1], e, self.factor())

    def factor(self):
        if self.accept_op("-"):
            return Unary("neg", self.power())
        return self.power()

    def power(self):
        e = self.atom()
        if self.accept_op("^"):
            return Binary("^", e, self.factor())
        return e

    def atom(self):
        kind, text, pos = self.advance()
        if kind == "NUM":
            return Const(float(text))
        if kind == "NAME":
            if self.accept_op("("):
                args = [self.expr()]
                while self.accept_op(","):
                    args.append(self.expr())
                if not self.accept_op(")"):
                    k, t, p = self.peek()
                    raise ParseError(
                        f"expected ')' in call to {text!r}"
                        + (f", found {t!r}" if k != "END" else ""),
                        p,
                    )
                if text in UNARY_FNS:
                    if len(args) != 1:
                        raise ParseError(
                            f"{text} takes 1 argument, got {len(args)}", pos
                        )
                    return Unary(text, args[0])
                if text in BINARY_FNS:
                    if len(args) != 2:
                        raise ParseError(
                            f"{text} takes 2 arguments, got {len(args)}", pos
                        )
                    return Binary(text, args[0], args[1])
                raise ParseError(f"unknown function {text!r}", pos)
            if text == "pi":
                return PI
            if text in UNARY_FNS or text in BINARY_FNS:
                raise ParseError(f"function {text!r} used without arguments", pos)
            if self.allowed is not None and text not in self.allowed:
                raise ParseError(f"unknown name {text!r}", pos)
            return Var(text)
        if kind == "OP" and text == "(":
            e = self.expr()
            if not self.accept_op(")"):
                k, t, p = self.peek()
                raise ParseError("unbalanced parenthesis", p)
            return e
        if kind == "END":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {text!r}", pos)


def parse_expr(text: str, allowed_names=None):
    """Parse one expression; allowed_names None permits any variable."""
    if allowed_names is not None:
        allowed_names = set(allowed_names)
    return _Parser(text, allowed_names).parse()


# -- printer ------------------------------------------------------------

# Precedence levels: add/sub 1, mul/div 2, neg 3, pow 4, atoms 5.

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e) -> int:
    if isinstance(e, Binary):
        if e.op in _PREC:
            return _PREC[e.op]
        return 5  # atan2 call
    if isinstance(e, Unary):
        return 5 if e.fn != "neg" else 3
    return 5


def to_text(e) -> str:
    """Deterministic rendering that reparses to the same tree."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.fn == "neg":
            inner = to_text(e.arg)
            if _prec(e.arg) < 4:
                inner = "(" + inner + ")"
            return "-" + inner
        return f"{e.fn}({to_text(e.arg)})"
    if isinstance(e, Binary):
        if e.op not in _PREC:
            return f"{e.op}({to_text(e.left)}, {to_text(e.right)})"
        p = _PREC[e.op]
        left, right = to_text(e.left), to_text(e.right)
        if e.op == "^":
            if _prec(e.left) < 5:
                left = "(" + left + ")"
            if _prec(e.right) < 3:
                right = "(" + right + ")"
            return left + "^" + right
        if _prec(e.left) < p:
            left = "(" + left + ")"
        if _prec(e.right) <= p:
            right = "(" + right + ")"
        if p == 1:
            return f"{left} {e.op} {right}"
        return left + e.op + right
    raise TypeError(f"not an expression node: {e!r}")


# -- evaluation ---------------------------------------------------------


def eval_expr(e, bindings, defs=None, num_vars=None, order=None):
    """Evaluate an expression over jet-valued bindings.

    bindings maps variable names to jets (floats are promoted).  defs is
    an ordered sequence of (name, expr) pairs resolved lazily against
    the same bindings; each def may reference only earlier defs.  The
    result is always a Jet; the shape is taken from the bindings or, if
    none of them is a jet, from num_vars/order.
    """
    defmap = dict(defs) if defs else {}
    if num_vars is None or order is None:
        for v in bindings.values():
            if isinstance(v, Jet):
                num_vars, order = v.num_vars, v.order
                break
        else:
            if num_vars is None or order is None:
                raise EvalError(
                    "cannot infer jet shape: no jet bindings and no explicit shape"
                )
    memo = {}
    in_progress = set()

    def ev(node):
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Pi):
            return math.pi
        if isinstance(node, Var):
            name = node.name
            if name in bindings:
                return bindings[name]
            if name in memo:
                return memo[name]
            if name in defmap:
                if name in in_progress:
                    raise EvalError(f"circular definition of {name!r}")
                in_progress.add(name)
                val = ev(defmap[name])
                in_progress.discard(name)
                memo[name] = val
                return val
            raise EvalError(f"unbound name {name!r}")
        if isinstance(node, Unary):
            try:
                return jets.apply_unary(node.fn, ev(node.arg))
            except jets.JetDomainError as exc:
                raise EvalError(str(exc)) from exc
        if isinstance(node, Binary):
            left = ev(node.left)
            if node.op == "^" and isinstance(node.right, Const):
                # integer literal exponents take the exact power route
                try:
                    return jets.pow_op(left, node.right.value)
                except jets.JetDomainError as exc:
                    raise EvalError(str(exc)) from exc
            right = ev(node.right)
            try:
                return jets.binary(node.op, left, right)
            except (jets.JetDomainError, ZeroDivisionError) as exc:
                raise EvalError(str(exc)) from exc
        raise TypeError(f"not an expression node: {node!r}")

    result = ev(e)
    if not isinstance(result, Jet):
        result = jets.constant(float(result), num_vars, order)
    return result


# -- scene documents ----------------------------------------------------


@dataclass
class SceneDoc:
    """Parsed scene: ambient frame field plus one immersed hypersurface."""

    ambient_dim: int
    ambient_coords: list
    defs: list  # ordered (name, Expr) pairs
    frame: np.ndarray  # (dim, dim) of Expr; column j = frame vector j
    surface_params: list
    surface_map: list  # dim expressions over the surface parameters
    orient: float
    domain: dict  # param -> (lo, hi, samples)

    @property
    def dim(self) -> int:
        return self.ambient_dim

    def frame_jets(self, coord_jets) -> np.ndarray:
        """Frame coefficient matrix evaluated over coordinate jets."""
        bindings = dict(zip(self.ambient_coords, coord_jets))
        out = np.empty((self.ambient_dim, self.ambient_dim), dtype=object)
        for a in range(self.ambient_dim):
            for j in range(self.ambient_dim):
                out[a, j] = eval_expr(self.frame[a, j], bindings, self.defs)
        return out

    def surface_jets(self, param_jets) -> list:
        bindings = dict(zip(self.surface_params, param_jets))
        return [eval_expr(e, bindings) for e in self.surface_map]

    def to_text(self) -> str:
        lines = []
        if self.defs:
            lines.append("[defs]")
            for name, e in self.defs:
                lines.append(f'{name} = "{to_text(e)}"')
            lines.append("")
        lines.append("[ambient]")
        lines.append(f"dim    = {self.ambient_dim}")
        lines.append("coords = " + ", ".join(self.ambient_coords))
        rows = []
        for a in range(self.ambient_dim):
            rows.append(
                ", ".join(f'"{to_text(self.frame[a, j])}"' for j in range(self.ambient_dim))
            )
        lines.append("frame  = " + " ; ".join(rows))
        lines.append("")
        lines.append("[surface]")
        lines.append("params = " + ", ".join(self.surface_params))
        lines.append("map    = " + ", ".join(f'"{to_text(e)}"' for e in self.surface_map))
        lines.append(f"orient = {'+1' if self.orient > 0 else '-1'}")
        lines.append("")
        lines.append("[domain]")
        for p in self.surface_params:
            lo, hi, samples = self.domain[p]
            lines.append(f"{p} = {lo!r}, {hi!r}, {samples}")
        lines.append("")
        return "\n".join(lines)


def _strip_comment(line: str) -> str:
    out = []
    in_quote = False
    for ch in line:
        if ch == '"':
            in_quote = not in_quote
        if ch == "#" and not in_quote:
            break
        out.append(ch)
    return "".join(out)


def _split_top(text: str, sep: str):
    """Split on sep outside double quotes."""
    parts, cur, in_quote = [], [], False
    for ch in text:
        if ch == '"':
            in_quote = not in_quote
        if ch == sep and not in_quote:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _unquote(text: str, line_no: int) -> str:
    t = text.strip()
    if len(t) < 2 or t[0] != '"' or t[-1] != '"':
        raise SceneError(f"expected a double-quoted expression, got {t!r}", line_no)
    return t[1:-1]


def _name_list(text: str, line_no: int):
    names = [p.strip() for p in text.split(",")]
    for n in names:
        if not n or not (n[0].isalpha() or n[0] == "_") or not all(
            c.isalnum() or c == "_" for c in n
        ):
            raise SceneError(f"bad name {n!r}", line_no)
        if n == "pi" or n in UNARY_FNS or n in BINARY_FNS:
            raise SceneError(f"name {n!r} is reserved", line_no)
    if len(set(names)) != len(names):
        raise SceneError(f"repeated name in {names}", line_no)
    return names


def parse_scene(text: str) -> SceneDoc:
    """Parse and validate a scene document."""
    sections = {}
    section_lines = {}
    current = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in ("defs", "ambient", "surface", "domain"):
                raise SceneError(f"unknown section [{name}]", line_no)
            if name in sections:
                raise SceneError(f"duplicate section [{name}]", line_no)
            sections[name] = []
            section_lines[name] = line_no
            current = name
            continue
        if current is None:
            raise SceneError(f"content before any section: {line!r}", line_no)
        if "=" not in line:
            raise SceneError(f"expected key = value, got {line!r}", line_no)
        key, _, value = line.partition("=")
        sections[current].append((key.strip(), value.strip(), line_no))

    for required in ("ambient", "surface", "domain"):
        if required not in sections:
            raise SceneError(f"missing section [{required}]")

    def as_map(section, allowed_keys):
        out = {}
        for key, value, line_no in sections.get(section, []):
            if allowed_keys is not None and key not in allowed_keys:
                raise SceneError(f"unknown key {key!r} in [{section}]", line_no)
            if key in out:
                raise SceneError(f"duplicate key {key!r} in [{section}]", line_no)
            out[key] = (value, line_no)
        return out

    amb = as_map("ambient", {"dim", "coords", "frame"})
    for k in ("dim", "coords", "frame"):
        if k not in amb:
            raise SceneError(f"[ambient] missing key {k!r}", section_lines["ambient"])
    try:
        dim = int(amb["dim"][0])
    except ValueError:
        raise SceneError(f"bad dim {amb['dim'][0]!r}", amb["dim"][1]) from None
    if not (2 <= dim <= 5):
        raise SceneError(f"ambient dim must be in [2, 5], got {dim}", amb["dim"][1])
    coords = _name_list(amb["coords"][0], amb["coords"][1])
    if len(coords) != dim:
        raise SceneError(
            f"expected {dim} coordinates, got {len(coords)}", amb["coords"][1]
        )

    # defs parse in declaration order; each may use coords and earlier defs
    defs = []
    def_names = []
    for key, value, line_no in sections.get("defs", []):
        if key in def_names or key in coords:
            raise SceneError(f"duplicate definition {key!r}", line_no)
        try:
            e = parse_expr(_unquote(value, line_no), set(coords) | set(def_names))
        except ParseError as exc:
            raise SceneError(f"in def {key!r}: {exc}", line_no) from exc
        defs.append((key, e))
        def_names.append(key)

    frame_text, frame_line = amb["frame"]
    rows = _split_top(frame_text, ";")
    if len(rows) != dim:
        raise SceneError(
            f"frame has {len(rows)} rows, expected {dim}", frame_line
        )
    frame = np.empty((dim, dim), dtype=object)
    frame_scope = set(coords) | set(def_names)
    for a, row in enumerate(rows):
        entries = _split_top(row, ",")
        if len(entries) != dim:
            raise SceneError(
                f"frame row {a + 1} has {len(entries)} entries, expected {dim}",
                frame_line,
            )
        for j, entry in enumerate(entries):
            try:
                frame[a, j] = parse_expr(_unquote(entry, frame_line), frame_scope)
            except ParseError as exc:
                raise SceneError(
                    f"in frame entry ({a + 1},{j + 1}): {exc}", frame_line
                ) from exc

    surf = as_map("surface", {"params", "map", "orient"})
    for k in ("params", "map", "orient"):
        if k not in surf:
            raise SceneError(f"[surface] missing key {k!r}", section_lines["surface"])
    params = _name_list(surf["params"][0], surf["params"][1])
    if len(params) != dim - 1:
        raise SceneError(
            f"expected {dim - 1} surface parameters, got {len(params)}",
            surf["params"][1],
        )
    map_text, map_line = surf["map"]
    map_entries = _split_top(map_text, ",")
    if len(map_entries) != dim:
        raise SceneError(
            f"surface map has {len(map_entries)} components, expected {dim}", map_line
        )
    surface_map = []
    for entry in map_entries:
        try:
            surface_map.append(parse_expr(_unquote(entry, map_line), set(params)))
        except ParseError as exc:
            raise SceneError(f"in surface map: {exc}", map_line) from exc
    orient_text, orient_line = surf["orient"]
    if orient_text not in ("+1", "-1", "1"):
        raise SceneError(f"orient must be +1 or -1, got {orient_text!r}", orient_line)
    orient = -1.0 if orient_text == "-1" else 1.0

    dom = as_map("domain", None)
    domain = {}
    for key, (value, line_no) in dom.items():
        if key not in params:
            raise SceneError(f"domain for unknown parameter {key!r}", line_no)
        parts = [p.strip() for p in value.split(",")]
        if len(parts) != 3:
            raise SceneError(
                f"domain needs min, max, samples, got {value!r}", line_no
            )
        try:
            lo, hi, samples = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise SceneError(f"bad domain entry {value!r}", line_no) from None
        if not lo < hi:
            raise SceneError(f"domain needs min < max, got {lo} >= {hi}", line_no)
        if samples < 1:
            raise SceneError(f"samples must be >= 1, got {samples}", line_no)
        domain[key] = (lo, hi, samples)
    for p in params:
        if p not in domain:
            raise SceneError(f"missing domain for parameter {p!r}")

    return SceneDoc(
        ambient_dim=dim,
        ambient_coords=coords,
        defs=defs,
        frame=frame,
        surface_params=params,
        surface_map=surface_map,
        orient=orient,
        domain=domain,
    )
