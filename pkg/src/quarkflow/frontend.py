"""Stencil update formulas to computational graphs.

Formulas are built from :class:`Expr` handles, either by parsing the small
text DSL below or by ordinary Python arithmetic on handles (the benchmark
generators do the latter).  Both paths go through one :class:`Tracer`, which
hash-conses nodes so a repeated subexpression becomes a single vertex, and
folds scalar constants into the operation that consumes them.

DSL grammar::

    program := (decl ";")+
    decl    := "input" NAME ("weight" INT)? | "let" NAME "=" expr
             | "output" NAME "=" expr
    expr    := term (("+"|"-") term)*
    term    := factor (("*"|"/") factor)*
    factor  := NUMBER | NAME | "-" factor | SHIFT "(" expr ")" | "(" expr ")"
    SHIFT   := "im"|"ip"|"jm"|"jp"|"km"|"kp"

A ``let`` bound to a constant expression is a compile-time scalar and never
becomes a vertex.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .errors import DivisionByZeroConstant, ParseError, UnknownName
from .graph import ComputationalGraph, Edge, Vertex

SHIFTS = ("im", "ip", "jm", "jp", "km", "kp")
# direction -> (grid index, offset)
SHIFT_OFFSETS = {"im": ("i", -1), "ip": ("i", 1), "jm": ("j", -1),
                 "jp": ("j", 1), "km": ("k", -1), "kp": ("k", 1)}

Const = Fraction
Arg = Union[int, Fraction]  # int: node id; Fraction: folded scalar


@dataclass(frozen=True)
class StencilExpr:
    """One hash-consed expression node.

    ``kind`` is ``input``, ``shift``, ``neg`` or ``binary``.  ``op`` holds the
    input name, the shift direction, or the arithmetic operator.  ``args`` are
    child node ids, or constants for the folded operand of a binary node.
    """
    kind: str
    op: str
    args: tuple[Arg, ...] = ()

    def key(self) -> tuple:
        return (self.kind, self.op,
                tuple((isinstance(a, Fraction), a) for a in self.args))

    @property
    def children(self) -> tuple[int, ...]:
        return tuple(a for a in self.args if not isinstance(a, Fraction))


def to_const(x: object) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not stencil constants")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    raise TypeError(f"not a stencil constant: {x!r}")


def fold(op: str, a: Fraction, b: Fraction, line: int = 0) -> Fraction:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        raise DivisionByZeroConstant(line)
    return a / b


class Tracer:
    """Hash-consing table of expression nodes, in creation order."""

    def __init__(self) -> None:
        self.nodes: list[StencilExpr] = []
        self._index: dict[tuple, int] = {}
        self.weights: dict[int, int] = {}
        self.names: dict[int, str] = {}

    def make(self, kind: str, op: str, args: tuple[Arg, ...]) -> Expr:
        node = StencilExpr(kind, op, args)
        key = node.key()
        nid = self._index.get(key)
        if nid is None:
            nid = len(self.nodes)
            self.nodes.append(node)
            self._index[key] = nid
        return Expr(self, nid)

    def input(self, name: str, weight: int = 1) -> Expr:
        if weight < 1:
            raise ValueError("input weight must be >= 1")
        x = self.make("input", name, ())
        self.weights[x.id] = weight
        self.names.setdefault(x.id, name)
        return x

    def name(self, x: Expr | Fraction, name: str) -> None:
        if isinstance(x, Expr):
            self.names.setdefault(x.id, name)


class Expr:
    """Handle on a traced node; supports ``+ - * /`` with handles and numbers."""

    __slots__ = ("tracer", "id")

    def __init__(self, tracer: Tracer, nid: int) -> None:
        self.tracer = tracer
        self.id = nid

    @property
    def node(self) -> StencilExpr:
        return self.tracer.nodes[self.id]

    def __repr__(self) -> str:
        return f"Expr({self.id}: {self.node.kind} {self.node.op})"

    def __add__(self, other): return binary("+", self, other)
    def __radd__(self, other): return binary("+", other, self)
    def __sub__(self, other): return binary("-", self, other)
    def __rsub__(self, other): return binary("-", other, self)
    def __mul__(self, other): return binary("*", self, other)
    def __rmul__(self, other): return binary("*", other, self)
    def __truediv__(self, other): return binary("/", self, other)
    def __rtruediv__(self, other): return binary("/", other, self)
    def __neg__(self): return negate(self)
    def __pos__(self): return self


Value = Union[Expr, Fraction]


def binary(op: str, a, b, line: int = 0) -> Value:
    if not isinstance(a, Expr):
        a = to_const(a)
    if not isinstance(b, Expr):
        b = to_const(b)
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return fold(op, a, b, line)
    if op == "/" and isinstance(b, Fraction) and b == 0:
        raise DivisionByZeroConstant(line)
    tracer = a.tracer if isinstance(a, Expr) else b.tracer
    if isinstance(a, Expr) and isinstance(b, Expr) and a.tracer is not b.tracer:
        raise ValueError("cannot combine expressions from different tracers")
    args = tuple(x.id if isinstance(x, Expr) else x for x in (a, b))
    return tracer.make("binary", op, args)


def negate(a) -> Value:
    if not isinstance(a, Expr):
        return -to_const(a)
    return a.tracer.make("neg", "-", (a.id,))


def shift(direction: str, a) -> Value:
    if direction not in SHIFT_OFFSETS:
        raise ValueError(f"unknown shift {direction!r}")
    if not isinstance(a, Expr):
        return to_const(a)  # a grid-uniform scalar reads the same everywhere
    return a.tracer.make("shift", direction, (a.id,))


def im(a): return shift("im", a)
def ip(a): return shift("ip", a)
def jm(a): return shift("jm", a)
def jp(a): return shift("jp", a)
def km(a): return shift("km", a)
def kp(a): return shift("kp", a)


@dataclass
class StencilProgram:
    tracer: Tracer
    inputs: list[tuple[str, Expr]] = field(default_factory=list)
    lets: list[tuple[str, Value]] = field(default_factory=list)
    outputs: list[tuple[str, Expr]] = field(default_factory=list)


# --- parsing ------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[;=+\-*/()])
""", re.VERBOSE)

KEYWORDS = {"input", "let", "output", "weight"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int


def tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line = 0, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(line, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind == "nl":
            line += 1
        elif kind in ("number", "name", "punct"):
            toks.append(_Tok(kind, m.group(), line))
        pos = m.end()
    toks.append(_Tok("eof", "", line))
    return toks


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = tokenize(text)
        self.pos = 0
        self.program = StencilProgram(Tracer())
        self.env: dict[str, Value] = {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.pos]

    def advance(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind == "eof":
            found = self.tok.text or "end of input"
            raise ParseError(self.tok.line, f"expected {text!r}, found {found!r}")
        return self.advance()

    def expect_name(self) -> _Tok:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS or t.text in SHIFTS:
            raise ParseError(t.line, f"expected a name, found {t.text or 'end of input'!r}")
        return self.advance()

    def define(self, tok: _Tok, value: Value) -> None:
        if tok.text in self.env:
            raise ParseError(tok.line, f"{tok.text!r} is already defined")
        self.env[tok.text] = value
        self.program.tracer.name(value, tok.text)

    def parse(self) -> StencilProgram:
        if self.tok.kind == "eof":
            raise ParseError(self.tok.line, "empty program")
        while self.tok.kind != "eof":
            self.decl()
            self.expect(";")
        prog = self.program
        if not prog.inputs:
            raise ParseError(self.tok.line, "program declares no input")
        if not prog.outputs:
            raise ParseError(self.tok.line, "program declares no output")
        return prog

    def decl(self) -> None:
        t = self.tok
        if t.text == "input":
            self.advance()
            name = self.expect_name()
            weight = 1
            if self.tok.text == "weight":
                self.advance()
                w = self.advance()
                if w.kind != "number" or not w.text.isdigit() or int(w.text) < 1:
                    raise ParseError(w.line, "weight must be a positive integer")
                weight = int(w.text)
            x = self.program.tracer.input(name.text, weight)
            self.define(name, x)
            self.program.inputs.append((name.text, x))
        elif t.text in ("let", "output"):
            self.advance()
            name = self.expect_name()
            self.expect("=")
            value = self.expr()
            if t.text == "output" and not isinstance(value, Expr):
                raise ParseError(name.line, f"output {name.text!r} is a constant")
            self.define(name, value)
            target = self.program.lets if t.text == "let" else self.program.outputs
            target.append((name.text, value))
        else:
            raise ParseError(t.line, f"expected 'input', 'let' or 'output', found {t.text or 'end of input'!r}")

    def expr(self) -> Value:
        left = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "punct":
            op = self.advance()
            left = binary(op.text, left, self.term(), op.line)
        return left

    def term(self) -> Value:
        left = self.factor()
        while self.tok.text in ("*", "/") and self.tok.kind == "punct":
            op = self.advance()
            left = binary(op.text, left, self.factor(), op.line)
        return left

    def factor(self) -> Value:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Fraction(t.text)
        if t.text == "-" and t.kind == "punct":
            self.advance()
            return negate(self.factor())
        if t.text == "(":
            self.advance()
            value = self.expr()
            self.expect(")")
            return value
        if t.kind == "name" and t.text in SHIFTS:
            self.advance()
            self.expect("(")
            value = self.expr()
            self.expect(")")
            return shift(t.text, value)
        if t.kind == "name" and t.text not in KEYWORDS:
            self.advance()
            if t.text not in self.env:
                raise UnknownName(t.line, t.text)
            return self.env[t.text]
        raise ParseError(t.line, f"unexpected {t.text or 'end of input'!r}")


def parse(text: str) -> StencilProgram:
    """Parse DSL source into a hash-consed :class:`StencilProgram`."""
    return _Parser(text).parse()


# --- tracing ------------------------------------------------------------------

def format_const(c: Fraction) -> str:
    """Exact decimal when the value terminates, ``p/q`` otherwise."""
    den = c.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{c.numerator}/{c.denominator}"
    if c.denominator == 1:
        return str(c.numerator)
    places = max(twos, fives)
    scaled = c * 10 ** places
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def _label(node: StencilExpr, ref) -> str:
    if node.kind == "input":
        return node.op
    if node.kind == "shift":
        return f"{node.op}({ref(node.args[0])})"
    if node.kind == "neg":
        return f"-{ref(node.args[0])}"
    a, b = node.args
    return f"{ref(a)} {node.op} {ref(b)}"


def trace(program: StencilProgram) -> ComputationalGraph:
    """Turn a program into its computational graph.

    Vertices are the non-constant nodes reachable from an output, plus every
    input; ids follow node creation order.  Edges into shift nodes are swept.
    The graph carries per-vertex expression records for kernel emission.
    """
    tracer = program.tracer
    keep: set[int] = {x.id for _, x in program.inputs}
    stack = [x.id for _, x in program.outputs]
    while stack:
        nid = stack.pop()
        if nid in keep and tracer.nodes[nid].kind != "input":
            continue
        keep.add(nid)
        stack.extend(c for c in tracer.nodes[nid].children if c not in keep)
    order = sorted(keep)
    vid = {nid: k for k, nid in enumerate(order)}

    def ref(arg: Arg) -> str:
        if isinstance(arg, Fraction):
            return format_const(arg)
        return tracer.names.get(arg, f"t{vid[arg]}")

    vertices, edges, exprs = [], [], []
    for k, nid in enumerate(order):
        node = tracer.nodes[nid]
        label = tracer.names.get(nid) or _label(node, ref)
        vertices.append(Vertex(k, tracer.weights.get(nid, 1), label))
        args = tuple(a if isinstance(a, Fraction) else vid[a] for a in node.args)
        exprs.append(StencilExpr(node.kind, node.op, args))
        seen = set()
        for c in node.children:
            if c not in seen:
                seen.add(c)
                edges.append(Edge(vid[c], k, node.kind == "shift"))
    edges.sort(key=lambda e: (e.dst, e.src))
    return ComputationalGraph(tuple(vertices), tuple(edges), tuple(exprs))


def trace_source(text: str) -> ComputationalGraph:
    return trace(parse(text))


# --- benchmark formulas -------------------------------------------------------

HEAT1D_SOURCE = """\
# midpoint (two-stage Runge-Kutta) step of the 1D heat equation
input u0;
let Dt = 0.001;
let Dx = 0.1;
let uHalf = u0 + Dt/Dx/Dx/2 * (im(u0) - 2*u0 + ip(u0));
output u1 = u0 + Dt/Dx/Dx * (im(uHalf) - 2*uHalf + ip(uHalf));
"""

HEAT3D_SOURCE = """\
# midpoint step of the 3D heat equation
input u;
let dt = 0.001;
let dx = 0.1;
let uh = u + 0.5 * dt / dx / dx * (im(u) + ip(u) - 2 * u +
                                  jm(u) + jp(u) - 2 * u +
                                  km(u) + kp(u) - 2 * u);
output u1 = u + dt / dx / dx * (im(uh) + ip(uh) - 2 * uh +
                               jm(uh) + jp(uh) - 2 * uh +
                               km(uh) + kp(uh) - 2 * uh);
"""


def gen_heat1d_midpoint() -> ComputationalGraph:
    return trace_source(HEAT1D_SOURCE)


def gen_heat3d_midpoint() -> ComputationalGraph:
    return trace_source(HEAT3D_SOURCE)


EULER_CONSTANTS = dict(dt=Fraction(1, 1000), dx=Fraction(1, 10), dy=Fraction(1, 10),
                       dz=Fraction(1, 10), gamma=Fraction(7, 5), c0=Fraction(1, 2),
                       DISS_COEFF=Fraction(1, 64))
EULER_STATE = ("r", "rux", "ruy", "ruz", "p")
EULER_FIELDS = ("fan", "obstacle", "r_fan", "ux_fan", "uy_fan", "uz_fan", "p_fan")


def euler3d_program() -> StencilProgram:
    """Skew-symmetric Euler discretisation with fourth-order dissipation,
    advanced by one classical RK4 step."""
    tracer = Tracer()
    prog = StencilProgram(tracer)
    for name in EULER_STATE + EULER_FIELDS:
        prog.inputs.append((name, tracer.input(name)))
    inp = dict(prog.inputs)
    fan, obstacle = inp["fan"], inp["obstacle"]
    r_fan, p_fan = inp["r_fan"], inp["p_fan"]
    ux_fan, uy_fan, uz_fan = inp["ux_fan"], inp["uy_fan"], inp["uz_fan"]
    k = EULER_CONSTANTS
    dt, dx, dy, dz = k["dt"], k["dx"], k["dy"], k["dz"]
    gamma, c0, diss = k["gamma"], k["c0"], k["DISS_COEFF"]

    def diffx(w): return (ip(w) - im(w)) / (2 * dx)
    def diffy(w): return (jp(w) - jm(w)) / (2 * dy)
    def diffz(w): return (kp(w) - km(w)) / (2 * dz)

    def div_dot_v_phi(v, phi):
        return diffx(v[0] * phi) + diffy(v[1] * phi) + diffz(v[2] * phi)

    def v_dot_grad_phi(v, phi):
        return v[0] * diffx(phi) + v[1] * diffy(phi) + v[2] * diffz(phi)

    def laplace(u):
        # j-direction twice and no k-direction, as in the published listing
        return (ip(u) + im(u) + jp(u) + jm(u) + jp(u) + jm(u)) / 6 - u

    def dissipation(r, u):
        return laplace(diss * r * r * laplace(u))

    def rhs(w):
        r, rux, ruy, ruz, p = w
        ux, uy, uz = rux / r, ruy / r, ruz / r
        ru, u = (rux, ruy, ruz), (ux, uy, uz)

        mass = div_dot_v_phi(ru, r)
        mom_x = (div_dot_v_phi(ru, rux) + r * v_dot_grad_phi(ru, ux)) / 2 + diffx(p)
        mom_y = (div_dot_v_phi(ru, ruy) + r * v_dot_grad_phi(ru, uy)) / 2 + diffy(p)
        mom_z = (div_dot_v_phi(ru, ruz) + r * v_dot_grad_phi(ru, uz)) / 2 + diffz(p)
        energy = gamma * div_dot_v_phi(u, p) - (gamma - 1) * v_dot_grad_phi(u, p)

        dissipation_x = dissipation(r, ux) * c0 / dx
        dissipation_y = dissipation(r, uy) * c0 / dy
        dissipation_z = dissipation(r, uz) * c0 / dz

        rhs_r = c0 * fan * (r - r_fan)
        rhs_ux = c0 * fan * (ux - ux_fan) + c0 * obstacle * ux
        rhs_uy = c0 * fan * (uy - uy_fan) + c0 * obstacle * uy
        rhs_uz = c0 * fan * (uz - uz_fan) + c0 * obstacle * uz
        rhs_p = c0 * fan * (p - p_fan)

        return [-((mass - rhs_r) / (2 * r) + fan * (r - r_fan)),
                -((mom_x + dissipation_x - rhs_ux) / r),
                -((mom_y + dissipation_y - rhs_uy) / r),
                -((mom_z + dissipation_z - rhs_uz) / r),
                -(energy - rhs_p)]

    def axpy(a, x, y):
        return [yi + a * xi for xi, yi in zip(x, y)]

    w = [inp[name] for name in EULER_STATE]
    dw0 = [dt * f for f in rhs(w)]
    dw1 = [dt * f for f in rhs(axpy(Fraction(1, 2), dw0, w))]
    dw2 = [dt * f for f in rhs(axpy(Fraction(1, 2), dw1, w))]
    dw3 = [dt * f for f in rhs([wi + d for wi, d in zip(w, dw2)])]
    new = [wi + (a + d) / 6 + (b + c) / 3
           for wi, a, b, c, d in zip(w, dw0, dw1, dw2, dw3)]
    for name, x in zip(EULER_STATE, new):
        tracer.name(x, name + "_next")
        prog.outputs.append((name + "_next", x))
    return prog


def gen_euler3d_rk4() -> ComputationalGraph:
    return trace(euler3d_program())
