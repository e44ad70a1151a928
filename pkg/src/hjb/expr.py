"""Arithmetic expressions for source terms and custom policies.

Grammar (EBNF, see ``docs/expression_grammar.md``)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = primary [ "^" unary ] ;
    primary = number | name | call | "(" expr ")" ;
    call    = func "(" expr { "," expr } ")" ;

``^`` is right-associative and binds tighter than unary minus, so
``-x1^2`` is ``-(x1^2)`` and ``2^-1`` is ``0.5``.  Variables are
``x1 .. xN`` and ``r``, the Euclidean distance to the domain center.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ExprEvalError, ExprSyntaxError

MAX_DEPTH = 200

UNARY_FUNCS = ("sin", "cos", "exp", "log", "abs")
VARIADIC_FUNCS = ("min", "max")
CONSTANTS = {"pi": math.pi, "e": math.e}

# Opcodes shared with the compiled kernel; keep in sync with _cpaths.pyx.
OP_CONST, OP_VAR, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW, OP_NEG = range(8)
OP_SIN, OP_COS, OP_EXP, OP_LOG, OP_ABS, OP_MIN, OP_MAX = range(8, 15)

_BINOPS = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV, "^": OP_POW}
_FUNCOPS = {"sin": OP_SIN, "cos": OP_COS, "exp": OP_EXP, "log": OP_LOG,
            "abs": OP_ABS, "min": OP_MIN, "max": OP_MAX}

# Kernel error codes.
ERR_LOG, ERR_DIV, ERR_POW, ERR_NONFINITE = 1, 2, 3, 4
ERROR_MESSAGES = {
    ERR_LOG: "log of a non-positive number",
    ERR_DIV: "division by zero",
    ERR_POW: "non-integer power of a negative number",
    ERR_NONFINITE: "expression produced a non-finite value",
}


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Var:
    index: int  # 0-based axis, or -1 for r


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(src):
    tokens = []
    pos = 0
    n = len(src)
    while True:
        while pos < n and src[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", _byte_offset(src, pos))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


def _byte_offset(src, pos):
    return len(src[:pos].encode("utf-8", errors="surrogatepass"))


class _Parser:
    def __init__(self, src, n_vars):
        self.src = src
        self.n_vars = n_vars
        self.tokens = _tokenize(src)
        self.i = 0
        self.depth = 0

    def error(self, message, pos=None):
        if pos is None:
            pos = self.tokens[self.i][2]
        return ExprSyntaxError(message, _byte_offset(self.src, pos))

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.peek()
        if kind != "op" or text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise self.error(f"expected {value!r}, found {found}")
        self.advance()

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.error("expression nested too deeply")

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise self.error(f"unexpected {text!r}")
        return node

    def expr(self):
        self.enter()
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        self.depth -= 1
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        self.enter()
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            node = Neg(self.unary())
        else:
            node = self.power()
        self.depth -= 1
        return node

    def power(self):
        base = self.primary()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if self.peek()[:2] == ("op", "("):
                return self.call(text, pos)
            return self.name(text, pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.i -= 1
        found = "end of input" if kind == "end" else repr(text)
        raise self.error(f"expected a value, found {found}")

    def name(self, text, pos):
        if text in CONSTANTS:
            return Name(text)
        if text == "r":
            return Var(-1)
        m = re.fullmatch(r"x([1-9][0-9]*)", text)
        if m:
            k = int(m.group(1))
            if k > self.n_vars:
                raise self.error(
                    f"variable {text} exceeds the domain dimension {self.n_vars}", pos)
            return Var(k - 1)
        if text in UNARY_FUNCS or text in VARIADIC_FUNCS:
            raise self.error(f"function {text} needs an argument list", pos)
        raise self.error(f"unknown identifier {text!r}", pos)

    def call(self, func, pos):
        if func not in UNARY_FUNCS and func not in VARIADIC_FUNCS:
            raise self.error(f"unknown function {func!r}", pos)
        self.expect("(")
        args = [self.expr()]
        while self.peek()[:2] == ("op", ","):
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if func in UNARY_FUNCS and len(args) != 1:
            raise self.error(f"{func} takes exactly one argument", pos)
        if func in VARIADIC_FUNCS and len(args) < 2:
            raise self.error(f"{func} takes at least two arguments", pos)
        return Call(func, tuple(args))


# -- evaluation ----------------------------------------------------------------

def _check_pow(base, expo):
    base = np.asarray(base, dtype=float)
    expo = np.asarray(expo, dtype=float)
    bad = (base < 0) & (expo != np.round(expo))
    if np.any(bad):
        raise ExprEvalError(ERROR_MESSAGES[ERR_POW])
    bad = (base == 0) & (expo < 0)
    if np.any(bad):
        raise ExprEvalError(ERROR_MESSAGES[ERR_DIV])


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        return env[node.index]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if np.any(np.asarray(b) == 0):
                raise ExprEvalError(ERROR_MESSAGES[ERR_DIV])
            return a / b
        _check_pow(a, b)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.power(a, b)
    args = [_eval(a, env) for a in node.args]
    f = node.func
    if f == "log":
        if np.any(np.asarray(args[0]) <= 0):
            raise ExprEvalError(ERROR_MESSAGES[ERR_LOG])
        return np.log(args[0])
    if f == "sin":
        return np.sin(args[0])
    if f == "cos":
        return np.cos(args[0])
    if f == "exp":
        with np.errstate(over="ignore"):
            return np.exp(args[0])
    if f == "abs":
        return np.abs(args[0])
    out = args[0]
    fn = np.minimum if f == "min" else np.maximum
    for a in args[1:]:
        out = fn(out, a)
    return out


def _fmt_num(v):
    text = repr(float(v))
    if text in ("inf", "nan"):
        raise ValueError("expression literal is not finite")
    return text


def _to_str(node):
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Var):
        return "r" if node.index < 0 else f"x{node.index + 1}"
    if isinstance(node, Neg):
        return f"(-{_to_str(node.operand)})"
    if isinstance(node, BinOp):
        return f"({_to_str(node.left)} {node.op} {_to_str(node.right)})"
    return f"{node.func}({', '.join(_to_str(a) for a in node.args)})"


def _walk(node):
    yield node
    if isinstance(node, Neg):
        yield from _walk(node.operand)
    elif isinstance(node, BinOp):
        yield from _walk(node.left)
        yield from _walk(node.right)
    elif isinstance(node, Call):
        for a in node.args:
            yield from _walk(a)


class Expr:
    """A parsed expression over ``n_vars`` coordinates plus ``r``.

    Immutable after construction; evaluation is reentrant.
    """

    __slots__ = ("source", "n_vars", "root", "_rpn")

    def __init__(self, source, n_vars, root):
        self.source = source
        self.n_vars = n_vars
        self.root = root
        self._rpn = None

    def __repr__(self):
        return f"Expr({self.source!r}, n_vars={self.n_vars})"

    def __str__(self):
        return _to_str(self.root)

    def __eq__(self, other):
        return isinstance(other, Expr) and (self.n_vars, self.root) == (other.n_vars, other.root)

    def __hash__(self):
        return hash((self.n_vars, self.root))

    def variables(self):
        """Set of variable names referenced (``'x1'``, ..., ``'r'``)."""
        out = set()
        for node in _walk(self.root):
            if isinstance(node, Var):
                out.add("r" if node.index < 0 else f"x{node.index + 1}")
        return out

    def is_radial(self):
        return self.variables() <= {"r"}

    def is_constant(self):
        return not self.variables()

    def __call__(self, x, center=None):
        return self.evaluate(x, center)

    def evaluate(self, x, center=None):
        """Evaluate at a single point ``x`` (length ``n_vars``)."""
        x = [float(v) for v in np.atleast_1d(x)]
        if len(x) != self.n_vars:
            raise ValueError(f"expected a point of dimension {self.n_vars}, got {len(x)}")
        c = [0.0] * self.n_vars if center is None else [float(v) for v in np.atleast_1d(center)]
        r = math.sqrt(math.fsum((a - b) ** 2 for a, b in zip(x, c)))
        val = _eval(self.root, {**dict(enumerate(x)), -1: r})
        val = float(val)
        if not math.isfinite(val):
            raise ExprEvalError(f"non-finite value {val} at {x}")
        return val

    def evaluate_array(self, coords, center=None):
        """Vectorized evaluation; ``coords`` is a sequence of ``n_vars`` arrays."""
        coords = [np.asarray(c, dtype=float) for c in coords]
        if len(coords) != self.n_vars:
            raise ValueError(f"expected {self.n_vars} coordinate arrays, got {len(coords)}")
        shape = np.broadcast_shapes(*(c.shape for c in coords))
        c0 = np.zeros(self.n_vars) if center is None else np.asarray(center, dtype=float)
        r2 = np.zeros(shape)
        for k, c in enumerate(coords):
            r2 = r2 + (c - c0[k]) ** 2
        env = {k: np.broadcast_to(c, shape) for k, c in enumerate(coords)}
        env[-1] = np.sqrt(r2)
        out = np.broadcast_to(np.asarray(_eval(self.root, env), dtype=float), shape).copy()
        if not np.all(np.isfinite(out)):
            raise ExprEvalError("expression produced a non-finite value")
        return out

    def to_rpn(self):
        """Compile to a postfix program ``(ops, consts, stack_depth)``.

        ``ops`` is an int32 array of ``(opcode, argument)`` pairs; variable
        argument ``n_vars`` denotes ``r``.
        """
        if self._rpn is None:
            ops, consts = [], []
            depth = _emit(self.root, ops, consts, self.n_vars)
            self._rpn = (np.asarray(ops, dtype=np.int32).reshape(-1, 2),
                         np.asarray(consts, dtype=np.float64), depth)
        return self._rpn


def _emit(node, ops, consts, n_vars):
    """Append postfix code for ``node``; return the stack depth it needs."""
    if isinstance(node, (Num, Name)):
        consts.append(node.value if isinstance(node, Num) else CONSTANTS[node.name])
        ops.append((OP_CONST, len(consts) - 1))
        return 1
    if isinstance(node, Var):
        ops.append((OP_VAR, n_vars if node.index < 0 else node.index))
        return 1
    if isinstance(node, Neg):
        d = _emit(node.operand, ops, consts, n_vars)
        ops.append((OP_NEG, 0))
        return d
    if isinstance(node, BinOp):
        d1 = _emit(node.left, ops, consts, n_vars)
        d2 = _emit(node.right, ops, consts, n_vars)
        ops.append((_BINOPS[node.op], 0))
        return max(d1, d2 + 1)
    depth = _emit(node.args[0], ops, consts, n_vars)
    if node.func in UNARY_FUNCS:
        ops.append((_FUNCOPS[node.func], 0))
        return depth
    for a in node.args[1:]:
        depth = max(depth, _emit(a, ops, consts, n_vars) + 1)
        ops.append((_FUNCOPS[node.func], 0))
    return depth


def parse(src, n_vars):
    """Parse ``src`` into an :class:`Expr` over ``x1..x{n_vars}`` and ``r``.

    Raises :class:`ExprSyntaxError` (with a byte offset) on any malformed
    input; no other exception escapes for string or bytes input.
    """
    if n_vars < 1:
        raise ValueError("n_vars must be at least 1")
    if isinstance(src, (bytes, bytearray)):
        try:
            src = bytes(src).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ExprSyntaxError("input is not valid UTF-8", exc.start) from None
    if not isinstance(src, str):
        raise TypeError("expression source must be str or bytes")
    root = _Parser(src, n_vars).parse()
    return Expr(src, n_vars, root)


def constant(value, n_vars):
    return parse(_fmt_num(value), n_vars)


def evaluate_rpn(program, x, center):
    """Reference scalar interpreter for :meth:`Expr.to_rpn` programs."""
    ops, consts, depth = program
    n = len(x)
    r = math.sqrt(math.fsum((a - b) ** 2 for a, b in zip(x, center)))
    stack = []
    for op, arg in ops:
        if op == OP_CONST:
            stack.append(float(consts[arg]))
        elif op == OP_VAR:
            stack.append(r if arg == n else float(x[arg]))
        elif op == OP_NEG:
            stack.append(-stack.pop())
        elif op in (OP_SIN, OP_COS, OP_EXP, OP_LOG, OP_ABS):
            a = stack.pop()
            if op == OP_LOG:
                if a <= 0:
                    raise ExprEvalError(ERROR_MESSAGES[ERR_LOG])
                stack.append(math.log(a))
            elif op == OP_EXP:
                stack.append(math.exp(a) if a < 709.78 else math.inf)
            else:
                stack.append({OP_SIN: math.sin, OP_COS: math.cos, OP_ABS: abs}[op](a))
        else:
            b = stack.pop()
            a = stack.pop()
            if op == OP_ADD:
                stack.append(a + b)
            elif op == OP_SUB:
                stack.append(a - b)
            elif op == OP_MUL:
                stack.append(a * b)
            elif op == OP_DIV:
                if b == 0:
                    raise ExprEvalError(ERROR_MESSAGES[ERR_DIV])
                stack.append(a / b)
            elif op == OP_POW:
                _check_pow(a, b)
                try:
                    stack.append(math.pow(a, b))
                except OverflowError:
                    stack.append(math.inf)
            elif op == OP_MIN:
                stack.append(min(a, b))
            else:
                stack.append(max(a, b))
    return stack[0]
