"""Text formats: algebra definitions, polynomial expressions, matrix files.

An algebra file is a list of ``key = value`` statements; a value may run over
several lines, and ``#`` starts a comment::

    field = GF(5)              # or GF(3^2; th^2 + 1), or QQ
    vars = s t u v
    relations = s^2, s*v, t^2, t*v, u^2, u*v,
                v^2 - s*t - s*u
    degree_cap = 6

For ``GF(p^n; poly)`` the single identifier in ``poly`` names the field
generator; it may then appear as a coefficient in relations and elements.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .exactfield import FieldSpec, make_field, FieldError

DEFAULT_DEGREE_CAP = 6


class ParseError(SyntaxError):
    """Malformed input; ``lineno`` and ``offset`` (1-based column) are set."""

    def __init__(self, msg, line=None, col=None):
        super().__init__(msg if line is None else f"{msg} (line {line}, column {col})")
        self.msg = msg
        self.lineno = line
        self.offset = col

    @property
    def col(self):
        return self.offset

    def __str__(self):
        if self.lineno is None:
            return self.msg
        return f"{self.msg} (line {self.lineno}, column {self.offset})"


class UnknownVariable(ParseError):
    pass


class NonHomogeneousRelation(ParseError):
    pass


class DuplicateVariable(ParseError):
    pass


class RaggedRows(ParseError):
    pass


# --------------------------------------------------------------------------
# tokens

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<comment>\#[^\n]*)|(?P<nl>\n)|(?P<num>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9']*)|(?P<op>[-+*^/(),;=])"
)


@dataclass
class Token:
    kind: str  # num, ident, op, nl, eof
    text: str
    line: int
    col: int


def tokenize(text: str, keep_newlines=True):
    out = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            if keep_newlines:
                out.append(Token("nl", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# --------------------------------------------------------------------------
# expression trees


@dataclass
class Node:
    op: str  # num, var, add, sub, mul, div, neg, pow
    args: tuple
    line: int
    col: int


class _ExprParser:
    """Recursive descent over a token list; ``stop`` lists terminator ops."""

    def __init__(self, tokens, i=0):
        self.toks = tokens
        self.i = i

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def take(self, text=None):
        t = self.tok
        if text is not None and t.text != text:
            self.fail(f"expected {text!r}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def expr(self):
        t = self.tok
        if t.kind == "op" and t.text in "+-":
            self.take()
            node = self.term()
            if t.text == "-":
                node = Node("neg", (node,), t.line, t.col)
        else:
            node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            t = self.take()
            rhs = self.term()
            node = Node("add" if t.text == "+" else "sub", (node, rhs), t.line, t.col)
        return node

    def term(self):
        node = self.unary()
        while True:
            t = self.tok
            if t.kind == "op" and t.text in "*/":
                self.take()
                node = Node("mul" if t.text == "*" else "div", (node, self.unary()), t.line, t.col)
            elif t.kind in ("num", "ident") or (t.kind == "op" and t.text == "("):
                # juxtaposition, e.g. "2s" or "(1-th)s"
                node = Node("mul", (node, self.unary()), t.line, t.col)
            else:
                return node

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text == "-":
            self.take()
            return Node("neg", (self.unary(),), t.line, t.col)
        if t.kind == "op" and t.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        t = self.tok
        if t.kind == "op" and t.text == "^":
            self.take()
            e = self.tok
            if e.kind != "num":
                self.fail("exponent must be a non-negative integer literal")
            self.take()
            return Node("pow", (base, int(e.text)), t.line, t.col)
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.take()
            return Node("num", (int(t.text),), t.line, t.col)
        if t.kind == "ident":
            self.take()
            return Node("var", (t.text,), t.line, t.col)
        if t.kind == "op" and t.text == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        self.fail(f"unexpected {t.text or 'end of input'!r}")


def parse_expression_tree(text: str) -> Node:
    toks = tokenize(text, keep_newlines=False)
    p = _ExprParser(toks)
    node = p.expr()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.text!r}")
    return node


def evaluate(node: Node, ring):
    """Fold a tree through ``ring``, which supplies constant/variable/ops."""
    op = node.op
    if op == "num":
        return ring.constant(node.args[0])
    if op == "var":
        return ring.variable(node.args[0], node)
    if op == "neg":
        return ring.neg(evaluate(node.args[0], ring))
    if op == "pow":
        base = evaluate(node.args[0], ring)
        out = ring.constant(1)
        for _ in range(node.args[1]):
            out = ring.mul(out, base)
        return out
    a = evaluate(node.args[0], ring)
    b = evaluate(node.args[1], ring)
    if op == "add":
        return ring.add(a, b)
    if op == "sub":
        return ring.add(a, ring.neg(b))
    if op == "mul":
        return ring.mul(a, b)
    if op == "div":
        c = ring.as_scalar(b)
        if c is None:
            raise ParseError("can only divide by a nonzero constant", node.line, node.col)
        return ring.scale(a, c)
    raise AssertionError(op)


# --------------------------------------------------------------------------
# polynomials over a field


@dataclass
class PolyExpr:
    """Sparse polynomial: ``terms`` is a list of (raw coefficient, exponents)."""

    terms: list
    nvars: int

    def degrees(self):
        return {sum(e) for _, e in self.terms}

    @property
    def degree(self):
        ds = self.degrees()
        return max(ds) if ds else None

    def as_dict(self):
        return {e: c for c, e in self.terms}


class _PolyRing:
    """Evaluation target producing {exponent tuple: raw coefficient} dicts."""

    def __init__(self, fld, variables, generator=None):
        self.F = fld
        self.vars = {v: i for i, v in enumerate(variables)}
        self.n = len(variables)
        self.generator = generator

    def _clean(self, d):
        return {e: c for e, c in d.items() if not self.F.is_zero(c)}

    def constant(self, k):
        c = self.F.coerce(k)
        return self._clean({(0,) * self.n: c})

    def variable(self, name, node):
        if name in self.vars:
            e = [0] * self.n
            e[self.vars[name]] = 1
            return {tuple(e): self.F.one}
        if self.generator is not None and name == self.generator:
            return self._clean({(0,) * self.n: self.F.gen})
        raise UnknownVariable(f"unknown variable {name!r}", node.line, node.col)

    def add(self, a, b):
        out = dict(a)
        for e, c in b.items():
            out[e] = self.F.add(out[e], c) if e in out else c
        return self._clean(out)

    def neg(self, a):
        return {e: self.F.neg(c) for e, c in a.items()}

    def mul(self, a, b):
        out = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                c = self.F.mul(c1, c2)
                out[e] = self.F.add(out[e], c) if e in out else c
        return self._clean(out)

    def as_scalar(self, a):
        if not a:
            return None
        if set(a) == {(0,) * self.n}:
            return self.F.inv(a[(0,) * self.n])
        return None

    def scale(self, a, c):
        return self._clean({e: self.F.mul(v, c) for e, v in a.items()})


def _to_polyexpr(d, n):
    terms = sorted(((c, e) for e, c in d.items()), key=lambda ce: (-sum(ce[1]), [-x for x in ce[1]]))
    return PolyExpr(terms, n)


def parse_polynomial(text: str, fld, variables, generator=None) -> PolyExpr:
    ring = _PolyRing(fld, variables, generator)
    return _to_polyexpr(evaluate(parse_expression_tree(text), ring), len(variables))


# --------------------------------------------------------------------------
# algebra definitions


@dataclass
class PresentationSource:
    field: FieldSpec
    variables: list
    relations: list = dc_field(default_factory=list)  # PolyExpr
    degree_cap: int = DEFAULT_DEGREE_CAP
    relation_text: list = dc_field(default_factory=list)

    @property
    def generator(self):
        return self.field.generator if self.field.kind == "extension" else None


def _split_statements(tokens):
    """Group tokens into (key token, value tokens); a statement ends at a
    newline followed by ``ident =`` or at end of input."""
    stmts = []
    i = 0
    n = len(tokens)
    while tokens[i].kind == "nl":
        i += 1
    while tokens[i].kind != "eof":
        key = tokens[i]
        if key.kind != "ident" or tokens[i + 1].text != "=":
            raise ParseError("expected 'key = value'", key.line, key.col)
        i += 2
        body = []
        while i < n and tokens[i].kind != "eof":
            t = tokens[i]
            if t.kind == "nl":
                j = i
                while tokens[j].kind == "nl":
                    j += 1
                if tokens[j].kind == "eof" or (
                    tokens[j].kind == "ident" and tokens[j + 1].text == "="
                ):
                    i = j
                    break
                i += 1
                continue
            body.append(t)
            i += 1
        stmts.append((key, body + [Token("eof", "", key.line, key.col)]))
    return stmts


def _split_commas(body):
    parts, cur = [], []
    depth = 0
    for t in body[:-1]:
        if t.text == "(":
            depth += 1
        elif t.text == ")":
            depth -= 1
        if t.kind == "op" and t.text == "," and depth == 0:
            parts.append(cur)
            cur = []
        else:
            cur.append(t)
    parts.append(cur)
    return parts


def _parse_field(body):
    p = _ExprParser(body)
    t = p.take()
    if t.kind != "ident" or t.text not in ("GF", "QQ"):
        raise ParseError("field must be GF(p), GF(p^n; poly) or QQ", t.line, t.col)
    if t.text == "QQ":
        if p.tok.kind != "eof":
            p.fail("unexpected text after QQ")
        return FieldSpec.rationals()
    p.take("(")
    pt = p.take()
    if pt.kind != "num":
        raise ParseError("expected the characteristic", pt.line, pt.col)
    prime = int(pt.text)
    degree = 1
    if p.tok.text == "^":
        p.take()
        dt = p.take()
        if dt.kind != "num":
            raise ParseError("expected the extension degree", dt.line, dt.col)
        degree = int(dt.text)
    if degree == 1:
        p.take(")")
        if p.tok.kind != "eof":
            p.fail("unexpected text after the field")
        try:
            make_field(FieldSpec.prime(prime))
        except FieldError as exc:
            raise ParseError(str(exc), pt.line, pt.col) from None
        return FieldSpec.prime(prime)
    p.take(";")
    start = p.i
    depth = 0
    while not (p.tok.text == ")" and depth == 0):
        if p.tok.kind == "eof":
            p.fail("unterminated GF(...)")
        depth += {"(": 1, ")": -1}.get(p.tok.text, 0)
        p.i += 1
    mod_toks = body[start:p.i]
    p.take(")")
    if p.tok.kind != "eof":
        p.fail("unexpected text after the field")
    names = sorted({t.text for t in mod_toks if t.kind == "ident"})
    if len(names) != 1:
        t0 = mod_toks[0] if mod_toks else pt
        raise ParseError("modulus must use exactly one indeterminate", t0.line, t0.col)
    gen = names[0]
    sub = _ExprParser(mod_toks + [Token("eof", "", pt.line, pt.col)])
    tree = sub.expr()
    prime_field = make_field(FieldSpec.prime(prime))
    poly = evaluate(tree, _PolyRing(prime_field, [gen]))
    deg = max((e[0] for e in poly), default=-1)
    if deg != degree:
        raise ParseError(f"modulus has degree {deg}, expected {degree}", pt.line, pt.col)
    coeffs = [0] * (deg + 1)
    for (k,), c in poly.items():
        coeffs[k] = int(c)
    spec = FieldSpec.extension(prime, coeffs, gen)
    try:
        fld = make_field(spec)
    except FieldError as exc:
        raise ParseError(str(exc), pt.line, pt.col) from None
    return fld.spec


def parse_field(text: str) -> FieldSpec:
    """``GF(p)``, ``GF(p^n; poly)`` or ``QQ``."""
    return _parse_field([t for t in tokenize(text) if t.kind != "nl"])


def parse_presentation(text: str) -> PresentationSource:
    stmts = _split_statements(tokenize(text))
    seen = {}
    for key, body in stmts:
        if key.text not in ("field", "vars", "relations", "degree_cap"):
            raise ParseError(f"unknown key {key.text!r}", key.line, key.col)
        if key.text in seen:
            raise ParseError(f"duplicate key {key.text!r}", key.line, key.col)
        seen[key.text] = (key, body)
    for req in ("field", "vars"):
        if req not in seen:
            raise ParseError(f"missing '{req} = ...' statement", 1, 1)

    spec = _parse_field(seen["field"][1])

    key, body = seen["vars"]
    variables = []
    for t in body[:-1]:
        if t.kind == "op" and t.text == ",":
            continue
        if t.kind != "ident":
            raise ParseError(f"bad variable name {t.text!r}", t.line, t.col)
        if t.text in variables:
            raise DuplicateVariable(f"variable {t.text!r} declared twice", t.line, t.col)
        if spec.kind == "extension" and t.text == spec.generator:
            raise DuplicateVariable(
                f"variable {t.text!r} clashes with the field generator", t.line, t.col
            )
        variables.append(t.text)
    if not variables:
        raise ParseError("no variables declared", key.line, key.col)

    cap = DEFAULT_DEGREE_CAP
    if "degree_cap" in seen:
        key, body = seen["degree_cap"]
        if len(body) != 2 or body[0].kind != "num" or int(body[0].text) < 1:
            raise ParseError("degree_cap must be a positive integer", key.line, key.col)
        cap = int(body[0].text)

    fld = make_field(spec)
    gen = spec.generator if spec.kind == "extension" else None
    ring = _PolyRing(fld, variables, gen)
    relations, rel_text = [], []
    if "relations" in seen:
        key, body = seen["relations"]
        for part in _split_commas(body):
            if not part:
                raise ParseError("empty relation", key.line, key.col)
            sub = _ExprParser(part + [Token("eof", "", part[-1].line, part[-1].col + 1)])
            tree = sub.expr()
            if sub.tok.kind != "eof":
                sub.fail(f"unexpected {sub.tok.text!r}")
            poly = _to_polyexpr(evaluate(tree, ring), len(variables))
            degs = poly.degrees()
            if len(degs) > 1:
                raise NonHomogeneousRelation(
                    f"relation mixes degrees {sorted(degs)}", part[0].line, part[0].col
                )
            if degs == {0}:
                raise NonHomogeneousRelation(
                    "constant relation would make the ring zero", part[0].line, part[0].col
                )
            if poly.terms:
                relations.append(poly)
                rel_text.append(" ".join(t.text for t in part))
    return PresentationSource(spec, variables, relations, cap, rel_text)


# --------------------------------------------------------------------------
# elements and matrices inside a built algebra


class _AlgebraRing:
    def __init__(self, A):
        self.A = A
        self.F = A.F
        self.vars = {v: i for i, v in enumerate(A.variables)}

    def constant(self, k):
        return self.A.scalar(self.F.coerce(k))

    def variable(self, name, node):
        if name in self.vars:
            return self.A.generator(self.vars[name])
        if self.A.spec.kind == "extension" and name == self.A.spec.generator:
            return self.A.scalar(self.F.gen)
        raise UnknownVariable(f"unknown variable {name!r}", node.line, node.col)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def as_scalar(self, a):
        c = a.scalar_part()
        if c is None or self.F.is_zero(c):
            return None
        return self.F.inv(c)

    def scale(self, a, c):
        return a.scale(c)


def parse_element(text: str, A):
    """Evaluate ``text`` inside the algebra ``A``."""
    return evaluate(parse_expression_tree(text), _AlgebraRing(A))


def parse_matrix(text: str, A):
    """Rows separated by ``;`` or newlines, entries by ``,``."""
    toks = tokenize(text)
    rows, cur, entry = [], [], []
    row_tok = []

    def close_entry(t):
        if not entry:
            raise ParseError("empty matrix entry", t.line, t.col)
        cur.append(entry[:])
        entry.clear()

    for t in toks:
        if t.kind == "op" and t.text == ",":
            close_entry(t)
        elif (t.kind == "op" and t.text == ";") or t.kind in ("nl", "eof"):
            if entry or cur:
                if not entry:
                    raise RaggedRows("row ends with an empty entry", t.line, t.col)
                close_entry(t)
                rows.append(cur[:])
                row_tok.append(t)
                cur.clear()
        else:
            entry.append(t)
    if not rows:
        raise ParseError("empty matrix", 1, 1)
    width = len(rows[0])
    for r, t in zip(rows, row_tok):
        if len(r) != width:
            raise RaggedRows(f"row has {len(r)} entries, expected {width}", t.line, t.col)
    ring = _AlgebraRing(A)
    out = []
    for r in rows:
        out_row = []
        for ent in r:
            sub = _ExprParser(ent + [Token("eof", "", ent[-1].line, ent[-1].col + 1)])
            tree = sub.expr()
            if sub.tok.kind != "eof":
                sub.fail(f"unexpected {sub.tok.text!r}")
            out_row.append(evaluate(tree, ring))
        out.append(out_row)
    return out


def _format_coeff(fld, c, first):
    """Sign and coefficient text for a term."""
    kind = fld.spec.kind
    if kind == "rationals":
        neg = c < 0
        a = -c if neg else c
        body = str(a.numerator) if a.denominator == 1 else f"({a.numerator}/{a.denominator})"
        if first:
            return ("-" if neg else "") + body
        return (" - " if neg else " + ") + body
    if kind == "extension":
        body = f"({fld.format(c)})"
    else:
        body = fld.format(c)
    return body if first else " + " + body


def render(x) -> str:
    """Canonical text of an algebra element: basis order, explicit coefficients."""
    A = x.algebra
    fld = A.F
    parts = []
    for idx, c in enumerate(x.coords):
        if fld.is_zero(c):
            continue
        coeff = _format_coeff(fld, c, not parts)
        parts.append(f"{coeff}*{A.basis_names[idx]}" if idx else coeff)
    return "".join(parts) if parts else "0"
