"""Declarative instance files: sections [space], [group], [point],
[truncation], [assert]; line-oriented, comment-friendly, auditable.

    [space]
    generator x weight=1 aux=1
    relation x*y - 2*x^3
    [group]
    rank 1
    [point]
    z 2
    [truncation]
    aux_max 4
    tower_levels 4
    [assert]
    smooth true
    regular_sequence true

Points are lists of coordinates `q`, `q*zeta(m)^k`, or `zeta(m)^k`.
Relations must be weight/aux homogeneous; violations are parse errors.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .algebra import Polynomial
from .harness import Truncation
from .models import AlgebraPresentation, TorusData, TorusPoint


class ParseError(Exception):
    pass


def strip_comments(text: str) -> str:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].rstrip()
        if line.strip():
            out.append(line.strip())
    return "\n".join(out)


def canonical_content(text: str) -> str:
    """Comment- and whitespace-normalized content (the cache hash input)."""
    return strip_comments(text) + "\n"


def parse_instance(text: str):
    """Returns (presentation, torus, point, truncation)."""
    lines = strip_comments(text).splitlines()
    sections: dict[str, list[str]] = {}
    cur = None
    for ln in lines:
        if ln.startswith("[") and ln.endswith("]"):
            cur = ln[1:-1].strip().lower()
            sections.setdefault(cur, [])
            continue
        if cur is None:
            raise ParseError(f"content before any section: {ln!r}")
        sections[cur].append(ln)

    rank = 1
    for ln in sections.get("group", []):
        key, _, val = ln.partition(" ")
        if key != "rank":
            raise ParseError(f"unknown group field {key!r}")
        rank = int(val)

    gens = []
    relations_raw = []
    for ln in sections.get("space", []):
        head, _, rest = ln.partition(" ")
        if head == "generator":
            m = re.match(r"(\w+)\s+weight=([-\d,]+)\s+aux=(\d+)$", rest.strip())
            if not m:
                raise ParseError(f"bad generator line: {ln!r}")
            name, wstr, astr = m.groups()
            weight = tuple(int(x) for x in wstr.split(",")) if rank else ()
            if len(weight) != rank:
                raise ParseError(f"generator {name}: weight length != rank {rank}")
            gens.append((name, weight, int(astr)))
        elif head == "relation":
            relations_raw.append(rest.strip())
        else:
            raise ParseError(f"unknown space field {head!r}")

    flags = {"smooth": False, "regular_sequence": False}
    for ln in sections.get("assert", []):
        key, _, val = ln.partition(" ")
        if key not in flags:
            raise ParseError(f"unknown assert field {key!r}")
        flags[key] = val.strip().lower() in ("true", "1", "yes")

    P = AlgebraPresentation(
        gens, rank=rank,
        asserted_smooth=flags["smooth"],
        asserted_regular_sequence=flags["regular_sequence"],
    )
    for raw in relations_raw:
        try:
            P.add_relation(parse_polynomial(raw, P))
        except ValueError as e:
            raise ParseError(str(e)) from e

    point = None
    for ln in sections.get("point", []):
        key, _, val = ln.partition(" ")
        if key != "z":
            raise ParseError(f"unknown point field {key!r}")
        coords = [parse_coordinate(tok.strip()) for tok in val.split(",")] if val.strip() else []
        if len(coords) != rank:
            raise ParseError(f"point has {len(coords)} coordinates, rank is {rank}")
        point = TorusPoint.make(coords)
    if point is None:
        point = TorusPoint.make([(Fraction(1), Fraction(0))] * rank)

    tr = Truncation()
    for ln in sections.get("truncation", []):
        key, _, val = ln.partition(" ")
        if not hasattr(tr, key):
            raise ParseError(f"unknown truncation field {key!r}")
        setattr(tr, key, int(val))

    return P, TorusData(rank), point, tr


def parse_coordinate(tok: str):
    """`q`, `q*zeta(m)^k`, `zeta(m)^k`, or `zeta(m)`."""
    m = re.match(r"^(?:(-?\d+(?:/\d+)?)\*)?zeta\((\d+)\)(?:\^(-?\d+))?$", tok)
    if m:
        qs, ms, ks = m.groups()
        q = Fraction(qs) if qs else Fraction(1)
        mm = int(ms)
        k = int(ks) if ks else 1
        return (q, Fraction(k % mm, mm))
    try:
        return (Fraction(tok), Fraction(0))
    except ValueError:
        raise ParseError(f"bad coordinate token {tok!r}")


# ---------------------------------------------------------------------------
# polynomial strings
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(\d+/\d+|\d+|\w+|\^|\*|\+|-|\(|\))")


def _tokenize(s: str):
    pos = 0
    out = []
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m:
            raise ParseError(f"bad character in polynomial at {s[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_polynomial(s: str, P: AlgebraPresentation) -> Polynomial:
    """+, -, *, ^, parentheses, rational coefficients, generator names."""
    toks = _tokenize(s)
    alg = P.ambient
    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def expr():
        nonlocal i
        sign = 1
        while peek() in ("+", "-"):
            if toks[i] == "-":
                sign = -sign
            i += 1
        acc = term().scaled(sign)
        while peek() in ("+", "-"):
            sign = 1
            while peek() in ("+", "-"):
                if toks[i] == "-":
                    sign = -sign
                i += 1
            acc = acc + term().scaled(sign)
        return acc

    def term():
        nonlocal i
        acc = factor()
        while peek() == "*":
            i += 1
            acc = acc * factor()
        return acc

    def factor():
        nonlocal i
        a = atom()
        if peek() == "^":
            i += 1
            e = peek()
            if e is None or not re.fullmatch(r"\d+", e):
                raise ParseError("expected integer exponent after ^")
            i += 1
            out = alg.poly_scalar(1)
            for _ in range(int(e)):
                out = out * a
            return out
        return a

    def atom():
        nonlocal i
        t = peek()
        if t is None:
            raise ParseError("unexpected end of polynomial")
        if t == "(":
            i += 1
            inner = expr()
            if peek() != ")":
                raise ParseError("missing closing parenthesis")
            i += 1
            return inner
        if re.fullmatch(r"\d+(/\d+)?", t):
            i += 1
            return alg.poly_scalar(Fraction(t))
        if t in alg.index:
            i += 1
            return alg.poly_gen(t)
        raise ParseError(f"unknown name {t!r} in polynomial")

    out = expr()
    if i != len(toks):
        raise ParseError(f"trailing tokens in polynomial: {toks[i:]}")
    return out
