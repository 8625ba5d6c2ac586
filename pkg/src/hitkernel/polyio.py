"""Text forms for monomials, polynomials and polynomial library files.

Exponent tuples print as comma-separated integers in brackets, e.g.
[3,5,9,16,1,2].  A polynomial prints as its monomials joined by " + ",
each as x1^a1*...*xq^aq with unit exponents and zero factors omitted.
Library files carry a header line "q=<q> n=<n>" followed by one
polynomial, which may span any number of lines.
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence

from .monomials import sort_key

_FACTOR = re.compile(r"x_?\{?(\d+)\}?(?:\s*\^\s*\{?(\d+)\}?)?")
_TOKEN = re.compile(r"^[\sx0-9_{}^*.]+$")


def format_tuple(a: Sequence[int]) -> str:
    return "[" + ",".join(str(int(e)) for e in a) + "]"


def parse_tuple(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError(f"expected bracketed tuple, got {text!r}")
    inner = text[1:-1].strip()
    if not inner:
        return ()
    return tuple(int(tok) for tok in inner.split(","))


def format_monomial(a: Sequence[int]) -> str:
    parts = []
    for i, e in enumerate(a, start=1):
        if e == 0:
            continue
        parts.append(f"x{i}" if e == 1 else f"x{i}^{e}")
    return "*".join(parts) if parts else "1"


def format_polynomial(monos: Iterable[Sequence[int]]) -> str:
    terms = sorted((tuple(int(e) for e in m) for m in monos), key=sort_key, reverse=True)
    if not terms:
        return "0"
    return " + ".join(format_monomial(m) for m in terms)


def parse_monomial(term: str, q: int) -> tuple[int, ...]:
    term = term.strip()
    if term in ("1", ""):
        return (0,) * q
    exps = [0] * q
    matched = 0
    for m in _FACTOR.finditer(term):
        i = int(m.group(1))
        e = int(m.group(2)) if m.group(2) else 1
        if not 1 <= i <= q:
            raise ValueError(f"variable x{i} outside 1..{q} in {term!r}")
        exps[i - 1] += e
        matched += 1
    if matched == 0:
        raise ValueError(f"cannot parse monomial {term!r}")
    return tuple(exps)


def parse_polynomial(text: str, q: int) -> set[tuple[int, ...]]:
    """Polynomial support from text; repeated monomials cancel mod 2."""
    out: set[tuple[int, ...]] = set()
    for term in text.replace("\n", " ").split("+"):
        term = term.strip()
        if not term or term == "0":
            continue
        out ^= {parse_monomial(term, q)}
    return out


def write_library_file(path: str, q: int, n: int, monos: Iterable[Sequence[int]]) -> None:
    with open(path, "w") as fh:
        fh.write(f"q={q} n={n}\n")
        text = format_polynomial(monos)
        # wrap at term boundaries for readable files
        line: list[str] = []
        width = 0
        for term in text.split(" + "):
            if width + len(term) > 96 and line:
                fh.write(" + ".join(line) + " +\n")
                line, width = [], 0
            line.append(term)
            width += len(term) + 3
        fh.write(" + ".join(line) + "\n")


def read_library_file(path: str) -> tuple[int, int, set[tuple[int, ...]]]:
    """Returns (q, n, polynomial support); degree is validated."""
    with open(path) as fh:
        header = fh.readline()
        m = re.match(r"\s*q\s*=\s*(\d+)\s+n\s*=\s*(\d+)\s*$", header)
        if not m:
            raise ValueError(f"{path}:1: expected header 'q=<q> n=<n>', got {header!r}")
        q, n = int(m.group(1)), int(m.group(2))
        body = fh.read()
    body = body.replace("+\n", "+ ").strip()
    try:
        poly = parse_polynomial(body, q)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    for t in poly:
        if sum(t) != n:
            raise ValueError(f"{path}: monomial {format_monomial(t)} has degree {sum(t)}, not {n}")
    return q, n, poly
