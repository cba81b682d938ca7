#!/usr/bin/env python3
"""Independent Halstead/SLOC/decision counter.

Prints the counts for each file given on the command line, and the file order
by ascending maintainability index (hardest last). The C++ tests freeze these
outputs; rerun this script after editing a fixture.

Operands are identifiers and literals. Keywords, operators and punctuation
other than ; { } are operators.
"""

import math
import re
import sys

KEYWORDS = set("""
auto break case char const continue default do double else enum extern float for goto if
inline int long register restrict return short signed sizeof static struct switch typedef
union unsigned void volatile while _Bool _Complex _Imaginary bool
""".split())

PUNCT = sorted("""
>>= <<= ... -> ++ -- << >> <= >= == != && || += -= *= /= %= &= ^= |= ##
+ - * / % < > = ! ~ & | ^ ? : , . ( ) [ ] { } ; #
""".split(), key=len, reverse=True)

TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<comment>//[^\n]*|/\*.*?\*/)"
    r"|(?P<string>[LuU8]*\"(?:\\.|[^\"\\\n])*\")"
    r"|(?P<char>[LuU]*'(?:\\.|[^'\\\n])*')"
    r"|(?P<number>\.?[0-9](?:[eEpP][+-]|[0-9A-Za-z_.])*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>" + "|".join(re.escape(p) for p in PUNCT) + ")",
    re.S,
)


def tokens(code):
    pos, line, out = 0, 1, []
    while pos < len(code):
        m = TOKEN.match(code, pos)
        if not m:
            raise SystemExit(f"cannot lex at offset {pos}")
        kind, text = m.lastgroup, m.group()
        out.append((kind, text, line))
        line += text.count("\n")
        pos = m.end()
    return out


def counts(code):
    toks = [(k, t, l) for k, t, l in tokens(code) if k not in ("ws", "comment")]
    operands, operators = [], []
    for kind, text, _ in toks:
        if kind in ("string", "char", "number") or (kind == "ident" and text not in KEYWORDS):
            operands.append(text)
        elif text not in (";", "{", "}"):
            operators.append(text)
    sloc = len({l for _, _, l in toks})
    texts = [t for _, t, _ in toks]
    decisions = sum(t in ("if", "while", "&&", "||", "?", "case") for t in texts)
    # a for loop counts only when its condition is non-empty
    for i, t in enumerate(texts):
        if t != "for":
            continue
        depth, j, semis = 0, i + 1, []
        while True:
            if texts[j] == "(":
                depth += 1
            elif texts[j] == ")":
                depth -= 1
                if depth == 0:
                    break
            elif texts[j] == ";" and depth == 1:
                semis.append(j)
            j += 1
        if semis[1] - semis[0] > 1:
            decisions += 1
    # `do ... while` contributes one decision through its while keyword
    eta = len(set(operators)) + len(set(operands))
    n = len(operators) + len(operands)
    volume = n * math.log2(eta) if eta >= 2 else 0.0
    g = decisions + 1
    mi = 171 - 5.2 * math.log(max(volume, 1)) - 0.23 * g - 16.2 * math.log(max(sloc, 1))
    return {
        "eta1": len(set(operators)), "eta2": len(set(operands)),
        "N1": len(operators), "N2": len(operands),
        "L": sloc, "G": g, "V": volume, "MI": mi,
    }


def main(paths):
    results = {}
    for path in paths:
        with open(path, encoding="utf-8") as f:
            results[path] = counts(f.read())
        r = results[path]
        print(f"{path}: eta1={r['eta1']} eta2={r['eta2']} N1={r['N1']} N2={r['N2']} "
              f"L={r['L']} G={r['G']} V={r['V']!r} MI={r['MI']!r}")
    order = sorted(paths, key=lambda p: (-results[p]["MI"], p))
    print("easiest first:", " ".join(order))


if __name__ == "__main__":
    main(sys.argv[1:])
