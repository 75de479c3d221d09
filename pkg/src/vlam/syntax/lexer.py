from __future__ import annotations

from dataclasses import dataclass


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        self.bare = message
        super().__init__(f"{line}:{col}: {message}" if line else message)


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, NUM, SYM, EOF
    text: str
    line: int
    col: int
    # True when no whitespace separates this token from the next one
    glued: bool = False
    width: int = 0


# longest first
_SYMBOLS = [
    "->o", ":=", "|-", "->", "<=", ">=", "==", "!=",
    "\\", "λ", ".", ":", ",", "(", ")", "{", "}", "[", "]",
    "*", "⊗", "⊸", "▷", "=", "+", "-", "/", "<", ">", "|",
]

_ALIASES = {"λ": "\\", "⊗": "*", "⊸": "->o", "▷": "|-"}


def _ident_char(c: str) -> bool:
    return c.isalnum() or c in "_'"


def tokenize(text: str, line: int = 1, col: int = 1) -> list[Token]:
    toks: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j + 1 < n and text[j] == "." and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            toks.append(Token("NUM", text[i:j], line, start_col, False, j - i))
            col += j - i
            i = j
            continue
        if (c.isalpha() and c != "λ") or c == "_":
            j = i
            while j < n and _ident_char(text[j]):
                j += 1
            toks.append(Token("IDENT", text[i:j], line, start_col, False, j - i))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token("SYM", _ALIASES.get(sym, sym), line, start_col, False, len(sym)))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, start_col)
    toks.append(Token("EOF", "", line, col))
    # mark adjacency
    out = []
    for k, t in enumerate(toks[:-1]):
        nxt = toks[k + 1]
        glued = nxt.line == t.line and nxt.col == t.col + t.width and nxt.kind != "EOF"
        if t.kind == "SYM" and t.text in ("\\",):
            glued = False
        out.append(Token(t.kind, t.text, t.line, t.col, glued, t.width))
    out.append(toks[-1])
    return out
