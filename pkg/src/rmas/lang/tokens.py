"""Tokenizer for model files, property files and simulator constraints.

`#` starts a line comment.  Multi-character operators are single tokens
(`==`, `!=`, `<=`, `>=`, `:=`, `<-`, `&&`, `||`, `->`).  A few section
keywords contain a hyphen (`receive-guard:`) and are recognised as one
token so identifiers never need to carry `-`.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import IllegalCharacter, Pos

KEYWORDS = {
    "agent", "local", "init", "relabel", "repeat", "rep", "system",
    "enums", "channels", "TRUE", "FALSE", "expect", "next",
}

# identifier prefix -> (suffix to match, token kind)
_HYPHEN_KEYWORDS = {
    "receive": ("-guard", "receive-guard"),
    "message": ("-structure", "message-structure"),
    "communication": ("-variables", "communication-variables"),
}

_TWO_CHAR = {
    "==": "EQ", "!=": "NE", "<=": "LE", ">=": "GE",
    ":=": "ASSIGN", "<-": "MAPSTO", "&&": "ANDAND", "||": "OROR", "->": "IMPLIES",
    "..": "DOTDOT",
}

_ONE_CHAR = {
    "(": "LPAREN", ")": "RPAREN", "[": "LBRACK", "]": "RBRACK",
    "{": "LBRACE", "}": "RBRACE",
    "<": "LT", ">": "GT", ",": "COMMA", ";": "SEMI", ":": "COLON",
    "+": "PLUS", "-": "MINUS", "*": "STAR", "!": "BANG", "?": "QUEST",
    "&": "AMP", "|": "PIPE", "=": "EQUALS",
}


@dataclass(frozen=True)
class Token:
    kind: str   # "IDENT", "INT", a keyword, or an operator kind
    text: str
    pos: Pos


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        pos = Pos(line, col)
        if _is_ident_start(c):
            j = i
            while j < n and _is_ident_char(source[j]):
                j += 1
            word = source[i:j]
            hyph = _HYPHEN_KEYWORDS.get(word)
            if hyph and source.startswith(hyph[0], j):
                j += len(hyph[0])
                tokens.append(Token(hyph[1], word + hyph[0], pos))
            elif word in KEYWORDS:
                tokens.append(Token(word, word, pos))
            else:
                tokens.append(Token("IDENT", word, pos))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("INT", source[i:j], pos))
            col += j - i
            i = j
            continue
        two = source[i:i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token(_TWO_CHAR[two], two, pos))
            i += 2
            col += 2
            continue
        if c in _ONE_CHAR:
            tokens.append(Token(_ONE_CHAR[c], c, pos))
            i += 1
            col += 1
            continue
        raise IllegalCharacter(f"illegal character {c!r}", pos)
    return tokens
