"""
Tokenizer for ``.sq`` pulse scripts.

Statements are line oriented: newlines are tokens, ``#`` starts a comment
that runs to the end of the line, ``{``, ``}`` and ``=`` stand alone and
everything else between whitespace is a word.
"""

import re

import attrs

from spinreg.exceptions import SeqlangError

WORD = 'word'
EQUALS = '='
LBRACE = '{'
RBRACE = '}'
NEWLINE = 'newline'
EOF = 'end of input'

_TOKEN_RE = re.compile(r'(?P<space>[ \t\r\f\v]+)|(?P<comment>#[^\n]*)|(?P<newline>\n)'
                       r'|(?P<punct>[{}=])|(?P<word>[^\s{}=#]+)')


@attrs.frozen
class SourceSpan:
    """1-based line and column plus character offsets [start, end) into the source."""

    line: int
    column: int
    start: int
    end: int

    def __str__(self):
        return f'{self.line}:{self.column}'


@attrs.frozen
class Token:
    kind: str
    text: str
    span: SourceSpan

    def describe(self):
        if self.kind == WORD:
            return repr(self.text)
        if self.kind in (NEWLINE, EOF):
            return self.kind
        return f"'{self.kind}'"


def decode(source, filename=None):
    """Text of a script given as ``str`` or UTF-8 ``bytes``."""
    if isinstance(source, str):
        return source
    try:
        return bytes(source).decode('utf-8')
    except UnicodeDecodeError as exc:
        prefix = bytes(source)[:exc.start]
        line = prefix.count(b'\n') + 1
        column = exc.start - (prefix.rfind(b'\n') + 1) + 1
        span = SourceSpan(line, column, exc.start, exc.start + 1)
        raise SeqlangError('input is not valid UTF-8', span, filename) from None


def tokenize(text, filename=None):
    """Token list ending in a single EOF token."""
    tokens = []
    line, line_start = 1, 0
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup
        start, end = match.start(), match.end()
        span = SourceSpan(line, start - line_start + 1, start, end)
        if kind == 'newline':
            tokens.append(Token(NEWLINE, '\n', span))
            line, line_start = line + 1, end
        elif kind == 'punct':
            tokens.append(Token(match.group(), match.group(), span))
        elif kind == 'word':
            tokens.append(Token(WORD, match.group(), span))
    end = len(text)
    tokens.append(Token(EOF, '', SourceSpan(line, end - line_start + 1, end, end)))
    return tokens
