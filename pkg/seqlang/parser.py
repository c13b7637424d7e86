"""
Recursive-descent parser for ``.sq`` pulse scripts.

    script     := { statement-end | statement }
    statement  := NAME { argument } [ '{' script '}' ]
    argument   := WORD | KEY '=' WORD

Arguments are checked against the statement's signature while parsing, so a
returned tree carries only well-formed values. Register-dependent checks
(spin labels, band resolution) happen when the tree is lowered.
"""

import math
import re
from pathlib import Path

from django.conf import settings

from spinreg.exceptions import SeqlangError

from . import units
from .lexer import EOF, EQUALS, LBRACE, NEWLINE, RBRACE, WORD, decode, tokenize
from .nodes import (
    ANGLE, CHOICES, COUNT, DURATION, FREQUENCY, LABEL, PROBABILITY, SIGNATURES, SPIN,
    STATE_STRING, TARGET, Argument, Script, Statement,
)

_SPIN_RE = re.compile(r'^[A-Za-z_][A-Za-z0-9_.-]*$')
_STATE_RE = re.compile(r'^(?:[ud][1-9][0-9]*)+$')
_COUNT_RE = re.compile(r'^[0-9]{1,18}$')
_DIMENSIONS = {DURATION: units.DURATION, FREQUENCY: units.FREQUENCY, ANGLE: units.ANGLE}
_OPTIONAL_POSITIONAL = {'label'}


def max_nesting():
    return getattr(settings, 'SPINREG', {}).get('MAX_NESTING', 16)


class Parser:
    def __init__(self, text, filename=None):
        self.filename = filename
        self.tokens = tokenize(text, filename)
        self.position = 0
        self.max_depth = max_nesting()

    def error(self, message, span):
        return SeqlangError(message, span, self.filename)

    def peek(self):
        return self.tokens[self.position]

    def advance(self):
        token = self.tokens[self.position]
        if token.kind != EOF:
            self.position += 1
        return token

    def parse(self):
        return Script(self.statements(None, 0), filename=self.filename)

    def statements(self, opening, depth):
        result = []
        while True:
            token = self.peek()
            if token.kind == NEWLINE:
                self.advance()
            elif token.kind == EOF:
                if opening is not None:
                    raise self.error("expected '}' to close this block", opening.span)
                return result
            elif token.kind == RBRACE:
                if opening is None:
                    raise self.error("unexpected '}' outside a block", token.span)
                self.advance()
                return result
            else:
                result.append(self.statement(depth))
                end = self.peek()
                if end.kind not in (NEWLINE, EOF, RBRACE):
                    raise self.error(f'expected end of statement, got {end.describe()}', end.span)

    def statement(self, depth):
        head = self.advance()
        if head.kind != WORD:
            raise self.error(f'expected a statement, got {head.describe()}', head.span)
        if head.text not in SIGNATURES:
            raise self.error(
                f'unknown statement {head.text!r}; expected one of {", ".join(sorted(SIGNATURES))}',
                head.span,
            )
        signature = SIGNATURES[head.text]
        positional, keywords = self.arguments(head)
        arguments = self.check_arguments(head, signature, positional, keywords)

        body = None
        token = self.peek()
        if signature.block:
            if token.kind != LBRACE:
                raise self.error(f"expected '{{' after {head.text}, got {token.describe()}", token.span)
            if depth + 1 > self.max_depth:
                raise self.error(f'blocks nest deeper than {self.max_depth} levels', token.span)
            self.advance()
            body = self.statements(token, depth + 1)
        elif token.kind == LBRACE:
            raise self.error(f"{head.text} does not take a '{{' block", token.span)
        return Statement(head.text, arguments, body, span=head.span)

    def arguments(self, head):
        positional, keywords = [], []
        while True:
            token = self.peek()
            if token.kind == EQUALS:
                raise self.error("expected an argument before '='", token.span)
            if token.kind != WORD:
                return positional, keywords
            self.advance()
            if self.peek().kind == EQUALS:
                self.advance()
                value = self.advance()
                if value.kind != WORD:
                    raise self.error(f'expected a value for {token.text}=, got {value.describe()}', value.span)
                keywords.append((token, value))
            else:
                positional.append(token)

    def check_arguments(self, head, signature, positional, keywords):
        values = {}
        if len(positional) > len(signature.positional):
            extra = positional[len(signature.positional)]
            raise self.error(f'unexpected argument {extra.text!r} for {head.text}', extra.span)
        for (name, kind), token in zip(signature.positional, positional):
            values[name] = Argument(name, self.value(kind, token, name), token.span)
        for name, _ in signature.positional[len(positional):]:
            if name not in _OPTIONAL_POSITIONAL:
                raise self.error(f'{head.text} needs a {name}', head.span)

        allowed = dict(signature.keywords)
        for key, token in keywords:
            if key.text not in allowed:
                expected = ', '.join(allowed) or 'no keywords'
                raise self.error(f'unknown keyword {key.text!r} for {head.text}; expected {expected}', key.span)
            if key.text in values:
                raise self.error(f'duplicate keyword {key.text!r}', key.span)
            values[key.text] = Argument(key.text, self.value(allowed[key.text], token, key.text), token.span)
        missing = [name for name in signature.required if name not in values]
        if missing:
            raise self.error(f'{head.text} needs {", ".join(f"{m}=" for m in sorted(missing))}', head.span)
        return tuple(values[name] for name in signature.names() if name in values)

    def value(self, kind, token, name):
        text = token.text
        if kind in _DIMENSIONS:
            try:
                value = units.parse_quantity(text, _DIMENSIONS[kind]).value
            except SeqlangError as exc:
                raise self.error(exc.message, token.span) from None
            if not math.isfinite(value):
                raise self.error(f'{name} must be finite, got {text!r}', token.span)
            if kind in (DURATION, FREQUENCY) and value < 0 and name != 'detune':
                raise self.error(f'{name} must be >= 0, got {text!r}', token.span)
            return value
        if kind == COUNT:
            if not _COUNT_RE.match(text):
                raise self.error(f'expected a non-negative integer for {name}, got {text!r}', token.span)
            return int(text)
        if kind == PROBABILITY:
            try:
                value = units.parse_quantity(text, units.NUMBER).value
            except SeqlangError as exc:
                raise self.error(exc.message, token.span) from None
            if not 0.0 <= value <= 1.0:
                raise self.error(f'{name} must lie in [0, 1], got {text!r}', token.span)
            return value
        if kind in (SPIN, TARGET):
            if not _SPIN_RE.match(text) or (kind == SPIN and text == 'e'):
                expected = 'e or a nuclear spin label' if kind == TARGET else 'a nuclear spin label such as n2'
                raise self.error(f'expected {expected} for {name}, got {text!r}', token.span)
            return text
        if kind == STATE_STRING:
            if not _STATE_RE.match(text):
                raise self.error(f'expected a state string such as d1d2u3 for {name}, got {text!r}', token.span)
            return text
        if kind == LABEL:
            return text
        choices = CHOICES[kind]
        if text not in choices:
            raise self.error(f'expected {" or ".join(choices)} for {name}, got {text!r}', token.span)
        return text


def parse(source, filename=None):
    """Syntax tree of a script given as text or UTF-8 bytes."""
    return Parser(decode(source, filename), filename).parse()


def parse_file(path):
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise SeqlangError(f'cannot read {path}: {exc.strerror or exc}') from None
    return parse(data, str(path))
