"""
Syntax tree of a pulse script and the statement signatures it is checked against.

Trees compare structurally: spans are carried along for diagnostics but do
not take part in equality.
"""

import attrs

from .lexer import SourceSpan

DURATION = 'duration'
FREQUENCY = 'frequency'
ANGLE = 'angle'
COUNT = 'count'
PROBABILITY = 'probability'
SPIN = 'spin'
TARGET = 'target'
BRANCH = 'branch'
CONDITION = 'condition'
STATE_STRING = 'state string'
SHAPE = 'shape'
BASIS = 'basis'
FLAG = 'flag'
LABEL = 'label'

CHOICES = {
    BRANCH: ('up', 'down'),
    CONDITION: ('e:up', 'e:down'),
    SHAPE: ('rect', 'sinc'),
    BASIS: ('z', 'x', 'y'),
    FLAG: ('yes', 'no'),
}


@attrs.frozen
class Signature:
    positional: tuple = ()
    keywords: tuple = ()
    required: frozenset = frozenset()
    block: bool = False

    def names(self):
        return [name for name, _ in self.positional] + [name for name, _ in self.keywords]

    def kind_of(self, name):
        return dict(self.positional + self.keywords)[name]


SIGNATURES = {
    'wait': Signature(positional=(('duration', DURATION),)),
    'mw': Signature(
        positional=(('angle', ANGLE),),
        keywords=(('shape', SHAPE), ('bw', FREQUENCY), ('phase', ANGLE), ('detune', FREQUENCY),
                  ('rabi', FREQUENCY), ('carrier', FREQUENCY)),
    ),
    'rf': Signature(
        positional=(('angle', ANGLE),),
        keywords=(('target', SPIN), ('cond', CONDITION), ('phase', ANGLE), ('detune', FREQUENCY),
                  ('rabi', FREQUENCY), ('carrier', FREQUENCY)),
        required=frozenset({'target'}),
    ),
    'repeat': Signature(positional=(('n', COUNT),), block=True),
    'simul': Signature(block=True),
    'noisy': Signature(positional=(('fidelity', PROBABILITY),), block=True),
    'cnnote': Signature(
        keywords=(('target', SPIN), ('state', BRANCH), ('bw', FREQUENCY), ('angle', ANGLE)),
        required=frozenset({'target', 'state', 'bw'}),
    ),
    'cenotn': Signature(
        keywords=(('target', SPIN), ('state', BRANCH), ('rabi', FREQUENCY)),
        required=frozenset({'target', 'state'}),
    ),
    'cphase': Signature(
        keywords=(('cond', STATE_STRING), ('bw', FREQUENCY), ('ideal', FLAG)),
        required=frozenset({'cond', 'bw'}),
    ),
    'cz': Signature(keywords=(('cond', STATE_STRING),), required=frozenset({'cond'})),
    'bell': Signature(
        keywords=(('ideal', FLAG), ('cond', STATE_STRING), ('bw', FREQUENCY),
                  ('fidelity', PROBABILITY), ('basis', BASIS)),
    ),
    'sedor': Signature(
        keywords=(('sensor', SPIN), ('target', SPIN), ('tau', DURATION), ('cond', CONDITION),
                  ('readout', FLAG)),
        required=frozenset({'sensor', 'target', 'tau'}),
    ),
    'barrier': Signature(positional=(('label', LABEL),)),
    'rot': Signature(
        positional=(('angle', ANGLE),),
        keywords=(('target', TARGET), ('phase', ANGLE)),
        required=frozenset({'target'}),
    ),
    'reset_e': Signature(),
    'measure_e': Signature(positional=(('label', LABEL),)),
}


@attrs.frozen
class Argument:
    name: str
    value: object
    span: SourceSpan | None = attrs.field(default=None, eq=False, repr=False)


@attrs.frozen
class Statement:
    name: str
    arguments: tuple = attrs.field(default=(), converter=tuple)
    body: tuple | None = attrs.field(default=None, converter=attrs.converters.optional(tuple))
    span: SourceSpan | None = attrs.field(default=None, eq=False, repr=False)

    @property
    def signature(self):
        return SIGNATURES[self.name]

    def get(self, name, default=None):
        for argument in self.arguments:
            if argument.name == name:
                return argument.value
        return default

    def span_of(self, name):
        for argument in self.arguments:
            if argument.name == name:
                return argument.span or self.span
        return self.span


@attrs.frozen
class Script:
    statements: tuple = attrs.field(default=(), converter=tuple)
    filename: str | None = attrs.field(default=None, eq=False)

    def __iter__(self):
        return iter(self.statements)

    def __len__(self):
        return len(self.statements)
