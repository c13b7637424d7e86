from rest_framework import serializers

from pulses.shapes import KINDS, Envelope

from .program import (
    CHANNELS, ELECTRON_CONDITIONS, Barrier, ConditionalPhase, Delay, Measure, Noisy,
    Pulse, PulseProgram, Repeat, Reset, Rotation, Simultaneous,
)


class EnvelopeSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=KINDS)
    duration = serializers.FloatField()
    peak_rabi = serializers.FloatField()
    bandwidth = serializers.FloatField(allow_null=True, default=None)
    carrier_detuning = serializers.FloatField(default=0.0)
    phase = serializers.FloatField(default=0.0)

    def create(self, validated_data):
        return Envelope(**validated_data)


class PulseSerializer(serializers.Serializer):
    channel = serializers.ChoiceField(choices=CHANNELS)
    envelope = EnvelopeSerializer()
    carrier = serializers.FloatField(allow_null=True, default=None)
    target = serializers.IntegerField(allow_null=True, default=None, min_value=0)
    condition = serializers.ChoiceField(
        choices=[c for c in ELECTRON_CONDITIONS if c], allow_null=True, default=None,
    )

    def create(self, validated_data):
        envelope = Envelope(**validated_data.pop('envelope'))
        return Pulse(envelope=envelope, **validated_data)


ELEMENT_TYPES = {
    'delay': Delay,
    'pulse': Pulse,
    'simultaneous': Simultaneous,
    'repeat': Repeat,
    'barrier': Barrier,
    'reset': Reset,
    'measure': Measure,
    'rotation': Rotation,
    'conditional_phase': ConditionalPhase,
    'noisy': Noisy,
}
TYPE_NAMES = {cls: name for name, cls in ELEMENT_TYPES.items()}


class ElementSerializer(serializers.BaseSerializer):
    """One program element as a dict with a ``type`` key and SI-unit fields."""

    def to_representation(self, element):
        kind = TYPE_NAMES[type(element)]
        data = {'type': kind}
        if kind == 'delay':
            data['tau'] = element.tau
        elif kind == 'pulse':
            data.update(PulseSerializer(element).data)
        elif kind == 'simultaneous':
            data['pulses'] = PulseSerializer(element.pulses, many=True).data
        elif kind in ('repeat', 'noisy'):
            if kind == 'repeat':
                data['n'] = element.n
            else:
                data['fidelity'] = element.fidelity
            data['body'] = ElementSerializer(element.body, many=True).data
        elif kind in ('barrier', 'measure'):
            data['label'] = element.label
        elif kind == 'rotation':
            data.update(target=element.target, angle=element.angle, phase=element.phase)
        elif kind == 'conditional_phase':
            data['states'] = [{'spin': i, 'sign': sign} for i, sign in element.states]
        return data

    def to_internal_value(self, data):
        if not isinstance(data, dict) or data.get('type') not in ELEMENT_TYPES:
            raise serializers.ValidationError(
                {'type': f'expected one of {", ".join(ELEMENT_TYPES)}'}
            )
        kind = data['type']
        if kind == 'delay':
            return Delay(float(data['tau']))
        if kind == 'pulse':
            return _pulse(data)
        if kind == 'simultaneous':
            return Simultaneous([_pulse(p) for p in data.get('pulses', [])])
        if kind == 'repeat':
            return Repeat(int(data['n']), self._body(data))
        if kind == 'noisy':
            return Noisy(float(data['fidelity']), self._body(data))
        if kind == 'barrier':
            return Barrier(data.get('label', ''))
        if kind == 'measure':
            return Measure(data.get('label', ''))
        if kind == 'reset':
            return Reset()
        if kind == 'rotation':
            return Rotation(data.get('target'), float(data['angle']), float(data.get('phase', 0.0)))
        return ConditionalPhase({int(s['spin']): int(s['sign']) for s in data.get('states', [])})

    def _body(self, data):
        return [ElementSerializer(data=child).to_internal_value(child) for child in data.get('body', [])]


def _pulse(data):
    serializer = PulseSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


class PulseProgramSerializer(serializers.BaseSerializer):
    def to_representation(self, program):
        return {
            'duration': program.duration(),
            'elements': ElementSerializer(program.elements, many=True).data,
        }

    def to_internal_value(self, data):
        elements = data.get('elements') if isinstance(data, dict) else None
        if not isinstance(elements, list):
            raise serializers.ValidationError({'elements': 'expected a list of elements'})
        return PulseProgram(ElementSerializer().to_internal_value(item) for item in elements)
