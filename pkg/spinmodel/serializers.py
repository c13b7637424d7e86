import math

from rest_framework import serializers

from seqlang.units import (
    DURATION, FREQUENCY, format_duration, format_frequency, parse_quantity,
)
from spinreg.exceptions import SeqlangError

from .params import DriveParams, NuclearSpin, RegisterParams


class QuantityField(serializers.Field):
    """Accepts ``150kHz`` style text (or bare SI numbers) and stores SI floats.

    With ``angular=True`` frequencies are converted to rad/s on the way in and
    back to Hz on the way out.
    """

    default_error_messages = {
        'invalid': 'Invalid quantity: {message}',
    }

    def __init__(self, dimension, angular=False, **kwargs):
        self.dimension = dimension
        self.angular = angular
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        if isinstance(data, bool):
            self.fail('invalid', message=repr(data))
        if isinstance(data, (int, float)):
            value = float(data)
        else:
            try:
                value = parse_quantity(str(data), self.dimension).value
            except SeqlangError as exc:
                self.fail('invalid', message=exc.message)
        if self.angular:
            value *= 2 * math.pi
        return value

    def to_representation(self, value):
        if self.dimension == FREQUENCY:
            return format_frequency(value / (2 * math.pi) if self.angular else value)
        if self.dimension == DURATION:
            return format_duration(value)
        return value


class NuclearSpinSerializer(serializers.Serializer):
    label = serializers.CharField(required=False, allow_blank=True, default='')
    a_par = QuantityField(FREQUENCY, angular=True)
    a_perp = QuantityField(FREQUENCY, angular=True, default=0.0)
    t2_star = QuantityField(DURATION, required=False, allow_null=True, default=None)

    def validate_a_perp(self, value):
        if value < 0:
            raise serializers.ValidationError('a_perp must be >= 0.')
        return value


class CouplingSerializer(serializers.Serializer):
    first = serializers.CharField()
    second = serializers.CharField()
    strength = QuantityField(FREQUENCY, angular=True)


class RegisterConfigSerializer(serializers.Serializer):
    omega_L_e = QuantityField(FREQUENCY, angular=True)
    omega_L_n = QuantityField(FREQUENCY, angular=True)
    f_e = serializers.FloatField(min_value=0.5, max_value=1.0, default=1.0)
    tau_c0 = QuantityField(DURATION, default=math.inf)
    beta = serializers.FloatField(default=1.0)
    chi = serializers.FloatField(default=1.0)
    spins = NuclearSpinSerializer(many=True, default=list)
    couplings = CouplingSerializer(many=True, default=list)

    def validate_beta(self, value):
        if value <= 0:
            raise serializers.ValidationError('beta must be > 0.')
        return value

    def validate_tau_c0(self, value):
        if value <= 0:
            raise serializers.ValidationError('tau_c0 must be > 0.')
        return value

    def validate_spins(self, value):
        if len(value) > 5:
            raise serializers.ValidationError('At most 5 nuclear spins are supported.')
        return value

    def validate(self, attrs):
        labels = [spin.get('label') or f'n{i + 1}' for i, spin in enumerate(attrs['spins'])]
        resolved = {}
        for coupling in attrs['couplings']:
            try:
                i = labels.index(coupling['first'])
                j = labels.index(coupling['second'])
            except ValueError:
                raise serializers.ValidationError(
                    {'couplings': f"unknown spin in coupling {coupling['first']}-{coupling['second']}"}
                )
            if i == j:
                raise serializers.ValidationError({'couplings': f'spin {labels[i]} coupled to itself'})
            key = (min(i, j), max(i, j))
            if key in resolved and not math.isclose(resolved[key], coupling['strength']):
                raise serializers.ValidationError({'couplings': f'asymmetric coupling {labels[i]}-{labels[j]}'})
            resolved[key] = coupling['strength']
        attrs['nn_couplings'] = resolved
        return attrs

    def create(self, validated_data):
        spins = [
            NuclearSpin(label=spin.get('label') or f'n{i + 1}', a_par=spin['a_par'],
                        a_perp=spin['a_perp'], t2_star=spin.get('t2_star'))
            for i, spin in enumerate(validated_data['spins'])
        ]
        return RegisterParams(
            omega_L_e=validated_data['omega_L_e'],
            omega_L_n=validated_data['omega_L_n'],
            spins=spins,
            nn_couplings=validated_data['nn_couplings'],
            f_e=validated_data['f_e'],
            tau_c0=validated_data['tau_c0'],
            beta=validated_data['beta'],
            chi=validated_data['chi'],
        )


class DriveSerializer(serializers.Serializer):
    mw_rabi = QuantityField(FREQUENCY, angular=True, default=2 * math.pi / 228e-9)
    rf_rabi = serializers.ListField(child=QuantityField(FREQUENCY, angular=True), default=list)
    rf_rabi_default = QuantityField(FREQUENCY, angular=True, default=2 * math.pi * 3.564e3)

    def create(self, validated_data):
        return DriveParams(**validated_data)


class RegisterSummarySerializer(serializers.Serializer):
    """Read-only view of a register for manifests and JSON dumps."""

    omega_L_e = QuantityField(FREQUENCY, angular=True)
    omega_L_n = QuantityField(FREQUENCY, angular=True)
    f_e = serializers.FloatField()
    tau_c0 = serializers.FloatField()
    beta = serializers.FloatField()
    chi = serializers.FloatField()
    spins = NuclearSpinSerializer(many=True)
