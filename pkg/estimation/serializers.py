import json
import math

import jsonschema
from rest_framework import serializers

from spinreg.exceptions import ConfigError

from .data import DataSeries
from .fitting import FitResult

_NUMBER_OR_NULL = {'type': ['number', 'null']}

FIT_RESULT_SCHEMA = {
    'type': 'object',
    'required': ['model', 'converged', 'iterations', 'method', 'residual_norm', 'params', 'sigmas'],
    'properties': {
        'model': {'type': 'string', 'minLength': 1},
        'converged': {'type': 'boolean'},
        'iterations': {'type': 'integer', 'minimum': 0},
        'method': {'type': 'string'},
        'residual_norm': _NUMBER_OR_NULL,
        'reduced_chi2': _NUMBER_OR_NULL,
        'fixed': {'type': 'array', 'items': {'type': 'string'}},
        'params': {'type': 'object', 'additionalProperties': _NUMBER_OR_NULL},
        'sigmas': {
            'type': 'object',
            'additionalProperties': {'anyOf': [{'type': 'number', 'minimum': 0}, {'type': 'null'}]},
        },
    },
    'additionalProperties': False,
}

PARAMETER_VALUES_SCHEMA = {
    'type': 'object',
    'additionalProperties': {'type': ['number', 'null']},
}


class FiniteFloatField(serializers.FloatField):
    """Non-finite values are written as null so the JSON stays strict."""

    def to_representation(self, value):
        value = float(value)
        return value if math.isfinite(value) else None


class FitResultSerializer(serializers.Serializer):
    model = serializers.CharField()
    converged = serializers.BooleanField()
    iterations = serializers.IntegerField(min_value=0)
    method = serializers.CharField()
    residual_norm = FiniteFloatField(allow_null=True)
    reduced_chi2 = FiniteFloatField(allow_null=True, default=0.0)
    fixed = serializers.ListField(child=serializers.CharField(), default=list)
    params = serializers.DictField(child=FiniteFloatField(allow_null=True))
    sigmas = serializers.DictField(child=FiniteFloatField(allow_null=True))

    def validate(self, attrs):
        missing = sorted(set(attrs['params']) - set(attrs['sigmas']))
        if missing:
            raise serializers.ValidationError({'sigmas': f'missing entries for {", ".join(missing)}'})
        return attrs

    def create(self, validated_data):
        def number(value):
            return math.nan if value is None else float(value)

        return FitResult(
            model=validated_data['model'],
            params={k: number(v) for k, v in validated_data['params'].items()},
            sigmas={k: number(v) for k, v in validated_data['sigmas'].items()},
            residual_norm=number(validated_data['residual_norm']),
            converged=validated_data['converged'],
            iterations=validated_data['iterations'],
            fixed=tuple(validated_data['fixed']),
            method=validated_data['method'],
            reduced_chi2=number(validated_data['reduced_chi2']),
        )


class DataSeriesSerializer(serializers.Serializer):
    x_name = serializers.CharField(default='x')
    y_name = serializers.CharField(default='y')
    x = serializers.ListField(child=serializers.FloatField(), min_length=1)
    y = serializers.ListField(child=serializers.FloatField(), min_length=1)
    y_err = serializers.ListField(child=serializers.FloatField(), required=False, allow_null=True)

    def to_representation(self, series):
        payload = {
            'x_name': series.x_name,
            'y_name': series.y_name,
            'x': [float(v) for v in series.x],
            'y': [float(v) for v in series.y],
        }
        if series.y_err is not None:
            payload['y_err'] = [float(v) for v in series.y_err]
        return payload

    def create(self, validated_data):
        try:
            return DataSeries(**validated_data)
        except ConfigError as exc:
            raise serializers.ValidationError(str(exc))


def fit_result_document(result):
    """JSON-ready dict for a FitResult, checked against FIT_RESULT_SCHEMA."""
    document = dict(FitResultSerializer(result).data)
    jsonschema.validate(document, FIT_RESULT_SCHEMA)
    return document


def dump_fit_result(result):
    return json.dumps(fit_result_document(result), indent=2, sort_keys=True, allow_nan=False) + '\n'


def load_fit_result(text):
    try:
        document = json.loads(text)
        jsonschema.validate(document, FIT_RESULT_SCHEMA)
    except (ValueError, jsonschema.ValidationError) as exc:
        raise ConfigError(f'invalid fit result: {getattr(exc, "message", exc)}') from None
    serializer = FitResultSerializer(data=document)
    if not serializer.is_valid():
        raise ConfigError(f'invalid fit result: {serializer.errors}')
    return serializer.save()


def load_parameter_values(text, source='initial values'):
    """``{"name": number}`` mapping as used by ``fit --init``."""
    try:
        document = json.loads(text)
        jsonschema.validate(document, PARAMETER_VALUES_SCHEMA)
    except json.JSONDecodeError as exc:
        raise ConfigError(f'{source}: line {exc.lineno}: {exc.msg}') from None
    except jsonschema.ValidationError as exc:
        raise ConfigError(f'{source}: {exc.message}') from None
    return {name: value for name, value in document.items()}
