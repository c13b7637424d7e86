import csv
import io

from rest_framework import serializers

from spinreg.exceptions import ConfigError

from .ssr import SSR_WINDOW, PhotonHistogram, SsrModel

HISTOGRAM_HEADER = ('photon_count', 'occurrences')


class SsrModelSerializer(serializers.Serializer):
    bright_mean = serializers.FloatField(min_value=0.0)
    dark_mean = serializers.FloatField(min_value=0.0)
    bright_sigma = serializers.FloatField(min_value=0.0, default=0.0)
    dark_sigma = serializers.FloatField(min_value=0.0, default=0.0)

    def validate(self, attrs):
        if attrs['bright_mean'] <= attrs['dark_mean']:
            raise serializers.ValidationError('bright_mean must exceed dark_mean.')
        return attrs

    def create(self, validated_data):
        return SsrModel(**validated_data)


class HistogramBinSerializer(serializers.Serializer):
    photon_count = serializers.IntegerField(min_value=0)
    occurrences = serializers.IntegerField(min_value=0)


class PhotonHistogramSerializer(serializers.Serializer):
    window = serializers.FloatField(min_value=0.0, default=SSR_WINDOW)
    repetitions = serializers.IntegerField(min_value=0)
    bins = HistogramBinSerializer(many=True)

    def to_representation(self, histogram):
        return {
            'window': histogram.window,
            'repetitions': histogram.repetitions,
            'bins': [
                {'photon_count': k, 'occurrences': v} for k, v in histogram.bin_counts.items()
            ],
        }

    def validate(self, attrs):
        total = sum(item['occurrences'] for item in attrs['bins'])
        if total != attrs['repetitions']:
            raise serializers.ValidationError(
                {'repetitions': f'bins hold {total} shots, expected {attrs["repetitions"]}'}
            )
        counts = [item['photon_count'] for item in attrs['bins']]
        if len(set(counts)) != len(counts):
            raise serializers.ValidationError({'bins': 'photon counts must be unique'})
        return attrs

    def create(self, validated_data):
        bins = {item['photon_count']: item['occurrences'] for item in validated_data['bins']}
        return PhotonHistogram(bins, validated_data['window'], validated_data['repetitions'])


def write_histogram_csv(histogram, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(HISTOGRAM_HEADER)
    for count, occurrences in histogram.bin_counts.items():
        writer.writerow((count, occurrences))


def histogram_to_csv(histogram):
    buffer = io.StringIO()
    write_histogram_csv(histogram, buffer)
    return buffer.getvalue()


def read_histogram_csv(stream, window=SSR_WINDOW):
    """Parse ``photon_count,occurrences`` rows; errors name the offending line."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != HISTOGRAM_HEADER:
        raise ConfigError(f'line 1: expected header {",".join(HISTOGRAM_HEADER)}')
    bins = {}
    for row in reader:
        if not row or not ''.join(row).strip():
            continue
        line = reader.line_num
        if len(row) != 2:
            raise ConfigError(f'line {line}: expected 2 columns, got {len(row)}')
        try:
            count, occurrences = int(row[0]), int(row[1])
        except ValueError:
            raise ConfigError(f'line {line}: photon count and occurrences must be integers') from None
        if count in bins:
            raise ConfigError(f'line {line}: photon count {count} listed twice')
        bins[count] = occurrences
    return PhotonHistogram(bins, window)
