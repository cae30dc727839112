"""
Serializers for RunLab file formats and command configuration.

Coloring file:   {"k", "m", "r", "colors": [c_0 .. c_{C(m,k)-1}]}
Edge coloring:   {"k", "m", "q", "colors": [...]} keyed by (k+1)-word rank
Function file:   {"k", "M", "r", "table": [v_0 .. v_{M^k-1}]}, coordinate 1
                 fastest, values integers or "p/q" strings (r null)
"""

from fractions import Fraction
from typing import Any, Dict

from rest_framework import serializers

from lab.constants import CHECK_MODES, NOISE_MODES, OUTPUT_FORMATS
from lab.exceptions import LabError
from lab.services.blockfactor import GridFunction
from lab.services.coloring import EdgeColoring, VertexColoring

SUBCOMMANDS = [
    "graph",
    "chromatic",
    "lift",
    "mono-path",
    "chvatal-check",
    "search-coloring",
    "construct-h",
    "verify-h",
    "run-bound-check",
    "prob-exact",
    "prob-mc",
    "adversarial-min",
    "bridge-check",
    "bounds",
    "verify-theorem2",
    "corollary-check",
]

BUDGET_KEYS = [
    "VERTEX_BUDGET",
    "MATERIALIZE_LIMIT",
    "CHROMATIC_VERTEX_BUDGET",
    "EXHAUSTIVE_COLORING_LIMIT",
    "EXHAUSTIVE_FUNCTION_LIMIT",
    "EXHAUSTIVE_TUPLE_LIMIT",
    "EXACT_STATE_BUDGET",
    "NAIVE_ENUMERATION_LIMIT",
    "TOWER_MAX_BITS",
    "TOWER_PRECISION_BITS",
    "BRIDGE_PERMUTATION_LIMIT",
    "MC_CHUNK_SIZE",
    "FUNCTION_BATCH_SIZE",
    "SEARCH_TIME_BUDGET",
]


class StrictSerializer(serializers.Serializer):
    """Rejects keys that are not declared fields."""

    def to_internal_value(self, data: Any) -> Dict[str, Any]:
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: "Unknown key." for key in unknown})
        return super().to_internal_value(data)


class RationalField(serializers.Field):
    """An integer, or an exact rational written "p/q"."""

    default_error_messages = {"invalid": "Expected an integer or a \"p/q\" string."}

    def to_internal_value(self, data: Any):
        if isinstance(data, bool):
            self.fail("invalid")
        if isinstance(data, int):
            return data
        if isinstance(data, str):
            try:
                value = Fraction(data)
            except (ValueError, ZeroDivisionError):
                self.fail("invalid")
            return value.numerator if value.denominator == 1 else value
        self.fail("invalid")

    def to_representation(self, value: Any):
        if isinstance(value, Fraction):
            return f"{value.numerator}/{value.denominator}"
        return value


class ColoringFileSerializer(StrictSerializer):
    k = serializers.IntegerField(min_value=1)
    m = serializers.IntegerField(min_value=1)
    r = serializers.IntegerField(min_value=1)
    colors = serializers.ListField(child=serializers.IntegerField(min_value=0), allow_empty=True)

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        try:
            attrs["coloring"] = VertexColoring(attrs["k"], attrs["m"], attrs["r"], attrs["colors"])
        except LabError as e:
            raise serializers.ValidationError(e.message)
        return attrs


class EdgeColoringFileSerializer(StrictSerializer):
    k = serializers.IntegerField(min_value=1)
    m = serializers.IntegerField(min_value=1)
    q = serializers.IntegerField(min_value=1)
    colors = serializers.ListField(child=serializers.IntegerField(min_value=0), allow_empty=True)

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        try:
            attrs["coloring"] = EdgeColoring(attrs["k"], attrs["m"], attrs["q"], attrs["colors"])
        except LabError as e:
            raise serializers.ValidationError(e.message)
        return attrs


class FunctionFileSerializer(StrictSerializer):
    k = serializers.IntegerField(min_value=1)
    M = serializers.IntegerField(min_value=1)
    r = serializers.IntegerField(min_value=1, allow_null=True, required=False, default=None)
    table = serializers.ListField(child=RationalField())

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        try:
            attrs["function"] = GridFunction(attrs["k"], attrs["M"], attrs["r"], tuple(attrs["table"]))
        except LabError as e:
            raise serializers.ValidationError(e.message)
        return attrs


class CommandConfigSerializer(StrictSerializer):
    """
    One CLI invocation: subcommand, its parameters and run options.
    Budget overrides must name a RUNLAB key.
    """
    subcommand = serializers.ChoiceField(choices=SUBCOMMANDS)
    params = serializers.DictField()
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1, required=False, allow_null=True)
    output = serializers.ChoiceField(choices=OUTPUT_FORMATS, default="json")
    threads = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    mode = serializers.ChoiceField(choices=CHECK_MODES, required=False, allow_null=True)
    noise = serializers.ChoiceField(choices=NOISE_MODES, required=False, allow_null=True)
    budget = serializers.DictField(child=serializers.FloatField(min_value=0), required=False, default=dict)

    def validate_budget(self, value: Dict[str, float]) -> Dict[str, Any]:
        unknown = sorted(set(value) - set(BUDGET_KEYS))
        if unknown:
            raise serializers.ValidationError(f"Unknown budget keys: {', '.join(unknown)}")
        return {
            key: amount if key == "SEARCH_TIME_BUDGET" else int(amount)
            for key, amount in value.items()
        }
