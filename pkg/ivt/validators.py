"""
This module provides the validators used to check every document ivt reads:
grid measures, joint laws, generator tables, DGP specs and experiment configs.
Validators compose, so a whole JSON schema is a tree of these objects.
"""

import math
import numbers
import re

from . import errors as e
from . import u


class Validator(object):
    """
    Base class for all Validator objects. `validate` either returns None,
    leaving the value untouched, or returns the transformed value which
    replaces the input in its container.
    """

    def validate(self, key, value):  # pylint: disable=C0111
        raise NotImplementedError()

    def raise_error(self, key, value, **kwargs):  # pylint: disable=C0111
        raise e.ValidationError(key, value, self, **kwargs)


# Data structure validators

class List(Validator):
    """
    Ensures that the value is a list. Takes a single argument which is the
    validator (or list of validators) that will be applied to the values of
    the list.
    """
    name = "list"

    def __init__(self, validator):
        self.validator = validator

    def validate(self, key, value):
        if not isinstance(value, list):
            self.raise_error(key, value, message="value is not a list")

        # apply validator to every entry, keeping transformed values
        for index in range(len(value)):
            output = u.validate_item(self.validator, f"{key}[{index}]",
                                     value[index])
            if output is not None:
                value[index] = output


class Optional(Validator):
    """
    Marks a `Dict` field as optional. A missing key is skipped (or filled
    with `default` when one is given); a present key goes through the
    wrapped validator.
    """
    name = "optional"

    MISSING = object()

    def __init__(self, validator, default=MISSING):
        self.validator = validator
        self.default = default

    def validate(self, key, value):
        return u.validate_item(self.validator, key, value)


class Dict(Validator):
    """
    Ensures that the value is a dict. Takes kwargs mapping keys to a
    validator or a list of validators, applied only to the key they are
    assigned to. Keys not named are left alone.
    """
    name = "dict"

    def __init__(self, **fields):
        self.fields = fields

    def validate(self, key, value):
        if not isinstance(value, dict):
            self.raise_error(key, value, message="value is not a dict")

        for dict_key, validators in self.fields.items():
            try:
                dict_value = value[dict_key]
            except KeyError:
                if isinstance(validators, Optional):
                    if validators.default is not Optional.MISSING:
                        value[dict_key] = validators.default
                    continue
                raise e.SchemaKeyError(f"{key}.{dict_key}")
            output = u.validate_item(validators, f"{key}.{dict_key}",
                                     dict_value)
            if output is not None:
                value[dict_key] = output


# Meta-validators


class LambdaMap(Validator):
    """
    Runs a lambda against a given input, checking for errors, and replaces the
    input value with the value returned from the lambda.
    """
    name = "lambdamap"

    def __init__(self, _lambda):
        self._lambda = _lambda

    def validate(self, key, value):
        try:
            return self._lambda(value)
        except Exception as exc:  # pylint: disable=W0703
            self.raise_error(key, value, exception=exc)


class LambdaFilter(Validator):
    """
    Runs a lambda against a given input and asserts that the output of the
    called lambda is truthy. An optional `message` explains the failure.
    """
    name = "lambdafilter"

    def __init__(self, _lambda, message=None):
        self._lambda = _lambda
        self._message = message

    def validate(self, key, value):
        if not self._lambda(value):
            self.raise_error(key, value, message=self._message)


# Content validators


class Number(Validator):
    """
    Checks that an input is a finite real number (booleans are refused) and
    converts it to float. Bounds are inclusive unless `strict` is set, in
    which case `min` is exclusive, for "positive real" fields. Set
    `integer` to require and return an int.
    """
    name = "number"

    def __init__(self, min=None, max=None, strict=False, integer=False):
        self._min = min
        self._max = max
        self._strict = strict
        self._integer = integer

    def validate(self, key, value):
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            self.raise_error(key, value, message="value is not a number")
        if not math.isfinite(value):
            self.raise_error(key, value, message="value is not finite")
        if self._integer:
            if int(value) != value:
                self.raise_error(key, value, message="value is not integral")
            value = int(value)
        else:
            value = float(value)
        if self._min is not None:
            if value < self._min or (self._strict and value == self._min):
                self.raise_error(
                    key, value,
                    message="value below %s%r" % (
                        ">" if self._strict else ">=", self._min))
        if self._max is not None and value > self._max:
            self.raise_error(key, value, message="value above %r" % self._max)
        return value


class Length(Validator):
    """
    Checks whether a list (or string) has a certain number of entries.
    """
    name = "length"

    def __init__(self, min=None, max=None):
        self._min = min
        self._max = max

    def validate(self, key, value):
        length = len(value)
        msg = "value too %s (%s %s %s)"
        if self._min is not None:
            if length < self._min:
                self.raise_error(
                    key, value,
                    message=msg % ("short", length, "<", self._min))
        if self._max is not None:
            if length > self._max:
                self.raise_error(
                    key, value,
                    message=msg % ("long", length, ">", self._max))


class Normalized(Validator):
    """
    Checks that a list of masses is non-negative and sums to one within
    `tol`. Nested lists (mass matrices) are summed entirely.
    """
    name = "normalized"

    def __init__(self, tol=1e-9):
        self._tol = tol

    def validate(self, key, value):
        flat = list(_flatten(value))
        if any(m < 0 for m in flat):
            raise e.NormalizationError(key, min(flat),
                                       message="negative mass")
        total = math.fsum(flat)
        if abs(total - 1.0) > self._tol:
            raise e.NormalizationError(key, total)


def _flatten(value):
    for item in value:
        if isinstance(item, list):
            yield from _flatten(item)
        else:
            yield item


class Regex(Validator):
    """
    Validate string data against a raw, uncompiled regex pattern, anchored
    at the beginning. Used for partition addresses such as "1121" or "10.3".
    """
    name = "regex"

    def __init__(self, pattern):
        self.pattern = re.compile(pattern)

    def validate(self, key, value):
        if not isinstance(value, str) or not self.pattern.match(value):
            self.raise_error(key, value, message=self.pattern.pattern)


class Select(Validator):
    """
    Validate that a given input is one of a list of options.

    :usage:
        v.Dict(copula=v.Select(["comonotone", "countermonotone"]))
    """
    name = "select"

    def __init__(self, options):
        self._options = set(options)

    def validate(self, key, value):
        if value not in self._options:
            self.raise_error(
                key, value,
                message="expected one of %s" % ", ".join(
                    sorted(map(str, self._options))))
