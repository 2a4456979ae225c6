#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Common utility functions."""

import math
import re
from typing import Union

_ANGLE_PATTERN = re.compile(
    r"^\s*(?:(?P<num>[0-9]*\.?[0-9]+)\s*\*?\s*)?pi(?:\s*/\s*(?P<den>[0-9]*\.?[0-9]+))?\s*$"
)


def format_number(value: Union[float, int]) -> str:
    """Locale-independent text with 17 significant digits."""
    return format(float(value), ".17g")


def parse_angle(text: str) -> float:
    """
    Parse an angle literal.

    Accepts plain numbers and multiples of pi such as ``pi``, ``pi/4`` or
    ``3*pi/8``.
    """
    text = text.strip()
    sign = 1.0
    if text.startswith("-"):
        sign, text = -1.0, text[1:]
    match = _ANGLE_PATTERN.match(text)
    if match:
        num = float(match.group("num")) if match.group("num") else 1.0
        den = float(match.group("den")) if match.group("den") else 1.0
        return sign * num * math.pi / den
    return sign * float(text)
