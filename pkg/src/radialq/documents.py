"""Series documents: the JSON input format and polynomial text parsing.

A series document is UTF-8 JSON:

    {
      "coefficients": {"period": 2, "values": [["1", "0"], ["-1", "0"]]},
      "exponent": {"type": "polynomial", "coefficients": ["0", "0", "1"]},
      "root_of_unity": {"p": 1, "N": 6}
    }

Coefficient entries are [re, im] pairs of decimal strings, parsed at the
working precision.  Polynomial coefficients are exact rational strings
"p/q" (a_0 first); exactness is load-bearing for twist periodicity and for
the tail certificates.  ``root_of_unity`` is optional.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpfr

from .hp import DEFAULT_PRECISION, to_real
from .radial import RootOfUnity
from .series import (
    ExponentialExponent,
    PeriodicCoefficients,
    PolynomialExponent,
    SeriesSpec,
    SpecificationError,
)


class DocumentError(SpecificationError):
    """Malformed series document."""


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"invalid rational {text!r}: {exc}") from None


def roundtrip_digits(precision: int) -> int:
    """Decimal digits sufficient to round-trip a binary float of the given
    precision (ceil(P log10 2) + 2)."""
    return precision * 30103 // 100000 + 3


def format_real(x: mpfr, precision: int = DEFAULT_PRECISION) -> str:
    return format(x, f".{roundtrip_digits(precision)}g")


def format_complex(z, precision: int = DEFAULT_PRECISION) -> list[str]:
    return [format_real(z.real, precision), format_real(z.imag, precision)]


@dataclass(frozen=True)
class SeriesDocument:
    spec: SeriesSpec
    root: RootOfUnity | None

    @property
    def root_or_one(self) -> RootOfUnity:
        return self.root if self.root is not None else RootOfUnity(0, 1)


def _require(mapping, key, where):
    if not isinstance(mapping, dict) or key not in mapping:
        raise DocumentError(f"missing {key!r} in {where}")
    return mapping[key]


def parse_document(data, precision: int = DEFAULT_PRECISION) -> SeriesDocument:
    """Build a SeriesDocument from decoded JSON."""
    coeffs_node = _require(data, "coefficients", "document")
    period = _require(coeffs_node, "period", "coefficients")
    values_node = _require(coeffs_node, "values", "coefficients")
    if not isinstance(period, int) or period < 1:
        raise DocumentError(f"period must be a positive integer, got {period!r}")
    if not isinstance(values_node, list) or len(values_node) != period:
        raise DocumentError(
            f"expected {period} coefficient values, got "
            f"{len(values_node) if isinstance(values_node, list) else values_node!r}"
        )
    values = []
    for entry in values_node:
        if not isinstance(entry, list) or len(entry) != 2:
            raise DocumentError(f"coefficient entries are [re, im] pairs, got {entry!r}")
        try:
            values.append((to_real(str(entry[0]), precision), to_real(str(entry[1]), precision)))
        except (ValueError, TypeError) as exc:
            raise DocumentError(f"invalid coefficient {entry!r}: {exc}") from None
    try:
        coefficients = PeriodicCoefficients.of(values, precision)
    except SpecificationError as exc:
        raise DocumentError(str(exc)) from None

    exp_node = _require(data, "exponent", "document")
    kind = _require(exp_node, "type", "exponent")
    try:
        if kind == "polynomial":
            raw = _require(exp_node, "coefficients", "exponent")
            exponent = PolynomialExponent(tuple(parse_rational(str(c)) for c in raw))
        elif kind == "exponential":
            base = _require(exp_node, "base", "exponent")
            exponent = ExponentialExponent(to_real(str(base), precision))
        else:
            raise DocumentError(f"unknown exponent type {kind!r}")
    except SpecificationError as exc:
        raise DocumentError(str(exc)) from None

    root = None
    if "root_of_unity" in data and data["root_of_unity"] is not None:
        node = data["root_of_unity"]
        p = _require(node, "p", "root_of_unity")
        n = _require(node, "N", "root_of_unity")
        if not isinstance(p, int) or not isinstance(n, int):
            raise DocumentError("root_of_unity p and N must be integers")
        try:
            root = RootOfUnity.reduced(p, n)
        except SpecificationError as exc:
            raise DocumentError(str(exc)) from None

    return SeriesDocument(SeriesSpec(coefficients, exponent), root)


def load_document(path: str, precision: int = DEFAULT_PRECISION) -> SeriesDocument:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"invalid JSON in {path}: {exc}") from None
    return parse_document(data, precision)


def document_to_dict(doc: SeriesDocument, precision: int = DEFAULT_PRECISION) -> dict:
    """Serialize back to the document schema; exact rationals preserved and
    decimal strings emitted with round-trip precision."""
    spec = doc.spec
    out: dict = {
        "coefficients": {
            "period": spec.coefficients.period,
            "values": [format_complex(v, precision) for v in spec.coefficients.values],
        }
    }
    if isinstance(spec.exponent, PolynomialExponent):
        out["exponent"] = {
            "type": "polynomial",
            "coefficients": [str(c) for c in spec.exponent.coefficients],
        }
    else:
        out["exponent"] = {
            "type": "exponential",
            "base": format_real(spec.exponent.base, precision),
        }
    if doc.root is not None:
        out["root_of_unity"] = {"p": doc.root.p, "N": doc.root.N}
    return out


# ---------------------------------------------------------------------------
# Polynomial text syntax ("2t^3+t", "n^2", "1/2t^2+1")
# ---------------------------------------------------------------------------

def parse_polynomial(text: str) -> PolynomialExponent:
    """Parse a one-variable polynomial with rational coefficients.

    Accepts sums of terms like ``3t^2``, ``1/2n``, ``7``; the variable letter
    is free but must be consistent.
    """
    cleaned = text.replace(" ", "")
    if not cleaned:
        raise DocumentError("empty polynomial")
    pos = 0
    var_seen: str | None = None
    coeffs: dict[int, Fraction] = {}
    token = re.compile(r"(?P<sign>[+-])?(?P<coef>\d+(?:/\d+)?)?(?:\*?(?P<var>[a-zA-Z])(?:\^(?P<exp>\d+))?)?")
    while pos < len(cleaned):
        m = token.match(cleaned, pos)
        if not m or m.end() == pos:
            raise DocumentError(f"cannot parse polynomial {text!r} at {cleaned[pos:]!r}")
        sign, coef, var, exp = m.group("sign", "coef", "var", "exp")
        if coef is None and var is None:
            raise DocumentError(f"cannot parse polynomial {text!r} at {cleaned[pos:]!r}")
        value = parse_rational(coef) if coef is not None else Fraction(1)
        if sign == "-":
            value = -value
        if var is not None:
            if var_seen is None:
                var_seen = var
            elif var != var_seen:
                raise DocumentError(f"mixed variables {var_seen!r} and {var!r} in {text!r}")
            power = int(exp) if exp is not None else 1
        else:
            power = 0
        coeffs[power] = coeffs.get(power, Fraction(0)) + value
        pos = m.end()
    degree = max(coeffs)
    try:
        return PolynomialExponent(
            tuple(coeffs.get(i, Fraction(0)) for i in range(degree + 1))
        )
    except SpecificationError as exc:
        raise DocumentError(f"invalid polynomial {text!r}: {exc}") from None
