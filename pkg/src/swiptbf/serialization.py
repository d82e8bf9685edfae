"""JSON scenario files.

Schema (all keys at top level)::

    {
      "M": 4, "K_I": 2, "K_E": 2,
      "channels_h": [[[re, im], ...M entries], ...K_I rows],
      "channels_g": [[[re, im], ...], ...K_E rows],
      "sigma2_dbm": -50            or  "sigma2_w": 1e-8,     scalar or per-receiver list
      "gamma_db": 10               or  "gamma_linear": 10.0, scalar or per-receiver list
      "alpha": [0.5, 0.5],         optional, defaults to 1/K_E each
      "zeta": 0.5,
      "power_w": 1.0
    }

Decibel values are converted to linear units while parsing.
"""

import json
import math
import re

import numpy as np

from .errors import InputError, ScenarioParseError
from .model import Scenario, db_to_linear, dbm_to_watt

__all__ = ["load_scenario", "parse_scenario", "dump_scenario", "save_scenario", "scenario_to_dict",
           "locate_key"]

_REQUIRED = ("M", "K_I", "K_E", "channels_h", "channels_g", "zeta", "power_w")
_KNOWN = set(_REQUIRED) | {"sigma2_dbm", "sigma2_w", "gamma_db", "gamma_linear", "alpha", "comment"}


def locate_key(text, key):
    """1-based (line, column) of the first ``"key":`` in ``text``, or ``(None, None)``."""
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if not m:
        return None, None
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, text, path):
        self.text = text
        self.path = path

    def fail(self, msg, key=None):
        line, col = locate_key(self.text, key) if key else (None, None)
        raise ScenarioParseError(msg, line=line, column=col, path=self.path)

    def integer(self, doc, key, minimum):
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            self.fail(f"{key} must be an integer >= {minimum}", key)
        return v

    def number(self, v, key):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(f"{key} must contain finite numbers", key)
        return float(v)

    def vector(self, doc, key, n):
        v = doc[key]
        if isinstance(v, list):
            if len(v) != n:
                self.fail(f"{key} must have {n} entries, got {len(v)}", key)
            return np.array([self.number(x, key) for x in v])
        return np.full(n, self.number(v, key))

    def channels(self, doc, key, rows, cols):
        v = doc[key]
        if not isinstance(v, list) or len(v) != rows:
            self.fail(f"{key} must be a list of {rows} rows", key)
        out = np.zeros((rows, cols), dtype=complex)
        for r, row in enumerate(v):
            if not isinstance(row, list) or len(row) != cols:
                self.fail(f"{key}[{r}] must have {cols} complex entries", key)
            for c, z in enumerate(row):
                if not isinstance(z, list) or len(z) != 2:
                    self.fail(f"{key}[{r}][{c}] must be a [re, im] pair", key)
                out[r, c] = complex(self.number(z[0], key), self.number(z[1], key))
        return out

    def either(self, doc, db_key, lin_key, n, convert):
        has_db, has_lin = db_key in doc, lin_key in doc
        if has_db == has_lin:
            self.fail(f"give exactly one of {db_key} or {lin_key}", db_key if has_db else None)
        if has_db:
            return convert(self.vector(doc, db_key, n))
        return self.vector(doc, lin_key, n)

    def parse(self):
        try:
            doc = json.loads(self.text)
        except json.JSONDecodeError as exc:
            raise ScenarioParseError(exc.msg, line=exc.lineno, column=exc.colno, path=self.path) from None
        if not isinstance(doc, dict):
            raise ScenarioParseError("top level must be an object", line=1, column=1, path=self.path)
        for key in doc:
            if key not in _KNOWN:
                self.fail(f"unknown key {key!r}", key)
        for key in _REQUIRED:
            if key not in doc:
                raise ScenarioParseError(f"missing key {key!r}", path=self.path)
        m = self.integer(doc, "M", 1)
        k_i = self.integer(doc, "K_I", 0)
        k_e = self.integer(doc, "K_E", 0)
        h = self.channels(doc, "channels_h", k_i, m)
        g = self.channels(doc, "channels_g", k_e, m)
        sigma2 = self.either(doc, "sigma2_dbm", "sigma2_w", k_i, dbm_to_watt) if k_i else np.zeros(0)
        gamma = self.either(doc, "gamma_db", "gamma_linear", k_i, db_to_linear) if k_i else np.zeros(0)
        alpha = self.vector(doc, "alpha", k_e) if "alpha" in doc else np.full(k_e, 1.0 / max(k_e, 1))
        zeta = self.number(doc["zeta"], "zeta")
        power = self.number(doc["power_w"], "power_w")
        try:
            return Scenario(h=h.reshape(k_i, m), g=g.reshape(k_e, m), sigma2=sigma2, gamma=gamma, alpha=alpha,
                            zeta=zeta, power=power)
        except InputError as exc:
            raise ScenarioParseError(str(exc), path=self.path) from None


def parse_scenario(text, path=None):
    return _Parser(text, path).parse()


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read file: {exc.strerror}", path=str(path)) from None
    return parse_scenario(text, str(path))


def _pairs(a):
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def scenario_to_dict(s):
    return {
        "M": s.M,
        "K_I": s.K_I,
        "K_E": s.K_E,
        "channels_h": _pairs(s.h),
        "channels_g": _pairs(s.g),
        "sigma2_w": [float(x) for x in s.sigma2],
        "gamma_linear": [float(x) for x in s.gamma],
        "alpha": [float(x) for x in s.alpha],
        "zeta": s.zeta,
        "power_w": s.power,
    }


def dump_scenario(s):
    return json.dumps(scenario_to_dict(s), indent=1)


def save_scenario(s, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_scenario(s) + "\n")
