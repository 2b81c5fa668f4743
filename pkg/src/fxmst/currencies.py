"""Currency codes and the liquidity group table."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError

_CODE_RE = re.compile(r"^[A-Z]{3}$")

METALS = ("XAU", "XAG", "XPT")


class Group(str, enum.Enum):
    A_STAR = "A_STAR"
    A = "A"
    B = "B"
    C = "C"
    METAL = "METAL"
    FICTITIOUS = "FICTITIOUS"


@dataclass(frozen=True, order=True)
class CurrencyCode:
    code: str
    group: Group | None = None

    def __post_init__(self):
        if not isinstance(self.code, str) or not _CODE_RE.match(self.code):
            raise ValueError(f"currency code must be 3 uppercase ASCII letters, got {self.code!r}")

    def __str__(self):
        return self.code


def check_code(code):
    if not isinstance(code, str) or not _CODE_RE.match(code):
        raise ValueError(f"currency code must be 3 uppercase ASCII letters, got {code!r}")
    return code


class GroupTable:
    """Mapping code -> Group, read from a plain ``CODE GROUP`` text file."""

    def __init__(self, mapping=None):
        self._map = {}
        for code, group in (mapping or {}).items():
            self._map[check_code(code)] = Group(group)

    @classmethod
    def parse(cls, text):
        mapping = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ConfigError(f"group table line {lineno}: expected 'CODE GROUP', got {raw!r}")
            code, group = parts
            try:
                mapping[check_code(code)] = Group(group.upper())
            except ValueError as exc:
                raise ConfigError(f"group table line {lineno}: {exc}") from None
        return cls(mapping)

    @classmethod
    def load(cls, path):
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls):
        text = resources.files("fxmst").joinpath("data/groups.txt").read_text(encoding="utf-8")
        return cls.parse(text)

    def get(self, code, default=None):
        return self._map.get(code, default)

    def __getitem__(self, code):
        return self._map[code]

    def __contains__(self, code):
        return code in self._map

    def __len__(self):
        return len(self._map)

    def items(self):
        return self._map.items()

    def members(self, group):
        group = Group(group)
        return [c for c, g in self._map.items() if g is group]

    def currency(self, code):
        return CurrencyCode(code, self._map.get(code))

    def dumps(self):
        return "".join(f"{code} {group.value}\n" for code, group in self._map.items())
