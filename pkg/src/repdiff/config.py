"""Flat ``key = value`` text configuration with line-numbered errors."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Malformed or missing configuration entry."""


@dataclass
class KeyValueConfig:
    """Parsed key-value pairs with the line each key came from."""

    values: dict[str, str] = field(default_factory=dict)
    lines: dict[str, int] = field(default_factory=dict)
    source: str = "<string>"
    used: dict = field(default_factory=dict)
    prefix: str = ""
    root: "KeyValueConfig | None" = field(default=None, repr=False)

    @classmethod
    def parse(cls, text: str, source: str = "<string>") -> "KeyValueConfig":
        cfg = cls(source=source)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ConfigError(f"{source}:{lineno}: empty key")
            if key in cfg.values:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} "
                                  f"(first set on line {cfg.lines[key]})")
            cfg.values[key] = value
            cfg.lines[key] = lineno
        return cfg

    @classmethod
    def load(cls, path) -> "KeyValueConfig":
        path = Path(path)
        return cls.parse(path.read_text(), source=str(path))

    def __contains__(self, key):
        return key in self.values

    def _note(self, key, value):
        (self.root or self).used[self.prefix + key] = value
        return value

    def unused_keys(self):
        """Keys present in the text but never read."""
        root = self.root or self
        return [k for k in root.values if k not in root.used]

    def _where(self, key):
        if key in self.lines:
            return f"{self.source}:{self.lines[key]}"
        return self.source

    def get_str(self, key, default=None):
        if key not in self.values:
            if default is None:
                raise ConfigError(f"{self.source}: missing required key {key!r}")
            return self._note(key, default)
        return self._note(key, self.values[key])

    def get_float(self, key, default=None):
        if key not in self.values:
            if default is None:
                raise ConfigError(f"{self.source}: missing required key {key!r}")
            return self._note(key, float(default))
        try:
            return self._note(key, float(self.values[key]))
        except ValueError:
            raise ConfigError(f"{self._where(key)}: {key} must be a number, "
                              f"got {self.values[key]!r}") from None

    def get_int(self, key, default=None):
        if key not in self.values:
            if default is None:
                raise ConfigError(f"{self.source}: missing required key {key!r}")
            return self._note(key, int(default))
        try:
            return self._note(key, int(self.values[key]))
        except ValueError:
            raise ConfigError(f"{self._where(key)}: {key} must be an integer, "
                              f"got {self.values[key]!r}") from None

    def get_bool(self, key, default=None):
        if key not in self.values:
            if default is None:
                raise ConfigError(f"{self.source}: missing required key {key!r}")
            return self._note(key, bool(default))
        value = self.values[key].lower()
        if value in ("1", "true", "yes", "on"):
            return self._note(key, True)
        if value in ("0", "false", "no", "off"):
            return self._note(key, False)
        raise ConfigError(f"{self._where(key)}: {key} must be a boolean, got {value!r}")

    def get_floats(self, key, default=None):
        if key not in self.values:
            if default is None:
                raise ConfigError(f"{self.source}: missing required key {key!r}")
            return self._note(key, [float(v) for v in default])
        try:
            return self._note(key, [float(v) for v in self.values[key].replace(",", " ").split()])
        except ValueError:
            raise ConfigError(f"{self._where(key)}: {key} must be a list of numbers") from None

    def get_choice(self, key, choices, default=None):
        value = self.get_str(key, default)
        if value not in choices:
            raise ConfigError(f"{self._where(key)}: {key} must be one of "
                              f"{', '.join(choices)}; got {value!r}")
        return value

    def subset(self, prefix: str) -> "KeyValueConfig":
        """Entries under ``prefix.`` with the prefix stripped."""
        head = prefix + "."
        sub = KeyValueConfig(source=self.source, prefix=self.prefix + head, root=self.root or self)
        for key, value in self.values.items():
            if key.startswith(head):
                sub.values[key[len(head):]] = value
                sub.lines[key[len(head):]] = self.lines[key]
        return sub


def format_kv(items) -> str:
    """Render ``(key, value)`` pairs one per line."""
    out = []
    for key, value in items:
        if isinstance(value, float):
            value = repr(value)
        elif isinstance(value, (list, tuple)):
            value = ", ".join(repr(float(v)) for v in value)
        out.append(f"{key} = {value}")
    return "\n".join(out) + "\n"
