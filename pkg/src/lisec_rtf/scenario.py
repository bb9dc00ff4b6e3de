"""Experiment descriptions: flat key=value files plus validation.

A scenario is the full recipe for one comparative experiment: the world
parameters, how many clients and attackers, which arms to run, and the seed
list.  Unknown keys are rejected so a typo cannot silently fall back to a
default.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, fields

from .config import ARMS, SimParams

_BOOL_WORDS = {"on": True, "true": True, "1": True, "yes": True,
               "off": False, "false": False, "0": False, "no": False}


class ScenarioError(ValueError):
    """Bad scenario file or inconsistent settings; message names the key."""


@dataclass
class Scenario:
    params: SimParams = field(default_factory=SimParams)
    n_clients: int = 29
    n_attackers: int = 1
    mobility: bool = False
    encrypted: bool = False
    arms: list = field(default_factory=lambda: ["baseline", "attack", "defense"])
    seeds: list = field(default_factory=lambda: list(range(10)))

    def effective_arms(self) -> list[str]:
        """Arm list with the encrypted variant substituted when requested."""
        if not self.encrypted:
            return list(self.arms)
        return ["defense_encrypted" if a == "defense" else a for a in self.arms]

    def validate(self) -> None:
        for arm in self.effective_arms():
            if arm not in ARMS:
                raise ScenarioError(f"arms: unknown arm {arm!r}")
            if ARMS[arm].attack and self.n_attackers < 1:
                raise ScenarioError(
                    f"n_attackers: arm {arm!r} requires at least one attacker")
        if self.n_clients < 1:
            raise ScenarioError("n_clients: need at least one client")
        if self.n_attackers < 0:
            raise ScenarioError("n_attackers: must be non-negative")
        if self.n_attackers > 3:
            warnings.warn(f"n_attackers={self.n_attackers} is outside the "
                          "usual 0..3 range", stacklevel=2)
        if not self.seeds:
            raise ScenarioError("seeds: need at least one seed")
        if self.params.license_width > 8 and not self.encrypted:
            raise ScenarioError(
                "license_width: licenses wider than the 8-bit reserved octet "
                "need encrypted=on (they travel in the options field)")


_PARAM_FIELDS = {f.name: f.type for f in fields(SimParams)}
_SCENARIO_KEYS = {"n_clients", "n_attackers", "mobility", "encrypted",
                  "arms", "seeds"}


def _parse_bool(key: str, raw: str) -> bool:
    try:
        return _BOOL_WORDS[raw.strip().lower()]
    except KeyError:
        raise ScenarioError(f"{key}: expected on/off, got {raw!r}") from None


def parse_seeds(raw: str) -> list[int]:
    raw = raw.strip()
    try:
        if "," in raw:
            return [int(tok) for tok in raw.split(",") if tok.strip()]
        return list(range(int(raw)))
    except ValueError:
        raise ScenarioError(f"seeds: expected a count or comma list, got {raw!r}") from None


def parse_scenario(text: str) -> Scenario:
    scenario = Scenario()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        _apply(scenario, key, raw)
    return scenario


def _apply(scenario: Scenario, key: str, raw: str) -> None:
    if key in _SCENARIO_KEYS:
        if key in ("mobility", "encrypted"):
            setattr(scenario, key, _parse_bool(key, raw))
        elif key == "arms":
            scenario.arms = [tok.strip() for tok in raw.split(",") if tok.strip()]
        elif key == "seeds":
            scenario.seeds = parse_seeds(raw)
        else:
            try:
                setattr(scenario, key, int(raw))
            except ValueError:
                raise ScenarioError(f"{key}: expected an integer, got {raw!r}") from None
        return
    if key in _PARAM_FIELDS:
        current = getattr(scenario.params, key)
        caster = int if isinstance(current, int) else float
        try:
            setattr(scenario.params, key, caster(raw))
        except ValueError:
            raise ScenarioError(
                f"{key}: expected {caster.__name__}, got {raw!r}") from None
        return
    raise ScenarioError(f"unknown key {key!r}")


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from None
    return parse_scenario(text)
