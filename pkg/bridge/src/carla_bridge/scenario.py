"""Readers for the weather / scenario JSON manifests the bridge consumes.

These mirror the manifest schema emitted by the `synthkit scenario` commands;
the JSON files are the contract, so the bridge carries its own small parser
rather than importing the generator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class Weather:
    name: str
    sun_altitude_deg: float
    sun_azimuth_deg: float
    cloudiness_pct: float
    precipitation_pct: float
    precipitation_deposits_pct: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "sun_altitude_deg": self.sun_altitude_deg,
            "sun_azimuth_deg": self.sun_azimuth_deg,
            "cloudiness_pct": self.cloudiness_pct,
            "precipitation_pct": self.precipitation_pct,
            "precipitation_deposits_pct": self.precipitation_deposits_pct,
        }

    @staticmethod
    def from_dict(obj: dict) -> "Weather":
        return Weather(
            name=str(obj["name"]),
            sun_altitude_deg=float(obj["sun_altitude_deg"]),
            sun_azimuth_deg=float(obj["sun_azimuth_deg"]),
            cloudiness_pct=float(obj["cloudiness_pct"]),
            precipitation_pct=float(obj["precipitation_pct"]),
            precipitation_deposits_pct=float(obj["precipitation_deposits_pct"]),
        )


CLEAR_NOON = Weather("clear_noon", 75.0, 0.0, 10.0, 0.0, 0.0)


@dataclass(frozen=True)
class ScriptedActor:
    category: str
    spawn_offset: tuple     # (forward, left, up) metres in the ego frame
    speed_mps: float
    trigger_type: str       # "time" | "ego_distance"
    trigger_value: float
    heading_deg: float      # relative to the ego forward axis, left positive

    @staticmethod
    def from_dict(obj: dict) -> "ScriptedActor":
        return ScriptedActor(
            category=str(obj["category"]),
            spawn_offset=tuple(float(v) for v in obj["spawn_offset"]),
            speed_mps=float(obj["speed_mps"]),
            trigger_type=str(obj["trigger"]["type"]),
            trigger_value=float(obj["trigger"]["value"]),
            heading_deg=float(obj.get("heading_deg", 0.0)),
        )


@dataclass(frozen=True)
class Script:
    name: str
    weather: Weather
    actors: tuple
    duration_s: float

    @staticmethod
    def from_dict(obj: dict) -> "Script":
        return Script(
            name=str(obj["name"]),
            weather=Weather.from_dict(obj["weather"]),
            actors=tuple(ScriptedActor.from_dict(a) for a in obj["actors"]),
            duration_s=float(obj["duration_s"]),
        )


def load_script(path) -> Script:
    with open(path) as f:
        return Script.from_dict(json.load(f))


def load_weather(path) -> Weather:
    with open(path) as f:
        return Weather.from_dict(json.load(f))
