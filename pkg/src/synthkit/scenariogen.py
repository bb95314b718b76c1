"""Weather specifications and accident scenario scripts.

Outputs are JSON manifests consumed by the simulator bridge. Preset
parameter values are plausible defaults, not normative, and every field is
overridable.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass

from .errors import RangeError


@dataclass(frozen=True)
class WeatherSpec:
    name: str
    sun_altitude_deg: float = 75.0
    sun_azimuth_deg: float = 0.0
    cloudiness_pct: float = 0.0
    precipitation_pct: float = 0.0
    precipitation_deposits_pct: float = 0.0

    def validate(self) -> "WeatherSpec":
        if not -90.0 <= self.sun_altitude_deg <= 90.0:
            raise RangeError(f"sun_altitude_deg {self.sun_altitude_deg} outside [-90, 90]")
        if not 0.0 <= self.sun_azimuth_deg < 360.0:
            raise RangeError(f"sun_azimuth_deg {self.sun_azimuth_deg} outside [0, 360)")
        for name in ("cloudiness_pct", "precipitation_pct", "precipitation_deposits_pct"):
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise RangeError(f"{name} {value} outside [0, 100]")
        return self

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
    def from_dict(obj: dict) -> "WeatherSpec":
        return WeatherSpec(
            name=obj["name"],
            sun_altitude_deg=float(obj["sun_altitude_deg"]),
            sun_azimuth_deg=float(obj["sun_azimuth_deg"]),
            cloudiness_pct=float(obj["cloudiness_pct"]),
            precipitation_pct=float(obj["precipitation_pct"]),
            precipitation_deposits_pct=float(obj["precipitation_deposits_pct"]),
        ).validate()


@dataclass(frozen=True)
class Trigger:
    type: str      # "time" | "ego_distance"
    value: float


@dataclass(frozen=True)
class ActorSpec:
    category: str                  # Car | Pedestrian | ...
    spawn_offset: tuple            # (forward, left, up) meters, ego frame
    speed_mps: float
    trigger: Trigger
    heading_deg: float = 0.0       # relative to the ego forward axis

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "spawn_offset": list(self.spawn_offset),
            "speed_mps": self.speed_mps,
            "trigger": {"type": self.trigger.type, "value": self.trigger.value},
            "heading_deg": self.heading_deg,
        }

    @staticmethod
    def from_dict(obj: dict) -> "ActorSpec":
        return ActorSpec(
            category=obj["category"],
            spawn_offset=tuple(float(v) for v in obj["spawn_offset"]),
            speed_mps=float(obj["speed_mps"]),
            trigger=Trigger(obj["trigger"]["type"], float(obj["trigger"]["value"])),
            heading_deg=float(obj.get("heading_deg", 0.0)),
        )


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    weather: WeatherSpec
    actors: tuple
    duration_s: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "weather": self.weather.to_dict(),
            "actors": [a.to_dict() for a in self.actors],
            "duration_s": self.duration_s,
        }

    @staticmethod
    def from_dict(obj: dict) -> "ScenarioScript":
        return ScenarioScript(
            name=obj["name"],
            weather=WeatherSpec.from_dict(obj["weather"]),
            actors=tuple(ActorSpec.from_dict(a) for a in obj["actors"]),
            duration_s=float(obj["duration_s"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "ScenarioScript":
        return ScenarioScript.from_dict(json.loads(text))


PRESET_NAMES = (
    "clear_noon",
    "cloudy_sunset",
    "light_rain",
    "hard_rain",
    "after_rain_cloudy_sunset",
    "after_rain_clear_noon",
)


def weather_presets() -> list:
    """The six named weather conditions; parameter values are defaults."""
    return [
        WeatherSpec("clear_noon", sun_altitude_deg=75.0, cloudiness_pct=10.0),
        WeatherSpec("cloudy_sunset", sun_altitude_deg=10.0, sun_azimuth_deg=270.0,
                    cloudiness_pct=80.0),
        WeatherSpec("light_rain", sun_altitude_deg=45.0, cloudiness_pct=60.0,
                    precipitation_pct=30.0, precipitation_deposits_pct=30.0),
        WeatherSpec("hard_rain", sun_altitude_deg=30.0, cloudiness_pct=90.0,
                    precipitation_pct=90.0, precipitation_deposits_pct=80.0),
        WeatherSpec("after_rain_cloudy_sunset", sun_altitude_deg=10.0, sun_azimuth_deg=270.0,
                    cloudiness_pct=80.0, precipitation_deposits_pct=60.0),
        WeatherSpec("after_rain_clear_noon", sun_altitude_deg=75.0, cloudiness_pct=10.0,
                    precipitation_deposits_pct=50.0),
    ]


_SWEEP_FIELDS = (
    "sun_altitude_deg",
    "sun_azimuth_deg",
    "cloudiness_pct",
    "precipitation_pct",
    "precipitation_deposits_pct",
)


def weather_sweep(axes: dict) -> list:
    """Cartesian product over per-parameter value lists, lexicographic order."""
    for key, values in axes.items():
        if key not in _SWEEP_FIELDS:
            raise RangeError(f"unknown weather parameter {key!r}")
        if not values:
            raise RangeError(f"axis {key!r} is empty")
    names = sorted(axes)
    specs = []
    for combo in itertools.product(*(axes[n] for n in names)):
        fields = dict(zip(names, (float(v) for v in combo)))
        name = "sweep_" + "_".join(f"{n}={v:g}" for n, v in fields.items())
        specs.append(WeatherSpec(name=name, **fields).validate())
    return specs


ACCIDENT_TEMPLATES = ("cut_in", "night_occluded_crossing")


def make_accident(template: str, params: dict | None = None, seed: int = 0) -> ScenarioScript:
    """Instantiate one of the two accident scenario templates.

    cut_in: a car beside the ego cuts across the ego lane once the ego has
    driven a trigger distance. night_occluded_crossing: a pedestrian (or car)
    spawned behind an occluder crosses the road at night.
    Spawn offsets carry a small seeded jitter.
    """
    params = dict(params or {})
    rng = random.Random(seed)
    if template == "cut_in":
        lateral = float(params.pop("lateral_offset_m", 3.5))
        ahead = float(params.pop("ahead_offset_m", 5.0))
        trigger_distance = float(params.pop("trigger_distance_m", 20.0))
        speed = float(params.pop("relative_speed_mps", 8.0))
        duration = float(params.pop("duration_s", 12.0))
        weather = params.pop("weather", None) or WeatherSpec("clear_noon",
                                                             sun_altitude_deg=75.0,
                                                             cloudiness_pct=10.0)
        if params:
            raise RangeError(f"unknown cut_in params: {sorted(params)}")
        if lateral == 0.0:
            raise RangeError("cut_in lateral_offset_m must be nonzero")
        if speed < 0 or duration <= 0:
            raise RangeError("cut_in speeds must be >= 0 and duration positive")
        jitter = rng.uniform(-0.3, 0.3)
        actor = ActorSpec(
            category="Car",
            spawn_offset=(ahead + jitter, lateral, 0.0),
            speed_mps=speed,
            trigger=Trigger("ego_distance", trigger_distance),
            heading_deg=-25.0 if lateral > 0 else 25.0,  # angled toward the ego lane
        )
        return ScenarioScript(name=f"cut_in_{seed}", weather=weather.validate(),
                              actors=(actor,), duration_s=duration)

    if template == "night_occluded_crossing":
        category = str(params.pop("actor_category", "Pedestrian"))
        sun_altitude = float(params.pop("sun_altitude_deg", -15.0))
        occluder_offset = float(params.pop("occluder_offset_m", 15.0))
        lateral = float(params.pop("lateral_offset_m", 4.0))
        speed = float(params.pop("crossing_speed_mps", 1.5))
        trigger_time = float(params.pop("trigger_time_s", 2.0))
        duration = float(params.pop("duration_s", 10.0))
        if params:
            raise RangeError(f"unknown night_occluded_crossing params: {sorted(params)}")
        if sun_altitude >= 0.0:
            raise RangeError("night scenario requires sun_altitude_deg < 0")
        if category not in ("Pedestrian", "Car"):
            raise RangeError(f"crossing actor must be Pedestrian or Car, got {category!r}")
        if speed < 0 or duration <= 0:
            raise RangeError("speeds must be >= 0 and duration positive")
        weather = WeatherSpec("night_clear", sun_altitude_deg=sun_altitude,
                              cloudiness_pct=20.0).validate()
        jitter = rng.uniform(-0.5, 0.5)
        actor = ActorSpec(
            category=category,
            spawn_offset=(occluder_offset + jitter, lateral, 0.0),
            speed_mps=speed,
            trigger=Trigger("time", trigger_time),
            heading_deg=-90.0 if lateral > 0 else 90.0,  # crossing toward the ego lane
        )
        return ScenarioScript(name=f"night_occluded_crossing_{seed}", weather=weather,
                              actors=(actor,), duration_s=duration)

    raise RangeError(f"unknown template {template!r}; choose from {ACCIDENT_TEMPLATES}")
