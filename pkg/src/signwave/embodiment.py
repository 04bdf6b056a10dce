"""Navigation-ring lighting and kinematic flight patterns.

The ring has ten tri-colour LEDs, slot ``i`` mounted at body bearing
``36 * i`` degrees clockwise from the nose.  In navigation mode each slot
shows the aviation sector colour for its bearing relative to the direction
of flight: green over the 110 degrees to starboard, red over the 110 degrees
to port, white aft.  Danger mode turns every slot red.

Patterns are sampled kinematic paths (no vehicle dynamics).  Positions are
metres in a local frame with ``y`` north, ``x`` east and ``z`` up; headings
are degrees clockwise from north.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInput

SLOTS = 10
SLOT_SPACING = 360.0 / SLOTS
STARBOARD_SECTOR = 110.0
PORT_SECTOR_START = 250.0
DEFAULT_DT = 0.1


class Colour(str, Enum):
    RED = "R"
    GREEN = "G"
    WHITE = "W"
    OFF = "-"


@dataclass(frozen=True)
class LedRing:
    slots: tuple

    def __post_init__(self):
        if len(self.slots) != SLOTS:
            raise InvalidInput(f"a ring has {SLOTS} slots, got {len(self.slots)}")

    def __str__(self):
        return " ".join(c.value for c in self.slots)

    @classmethod
    def parse(cls, line: str) -> "LedRing":
        return cls(tuple(Colour(tok) for tok in line.split()))

    def count(self, colour: Colour) -> int:
        return sum(c is colour for c in self.slots)


class LightKind(str, Enum):
    NAVIGATION = "Navigation"
    ALL_RED = "AllRed"
    OFF = "Off"


@dataclass(frozen=True)
class LightMode:
    kind: LightKind
    heading: float = 0.0

    def __post_init__(self):
        if self.kind is LightKind.NAVIGATION:
            if not math.isfinite(self.heading):
                raise InvalidInput("heading must be finite")
            object.__setattr__(self, "heading", float(self.heading) % 360.0)

    @classmethod
    def navigation(cls, heading: float) -> "LightMode":
        return cls(LightKind.NAVIGATION, heading)

    def __str__(self):
        if self.kind is LightKind.NAVIGATION:
            return f"Navigation({self.heading:g})"
        return self.kind.value

    @classmethod
    def parse(cls, text: str) -> "LightMode":
        text = text.strip()
        if text.startswith("Navigation(") and text.endswith(")"):
            return cls.navigation(float(text[len("Navigation("):-1]))
        return cls(LightKind(text))

    def ring(self) -> LedRing:
        if self.kind is LightKind.NAVIGATION:
            return nav_lights(self.heading)
        if self.kind is LightKind.ALL_RED:
            return danger_lights()
        return LedRing((Colour.OFF,) * SLOTS)


ALL_RED = LightMode(LightKind.ALL_RED)
LIGHTS_OFF = LightMode(LightKind.OFF)


def nav_lights(heading_deg: float) -> LedRing:
    """Sector colours for flight towards ``heading_deg`` (body frame)."""
    if not math.isfinite(heading_deg):
        raise InvalidInput(f"heading must be finite, got {heading_deg!r}")
    slots = []
    for i in range(SLOTS):
        rel = (SLOT_SPACING * i - heading_deg) % 360.0
        if rel <= STARBOARD_SECTOR:
            slots.append(Colour.GREEN)
        elif rel >= PORT_SECTOR_START:
            slots.append(Colour.RED)
        else:
            slots.append(Colour.WHITE)
    return LedRing(tuple(slots))


def danger_lights() -> LedRing:
    return LedRing((Colour.RED,) * SLOTS)


# -- flight patterns ------------------------------------------------------------

class PatternKind(str, Enum):
    TAKE_OFF = "TakeOff"
    LAND = "Land"
    CRUISE = "Cruise"
    POKE = "Poke"
    NOD_YES = "NodYes"
    TURN_NO = "TurnNo"
    RECTANGLE = "Rectangle"

    @classmethod
    def parse(cls, text: str) -> "PatternKind":
        key = text.replace("-", "").replace("_", "").lower()
        for kind in cls:
            if kind.value.lower() == key or kind.name.replace("_", "").lower() == key:
                return kind
        raise InvalidInput(f"unknown pattern {text!r}")


@dataclass(frozen=True)
class PatternParams:
    height_m: float = 5.0
    speed_mps: float = 1.0
    # (x, y, width, depth) of the requested area, metres
    area: tuple = (0.0, 0.0, 4.0, 3.0)
    # poke oscillation or nod dip; None picks the pattern's own default
    amplitude: float | None = None
    target: tuple = (0.0, 10.0)
    safe_distance_m: float = 3.0
    yaw_deg: float = 45.0
    yaw_rate_dps: float = 90.0
    dt: float = DEFAULT_DT

    def __post_init__(self):
        for name in ("height_m", "speed_mps", "safe_distance_m", "yaw_deg", "yaw_rate_dps", "dt"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidInput(f"{name} must be positive, got {value!r}")
        if self.amplitude is not None and not self.amplitude > 0:
            raise InvalidInput(f"amplitude must be positive, got {self.amplitude!r}")
        if len(self.area) != 4 or not (self.area[2] > 0 and self.area[3] > 0):
            raise InvalidInput(f"area needs positive width and depth, got {self.area!r}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    kind: PatternKind
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    lights: tuple

    def __len__(self):
        return len(self.t)

    @property
    def path_length(self) -> float:
        return float(np.sum(np.sqrt(np.diff(self.x) ** 2 + np.diff(self.y) ** 2
                                    + np.diff(self.z) ** 2)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "x", "y", "z", "light_mode"])
        for i in range(len(self.t)):
            writer.writerow([_num(self.t[i]), _num(self.x[i]), _num(self.y[i]),
                             _num(self.z[i]), str(self.lights[i])])
        return buf.getvalue()


def _num(v) -> str:
    return format(float(v), ".12g")


def _heading(dx, dy, fallback=0.0):
    if abs(dx) < 1e-12 and abs(dy) < 1e-12:
        return fallback
    return math.degrees(math.atan2(dx, dy)) % 360.0


class _Builder:
    """Accumulates samples along straight legs at a fixed speed."""

    def __init__(self, start, dt, heading=0.0):
        self.dt = dt
        self.rows = [(0.0, *start)]
        self.modes = [LightMode.navigation(heading)]
        self.heading = heading

    @property
    def here(self):
        return self.rows[-1][1:]

    def leg(self, end, speed, light=None):
        x0, y0, z0 = self.here
        x1, y1, z1 = end
        length = math.dist((x0, y0, z0), (x1, y1, z1))
        if length < 1e-12:
            return
        if abs(x1 - x0) + abs(y1 - y0) > 1e-12:
            self.heading = _heading(x1 - x0, y1 - y0, self.heading)
        mode = light or LightMode.navigation(self.heading)
        duration = length / speed
        steps = max(1, math.ceil(duration / self.dt - 1e-9))
        t0 = self.rows[-1][0]
        for k in range(1, steps + 1):
            f = k / steps
            self.rows.append((round(t0 + f * duration, 9), round(x0 + f * (x1 - x0), 9),
                              round(y0 + f * (y1 - y0), 9), round(z0 + f * (z1 - z0), 9)))
            self.modes.append(mode)

    def yaw(self, target_heading, rate):
        swing = target_heading - self.heading
        steps = max(1, math.ceil(abs(swing) / rate / self.dt - 1e-9))
        t0 = self.rows[-1][0]
        for k in range(1, steps + 1):
            f = k / steps
            self.rows.append((round(t0 + f * abs(swing) / rate, 9), *self.here))
            self.modes.append(LightMode.navigation(self.heading + f * swing))
        self.heading = target_heading

    def hold(self, seconds, light):
        t0 = self.rows[-1][0]
        self.rows.append((round(t0 + seconds, 9), *self.here))
        self.modes.append(light)

    def build(self, kind):
        arr = np.array(self.rows, dtype=np.float64)
        return Trajectory(kind, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], tuple(self.modes))


def make_pattern(kind, params: PatternParams | None = None) -> Trajectory:
    """Sample one of the seven flight patterns.

    Every trajectory starts at ``t = 0`` and has strictly increasing time.
    Only ``Land`` ends with the lights switched off.
    """
    kind = PatternKind.parse(kind) if isinstance(kind, str) else PatternKind(kind)
    p = params or PatternParams()
    h = p.height_m

    if kind is PatternKind.TAKE_OFF:
        b = _Builder((0.0, 0.0, 0.0), p.dt)
        b.leg((0.0, 0.0, h), p.speed_mps)
    elif kind is PatternKind.LAND:
        b = _Builder((0.0, 0.0, h), p.dt)
        b.leg((0.0, 0.0, 0.0), p.speed_mps)
        # rotors stop, then the ring goes dark
        b.hold(p.dt, LIGHTS_OFF)
    elif kind is PatternKind.CRUISE:
        b = _Builder((0.0, 0.0, h), p.dt, _heading(*p.target))
        b.leg((p.target[0], p.target[1], h), p.speed_mps)
    elif kind is PatternKind.POKE:
        amp = 0.3 if p.amplitude is None else p.amplitude
        tx, ty = p.target
        reach = math.hypot(tx, ty)
        if reach <= p.safe_distance_m:
            raise InvalidInput("target already inside the safe distance")
        ux, uy = tx / reach, ty / reach
        edge = reach - p.safe_distance_m
        b = _Builder((0.0, 0.0, h), p.dt, _heading(ux, uy))
        boundary = (edge * ux, edge * uy, h)
        b.leg(boundary, p.speed_mps)
        for _ in range(2):
            b.leg(((edge + amp) * ux, (edge + amp) * uy, h), p.speed_mps,
                  LightMode.navigation(b.heading))
            b.leg(boundary, p.speed_mps, LightMode.navigation(b.heading))
    elif kind is PatternKind.NOD_YES:
        amp = 0.5 if p.amplitude is None else p.amplitude
        if amp >= h:
            raise InvalidInput("nod would reach the ground")
        b = _Builder((0.0, 0.0, h), p.dt)
        for _ in range(2):
            b.leg((0.0, 0.0, h - amp), p.speed_mps, LightMode.navigation(b.heading))
            b.leg((0.0, 0.0, h), p.speed_mps, LightMode.navigation(b.heading))
    elif kind is PatternKind.TURN_NO:
        b = _Builder((0.0, 0.0, h), p.dt)
        start = b.heading
        for _ in range(2):
            b.yaw(start - p.yaw_deg, p.yaw_rate_dps)
            b.yaw(start + p.yaw_deg, p.yaw_rate_dps)
        b.yaw(start, p.yaw_rate_dps)
    else:
        x0, y0, wd, dp = p.area
        corners = [(x0 + wd, y0), (x0 + wd, y0 + dp), (x0, y0 + dp), (x0, y0)]
        b = _Builder((x0, y0, h), p.dt, _heading(wd, 0.0))
        for cx, cy in corners:
            b.leg((cx, cy, h), p.speed_mps)
    return b.build(kind)
