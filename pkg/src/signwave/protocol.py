"""Drone-side state machine for asking a person to let it into an area.

Sequence: reach the safe-distance boundary, poke, wait for the attention
sign, fly a rectangle over the wanted area, then enter on Yes or withdraw
on No.  A timeout while waiting for attention ends in withdrawal.  A safety
trigger in any state switches the ring to all red and hovers.

:func:`step` is pure and total; pairs the table does not list keep the
state, emit nothing and are flagged as ignored.  Time is logical (one tick
per event).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .embodiment import ALL_RED, LightMode, PatternKind
from .errors import InvalidInput
from .signs import ATTENTION, NO, YES, canonical_sign


class DroneState(str, Enum):
    IDLE = "Idle"
    APPROACH = "Approach"
    POKE = "Poke"
    AWAIT_ATTENTION = "AwaitAttention"
    REQUEST_AREA = "RequestArea"
    AWAIT_DECISION = "AwaitDecision"
    ENTER = "Enter"
    WITHDRAW = "Withdraw"
    SAFETY_HOLD = "SafetyHold"


class EventKind(str, Enum):
    ARRIVED = "ArrivedAtSafeDistance"
    POKE_COMPLETE = "PokeComplete"
    SIGN_SEEN = "SignSeen"
    TIMEOUT = "Timeout"
    AREA_CLEARED = "AreaCleared"
    SAFETY_TRIGGER = "SafetyTrigger"
    RESET = "Reset"


@dataclass(frozen=True)
class ProtocolEvent:
    kind: EventKind
    sign: Optional[str] = None

    def __post_init__(self):
        if (self.kind is EventKind.SIGN_SEEN) != (self.sign is not None):
            raise InvalidInput("exactly the SignSeen event carries a sign")
        if self.sign is not None:
            object.__setattr__(self, "sign", canonical_sign(self.sign))

    def __str__(self):
        if self.kind is EventKind.SIGN_SEEN:
            return f"SignSeen({self.sign})"
        return self.kind.value


ARRIVED = ProtocolEvent(EventKind.ARRIVED)
POKE_COMPLETE = ProtocolEvent(EventKind.POKE_COMPLETE)
# the rectangle finishing is reported on the same "pattern complete" channel
PATTERN_DONE = POKE_COMPLETE
TIMEOUT = ProtocolEvent(EventKind.TIMEOUT)
AREA_CLEARED = ProtocolEvent(EventKind.AREA_CLEARED)
SAFETY_TRIGGER = ProtocolEvent(EventKind.SAFETY_TRIGGER)
RESET = ProtocolEvent(EventKind.RESET)


def sign_seen(sign: str) -> ProtocolEvent:
    return ProtocolEvent(EventKind.SIGN_SEEN, sign)


# -- actions -------------------------------------------------------------------------

@dataclass(frozen=True)
class FlyTo:
    target: str

    def __str__(self):
        return f"FlyTo({self.target})"


@dataclass(frozen=True)
class ExecutePattern:
    kind: PatternKind

    def __str__(self):
        return f"ExecutePattern({self.kind.value})"


@dataclass(frozen=True)
class SetLights:
    mode: LightMode

    def __str__(self):
        return f"SetLights({self.mode})"


@dataclass(frozen=True)
class StartTimer:
    label: str
    duration: float

    def __str__(self):
        return f"StartTimer({self.label},{self.duration:g})"


@dataclass(frozen=True)
class Hover:
    def __str__(self):
        return "Hover"


@dataclass(frozen=True)
class Abort:
    def __str__(self):
        return "Abort"


ActionCommand = Union[FlyTo, ExecutePattern, SetLights, StartTimer, Hover, Abort]


@dataclass(frozen=True)
class ProtocolConfig:
    attention_timeout: float = 10.0
    decision_timeout: float = 15.0
    max_repokes: int = 1

    def __post_init__(self):
        if self.attention_timeout <= 0 or self.decision_timeout <= 0:
            raise InvalidInput("timeouts must be positive")
        if self.max_repokes < 0:
            raise InvalidInput("max_repokes must be >= 0")


@dataclass(frozen=True)
class MachineState:
    """Current state plus the number of re-pokes already spent."""

    state: DroneState = DroneState.IDLE
    repokes: int = 0


def _poke(cfg):
    return [ExecutePattern(PatternKind.POKE), StartTimer("attention", cfg.attention_timeout)]


def step(state: Union[DroneState, MachineState], event: ProtocolEvent,
         cfg: ProtocolConfig | None = None) -> tuple[MachineState, list, bool]:
    """One transition: ``(next_state, actions, ignored)``."""
    cfg = cfg or ProtocolConfig()
    ms = state if isinstance(state, MachineState) else MachineState(DroneState(state))
    s, kind = ms.state, event.kind

    if kind is EventKind.SAFETY_TRIGGER:
        return MachineState(DroneState.SAFETY_HOLD, ms.repokes), [SetLights(ALL_RED), Hover()], False

    def go(target, actions, repokes=ms.repokes):
        return MachineState(target, repokes), actions, False

    if s is DroneState.IDLE:
        if kind is EventKind.RESET:
            return go(DroneState.IDLE, [], 0)
        if kind is EventKind.ARRIVED:
            # mission start: the approach leg has already brought us to the boundary
            return go(DroneState.POKE, _poke(cfg), 0)
    elif s is DroneState.APPROACH:
        if kind is EventKind.ARRIVED:
            return go(DroneState.POKE, _poke(cfg))
    elif s is DroneState.POKE:
        if kind is EventKind.POKE_COMPLETE:
            return go(DroneState.AWAIT_ATTENTION, [Hover()])
    elif s is DroneState.AWAIT_ATTENTION:
        if kind is EventKind.SIGN_SEEN and event.sign == ATTENTION:
            return go(DroneState.REQUEST_AREA, [ExecutePattern(PatternKind.RECTANGLE),
                                                StartTimer("decision", cfg.decision_timeout)])
        if kind is EventKind.TIMEOUT:
            return go(DroneState.WITHDRAW, [FlyTo("retreat")])
    elif s is DroneState.REQUEST_AREA:
        if kind is EventKind.POKE_COMPLETE:
            return go(DroneState.AWAIT_DECISION, [Hover()])
    elif s is DroneState.AWAIT_DECISION:
        if kind is EventKind.SIGN_SEEN and event.sign == YES:
            return go(DroneState.ENTER, [FlyTo("area")])
        if kind is EventKind.SIGN_SEEN and event.sign == NO:
            return go(DroneState.WITHDRAW, [FlyTo("retreat")])
        if kind is EventKind.TIMEOUT:
            if ms.repokes < cfg.max_repokes:
                return go(DroneState.POKE, _poke(cfg), ms.repokes + 1)
            return go(DroneState.WITHDRAW, [FlyTo("retreat")])
    elif s is DroneState.ENTER:
        if kind is EventKind.AREA_CLEARED:
            return go(DroneState.IDLE, [], 0)
    elif s in (DroneState.WITHDRAW, DroneState.SAFETY_HOLD):
        if kind is EventKind.RESET:
            return go(DroneState.IDLE, [], 0)
    return ms, [], True


# -- sessions -----------------------------------------------------------------------------

@dataclass(frozen=True)
class LogRecord:
    t: int
    previous: DroneState
    state: DroneState
    event: ProtocolEvent
    actions: tuple
    ignored: bool

    def actions_text(self) -> str:
        if self.ignored:
            return "Ignored"
        return ";".join(str(a) for a in self.actions)


@dataclass
class SessionLog:
    records: list = field(default_factory=list)
    start: DroneState = DroneState.IDLE

    def __len__(self):
        return len(self.records)

    def append(self, record: LogRecord):
        if self.records and record.t <= self.records[-1].t:
            raise InvalidInput("log timestamps must increase")
        self.records.append(record)

    @property
    def final_state(self) -> DroneState:
        return self.records[-1].state if self.records else self.start

    def visited(self) -> list:
        return [r.state for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "state", "event", "actions"])
        for r in self.records:
            writer.writerow([r.t, r.state.value, str(r.event), r.actions_text()])
        return buf.getvalue()


def run_session(script, cfg: ProtocolConfig | None = None,
                start: DroneState = DroneState.IDLE) -> SessionLog:
    cfg = cfg or ProtocolConfig()
    ms = MachineState(DroneState(start))
    log = SessionLog(start=ms.state)
    for t, event in enumerate(script, start=1):
        nxt, actions, ignored = step(ms, event, cfg)
        log.append(LogRecord(t, ms.state, nxt.state, event, tuple(actions), ignored))
        ms = nxt
    return log


# -- script format ---------------------------------------------------------------------------

_TOKENS = {
    "ARRIVED": ARRIVED,
    "ARRIVEDATSAFEDISTANCE": ARRIVED,
    "POKE_COMPLETE": POKE_COMPLETE,
    "POKECOMPLETE": POKE_COMPLETE,
    "PATTERN_DONE": PATTERN_DONE,
    "PATTERNDONE": PATTERN_DONE,
    "TIMEOUT": TIMEOUT,
    "AREA_CLEARED": AREA_CLEARED,
    "AREACLEARED": AREA_CLEARED,
    "SAFETY": SAFETY_TRIGGER,
    "SAFETY_TRIGGER": SAFETY_TRIGGER,
    "SAFETYTRIGGER": SAFETY_TRIGGER,
    "RESET": RESET,
}


def parse_event(token: str) -> ProtocolEvent:
    """Parse one ``EVENT[:ARG]`` token, e.g. ``SIGN:YES``."""
    name, _, arg = token.strip().partition(":")
    key = name.strip().upper()
    if key in ("SIGN", "SIGNSEEN", "SIGN_SEEN"):
        if not arg.strip():
            raise InvalidInput(f"{token!r}: SIGN needs an argument")
        return sign_seen(arg.strip())
    if arg:
        raise InvalidInput(f"{token!r}: {name} takes no argument")
    try:
        return _TOKENS[key]
    except KeyError:
        raise InvalidInput(f"unknown event {token!r}") from None


def parse_script(text: str) -> list:
    events = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            events.append(parse_event(line))
    return events


ALL_STATES = tuple(DroneState)
# one representative per event kind, SignSeen expanded per sign
EVENT_ALPHABET = (ARRIVED, POKE_COMPLETE, sign_seen(ATTENTION), sign_seen(YES), sign_seen(NO),
                  TIMEOUT, AREA_CLEARED, SAFETY_TRIGGER, RESET)
