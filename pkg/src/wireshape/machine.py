"""Action programs to quantized actuator commands, and an interlocked replay.

Every action step becomes one six-phase cycle:

  (i)   STAB OPEN, CARRIAGE OPEN
  (ii)  ROLL to the step's absolute nozzle angle (relative motor steps)
  (iii) STAB CLOSE
  (iv)  CARRIAGE CLOSE beta, BEND +stroke       (empty when the step is unpinched)
  (v)   CARRIAGE OPEN, BEND -stroke, STAB OPEN
  (vi)  CARRIAGE CLOSE hold, FEED delta, CARRIAGE OPEN, HOME

Phase boundaries are kept as ``# step k phase x`` comments so the text form
stays readable and the phase order can be checked.
"""

import hashlib
import math
import re
from dataclasses import dataclass, fields, replace
from typing import Optional

from .wire import ActionProgram, ActionStep, WireSpec

PHASES = ("i", "ii", "iii", "iv", "v", "vi")

RULE_BEND = "bend-requires-stabilizer-closed"
RULE_FEED_STAB = "feed-requires-stabilizer-open"
RULE_FEED_CARRIAGE = "feed-requires-carriage-closed"
RULE_ROLL = "roll-requires-stabilizer-open"
RULES = (RULE_BEND, RULE_FEED_STAB, RULE_FEED_CARRIAGE, RULE_ROLL)

FORMAT_HEADER = "# wireshape machine program v1"


class CompileError(ValueError):
    pass


class SimulationFault(RuntimeError):
    def __init__(self, index: int, rule: str, command: "Command"):
        self.index = index
        self.rule = rule
        self.command = command
        super().__init__(f"command {index} ({command.text()}): interlock {rule}")


@dataclass(frozen=True)
class MachineLimits:
    stepper_step: float = 1.8       # deg per full step
    roll_reduction: float = 3.0     # nozzle:motor
    stage_resolution: float = 0.003  # mm per increment
    stage_travel: float = 100.0     # mm
    microstepping: int = 1
    bend_stroke: float = 0.5        # mm carriage advance while pinching
    hold_beta: float = 0.2          # jaw command while carrying the wire

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not v > 0:
                raise ValueError(f"machine limit {f.name} must be positive, got {v}")
        if int(self.microstepping) != self.microstepping:
            raise ValueError("microstepping must be an integer")
        if self.hold_beta > 1.0:
            raise ValueError("hold_beta must lie in (0, 1]")

    @property
    def roll_resolution(self) -> float:
        """Nozzle degrees per (micro)step."""
        return self.stepper_step / (self.roll_reduction * self.microstepping)


@dataclass(frozen=True)
class Command:
    op: str                 # STAB_OPEN ... HOME, or COMMENT
    arg: object = None      # int steps/increments, float beta, or comment text

    def text(self) -> str:
        if self.op == "COMMENT":
            return f"# {self.arg}" if self.arg else "#"
        word = _WORDS[self.op]
        if self.arg is None:
            return word
        return f"{word} {self.arg!r}" if isinstance(self.arg, float) else f"{word} {self.arg}"


_WORDS = {
    "STAB_OPEN": "STAB OPEN",
    "STAB_CLOSE": "STAB CLOSE",
    "CARRIAGE_OPEN": "CARRIAGE OPEN",
    "CARRIAGE_CLOSE": "CARRIAGE CLOSE",
    "ROLL": "ROLL",
    "FEED": "FEED",
    "BEND_ADVANCE": "BEND",
    "HOME": "HOME",
}
_OPS = {v: k for k, v in _WORDS.items()}
_INT_ARG = {"ROLL", "FEED", "BEND_ADVANCE"}
_FLOAT_ARG = {"CARRIAGE_CLOSE"}


@dataclass(frozen=True)
class StepResidual:
    k: int
    roll_steps: int          # absolute nozzle position in motor (micro)steps
    roll_residual: float     # commanded - achieved, degrees
    feed_increments: int
    feed_residual: float     # commanded - achieved, mm


@dataclass(frozen=True)
class MachineProgram:
    commands: tuple[Command, ...]
    limits: MachineLimits
    wire: WireSpec
    provenance: str = ""
    residuals: tuple[StepResidual, ...] = ()

    def actuator_commands(self):
        return [(i, c) for i, c in enumerate(self.commands) if c.op != "COMMENT"]


def program_digest(program: ActionProgram) -> str:
    from .formats import program_to_json
    return hashlib.sha256(program_to_json(program).encode()).hexdigest()


def compile_program(program: ActionProgram, limits: MachineLimits = MachineLimits()) -> MachineProgram:
    res = limits.roll_resolution
    stroke = round(limits.bend_stroke / limits.stage_resolution)
    if stroke * limits.stage_resolution > limits.stage_travel:
        raise CompileError(f"bend stroke {limits.bend_stroke} mm exceeds stage travel {limits.stage_travel} mm")
    cmds: list[Command] = []
    residuals = []
    position = 0  # nozzle, motor steps
    for s in program.steps:
        deg = math.degrees(s.phi)
        target = round(deg / res)
        feed = round(s.delta / limits.stage_resolution)
        if feed * limits.stage_resolution > limits.stage_travel:
            raise CompileError(f"step {s.k}: feed {s.delta} mm exceeds stage travel "
                               f"{limits.stage_travel} mm")
        if feed == 0:
            raise CompileError(f"step {s.k}: feed {s.delta} mm is below the stage resolution")
        residuals.append(StepResidual(s.k, target, deg - target * res,
                                      feed, s.delta - feed * limits.stage_resolution))

        def phase(p):
            cmds.append(Command("COMMENT", f"step {s.k} phase {p}"))

        phase("i")
        cmds += [Command("STAB_OPEN"), Command("CARRIAGE_OPEN")]
        phase("ii")
        cmds.append(Command("ROLL", target - position))
        position = target
        phase("iii")
        cmds.append(Command("STAB_CLOSE"))
        phase("iv")
        if s.pinched:
            cmds += [Command("CARRIAGE_CLOSE", float(s.beta)), Command("BEND_ADVANCE", stroke)]
        phase("v")
        cmds += [Command("CARRIAGE_OPEN")]
        if s.pinched:
            cmds.append(Command("BEND_ADVANCE", -stroke))
        cmds.append(Command("STAB_OPEN"))
        phase("vi")
        cmds += [Command("CARRIAGE_CLOSE", float(limits.hold_beta)), Command("FEED", feed),
                 Command("CARRIAGE_OPEN"), Command("HOME")]
    return MachineProgram(tuple(cmds), limits, program.wire, program_digest(program), tuple(residuals))


@dataclass(frozen=True)
class ActuatorState:
    index: int
    op: str
    nozzle_deg: float
    stabilizer: str
    carriage_mm: float
    carriage: str


@dataclass(frozen=True)
class ActuatorTrace:
    states: tuple[ActuatorState, ...]
    achieved: ActionProgram


class _Machine:
    def __init__(self, limits: MachineLimits):
        self.limits = limits
        self.nozzle = 0
        self.stab_closed = False
        self.carriage_closed = False
        self.carriage = 0
        self.jaw_beta = 0.0
        self.bend_beta: Optional[float] = None
        self.bend_nozzle: Optional[int] = None
        self.steps: list[tuple[int, float, int]] = []  # (nozzle, beta, feed)

    def violation(self, c: Command) -> Optional[str]:
        if c.op == "BEND_ADVANCE" and not self.stab_closed:
            return RULE_BEND
        if c.op == "FEED":
            if self.stab_closed:
                return RULE_FEED_STAB
            if not self.carriage_closed:
                return RULE_FEED_CARRIAGE
        if c.op == "ROLL" and self.stab_closed:
            return RULE_ROLL
        return None

    def apply(self, c: Command):
        op = c.op
        if op == "STAB_OPEN":
            self.stab_closed = False
        elif op == "STAB_CLOSE":
            self.stab_closed = True
        elif op == "CARRIAGE_OPEN":
            self.carriage_closed = False
        elif op == "CARRIAGE_CLOSE":
            self.carriage_closed = True
            self.jaw_beta = c.arg
        elif op == "ROLL":
            self.nozzle += c.arg
        elif op == "BEND_ADVANCE":
            self.carriage += c.arg
            if c.arg > 0 and self.carriage_closed:
                self.bend_beta = self.jaw_beta
                self.bend_nozzle = self.nozzle
        elif op == "FEED":
            self.carriage += c.arg
            nozzle = self.nozzle if self.bend_nozzle is None else self.bend_nozzle
            self.steps.append((nozzle, self.bend_beta or 0.0, c.arg))
            self.bend_beta = self.bend_nozzle = None
        elif op == "HOME":
            self.carriage = 0

    def snapshot(self, index: int, op: str) -> ActuatorState:
        return ActuatorState(index, op, self.nozzle * self.limits.roll_resolution,
                             "closed" if self.stab_closed else "open",
                             self.carriage * self.limits.stage_resolution,
                             "closed" if self.carriage_closed else "open")


def validate(mp: MachineProgram) -> list[tuple[int, str]]:
    """Static interlock check: every ``(command index, rule)`` violated."""
    m = _Machine(mp.limits)
    out = []
    for i, c in mp.actuator_commands():
        rule = m.violation(c)
        if rule:
            out.append((i, rule))
        m.apply(c)
    return out


def simulate(mp: MachineProgram) -> ActuatorTrace:
    m = _Machine(mp.limits)
    states = [m.snapshot(-1, "START")]
    for i, c in mp.actuator_commands():
        rule = m.violation(c)
        if rule:
            raise SimulationFault(i, rule, c)
        m.apply(c)
        states.append(m.snapshot(i, c.op))
    res = mp.limits.roll_resolution
    steps = tuple(ActionStep(k, math.radians(nozzle * res), beta, feed * mp.limits.stage_resolution)
                  for k, (nozzle, beta, feed) in enumerate(m.steps, start=1))
    wire = mp.wire
    fed = sum(s.delta for s in steps)
    if fed > wire.shapeable_length:
        # rounding every feed up can overshoot the nominal tip by < n * resolution / 2
        wire = replace(wire, shapeable_length=fed, total_length=max(wire.total_length, fed))
    return ActuatorTrace(tuple(states), ActionProgram(wire, steps))


# text format

def _kv(obj) -> str:
    return " ".join(f"{f.name}={getattr(obj, f.name)!r}" for f in fields(obj))


def print_program(mp: MachineProgram) -> str:
    lines = [FORMAT_HEADER,
             f"LIMITS {_kv(mp.limits)}",
             f"WIRE {_kv(mp.wire)}",
             f"PROVENANCE {mp.provenance or '-'}"]
    for r in mp.residuals:
        lines.append(f"RESIDUAL k={r.k} roll_steps={r.roll_steps} roll_residual={r.roll_residual!r} "
                     f"feed_increments={r.feed_increments} feed_residual={r.feed_residual!r}")
    lines += [c.text() for c in mp.commands]
    return "\n".join(lines) + "\n"


class ParseError(ValueError):
    def __init__(self, line: int, col: int, msg: str):
        self.line, self.col = line, col
        super().__init__(f"line {line}, column {col}: {msg}")


def _parse_kv(cls, text: str, lineno: int):
    kinds = {f.name: f.type for f in fields(cls)}
    out = {}
    for m in re.finditer(r"(\S+)=(\S+)", text):
        key, val = m.group(1), m.group(2)
        if key not in kinds:
            raise ParseError(lineno, m.start() + 1, f"unknown field {key!r}")
        try:
            out[key] = int(val) if kinds[key] in (int, "int") else float(val)
        except ValueError:
            raise ParseError(lineno, m.start(2) + 1, f"bad value {val!r} for {key}") from None
    try:
        return cls(**out)
    except (TypeError, ValueError) as e:
        raise ParseError(lineno, 1, str(e)) from None


def parse_program(text: str) -> MachineProgram:
    limits = wire = None
    provenance = ""
    residuals = []
    cmds = []
    lines = text.splitlines()
    if not lines or lines[0] != FORMAT_HEADER:
        raise ParseError(1, 1, f"expected header {FORMAT_HEADER!r}")
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip()
        if not line:
            raise ParseError(lineno, 1, "blank line")
        if line.startswith("#"):
            cmds.append(Command("COMMENT", line[2:] if line.startswith("# ") else line[1:]))
            continue
        head, _, rest = line.partition(" ")
        if head == "LIMITS":
            limits = _parse_kv(MachineLimits, rest, lineno)
            continue
        if head == "WIRE":
            wire = _parse_kv(WireSpec, rest, lineno)
            continue
        if head == "PROVENANCE":
            provenance = "" if rest == "-" else rest
            continue
        if head == "RESIDUAL":
            residuals.append(_parse_kv(StepResidual, rest, lineno))
            continue
        words = line.split(" ")
        op = _OPS.get(" ".join(words[:2])) or _OPS.get(words[0])
        if op is None:
            raise ParseError(lineno, 1, f"unknown command {line!r}")
        nword = len(_WORDS[op].split(" "))
        args = words[nword:]
        col = len(" ".join(words[:nword])) + 2
        if op in _INT_ARG or op in _FLOAT_ARG:
            if len(args) != 1:
                raise ParseError(lineno, col, f"{_WORDS[op]} takes one argument")
            try:
                arg = int(args[0]) if op in _INT_ARG else float(args[0])
            except ValueError:
                raise ParseError(lineno, col, f"bad argument {args[0]!r}") from None
            cmds.append(Command(op, arg))
        else:
            if args:
                raise ParseError(lineno, col, f"{_WORDS[op]} takes no argument")
            cmds.append(Command(op))
    if limits is None or wire is None:
        raise ParseError(len(lines), 1, "missing LIMITS or WIRE line")
    return MachineProgram(tuple(cmds), limits, wire, provenance, tuple(residuals))
