import json
import logging
import os
from collections import deque
from dataclasses import asdict, dataclass
from functools import reduce
from itertools import islice
from typing import Any, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from itrm.isa import (
    Copy,
    Dec,
    Halt,
    Inc,
    Instruction,
    JumpIfZero,
    OracleQuery,
    Program,
    ValidationError,
    validate,
)
from itrm.oracle import EMPTY, OracleSpec, constant_along
from itrm.ordinal import ZERO, Ordinal, add, difference, limit_jump, natural, render

logger = logging.getLogger('itrm.logger')

CONFIG_PATH = os.path.join(os.path.dirname(__file__), 'config.toml')

Shifts = tuple[tuple[int, ...], ...]


def load_config(file_path: str = CONFIG_PATH) -> dict[str, Any]:
    with open(file_path, 'rb') as config_f:
        return tomllib.load(config_f)


@dataclass(frozen=True)
class Configuration:
    line: int
    registers: tuple[int, ...]


@dataclass(frozen=True)
class MinProfile:
    min_registers: tuple[int, ...]
    min_line: int

    @classmethod
    def of(cls, c: Configuration) -> 'MinProfile':
        return cls(c.registers, c.line)

    def merge(self, other: 'MinProfile') -> 'MinProfile':
        return MinProfile(
            tuple(map(min, self.min_registers, other.min_registers)),
            min(self.min_line, other.min_line),
        )


@dataclass
class Snapshot:
    """A configuration reached at `at`; `since` holds the minima from `at` up to the next
    snapshot of the same level (or to the current time while it is the latest one)."""

    at: Ordinal
    config: Configuration
    since: MinProfile


@dataclass(frozen=True)
class Halted:
    output: int
    time: Ordinal

    def __str__(self) -> str:
        return f'Halted output={self.output} time={render(self.time)}'


@dataclass(frozen=True)
class Certificate:
    level: int
    t1: Ordinal
    t2: Ordinal


@dataclass(frozen=True)
class NonHalting:
    certificate: Certificate

    def __str__(self) -> str:
        c = self.certificate
        return f'NonHalting level={c.level} t1={render(c.t1)} t2={render(c.t2)}'


@dataclass(frozen=True)
class Exhausted:
    steps_used: int
    deepest_level: int

    def __str__(self) -> str:
        return f'Exhausted steps={self.steps_used} level={self.deepest_level}'


@dataclass(frozen=True)
class Undefined:
    time: Ordinal
    registers: tuple[int, ...]

    def __str__(self) -> str:
        registers = ','.join(f'r{r}' for r in self.registers)
        return f'Undefined time={render(self.time)} registers={registers}'


RunOutcome = Halted | NonHalting | Exhausted | Undefined


@dataclass(frozen=True)
class Budgets:
    successor_steps: int = 100000
    max_level: int = 3


@dataclass(frozen=True)
class Lasso:
    i: int
    j: int
    t1: Ordinal
    t2: Ordinal
    kind: str  # 'exact' or 'drift'
    shifts: Shifts | None = None


class Trace:
    """Line-delimited JSON records {time, line, registers, event}."""

    def __init__(self, step_cap: int = 1000):
        self.records: list[dict[str, Any]] = []
        self.step_cap = step_cap
        self.steps = 0

    def wants_step(self) -> bool:
        return self.steps < self.step_cap

    def add(self, time: Ordinal, c: Configuration, event: str):
        if event == 'step':
            if not self.wants_step():
                return
            self.steps += 1
        self.records.append(
            {'time': render(time), 'line': c.line, 'registers': list(c.registers), 'event': event}
        )

    def lines(self) -> list[str]:
        return [json.dumps(record) for record in self.records]

    def write(self, file_path: str):
        with open(file_path, 'w') as trace_f:
            trace_f.writelines(line + '\n' for line in self.lines())


def halted(p: Program, c: Configuration) -> bool:
    return c.line >= len(p.lines) or isinstance(p.lines[c.line], Halt)


def _execute(instruction: Instruction, line: int, registers: list[int], o: OracleSpec) -> int:
    match instruction:
        case Inc(r):
            registers[r] += 1
        case Dec(r):
            if registers[r]:
                registers[r] -= 1
        case Copy(src, dst):
            registers[dst] = registers[src]
        case JumpIfZero(r, target):
            if not registers[r]:
                return target
        case OracleQuery(r):
            registers[r] = o.bit(registers[r])
        case Halt():
            return line
    return line + 1


def step(p: Program, c: Configuration, o: OracleSpec = EMPTY) -> Configuration:
    registers = list(c.registers)
    line = _execute(p.lines[c.line], c.line, registers, o)
    return Configuration(line, tuple(registers))


def loop_heads(p: Program) -> frozenset[int]:
    """Targets of backward jumps; every cycle of control passes through one."""
    return frozenset(
        ins.target
        for k, ins in enumerate(p.lines)
        if isinstance(ins, JumpIfZero) and ins.target <= k
    )


def limit_config(
    span: Sequence[MinProfile | Configuration], shifts: Shifts | None = None
) -> Configuration:
    """Liminf of one period repeated forever.

    A register shifted at every position of the period grows without bound and becomes 0;
    otherwise it takes its minimum over the positions where it does not drift.
    """
    profiles = [s if isinstance(s, MinProfile) else MinProfile.of(s) for s in span]
    registers = []
    for r in range(len(profiles[0].min_registers)):
        bounded = [
            profile.min_registers[r]
            for k, profile in enumerate(profiles)
            if shifts is None or not shifts[k][r]
        ]
        registers.append(min(bounded, default=0))
    return Configuration(min(profile.min_line for profile in profiles), tuple(registers))


def unbounded_registers(shifts: Shifts) -> tuple[int, ...]:
    return tuple(r for r in range(len(shifts[0])) if all(shift[r] for shift in shifts))


def drift_shifts(
    p: Program, o: OracleSpec, span: Sequence[Configuration], end: Configuration
) -> Shifts | None:
    """Per-position shifts if replaying `span` shifted by end - span[0] takes the same path.

    The shift d = end - span[0] is pushed through the span: a shifted register may not be
    decremented from 0 or tested zero, a query on it must answer the same along the shift,
    and copies move shifts between registers. The replay is periodic iff d comes back out.
    """
    start = span[0]
    d = tuple(b - a for a, b in zip(start.registers, end.registers))
    if start.line != end.line or min(d) < 0 or not any(d):
        return None
    shift = list(d)
    shifts = []
    for c in span:
        shifts.append(tuple(shift))
        match p.lines[c.line]:
            case Dec(r) | JumpIfZero(r, _) if shift[r] and not c.registers[r]:
                return None
            case Copy(src, dst):
                shift[dst] = shift[src]
            case OracleQuery(r):
                if shift[r] and not constant_along(o, c.registers[r], (shift[r],)):
                    return None
                shift[r] = 0
    return tuple(shifts) if tuple(shift) == d else None


def _at_most(a: Configuration, b: Configuration) -> bool:
    return all(x <= y for x, y in zip(a.registers, b.registers))


def detect_lasso(
    history: Sequence[Snapshot],
    p: Program | None = None,
    o: OracleSpec = EMPTY,
    lookback: int = 8,
) -> Lasso | None:
    """Earliest exact repeat in `history`; with `p`, consecutive successor snapshots are also
    searched for a drift repeat."""
    seen: dict[Configuration, int] = {}
    for j, snapshot in enumerate(history):
        c = snapshot.config
        if c in seen:
            i = seen[c]
            return Lasso(i, j, history[i].at, snapshot.at, 'exact')
        if p is not None:
            candidates = [i for i in range(j - 1, -1, -1) if history[i].config.line == c.line]
            for i in candidates[:lookback]:
                if not _at_most(history[i].config, c):
                    continue
                span = [h.config for h in history[i:j]]
                shifts = drift_shifts(p, o, span, c)
                if shifts:
                    return Lasso(i, j, history[i].at, snapshot.at, 'drift', shifts)
        seen[c] = j
    return None


class Engine:
    successor_steps: int
    max_level: int
    window: int
    trace_steps: int
    drift_lookback: int
    limit_rule: str

    def __init__(self, config: dict[str, Any] | None = None):
        for option, value in (load_config() if config is None else config).items():
            setattr(self, option, value)

    def run(self, p: Program, o: OracleSpec, input: int) -> tuple[RunOutcome, Trace]:
        diagnostics = validate(p)
        if diagnostics:
            raise ValidationError(diagnostics)
        if self.successor_steps < 1 or self.max_level < 1:
            raise ValueError('successor_steps and max_level must be positive')
        if input < 0:
            raise ValueError(f'input {input} is negative')
        run = _Run(self, p, o, input)
        return run.execute(), run.trace


class _Run:
    def __init__(self, engine: Engine, p: Program, o: OracleSpec, input: int):
        self.engine, self.p, self.o = engine, p, o
        self.heads = loop_heads(p)
        self.trace = Trace(engine.trace_steps)
        self.steps_used = self.deepest = 0
        top = engine.max_level

        registers = [0] * max(p.register_count, 2)
        registers[1] = input
        self.start = Configuration(0, tuple(registers))

        # levels 1..top; index 0 unused, level 0 lives in the segment fields below
        self.levels: list[list[Snapshot]] = [[] for _ in range(top + 1)]
        self.bases = [0] * (top + 1)
        self.index: list[dict[Configuration, int]] = [{} for _ in range(top + 1)]
        self.pending: list[MinProfile | None] = [None] * (top + 1)

    def time(self, n: int) -> Ordinal:
        return add(self.seg_start, natural(n)) if n else self.seg_start

    def begin_segment(self, at: Ordinal, c: Configuration, below: int):
        """Restart levels 0..below-1 at (at, c) and account c in every open interval."""
        self.seg_start, self.n = at, 0
        self.seg: deque[Configuration] = deque([c], maxlen=self.engine.window)
        self.seg_index = {c: 0} if c.line in self.heads else {}
        self.seg_heads = deque([(0, c)] if c.line in self.heads else [])
        self.seg_lines: dict[int, deque[int]] = {}
        if c.line in self.heads:
            self.seg_lines[c.line] = deque([0], maxlen=self.engine.drift_lookback)
        for level in range(1, below):
            self.levels[level] = [Snapshot(at, c, MinProfile.of(c))]
            self.bases[level] = 0
            self.index[level] = {c: 0}
            self.pending[level] = None
        self.seg_min = MinProfile.of(c)
        self.close_segment()

    def execute(self) -> RunOutcome:
        c = self.start
        self.begin_segment(ZERO, c, len(self.levels))
        if halted(self.p, c):
            self.trace.add(ZERO, c, 'halt')
            return Halted(c.registers[1], ZERO)
        self.trace.add(ZERO, c, 'step')

        lines, o = self.p.lines, self.o
        while self.steps_used < self.engine.successor_steps:
            registers = list(c.registers)
            line = _execute(lines[c.line], c.line, registers, o)
            c = Configuration(line, tuple(registers))
            self.steps_used += 1
            self.n += 1
            if halted(self.p, c):
                self.trace.add(self.time(self.n), c, 'halt')
                logger.info(f'halted at {render(self.time(self.n))}')
                return Halted(c.registers[1], self.time(self.n))
            if self.trace.wants_step():
                self.trace.add(self.time(self.n), c, 'step')
            self.seg.append(c)
            self.seg_min = self.seg_min.merge(MinProfile.of(c))
            if line in self.heads:
                outcome = self.successor_lasso(c)
                if outcome is not None:
                    if not isinstance(outcome, Configuration):
                        return outcome
                    c = outcome
        return Exhausted(self.steps_used, self.deepest)

    def successor_lasso(self, c: Configuration) -> RunOutcome | Configuration | None:
        n, base = self.n, self.n + 1 - len(self.seg)
        # head configurations that left the window
        while self.seg_heads and self.seg_heads[0][0] < base:
            k, old = self.seg_heads.popleft()
            if self.seg_index.get(old) == k:
                del self.seg_index[old]
        i = self.seg_index.get(c)
        shifts = None
        if i is None:
            for k in reversed(self.seg_lines.get(c.line, ())):
                if k < base or not _at_most(self.seg[k - base], c):
                    continue
                span = list(islice(self.seg, k - base, n - base))
                shifts = drift_shifts(self.p, self.o, span, c)
                if shifts:
                    i = k
                    break
        if i is None:
            self.seg_index[c] = n
            self.seg_heads.append((n, c))
            lookback = self.engine.drift_lookback
            self.seg_lines.setdefault(c.line, deque(maxlen=lookback)).append(n)
            return None

        span = list(islice(self.seg, i - base, n - base))
        t1, t2 = self.time(i), self.time(n)
        logger.debug(
            f'{"drift" if shifts else "exact"} lasso at level 0 from {render(t1)} to {render(t2)}'
        )
        if shifts is None:
            merged = reduce(MinProfile.merge, map(MinProfile.of, span))
            if merged == MinProfile.of(span[0]):
                return self.certify(0, t1, t2, span[0])
        at = limit_jump(t1, difference(t1, t2))
        if shifts and self.engine.limit_rule == 'weak':
            drifting = unbounded_registers(shifts)
            if drifting:
                self.trace.add(at, limit_config(span, shifts), 'limit')
                logger.info(f'unbounded registers {drifting} at {render(at)}')
                return Undefined(at, drifting)
        self.close_segment()
        return self.limit(1, at, limit_config(span, shifts))

    def close_segment(self):
        for level in range(1, len(self.levels)):
            pending = self.pending[level]
            self.pending[level] = self.seg_min if pending is None else pending.merge(self.seg_min)

    def certify(self, level: int, t1: Ordinal, t2: Ordinal, c: Configuration) -> NonHalting:
        self.trace.add(limit_jump(t1, difference(t1, t2)), c, 'certificate')
        logger.info(f'non-halting: level {level} loop from {render(t1)} to {render(t2)}')
        return NonHalting(Certificate(level, t1, t2))

    def limit(self, level: int, at: Ordinal, c: Configuration) -> RunOutcome | Configuration:
        """Enter the limit `at` of the given level with configuration c, cascading upwards while
        the limits themselves repeat."""
        while True:
            self.deepest = max(self.deepest, level)
            if halted(self.p, c):
                self.trace.add(at, c, 'halt')
                logger.info(f'halted at limit {render(at)}')
                return Halted(c.registers[1], at)
            self.trace.add(at, c, 'limit')
            logger.info(f'level {level} limit {render(at)}')

            history, base = self.levels[level], self.bases[level]
            pending = self.pending[level]
            assert pending is not None
            history[-1].since = pending
            j = base + len(history)
            i = self.index[level].get(c)
            if i is None or i < base:
                self.index[level][c] = j
                history.append(Snapshot(at, c, MinProfile.of(c)))
                if len(history) > self.engine.window:
                    history.pop(0)
                    self.bases[level] += 1
                self.pending[level] = None
                self.begin_segment(at, c, level)
                return c

            period = history[i - base :]
            t1 = period[0].at
            logger.debug(f'exact lasso at level {level} from {render(t1)} to {render(at)}')
            merged = reduce(MinProfile.merge, (s.since for s in period))
            if merged == MinProfile.of(period[0].config):
                return self.certify(level, t1, at, period[0].config)
            if level == len(self.levels) - 1:
                return Exhausted(self.steps_used, self.deepest)
            at = limit_jump(t1, difference(t1, at))
            c = limit_config([s.since for s in period])
            level += 1


def run(
    p: Program,
    o: OracleSpec,
    input: int,
    budgets: Budgets | None = None,
    **options: Any,
) -> tuple[RunOutcome, Trace]:
    config = load_config() | asdict(budgets or Budgets()) | options
    return Engine(config).run(p, o, input)


def classify_halting(
    p: Program,
    o: OracleSpec,
    inputs: Sequence[int],
    budgets: Budgets | None = None,
    **options: Any,
) -> list[RunOutcome]:
    engine = Engine(load_config() | asdict(budgets or Budgets()) | options)
    return [engine.run(p, o, i)[0] for i in inputs]
