"""Parser and printer for ``.qnd`` experiment plans.

A plan is a flat list of statements, one per line::

    # characterize the D+ input
    signal D+
    meter dprime
    eta 1/3
    balanced_loss off
    run
    output json out.json

Statements: ``signal NAME|state(a, b)``, ``meter dprime|d(eta)|state(a, b)``,
``eta x``, ``balanced_loss on|off``, exactly one action out of ``run``,
``table``, ``densmat`` and ``sweep alpha LO .. HI steps N``, and any number of
``output csv|json PATH``. Numbers may be written as fractions (``1/3``) and are
kept exact until converted to a circuit configuration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

SIGNAL_NAMES = ("H", "V", "D+", "D-", "R+", "R-")
ACTIONS = ("run", "table", "densmat", "sweep")
KEYWORDS = ("signal", "meter", "eta", "balanced_loss", "output") + ACTIONS
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    message: str
    expected: tuple[str, ...] = ()

    def render(self, source: str | None = None) -> str:
        text = f"{self.line}:{self.column}: {self.message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        if source is not None:
            lines = source.split("\n")
            if self.line <= len(lines):
                src = lines[self.line - 1].rstrip("\r")
                text += f"\n    {src}\n    {' ' * (self.column - 1)}^"
        return text


class PlanError(ValueError):
    """A plan failed to parse or validate; ``errors`` holds every problem found."""

    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        super().__init__("; ".join(e.render() for e in errors))


@dataclass(frozen=True)
class NamedInput:
    name: str


@dataclass(frozen=True)
class StateSpec:
    h: Fraction
    v: Fraction


@dataclass(frozen=True)
class DPrime:
    pass


@dataclass(frozen=True)
class DEta:
    eta: Fraction


@dataclass(frozen=True)
class Sweep:
    lo: Fraction
    hi: Fraction
    steps: int


SignalSpec = Union[NamedInput, StateSpec]
MeterSpec = Union[DPrime, DEta, StateSpec]
Action = Union[str, Sweep]


@dataclass(frozen=True)
class ExperimentPlan:
    action: Action
    signal: SignalSpec | None = None
    meter: MeterSpec | None = None
    eta: Fraction = Fraction(1, 3)
    balanced_loss: bool = False
    outputs: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    @property
    def action_name(self) -> str:
        return "sweep" if isinstance(self.action, Sweep) else self.action


# --- lexing ---------------------------------------------------------------

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d+)?|\.\d+)(?:[eE][+-]?\d{1,3})?(?:/\d+)?")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*[+-]?")


@dataclass
class _Tok:
    kind: str  # word, num, punct, path, end
    text: str
    offset: int


def _lex(line: str, base: int) -> tuple[list[_Tok], int | None]:
    """Tokenize one line. Returns tokens and the offset of an unlexable char, if any."""
    toks = []
    i = 0
    while i < len(line):
        if len(toks) == 2 and toks[0].text == "output":
            # output paths are taken verbatim up to a comment
            rest = line[i:].split("#", 1)[0].strip()
            if rest:
                toks.append(_Tok("path", rest, base + i + (len(line[i:]) - len(line[i:].lstrip()))))
            break
        ch = line[i]
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#":
            break
        if line.startswith("..", i):
            toks.append(_Tok("punct", "..", base + i))
            i += 2
            continue
        if ch in "(),":
            toks.append(_Tok("punct", ch, base + i))
            i += 1
            continue
        m = _NUMBER.match(line, i)
        if m:
            toks.append(_Tok("num", m.group(), base + i))
            i = m.end()
            continue
        m = _WORD.match(line, i)
        if m:
            toks.append(_Tok("word", m.group(), base + i))
            i = m.end()
            continue
        return toks, base + i
    return toks, None


class _Fail(Exception):
    def __init__(self, offset: int, message: str, expected=()):
        self.offset = offset
        self.message = message
        self.expected = tuple(expected)


class _Line:
    def __init__(self, toks: list[_Tok], end: int):
        self.toks = toks
        self.pos = 0
        self.end = end

    def peek(self) -> _Tok:
        if self.pos < len(self.toks):
            return self.toks[self.pos]
        return _Tok("end", "", self.end)

    def next(self) -> _Tok:
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text:
            raise _Fail(tok.offset, f"expected {text!r}, found {_describe(tok)}", [text])
        return tok

    def number(self) -> Fraction:
        tok = self.next()
        if tok.kind != "num":
            raise _Fail(tok.offset, f"expected a number, found {_describe(tok)}", ["number"])
        try:
            return Fraction(tok.text)
        except (ValueError, ZeroDivisionError):
            raise _Fail(tok.offset, f"malformed number {tok.text!r}", ["number"]) from None

    def integer(self) -> int:
        tok = self.peek()
        value = self.number()
        if value.denominator != 1:
            raise _Fail(tok.offset, f"expected an integer, found {tok.text!r}", ["integer"])
        return int(value)

    def choice(self, options) -> _Tok:
        tok = self.next()
        if tok.text not in options:
            raise _Fail(tok.offset, f"unexpected {_describe(tok)}", options)
        return tok

    def done(self):
        tok = self.peek()
        if tok.kind != "end":
            raise _Fail(tok.offset, f"unexpected trailing {_describe(tok)}", ["end of line"])


def _describe(tok: _Tok) -> str:
    return "end of line" if tok.kind == "end" else repr(tok.text)


def _pair(ln: _Line) -> StateSpec:
    ln.expect("(")
    h = ln.number()
    ln.expect(",")
    v = ln.number()
    ln.expect(")")
    return StateSpec(h, v)


# --- parsing --------------------------------------------------------------


def _position(source: str, offset: int) -> tuple[int, int]:
    """1-based (line, column) of ``offset``, clamped onto a real character."""
    if not source:
        return 1, 1
    offset = max(0, min(offset, len(source) - 1))
    line = source.count("\n", 0, offset) + 1
    start = source.rfind("\n", 0, offset) + 1
    return line, offset - start + 1


def parse(source: str) -> ExperimentPlan:
    """Parse and validate a plan. Raises :class:`PlanError` listing every problem."""
    errors: list[tuple[int, str, tuple[str, ...]]] = []
    seen: dict[str, int] = {}
    fields: dict = {"outputs": []}
    action = None
    action_offset = 0
    action_written = False

    offset = 0
    for raw in source.split("\n"):
        base = offset
        offset += len(raw) + 1
        toks, bad = _lex(raw, base)
        if bad is not None:
            errors.append((bad, f"unexpected character {source[bad]!r}", ()))
            continue
        if not toks:
            continue
        last = toks[-1]
        ln = _Line(toks, last.offset + len(last.text))
        head = ln.next()
        action_written = action_written or head.text in ACTIONS
        try:
            if head.text not in KEYWORDS:
                raise _Fail(head.offset, f"unknown keyword {head.text!r}", KEYWORDS)
            kw = head.text
            stanza = "action" if kw in ACTIONS else kw
            if stanza != "output" and stanza in seen:
                what = "second action" if stanza == "action" else f"duplicate {kw!r} statement"
                raise _Fail(head.offset, f"{what}; first given on line {seen[stanza]}")
            value = _statement(kw, ln)
            ln.done()
        except _Fail as exc:
            errors.append((exc.offset, exc.message, exc.expected))
            continue
        seen.setdefault(stanza, _position(source, head.offset)[0])
        if stanza == "action":
            action, action_offset = value, head.offset
        elif kw == "output":
            fields["outputs"].append(value)
        else:
            fields[kw] = value

    if not action_written:
        errors.append((len(source) - 1, "plan has no action", ACTIONS))

    if not errors:
        plan = ExperimentPlan(action=action, **{**fields, "outputs": tuple(fields["outputs"])})
        for message in _validate(plan):
            errors.append((action_offset, message, ()))
        if not errors:
            return plan

    raise PlanError(
        [ParseError(*_position(source, off), msg, exp) for off, msg, exp in errors]
    )


def _statement(kw: str, ln: _Line):
    if kw == "signal":
        tok = ln.peek()
        if tok.text == "state":
            ln.next()
            return _pair(ln)
        tok = ln.next()
        if tok.text not in SIGNAL_NAMES:
            raise _Fail(tok.offset, f"unknown signal {_describe(tok)}", SIGNAL_NAMES + ("state(",))
        return NamedInput(tok.text)
    if kw == "meter":
        tok = ln.choice(("dprime", "d", "state"))
        if tok.text == "dprime":
            return DPrime()
        if tok.text == "d":
            ln.expect("(")
            eta = ln.number()
            ln.expect(")")
            return DEta(eta)
        return _pair(ln)
    if kw == "eta":
        return ln.number()
    if kw == "balanced_loss":
        return ln.choice(("on", "off")).text == "on"
    if kw == "sweep":
        ln.expect("alpha")
        lo = ln.number()
        ln.expect("..")
        hi = ln.number()
        ln.expect("steps")
        return Sweep(lo, hi, ln.integer())
    if kw == "output":
        fmt = ln.choice(FORMATS).text
        tok = ln.peek()
        if tok.kind == "end":
            raise _Fail(tok.offset, "missing output path", ["path"])
        return (fmt, ln.next().text)
    return kw


def _validate(plan: ExperimentPlan) -> list[str]:
    problems = []
    if not 0 <= plan.eta <= 1:
        problems.append(f"eta {format_number(plan.eta)} outside [0, 1]")
    if isinstance(plan.meter, DEta) and not 0 <= plan.meter.eta <= 1:
        problems.append(f"meter d({format_number(plan.meter.eta)}) outside [0, 1]")
    for spec in (plan.signal, plan.meter):
        if isinstance(spec, StateSpec) and spec.h == 0 and spec.v == 0:
            problems.append("state(0, 0) is not a polarization state")
    if isinstance(plan.action, Sweep):
        sw = plan.action
        if not plan.balanced_loss:
            problems.append(
                "sweep requires 'balanced_loss on': the 2/3 loss on s_V balances the "
                "statistics for weak measurement"
            )
        if not 0 <= sw.lo <= sw.hi <= 1:
            problems.append("sweep range must satisfy 0 <= LO <= HI <= 1")
        if sw.steps < 2:
            problems.append("sweep needs at least 2 steps")
    if plan.action == "run" and plan.signal is None:
        problems.append("'run' needs a 'signal' statement")
    return problems


# --- printing -------------------------------------------------------------


def format_number(x: Fraction) -> str:
    """Exact canonical text: integers and terminating decimals as decimals, else ``p/q``."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    places = max(twos, fives)
    scaled = abs(x.numerator) * 10**places // x.denominator
    digits = str(scaled).rjust(places + 1, "0")
    sign = "-" if x < 0 else ""
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def _state_text(spec: StateSpec) -> str:
    return f"state({format_number(spec.h)},{format_number(spec.v)})"


def print_plan(plan: ExperimentPlan) -> str:
    """Canonical text of a plan; comments and formatting choices are not preserved."""
    lines = []
    if isinstance(plan.signal, NamedInput):
        lines.append(f"signal {plan.signal.name}")
    elif isinstance(plan.signal, StateSpec):
        lines.append(f"signal {_state_text(plan.signal)}")
    if isinstance(plan.meter, DPrime):
        lines.append("meter dprime")
    elif isinstance(plan.meter, DEta):
        lines.append(f"meter d({format_number(plan.meter.eta)})")
    elif isinstance(plan.meter, StateSpec):
        lines.append(f"meter {_state_text(plan.meter)}")
    lines.append(f"eta {format_number(plan.eta)}")
    lines.append(f"balanced_loss {'on' if plan.balanced_loss else 'off'}")
    if isinstance(plan.action, Sweep):
        sw = plan.action
        lines.append(f"sweep alpha {format_number(sw.lo)} .. {format_number(sw.hi)} steps {sw.steps}")
    else:
        lines.append(plan.action)
    for fmt, path in plan.outputs:
        lines.append(f"output {fmt} {path}")
    return "\n".join(lines) + "\n"
