"""A small rank-1 constraint system builder.

Wires are allocated in evaluation order; each non-input wire carries a
closure computing its value from earlier wires, so a compiled circuit is also
its own witness generator.  On compile, wire 0 is the constant one and the
declared public wires take indices ``1..n_public`` in declaration order.
"""

from __future__ import annotations

import hashlib
import struct
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

from ..errors import DimensionMismatch
from ..primitives.field import R

ONE = 0


class LC:
    """Linear combination of wires, ``{wire_id: coeff}`` with coeffs in [1, R)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, int] | None = None):
        self.terms: dict[int, int] = {}
        if terms:
            for w, k in terms.items():
                k %= R
                if k:
                    self.terms[w] = k

    @classmethod
    def const(cls, k: int) -> "LC":
        return cls({ONE: k})

    @classmethod
    def of(cls, x: "LC | int") -> "LC":
        return x if isinstance(x, LC) else cls.const(x)

    def __add__(self, other: "LC | int") -> "LC":
        out = dict(self.terms)
        for w, k in LC.of(other).terms.items():
            v = (out.get(w, 0) + k) % R
            if v:
                out[w] = v
            else:
                out.pop(w, None)
        res = LC()
        res.terms = out
        return res

    __radd__ = __add__

    def __neg__(self) -> "LC":
        return self * -1

    def __sub__(self, other: "LC | int") -> "LC":
        return self + (-LC.of(other))

    def __rsub__(self, other: "LC | int") -> "LC":
        return LC.of(other) - self

    def __mul__(self, k: int) -> "LC":
        if isinstance(k, LC):
            raise TypeError("LC * LC is not linear; use ConstraintSystem.mul")
        return LC({w: c * k for w, c in self.terms.items()})

    __rmul__ = __mul__

    def constant_value(self) -> int | None:
        if not self.terms:
            return 0
        if set(self.terms) == {ONE}:
            return self.terms[ONE]
        return None

    def __repr__(self) -> str:
        return f"LC({self.terms})"


Value = Callable[[LC], int]
Compute = Callable[[Value], int]


@dataclass
class _Wire:
    name: str
    compute: Compute | None  # None for externally supplied inputs


class ConstraintSystem:
    def __init__(self) -> None:
        self._wires: list[_Wire] = [_Wire("one", lambda _: 1)]
        self._public: list[int] = []
        self._inputs: dict[str, int] = {}
        self.constraints: list[tuple[LC, LC, LC]] = []

    # allocation
    def input(self, name: str, *, public: bool = False) -> LC:
        if name in self._inputs:
            raise ValueError(f"duplicate input {name!r}")
        wid = self._alloc(name, None)
        self._inputs[name] = wid
        if public:
            self._public.append(wid)
        return LC({wid: 1})

    def witness(self, name: str, compute: Compute) -> LC:
        return LC({self._alloc(name, compute): 1})

    def make_public(self, x: LC) -> None:
        (wid,) = x.terms
        self._public.append(wid)

    def _alloc(self, name: str, compute: Compute | None) -> int:
        self._wires.append(_Wire(name, compute))
        return len(self._wires) - 1

    # constraints
    def enforce(self, a: LC | int, b: LC | int, c: LC | int) -> None:
        self.constraints.append((LC.of(a), LC.of(b), LC.of(c)))

    def mul(self, a: LC | int, b: LC | int, name: str = "mul") -> LC:
        a, b = LC.of(a), LC.of(b)
        ka, kb = a.constant_value(), b.constant_value()
        if ka is not None:
            return b * ka
        if kb is not None:
            return a * kb
        out = self.witness(name, lambda v: v(a) * v(b) % R)
        self.enforce(a, b, out)
        return out

    def compile(self) -> "Circuit":
        n = len(self._wires)
        if len(set(self._public)) != len(self._public):
            raise ValueError("wire declared public twice")
        public = set(self._public)
        order = [ONE, *self._public, *(w for w in range(1, n) if w not in public)]
        index = {wid: i for i, wid in enumerate(order)}

        def remap(lc: LC) -> tuple[tuple[int, int], ...]:
            return tuple(sorted((index[w], k) for w, k in lc.terms.items()))

        rows = tuple((remap(a), remap(b), remap(c)) for a, b, c in self.constraints)
        program = tuple((self._wires[wid].name, self._wires[wid].compute) for wid in range(n))
        return Circuit(
            wire_names=tuple(self._wires[w].name for w in order),
            num_public=len(self._public),
            rows=rows,
            inputs={name: index[wid] for name, wid in self._inputs.items()},
            _program=program,
            _index=tuple(index[wid] for wid in range(n)),
        )


Row = tuple[tuple[int, int], ...]


@dataclass(frozen=True, eq=False)
class Circuit:
    """Compiled constraint system over final wire indices."""

    wire_names: tuple[str, ...]
    num_public: int
    rows: tuple[tuple[Row, Row, Row], ...]
    inputs: Mapping[str, int]
    _program: tuple = field(repr=False)
    _index: tuple[int, ...] = field(repr=False)

    @property
    def num_wires(self) -> int:
        return len(self.wire_names)

    @property
    def num_constraints(self) -> int:
        return len(self.rows)

    @property
    def public_names(self) -> tuple[str, ...]:
        return self.wire_names[1 : 1 + self.num_public]

    def solve(self, assignment: Mapping[str, int]) -> list[int]:
        """Run the wire program; ``assignment`` supplies every input wire by name."""
        missing = set(self.inputs) - set(assignment)
        if missing:
            raise KeyError(f"missing inputs: {sorted(missing)}")
        values = [0] * self.num_wires
        index = self._index

        def value(lc: LC) -> int:
            return sum(values[index[w]] * k for w, k in lc.terms.items()) % R

        for wid, (name, compute) in enumerate(self._program):
            if compute is None:
                values[index[wid]] = assignment[name] % R
            else:
                values[index[wid]] = compute(value) % R
        return values

    def satisfied(self, w: Sequence[int]) -> bool:
        if len(w) != self.num_wires:
            raise DimensionMismatch(f"expected {self.num_wires} wire values, got {len(w)}")
        if w[0] != 1:
            return False
        return not self.violations(w, first_only=True)

    def violations(self, w: Sequence[int], *, first_only: bool = False) -> list[int]:
        bad = []
        for i, (a, b, c) in enumerate(self.rows):
            av = sum(w[j] * k for j, k in a)
            bv = sum(w[j] * k for j, k in b)
            cv = sum(w[j] * k for j, k in c)
            if (av * bv - cv) % R:
                bad.append(i)
                if first_only:
                    break
        return bad

    def describe(self) -> str:
        """Stable human-readable summary: counts, public order, and wire names."""
        private = [n for n in self.wire_names[1 + self.num_public :] if n in self.inputs]
        lines = [
            f"constraints: {self.num_constraints}",
            f"wires: {self.num_wires}",
            "public inputs (in order): " + ", ".join(self.public_names),
            "private inputs: " + ", ".join(private),
            f"fingerprint: {self.fingerprint().hex()}",
        ]
        return "\n".join(lines)

    @cached_property
    def _digest(self) -> bytes:
        h = hashlib.sha256(b"sans-r1cs-v1")
        h.update(struct.pack("<III", self.num_wires, self.num_public, self.num_constraints))
        for name in self.public_names:
            h.update(name.encode() + b"\0")
        for triple in self.rows:
            for row in triple:
                h.update(struct.pack("<I", len(row)))
                for j, k in row:
                    h.update(struct.pack("<I", j) + k.to_bytes(32, "little"))
        return h.digest()

    def fingerprint(self) -> bytes:
        """SHA-256 over the wire counts, public names and every matrix entry."""
        return self._digest

    def matrices(self) -> tuple[list, list, list]:
        """Rows as ``[(col, coeff_le32), ...]`` for the native backend."""
        enc = lambda row: [(j, k.to_bytes(32, "little")) for j, k in row]  # noqa: E731
        return (
            [enc(a) for a, _, _ in self.rows],
            [enc(b) for _, b, _ in self.rows],
            [enc(c) for _, _, c in self.rows],
        )


def bits_of(x: int, n: int) -> list[int]:
    return [(x >> i) & 1 for i in range(n)]
