"""Exact values, domains, cost functions, languages and instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import ArityMismatch, SemanticError, UnknownFunction, UnknownLabel


class Infinity:
    """Positive infinity. Absorbs addition, compares above every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __hash__(self):
        return hash("vcspbin.inf")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        if other is self or isinstance(other, (int, Fraction)):
            return self
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return self
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and other > 0:
            return self
        return NotImplemented

    __rmul__ = __mul__

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()

ExtValue = Union[Fraction, Infinity]


def is_inf(v) -> bool:
    return v is INF


def ext(v) -> ExtValue:
    """Coerce an int, Fraction, INF or value token to an ExtValue."""
    if v is INF:
        return INF
    if isinstance(v, str):
        return parse_value(v)
    if isinstance(v, bool):
        raise TypeError("bool is not a cost value")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    raise TypeError(f"not an exact value: {v!r}")


def parse_value(tok: str) -> ExtValue:
    tok = tok.strip()
    if tok == "inf":
        return INF
    if "/" in tok:
        num, den = tok.split("/", 1)
        n, d = int(num), int(den)
        if d <= 0:
            raise ValueError(f"bad denominator in {tok!r}")
        return Fraction(n, d)
    return Fraction(int(tok))


def format_value(v: ExtValue) -> str:
    if v is INF:
        return "inf"
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def ext_sum(values: Iterable[ExtValue]) -> ExtValue:
    total: ExtValue = Fraction(0)
    for v in values:
        if v is INF:
            return INF
        total += v
    return total


@dataclass(frozen=True)
class Domain:
    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise SemanticError(None, "domain must be non-empty")
        if len(set(labels)) != len(labels):
            raise SemanticError(None, "domain labels must be unique")

    @cached_property
    def _index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label):
        return label in self._index

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabel(f"label {label!r} not in domain") from None

    def tuples(self, m: int) -> Iterator[tuple]:
        """All index tuples of length m in lexicographic order."""
        return itertools.product(range(len(self.labels)), repeat=m)


def tuple_label(labels: Sequence[str]) -> str:
    return "(" + ",".join(labels) + ")"


@dataclass(frozen=True)
class CostFunction:
    """Total table D^m -> ExtValue, stored flat in lexicographic index order."""

    name: str
    domain: Domain
    arity: int
    table: tuple

    def __post_init__(self):
        if self.arity < 1:
            raise SemanticError(None, f"{self.name}: arity must be >= 1")
        table = tuple(ext(v) for v in self.table)
        if len(table) != self.domain.size ** self.arity:
            raise SemanticError(
                None, f"{self.name}: table has {len(table)} entries, "
                f"expected {self.domain.size ** self.arity}")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_entries(cls, name, domain, arity, entries: Mapping, default=None):
        """Build from {label tuple: value}; unlisted tuples take `default`."""
        size = domain.size
        table = [None] * (size ** arity)
        for labels, value in entries.items():
            if len(labels) != arity:
                raise ArityMismatch(f"{name}: tuple {labels} has wrong arity")
            table[_flat([domain.index(l) for l in labels], size)] = ext(value)
        if default is not None:
            d = ext(default)
            table = [d if v is None else v for v in table]
        if any(v is None for v in table):
            raise SemanticError(None, f"{name}: table is not total and has no default")
        return cls(name, domain, arity, tuple(table))

    @classmethod
    def from_callable(cls, name, domain, arity, fn):
        """fn receives an index tuple and returns a value."""
        return cls(name, domain, arity,
                   tuple(ext(fn(t)) for t in domain.tuples(arity)))

    def value(self, idx: Sequence[int]) -> ExtValue:
        return self.table[_flat(idx, self.domain.size)]

    def __call__(self, *labels) -> ExtValue:
        return eval_cost_function(self, labels)

    def renamed(self, name: str) -> "CostFunction":
        return CostFunction(name, self.domain, self.arity, self.table)

    @cached_property
    def feas_tuples(self) -> tuple:
        """Index tuples with finite value, in lexicographic order."""
        return tuple(t for t, v in zip(self.domain.tuples(self.arity), self.table)
                     if v is not INF)

    @cached_property
    def feas_set(self) -> frozenset:
        return frozenset(self.feas_tuples)

    @property
    def is_crisp(self) -> bool:
        return all(v is INF or v == 0 for v in self.table)

    @property
    def is_finite_valued(self) -> bool:
        return all(v is not INF for v in self.table)

    @cached_property
    def finite_values(self) -> tuple:
        return tuple(v for v in self.table if v is not INF)

    @property
    def min_finite(self):
        return min(self.finite_values) if self.finite_values else None

    @property
    def max_finite(self):
        return max(self.finite_values) if self.finite_values else None

    @cached_property
    def _supports(self):
        out, inc = {}, {}
        for a, b in self.feas_tuples:
            out.setdefault(a, set()).add(b)
            inc.setdefault(b, set()).add(a)
        return ({k: frozenset(v) for k, v in out.items()},
                {k: frozenset(v) for k, v in inc.items()})

    def out_support(self, a: int) -> frozenset:
        """For binary functions: second coordinates feasible with first = a."""
        return self._supports[0].get(a, frozenset())

    def in_support(self, b: int) -> frozenset:
        return self._supports[1].get(b, frozenset())


def _flat(idx: Sequence[int], size: int) -> int:
    pos = 0
    for i in idx:
        pos = pos * size + i
    return pos


def eval_cost_function(phi, t: Sequence) -> ExtValue:
    """Look up phi at a tuple of labels."""
    if len(t) != phi.arity:
        raise ArityMismatch(f"{phi.name} has arity {phi.arity}, got {len(t)} labels")
    return phi.value([phi.domain.index(l) for l in t])


def feas(phi: CostFunction) -> CostFunction:
    """Crisp function that is 0 exactly where phi is finite."""
    zero = Fraction(0)
    return CostFunction(f"Feas({phi.name})", phi.domain, phi.arity,
                        tuple(INF if v is INF else zero for v in phi.table))


def crisp_from_relation(name, domain, arity, tuples) -> CostFunction:
    tuples = {tuple(t) for t in tuples}
    return CostFunction.from_callable(
        name, domain, arity,
        lambda t: 0 if tuple(domain.labels[i] for i in t) in tuples else INF)


@dataclass(frozen=True)
class Language:
    """Finite set of named cost functions over one domain."""

    domain: Domain
    functions: tuple
    name: str = "lang"
    # derived languages (dual match relations) may legitimately contain
    # identically infinite members; input languages may not
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        fns = tuple(self.functions)
        object.__setattr__(self, "functions", fns)
        names = [f.name for f in fns]
        if len(set(names)) != len(names):
            raise SemanticError(None, "duplicate function name in language")
        for f in fns:
            if f.domain != self.domain:
                raise SemanticError(None, f"{f.name}: domain differs from language domain")
            if self.strict and f.min_finite is None:
                raise SemanticError(None, f"{f.name}: identically infinite")

    def __getitem__(self, name):
        for f in self.functions:
            if f.name == name:
                return f
        raise UnknownFunction(f"no function named {name!r}")

    def __contains__(self, name):
        return any(f.name == name for f in self.functions)

    def __iter__(self):
        return iter(self.functions)

    def __len__(self):
        return len(self.functions)


@dataclass(frozen=True)
class Constraint:
    fname: str
    scope: tuple

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(self.scope))


@dataclass(frozen=True)
class Instance:
    language: Language
    variables: tuple
    constraints: tuple
    name: str = "inst"

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        cons = tuple(c if isinstance(c, Constraint) else Constraint(*c)
                     for c in self.constraints)
        object.__setattr__(self, "constraints", cons)
        if len(set(self.variables)) != len(self.variables):
            raise SemanticError(None, "duplicate variable")
        known = set(self.variables)
        for c in cons:
            fn = self.language[c.fname]
            if len(c.scope) != fn.arity:
                raise ArityMismatch(
                    f"constraint {c.fname}{c.scope}: arity {fn.arity} expected")
            for v in c.scope:
                if v not in known:
                    raise SemanticError(None, f"undeclared variable {v!r}")

    @property
    def domain(self) -> Domain:
        return self.language.domain

    def function(self, c: Constraint):
        return self.language[c.fname]

    def constrained_variables(self) -> list:
        seen = set()
        for c in self.constraints:
            seen.update(c.scope)
        return [v for v in self.variables if v in seen]


Assignment = dict


def eval_instance(inst: Instance, a: Mapping) -> ExtValue:
    """Sum of every constraint at the labels `a` gives its scope."""
    missing = [v for v in inst.variables if v not in a]
    if missing:
        raise SemanticError(None, f"assignment misses variables {missing}")
    return ext_sum(eval_cost_function(inst.function(c), [a[v] for v in c.scope])
                   for c in inst.constraints)


def lcm_of_denominators(values: Iterable[ExtValue]) -> int:
    out = 1
    for v in values:
        if v is not INF:
            out = math.lcm(out, Fraction(v).denominator)
    return out
