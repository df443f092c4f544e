"""Dual encoding: binary language over Feas(phi) and the reductions both ways."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .combine import CombinedLanguage
from .core import (INF, CostFunction, Domain, Instance, Language, tuple_label)
from .errors import EmptyFeas, WrongLanguage

PHI_D = "phi_d"


def match_name(k: int, l: int) -> str:
    return f"match_{k}_{l}"


def parse_match_name(name: str):
    parts = name.split("_")
    if len(parts) != 3 or parts[0] != "match":
        return None
    try:
        return int(parts[1]), int(parts[2])
    except ValueError:
        return None


@dataclass(frozen=True)
class DualLanguage:
    combined: CombinedLanguage
    d_prime: Domain
    tuples: tuple          # index tuples of Feas(phi), aligned with d_prime
    phi_prime: CostFunction
    matches: dict

    @property
    def m(self) -> int:
        return self.combined.m

    def match(self, k: int, l: int) -> CostFunction:
        return self.matches[(k, l)]

    def language(self) -> Language:
        return self._language

    @cached_property
    def _language(self):
        fns = [self.phi_prime] + [self.matches[(k, l)]
                                  for k in range(1, self.m + 1)
                                  for l in range(1, self.m + 1)]
        return Language(self.d_prime, fns, name=f"{self.combined.source.name}_d",
                        strict=False)

    def label_of(self, idx_tuple) -> str:
        labels = self.combined.domain.labels
        return tuple_label([labels[i] for i in idx_tuple])

    def decode_label(self, label: str) -> tuple:
        """D' label -> tuple of D labels."""
        return tuple(self.combined.domain.labels[i]
                     for i in self.tuples[self.d_prime.index(label)])


def dual_language(comb: CombinedLanguage) -> DualLanguage:
    phi = comb.phi
    tuples = phi.feas_tuples
    if not tuples:
        raise EmptyFeas("Feas(phi) is empty; the dual would have an empty domain")
    labels = comb.domain.labels
    d_prime = Domain(tuple(tuple_label([labels[i] for i in t]) for t in tuples))
    phi_prime = CostFunction(PHI_D, d_prime, 1, tuple(phi.value(t) for t in tuples))
    zero = Fraction(0)
    matches = {}
    m = phi.arity
    for k in range(1, m + 1):
        for l in range(1, m + 1):
            matches[(k, l)] = CostFunction(
                match_name(k, l), d_prime, 2,
                tuple(zero if x[k - 1] == y[l - 1] else INF
                      for x in tuples for y in tuples))
    return DualLanguage(comb, d_prime, tuples, phi_prime, matches)


@dataclass(frozen=True)
class DualInstance:
    instance: Instance
    dual_vars: tuple            # x'i, aligned with the source constraints
    source: Instance

    def decode(self, dual_assignment, dual: DualLanguage) -> dict:
        """Read original labels off the dual labels; unconstrained vars get the first label."""
        out = {}
        for dv, c in zip(self.dual_vars, self.source.constraints):
            labs = dual.decode_label(dual_assignment[dv])
            for v, lab in zip(c.scope, labs):
                out.setdefault(v, lab)
        first = self.source.domain.labels[0]
        for v in self.source.variables:
            out.setdefault(v, first)
        return out

    def encode(self, assignment, dual: DualLanguage) -> dict:
        """Scope label tuples as dual labels (only meaningful when feasible)."""
        return {dv: tuple_label([assignment[v] for v in c.scope])
                for dv, c in zip(self.dual_vars, self.source.constraints)}


def _check_over(inst: Instance, comb: CombinedLanguage):
    if inst.language != comb.language():
        raise WrongLanguage("instance must use only the combined function")


def dual_instance(inst: Instance, dual: DualLanguage) -> DualInstance:
    comb = dual.combined
    _check_over(inst, comb)
    cons = inst.constraints
    dvars = tuple(f"x'{i}" for i in range(1, len(cons) + 1))
    out = [(PHI_D, (dv,)) for dv in dvars]
    m = comb.m
    for i, ci in enumerate(cons):
        # repeated variable inside one scope ties two coordinates of the same tuple
        for k in range(m):
            for l in range(k + 1, m):
                if ci.scope[k] == ci.scope[l]:
                    out.append((match_name(k + 1, l + 1), (dvars[i], dvars[i])))
        for j in range(i + 1, len(cons)):
            cj = cons[j]
            if not set(ci.scope) & set(cj.scope):
                continue
            for k in range(m):
                for l in range(m):
                    if ci.scope[k] == cj.scope[l]:
                        out.append((match_name(k + 1, l + 1), (dvars[i], dvars[j])))
    return DualInstance(Instance(dual.language(), dvars, out, name=f"{inst.name}_d"),
                        dvars, inst)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}
        self.order = {x: i for i, x in enumerate(items)}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        # the earlier item stays the representative, so names are deterministic
        if self.order[ra] > self.order[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra


@dataclass(frozen=True)
class UndualResult:
    instance: Instance              # over {phi, Feas(phi)}
    blocks: dict                    # dual var -> tuple of variable names

    def decode(self, assignment, dual: DualLanguage) -> dict:
        out = {}
        for dv, block in self.blocks.items():
            out[dv] = tuple_label([assignment[v] for v in block])
        return out


def undual_instance(inst: Instance, dual: DualLanguage) -> UndualResult:
    if inst.language != dual.language():
        raise WrongLanguage("instance is not over this dual language")
    comb = dual.combined
    m = comb.m
    slots = [(dv, k) for dv in inst.variables for k in range(1, m + 1)]
    uf = _UnionFind(slots)
    unary = {dv: 0 for dv in inst.variables}
    for c in inst.constraints:
        if c.fname == PHI_D:
            unary[c.scope[0]] += 1
            continue
        k, l = parse_match_name(c.fname)
        uf.union((c.scope[0], k), (c.scope[1], l))
    name_of = {s: f"{s[0]}.{s[1]}" for s in slots}
    blocks = {dv: tuple(name_of[uf.find((dv, k))] for k in range(1, m + 1))
              for dv in inst.variables}
    variables = [name_of[s] for s in slots if uf.find(s) == s]
    constraints = []
    for dv in inst.variables:
        if unary[dv]:
            constraints.extend([(comb.phi.name, blocks[dv])] * unary[dv])
        else:
            constraints.append((comb.feas_name, blocks[dv]))
    return UndualResult(Instance(comb.feas_language(), variables, constraints,
                                 name=f"{inst.name}_u"), blocks)


@dataclass(frozen=True)
class FeasElimination:
    """J' over {phi} with each phi-constraint of J repeated `scale` times.

    Recovery: opt(J) = gap * floor((opt(J') - base) / (scale * gap)).
    """

    instance: Instance
    scale: int
    gap: Fraction
    base: Fraction

    def recover(self, opt):
        if opt is INF:
            return INF
        return self.gap * math.floor((opt - self.base) / (self.scale * self.gap))


def eliminate_feas(inst: Instance, comb: CombinedLanguage) -> FeasElimination:
    if inst.language != comb.feas_language():
        raise WrongLanguage("instance must be over {phi, Feas(phi)}")
    phi = comb.phi
    n_feas = sum(1 for c in inst.constraints if c.fname == comb.feas_name)
    if n_feas == 0:
        return FeasElimination(Instance(comb.language(), inst.variables,
                                        inst.constraints, name=inst.name),
                               1, Fraction(1, _den_lcm(phi)), Fraction(0))
    gap = Fraction(1, _den_lcm(phi))
    lo = min(phi.min_finite, 0)
    # values below zero would let the Feas replacements pull the total under
    # the scaled optimum, so the spread is measured from min(0, min phi)
    spread = n_feas * (phi.max_finite - lo)
    scale = math.ceil(spread / gap) + 1
    out = []
    for c in inst.constraints:
        if c.fname == comb.feas_name:
            out.append((phi.name, c.scope))
        else:
            out.extend([(phi.name, c.scope)] * scale)
    return FeasElimination(Instance(comb.language(), inst.variables, out, name=inst.name),
                           scale, gap, Fraction(n_feas * lo))


def _den_lcm(phi: CostFunction) -> int:
    out = 1
    for v in phi.finite_values:
        out = math.lcm(out, v.denominator)
    return out
