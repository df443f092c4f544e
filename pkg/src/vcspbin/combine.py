"""Fold a finite language into one cost function and move instances across."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .core import (CostFunction, Instance, Language, ext_sum, feas)
from .errors import EmptyLanguage, UnknownFunction, WrongLanguage


@dataclass(frozen=True)
class Block:
    fname: str
    offset: int
    arity: int


@dataclass(frozen=True)
class CombinedLanguage:
    source: Language
    phi: CostFunction
    layout: tuple
    block_minima: tuple

    @property
    def m(self) -> int:
        return self.phi.arity

    @property
    def domain(self):
        return self.phi.domain

    def language(self) -> Language:
        """The single-function language {phi}."""
        return self._language

    def feas_language(self) -> Language:
        """{phi, Feas(phi)}: the target of the dual reverse reduction."""
        return self._feas_language

    @cached_property
    def _language(self):
        return Language(self.domain, (self.phi,), name=f"{self.source.name}_c")

    @cached_property
    def _feas_language(self):
        return Language(self.domain, (self.phi, feas(self.phi)),
                        name=f"{self.source.name}_cf")

    @property
    def feas_name(self) -> str:
        return f"Feas({self.phi.name})"


def combine_language(lang: Language) -> CombinedLanguage:
    if len(lang) == 0:
        raise EmptyLanguage("cannot combine an empty language")
    fns = lang.functions
    layout, offset = [], 0
    for f in fns:
        layout.append(Block(f.name, offset, f.arity))
        offset += f.arity
    if len(fns) == 1:
        # a single function is its own combination; keeping the name keeps
        # instances unchanged
        phi = fns[0]
    else:
        def value(t):
            return ext_sum(f.value(t[b.offset:b.offset + b.arity])
                           for f, b in zip(fns, layout))
        phi = CostFunction.from_callable("phi_G", lang.domain, offset, value)
    return CombinedLanguage(lang, phi, tuple(layout),
                            tuple(f.min_finite for f in fns))


def instance_to_combined(inst: Instance, comb: CombinedLanguage):
    """Pad every constraint out to phi's arity with fresh variables.

    Returns (instance over {phi}, offset) where the offset is the summed
    minimum of the padding blocks, so opt(new) = opt(inst) + offset.
    """
    if inst.language != comb.source:
        raise WrongLanguage("instance is not over the combined language's source")
    blocks = {b.fname: (i, b) for i, b in enumerate(comb.layout)}
    variables = list(inst.variables)
    constraints = []
    offset = Fraction(0)
    taken = set(variables)
    for ci, c in enumerate(inst.constraints, start=1):
        bi, block = blocks[c.fname]
        scope = []
        for bj, other in enumerate(comb.layout):
            if bj == bi:
                scope.extend(c.scope)
                continue
            offset += comb.block_minima[bj]
            for k in range(other.arity):
                name = f"_pad{ci}_{other.offset + k + 1}"
                if name in taken:
                    raise WrongLanguage(f"variable name {name} is reserved for padding")
                taken.add(name)
                variables.append(name)
                scope.append(name)
        constraints.append((comb.phi.name, tuple(scope)))
    return Instance(comb.language(), variables, constraints, name=inst.name), offset


def instance_from_combined(inst: Instance, comb: CombinedLanguage) -> Instance:
    """Split each phi-constraint into one constraint per block."""
    constraints = []
    for c in inst.constraints:
        if c.fname != comb.phi.name:
            raise UnknownFunction(f"{c.fname} is not the combined function")
        for b in comb.layout:
            constraints.append((b.fname, c.scope[b.offset:b.offset + b.arity]))
    return Instance(comb.source, inst.variables, constraints, name=inst.name)
