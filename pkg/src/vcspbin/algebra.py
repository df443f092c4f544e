"""Polymorphisms, fractional polymorphisms, identities, dual lifts and rigid cores."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import INF, CostFunction, Domain, Language, _flat
from .digraph import DigraphRelation, ExtDualLanguage, homomorphisms, level_candidates
from .dual import DualLanguage
from .errors import (ArityMismatch, BudgetExceeded, DomainMismatch, NotAPolymorphism,
                     NotClosed, ParseError, PreconditionFailed, UnknownSymbol)
from .simplex import maximize

MAX_CANDIDATES = 2 * 10 ** 7


@dataclass(frozen=True)
class Operation:
    """Total k-ary operation, table stored as label indices in lexicographic order."""

    domain: Domain
    arity: int
    table: tuple
    name: str = field(default="f", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(self.table))
        if len(self.table) != self.domain.size ** self.arity:
            raise ArityMismatch(f"operation {self.name}: wrong table size")
        if any(not 0 <= v < self.domain.size for v in self.table):
            raise DomainMismatch(f"operation {self.name}: value outside the domain")

    @classmethod
    def from_callable(cls, domain, arity, fn, name="f"):
        """fn maps an index tuple to an index."""
        return cls(domain, arity, tuple(fn(t) for t in domain.tuples(arity)), name)

    @classmethod
    def from_labels(cls, domain, arity, mapping: dict, name="f"):
        table = [None] * domain.size ** arity
        for args, out in mapping.items():
            table[_flat([domain.index(a) for a in args], domain.size)] = domain.index(out)
        if None in table:
            raise ArityMismatch(f"operation {name}: table is not total")
        return cls(domain, arity, tuple(table), name)

    def apply(self, idx) -> int:
        return self.table[_flat(idx, self.domain.size)]

    def __call__(self, *labels):
        if len(labels) != self.arity:
            raise ArityMismatch(f"{self.name} takes {self.arity} arguments")
        return self.domain.labels[self.apply([self.domain.index(l) for l in labels])]

    def apply_tuples(self, tuples):
        """Componentwise application to k index tuples of equal length."""
        return tuple(self.apply(col) for col in zip(*tuples))

    def renamed(self, name):
        return Operation(self.domain, self.arity, self.table, name)


def projection(domain: Domain, arity: int, i: int) -> Operation:
    """The i-th (1-based) projection."""
    return Operation.from_callable(domain, arity, lambda t: t[i - 1], f"pr{arity}_{i}")


def identity_op(domain: Domain) -> Operation:
    return projection(domain, 1, 1).renamed("id")


def _functions(gamma):
    if isinstance(gamma, Language):
        return gamma.domain, list(gamma.functions)
    fns = list(gamma)
    return fns[0].domain, fns


def _check_domain(f: Operation, domain):
    if f.domain != domain:
        raise DomainMismatch("operation and language have different domains")


def is_polymorphism(f: Operation, gamma) -> bool:
    domain, fns = _functions(gamma)
    _check_domain(f, domain)
    return _violation(f, fns) is None


def _violation(f: Operation, fns):
    for phi in fns:
        fs = phi.feas_set
        for args in itertools.product(phi.feas_tuples, repeat=f.arity):
            if f.apply_tuples(args) not in fs:
                return phi, args
    return None


def enumerate_polymorphisms(gamma, k: int, max_candidates: int = MAX_CANDIDATES) -> list:
    """All k-ary polymorphisms in lexicographic table order.

    Backtracks over table cells; every closure condition is tested as soon
    as the last cell it reads has been filled in.
    """
    domain, fns = _functions(gamma)
    size = domain.size
    cells = size ** k
    if size ** cells > max_candidates:
        raise BudgetExceeded(f"{size}^{cells} candidate operations exceed {max_candidates}")
    checks = [[] for _ in range(cells)]
    for phi in fns:
        for args in itertools.product(phi.feas_tuples, repeat=k):
            cols = tuple(_flat(col, size) for col in zip(*args))
            checks[max(cols)].append((cols, phi.feas_set))
    table = [0] * cells
    out = []

    def fill(c):
        if c == cells:
            out.append(Operation(domain, k, tuple(table), f"p{len(out)}"))
            return
        for v in range(size):
            table[c] = v
            if all(tuple(table[i] for i in cols) in fs for cols, fs in checks[c]):
                fill(c + 1)

    fill(0)
    return out


# ------------------------------------------------------- fractional polymorphisms

@dataclass(frozen=True)
class FractionalPolymorphism:
    weights: tuple              # ((Operation, Fraction), ...)

    def __post_init__(self):
        ws = tuple((op, Fraction(w)) for op, w in self.weights)
        object.__setattr__(self, "weights", ws)
        if not ws:
            raise PreconditionFailed("empty fractional polymorphism")
        if sum(w for _, w in ws) != 1:
            raise PreconditionFailed("weights must sum to 1")
        if any(w <= 0 for _, w in ws):
            raise PreconditionFailed("weights must be positive")
        ops = [op for op, _ in ws]
        if len(set(ops)) != len(ops):
            raise PreconditionFailed("operations must be pairwise distinct")
        if len({(op.arity, op.domain) for op in ops}) != 1:
            raise PreconditionFailed("operations must share arity and domain")

    @property
    def arity(self) -> int:
        return self.weights[0][0].arity

    @property
    def domain(self) -> Domain:
        return self.weights[0][0].domain

    def support(self) -> list:
        return [op for op, _ in self.weights]


@dataclass(frozen=True)
class FpolCheck:
    ok: bool
    reason: str = ""
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.ok


def check_fractional_polymorphism(omega: FractionalPolymorphism, gamma) -> FpolCheck:
    domain, fns = _functions(gamma)
    if omega.domain != domain:
        raise DomainMismatch("fractional polymorphism and language have different domains")
    k = omega.arity
    for op, _ in omega.weights:
        bad = _violation(op, fns)
        if bad is not None:
            return FpolCheck(False, f"{op.name} is not a polymorphism of {bad[0].name}",
                             (op.name, bad[0].name, bad[1]))
    for phi in fns:
        for args in itertools.product(phi.feas_tuples, repeat=k):
            lhs = sum((w * phi.value(op.apply_tuples(args)) for op, w in omega.weights),
                      Fraction(0))
            rhs = sum((phi.value(a) for a in args), Fraction(0)) / k
            if lhs > rhs:
                return FpolCheck(False, f"averaging inequality fails for {phi.name}",
                                 (phi.name, args, lhs, rhs))
    return FpolCheck(True)


def submodular_fpol(domain: Domain) -> FractionalPolymorphism:
    """min and max with weight 1/2 each, for the domain's order."""
    mn = Operation.from_callable(domain, 2, min, "min")
    mx = Operation.from_callable(domain, 2, max, "max")
    return FractionalPolymorphism(((mn, Fraction(1, 2)), (mx, Fraction(1, 2))))


# -------------------------------------------------------------------- dual lifts

def lift_pol_dual(f: Operation, dual: DualLanguage) -> Operation:
    phi = dual.combined.phi
    _check_domain(f, phi.domain)
    if _violation(f, [phi]) is not None:
        raise NotAPolymorphism(f"{f.name} is not a polymorphism of the language")
    pos = {t: i for i, t in enumerate(dual.tuples)}
    dp = dual.d_prime

    def fd(idx):
        return pos[f.apply_tuples([dual.tuples[i] for i in idx])]

    return Operation.from_callable(dp, f.arity, fd, f"{f.name}_d")


def lift_fpol_dual(omega: FractionalPolymorphism, dual: DualLanguage) -> FractionalPolymorphism:
    return FractionalPolymorphism(tuple((lift_pol_dual(op, dual), w) for op, w in omega.weights))


# --------------------------------------------------------------------- identities

@dataclass(frozen=True)
class Term:
    symbol: Optional[str]       # None for a variable
    name: str                   # variable name when symbol is None
    args: tuple = ()

    def variables(self) -> set:
        if self.symbol is None:
            return {self.name}
        out = set()
        for a in self.args:
            out |= a.variables()
        return out

    def symbol_count(self) -> int:
        if self.symbol is None:
            return 0
        return 1 + sum(a.symbol_count() for a in self.args)

    def __str__(self):
        if self.symbol is None:
            return self.name
        return f"{self.symbol}({','.join(str(a) for a in self.args)})"


def var(name) -> Term:
    return Term(None, name)


def app(symbol, *args) -> Term:
    return Term(symbol, symbol, tuple(args))


@dataclass(frozen=True)
class Identity:
    left: Term
    right: Term

    @property
    def linear(self) -> bool:
        return self.left.symbol_count() <= 1 and self.right.symbol_count() <= 1

    @property
    def balanced(self) -> bool:
        return self.left.variables() == self.right.variables()

    def variables(self) -> list:
        return sorted(self.left.variables() | self.right.variables())

    def __str__(self):
        return f"{self.left}={self.right}"


_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9']*|[(),=])")


def _tokens(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise ParseError(None, f"unexpected character at {pos} in {text!r}")
        out.append(mt.group(1))
        pos = mt.end()
    return out


def parse_term(tokens, i=0):
    name = tokens[i]
    if not re.match(r"[A-Za-z_]", name):
        raise ParseError(None, f"expected a name, got {name!r}")
    if i + 1 < len(tokens) and tokens[i + 1] == "(":
        args, j = [], i + 2
        while True:
            t, j = parse_term(tokens, j)
            args.append(t)
            if j >= len(tokens):
                raise ParseError(None, "unterminated argument list")
            if tokens[j] == ")":
                return Term(name, name, tuple(args)), j + 1
            if tokens[j] != ",":
                raise ParseError(None, f"expected ',' or ')', got {tokens[j]!r}")
            j += 1
    return Term(None, name), i + 1


def parse_identity(text: str) -> Identity:
    """Parse `t1 = t2`, e.g. `f(x,x,y)=g(y,y,x)`."""
    toks = _tokens(text)
    left, i = parse_term(toks, 0)
    if i >= len(toks) or toks[i] != "=":
        raise ParseError(None, "identity needs '='")
    right, j = parse_term(toks, i + 1)
    if j != len(toks):
        raise ParseError(None, f"trailing tokens in {text!r}")
    return Identity(left, right)


def _eval_term(t: Term, env, interp):
    if t.symbol is None:
        return env[t.name]
    if t.symbol not in interp:
        raise UnknownSymbol(f"no operation for symbol {t.symbol!r}")
    op = interp[t.symbol]
    if len(t.args) != op.arity:
        raise ArityMismatch(f"{t.symbol} has arity {op.arity}, used with {len(t.args)}")
    return op.apply([_eval_term(a, env, interp) for a in t.args])


def _symbols(t: Term, out):
    if t.symbol is not None:
        out.add(t.symbol)
        for a in t.args:
            _symbols(a, out)
    return out


def check_identity(idt: Identity, interp: dict) -> bool:
    """Evaluate both sides under every assignment of domain elements to variables."""
    syms = _symbols(idt.left, set()) | _symbols(idt.right, set())
    for s in syms:
        if s not in interp:
            raise UnknownSymbol(f"no operation for symbol {s!r}")
    domains = {interp[s].domain for s in syms}
    if len(domains) > 1:
        raise DomainMismatch("interpretation mixes domains")
    if not domains:
        raise UnknownSymbol("identity uses no operation symbol")
    size = next(iter(domains)).size
    names = idt.variables()
    for vals in itertools.product(range(size), repeat=len(names)):
        env = dict(zip(names, vals))
        if _eval_term(idt.left, env, interp) != _eval_term(idt.right, env, interp):
            return False
    return True


FAMILIES = ("idempotent", "wnu", "cyclic", "symmetric", "edge")


def family_identities(family: str, k: int, symbol: str = "f") -> list:
    """The defining identities of a named family for a k-ary symbol."""
    xs = [var("x")] * k
    if family == "idempotent":
        return [Identity(app(symbol, *xs), var("x"))]
    if family == "wnu":
        if k < 2:
            raise ArityMismatch("WNU needs arity >= 2")

        def at(i):
            args = [var("x")] * k
            args[i] = var("y")
            return app(symbol, *args)

        return family_identities("idempotent", k, symbol) + \
            [Identity(at(i), at(i + 1)) for i in range(k - 1)]
    if family == "cyclic":
        if k < 2:
            raise ArityMismatch("cyclic needs arity >= 2")
        vs = [var(f"x{i}") for i in range(1, k + 1)]
        return [Identity(app(symbol, *vs), app(symbol, *(vs[1:] + vs[:1])))]
    if family == "symmetric":
        if k < 2:
            raise ArityMismatch("symmetric needs arity >= 2")
        vs = [var(f"x{i}") for i in range(1, k + 1)]
        # a rotation and one transposition generate every permutation
        swap = [vs[1], vs[0]] + vs[2:]
        out = [Identity(app(symbol, *vs), app(symbol, *swap))]
        if k > 2:
            out.append(Identity(app(symbol, *vs), app(symbol, *(vs[1:] + vs[:1]))))
        return out
    if family == "edge":
        if k < 3:
            raise ArityMismatch("edge needs arity >= 3")
        x, y = var("x"), var("y")
        out = [Identity(app(symbol, y, y, *[x] * (k - 2)), x),
               Identity(app(symbol, y, x, y, *[x] * (k - 3)), x)]
        for i in range(4, k + 1):
            args = [x] * k
            args[i - 1] = y
            out.append(Identity(app(symbol, *args), x))
        return out
    raise UnknownSymbol(f"unknown identity family {family!r}")


def named_identity(f: Operation, family: str) -> bool:
    return all(check_identity(idt, {"f": f}) for idt in family_identities(family, f.arity))


# ------------------------------------------------------------- unary support, cores

def enumerate_endomorphisms(g, budget: int = 10 ** 7) -> list:
    """All edge-preserving self-maps of a digraph, in lexicographic order of images."""
    cand = level_candidates(g, g)
    return list(homomorphisms(g, g, candidates=cand or None, node_budget=budget))


def _unary_pols(gamma, max_candidates=MAX_CANDIDATES) -> list:
    domain, fns = _functions(gamma)
    rels = [f for f in fns if isinstance(f, DigraphRelation)]
    if not rels:
        return enumerate_polymorphisms(gamma, 1, max_candidates)
    if len(rels) > 1:
        raise PreconditionFailed("at most one digraph relation is supported")
    pos = {v: i for i, v in enumerate(domain.labels)}
    others = [f for f in fns if not isinstance(f, DigraphRelation)]
    out = []
    for h in enumerate_endomorphisms(rels[0].graph):
        op = Operation(domain, 1, tuple(pos[h[v]] for v in domain.labels), f"e{len(out)}")
        if _violation(op, others) is None:
            out.append(op)
    return out


def _support_lp(gamma, pols, objective):
    """LP over unary fractional polymorphisms supported on `pols`."""
    _, fns = _functions(gamma)
    A, b = [], []
    for phi in fns:
        if phi.is_crisp:
            continue            # polymorphisms keep crisp terms at zero
        for t in phi.feas_tuples:
            A.append([phi.value(op.apply_tuples([t])) for op in pols])
            b.append(phi.value(t))
    return maximize(objective, A, b, [[1] * len(pols)], [1])


def in_unary_support(g: Operation, gamma, pols: Optional[list] = None) -> bool:
    """Is there a unary fractional polymorphism giving g positive weight?"""
    if g.arity != 1:
        raise ArityMismatch("in_unary_support takes a unary operation")
    pols = pols if pols is not None else _unary_pols(gamma)
    if g not in pols:
        return False
    res = _support_lp(gamma, pols, [1 if op == g else 0 for op in pols])
    return res.status == "optimal" and res.value > 0


def is_rigid_core(gamma, pols: Optional[list] = None) -> bool:
    """True iff the identity is the only unary operation in the support of gamma."""
    domain, _ = _functions(gamma)
    pols = pols if pols is not None else _unary_pols(gamma)
    ident = identity_op(domain)
    if len(pols) == 1:
        return True
    res = _support_lp(gamma, pols, [0 if op == ident else 1 for op in pols])
    return res.status == "optimal" and res.value == 0


def restrict_to_base(f_e, ext: ExtDualLanguage):
    """Restrict an operation on D_Gamma's vertices (or a unary vertex map) to D.

    Returns (operation on D, whether it is a polymorphism of the source language).
    """
    base = ext.base_ids
    dom = ext.combined.domain
    if isinstance(f_e, dict):
        images = [f_e[b] for b in base]
        if any(i not in base for i in images):
            raise NotClosed("restriction leaves the base vertices")
        f = Operation(dom, 1, tuple(base.index(i) for i in images), "restricted")
    else:
        vd = f_e.domain
        bidx = [vd.index(b) for b in base]

        def fn(t):
            img = vd.labels[f_e.apply([bidx[i] for i in t])]
            if img not in base:
                raise NotClosed("restriction leaves the base vertices")
            return base.index(img)

        f = Operation.from_callable(dom, f_e.arity, fn, f"{f_e.name}|D")
    return f, is_polymorphism(f, ext.combined.source)
