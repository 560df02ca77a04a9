"""Dirichlet characters mod q with exact root-of-unity value tables.

A character chi of order d is stored as a table mapping each residue r to
either ``None`` (when gcd(r, q) > 1) or an integer exponent t in [0, d)
encoding chi(r) = e^(2*pi*i*t/d).  All group operations (powers,
conjugation, orthogonality) are exact integer arithmetic on exponents;
floating evaluation happens only on demand at a caller-supplied precision.

The group (Z/q)* is decomposed into cyclic components, one per odd prime
power dividing q plus the usual <-1> x <5> splitting of the 2-part when
8 | q.  Characters are indexed lexicographically by their exponent vector
on the component generators, so the principal character is index 0 and
powers/conjugates land on stable indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, lcm

from mpmath import mp, mpc

from .mpcore import (
    NumericalAssertionError,
    PrecisionContext,
    PreconditionError,
    divisors,
    euler_phi,
    factorize,
)


def _primitive_root_odd_prime_power(p: int, a: int) -> int:
    """A generator of the cyclic group (Z/p^a)* for odd p."""
    order_facs = [r for r, _ in factorize(p - 1)]
    g = 2
    while any(pow(g, (p - 1) // r, p) == 1 for r in order_facs):
        g += 1
    if a >= 2 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _crt_lift(residue: int, pa: int, q: int) -> int:
    """x mod q with x = residue (mod pa) and x = 1 (mod q/pa)."""
    m = q // pa
    if m == 1:
        return residue % q
    inv = pow(pa, -1, m)
    return (residue + pa * ((1 - residue) * inv % m)) % q


def _unit_group_generators(q: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Generators of (Z/q)* lifted mod q, with their component orders.

    Component order: the 2-part first (<-1>, then <5> when 8 | q), then odd
    prime powers by ascending prime.  The factor 2^1 contributes nothing,
    which also covers q = 2 (mod 4) via (Z/q)* = (Z/(q/2))*.
    """
    gens: list[int] = []
    orders: list[int] = []
    for p, a in factorize(q):
        pa = p**a
        if p == 2:
            if a == 1:
                continue
            gens.append(_crt_lift(pa - 1, pa, q))
            orders.append(2)
            if a >= 3:
                gens.append(_crt_lift(5, pa, q))
                orders.append(2 ** (a - 2))
        else:
            g = _primitive_root_odd_prime_power(p, a)
            gens.append(_crt_lift(g, pa, q))
            orders.append(euler_phi(pa))
    return tuple(gens), tuple(orders)


@lru_cache(maxsize=None)
def _unit_roots(d: int, prec_bits: int) -> tuple[mpc, ...]:
    """The d roots of unity e^(2*pi*i*t/d) at the given binary precision."""
    with mp.workprec(prec_bits):
        return tuple(mp.expjpi(mp.mpf(2 * t) / d) for t in range(d))


class Character:
    """One Dirichlet character mod q; immutable after group construction."""

    __slots__ = (
        "modulus",
        "order",
        "value_table",
        "conductor",
        "parity",
        "primitive",
        "index",
        "group",
        "_exps",
        "_primitive_char",
    )

    def __init__(self, modulus, order, value_table, index, exps, group):
        self.modulus = modulus
        self.order = order
        self.value_table = value_table  # tuple: exponent mod order, or None
        self.index = index
        self.group = group
        self._exps = exps  # exponent vector on the group generators
        self._primitive_char = None
        self.conductor = self._conductor()
        self.primitive = self.conductor == modulus
        self.parity = self._parity()

    def _conductor(self) -> int:
        # Smallest divisor f of q such that chi(r) = 1 whenever r = 1 (mod f)
        # and gcd(r, q) = 1; chi is then induced by a character mod f.
        q = self.modulus
        for f in divisors(q):
            if all(
                self.value_table[r % q] == 0
                for r in range(1, q + 1, f)
                if gcd(r, q) == 1
            ):
                return f
        return q

    def _parity(self) -> int:
        if self.modulus <= 2:
            return 0
        t = self.value_table[self.modulus - 1]
        if t == 0:
            return 0
        if 2 * t == self.order:
            return 1
        raise NumericalAssertionError(
            f"chi(-1) exponent {t} is not +-1 (order {self.order})"
        )

    @property
    def is_principal(self) -> bool:
        return self.order == 1

    def exponent_at(self, n: int) -> int | None:
        """Exponent t with chi(n) = e^(2*pi*i*t/order), or None if chi(n) = 0."""
        return self.value_table[n % self.modulus]

    def value_at(self, n: int, ctx: PrecisionContext) -> mpc:
        t = self.exponent_at(n)
        if t is None:
            return mpc(0)
        return _unit_roots(self.order, ctx.prec_bits)[t]

    def power(self, k: int) -> "Character":
        return char_power(self, k)

    def conjugate(self) -> "Character":
        return char_power(self, -1)

    def __repr__(self):
        kind = (
            "principal"
            if self.is_principal
            else ("primitive" if self.primitive else f"induced mod {self.conductor}")
        )
        return (
            f"Character(q={self.modulus}, index={self.index}, order={self.order}, "
            f"{'odd' if self.parity else 'even'}, {kind})"
        )


@dataclass(frozen=True)
class CharGroup:
    """The full group of phi(q) Dirichlet characters mod q."""

    modulus: int
    characters: tuple[Character, ...]
    principal_index: int
    gen_orders: tuple[int, ...]

    @property
    def principal(self) -> Character:
        return self.characters[self.principal_index]

    def nonprincipal(self):
        return (chi for chi in self.characters if not chi.is_principal)

    def index_of_exponents(self, exps: tuple[int, ...]) -> int:
        idx = 0
        for c, s in zip(exps, self.gen_orders):
            idx = idx * s + (c % s)
        return idx

    def __len__(self):
        return len(self.characters)


@lru_cache(maxsize=None)
def character_group(q: int) -> CharGroup:
    """Construct the complete character group mod q (cached; immutable)."""
    if q < 1:
        raise PreconditionError(f"modulus must be >= 1, got {q}")
    gens, orders = _unit_group_generators(q)
    exponent = lcm(*orders) if orders else 1

    # Discrete logs of every unit: residue -> exponent vector on the generators.
    dlog: dict[int, tuple[int, ...]] = {}
    pows = [[pow(g, k, q) for k in range(s)] for g, s in zip(gens, orders)]
    for ks in itertools.product(*(range(s) for s in orders)):
        r = 1 % q
        for table, k in zip(pows, ks):
            r = r * table[k] % q
        dlog[r] = ks

    group = CharGroup.__new__(CharGroup)
    chars: list[Character] = []
    for index, cs in enumerate(itertools.product(*(range(s) for s in orders))):
        order = 1
        for c, s in zip(cs, orders):
            order = lcm(order, s // gcd(s, c))
        weights = [c * (exponent // s) for c, s in zip(cs, orders)]
        step = exponent // order
        table: list[int | None] = [None] * q
        for r, ks in dlog.items():
            t = sum(k * w for k, w in zip(ks, weights)) % exponent
            table[r] = (t // step) % order
        chars.append(Character(q, order, tuple(table), index, cs, group))

    object.__setattr__(group, "modulus", q)
    object.__setattr__(group, "characters", tuple(chars))
    object.__setattr__(group, "principal_index", 0)
    object.__setattr__(group, "gen_orders", orders)
    return group


def eval_char(chi: Character, n: int) -> int | None:
    """Exponent encoding of chi(n): t with chi(n) = e^(2*pi*i*t/order),
    or None when chi(n) = 0."""
    return chi.exponent_at(n)


def char_power(chi: Character, k: int) -> Character:
    """The group member equal to chi^k (exponent vector scaled by k)."""
    group = chi.group
    new_exps = tuple(c * k % s for c, s in zip(chi._exps, group.gen_orders))
    return group.characters[group.index_of_exponents(new_exps)]


def conductor(chi: Character) -> int:
    return chi.conductor


def induced_primitive(chi: Character) -> Character:
    """The primitive character mod conductor(chi) that induces chi."""
    if chi.primitive:
        return chi
    if chi._primitive_char is not None:
        return chi._primitive_char
    f = chi.conductor
    subgroup = character_group(f)
    q = chi.modulus
    # Lift each residue r mod f to one coprime to q; a lift exists because
    # the class r mod f contains phi(q)/phi(f) units mod q.
    lifts = {}
    for r in range(f):
        if f > 1 and gcd(r, f) != 1:
            continue
        rr = r
        while gcd(rr, q) != 1:
            rr += f
        lifts[r] = rr
    for cand in subgroup.characters:
        if cand.order != chi.order or not cand.primitive:
            continue
        if all(cand.value_table[r] == chi.value_table[rr % q] for r, rr in lifts.items()):
            chi._primitive_char = cand
            return cand
    raise NumericalAssertionError(f"no primitive character mod {f} induces {chi!r}")
