"""Small elementary number theory helpers shared by the other modules."""

from __future__ import annotations

from functools import lru_cache
from math import gcd

import flint

__all__ = [
    "factorization",
    "prime_divisors",
    "divisors",
    "euler_phi",
    "sigma0",
    "is_prime",
    "primes_up_to",
    "squarefree_divisors",
    "moebius",
    "radical",
    "gamma0_index",
    "gcd",
]


@lru_cache(maxsize=None)
def factorization(n: int) -> tuple[tuple[int, int], ...]:
    if n < 1:
        raise ValueError(f"factorization of {n}")
    if n == 1:
        return ()
    facs = flint.fmpz(n).factor()
    return tuple(sorted((int(p), int(e)) for p, e in facs))


def prime_divisors(n: int) -> list[int]:
    return [p for p, _ in factorization(n)]


@lru_cache(maxsize=None)
def divisors(n: int) -> tuple[int, ...]:
    out = [1]
    for p, e in factorization(n):
        out = [d * p**i for d in out for i in range(e + 1)]
    return tuple(sorted(out))


def squarefree_divisors(n: int) -> list[int]:
    out = [1]
    for p in prime_divisors(n):
        out += [d * p for d in out]
    return sorted(out)


def radical(n: int) -> int:
    out = 1
    for p in prime_divisors(n):
        out *= p
    return out


def moebius(n: int) -> int:
    return int(flint.fmpz(n).moebius_mu())


def euler_phi(n: int) -> int:
    return int(flint.fmpz(n).euler_phi())


def sigma0(n: int) -> int:
    return len(divisors(n))


def is_prime(n: int) -> bool:
    return n >= 2 and bool(flint.fmpz(n).is_prime())


@lru_cache(maxsize=64)
def _sieve(n: int) -> tuple[int, ...]:
    if n < 2:
        return ()
    flags = bytearray([1]) * (n + 1)
    flags[0] = flags[1] = 0
    for p in range(2, int(n**0.5) + 1):
        if flags[p]:
            flags[p * p :: p] = bytearray(len(flags[p * p :: p]))
    return tuple(i for i, f in enumerate(flags) if f)


def primes_up_to(n: int) -> list[int]:
    return list(_sieve(n))


def gamma0_index(n: int) -> int:
    """[SL2(Z) : Gamma0(n)] = n * prod_{p | n} (1 + 1/p)."""
    idx = n
    for p in prime_divisors(n):
        idx = idx // p * (p + 1)
    return idx


def coprime(a: int, b: int) -> bool:
    return gcd(a, b) == 1
