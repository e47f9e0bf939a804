"""Degeneracy maps, coefficient filters, K_0(N), the quotient by K_0(N), and the
check that K_0(N) is exactly the sum of the images of i_p for primes p | N.

Everything is done on truncated coefficient vectors. A subspace of a space of
forms is stored as a :class:`Subspace` of Q^(B+1), i.e. by its coefficients
c_0..c_B, where B is at least the Sturm bound so that truncation is injective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import flint

from .arith import moebius, prime_divisors, radical, squarefree_divisors
from .errors import InsufficientPrecision, InvalidInput, NotInSpace, Theorem1Violation
from .exactlin import RatMatrix, Subspace, left_kernel, subspace_sum
from .qseries import QExpansion, sturm_bound
from .spaces import SpaceBasis, get_space

__all__ = [
    "DegeneracySpec",
    "QuotientSpace",
    "Theorem1Report",
    "degeneracy_i",
    "degeneracy_rows",
    "pi_filter",
    "pi_projector",
    "k0_subspace",
    "k0_coordinates",
    "k0_precision",
    "oldsum_subspace",
    "verify_theorem1",
    "quotient_space",
]


@dataclass(frozen=True)
class DegeneracySpec:
    """i_d from level ``source`` to level ``target``; needs source | target and d | target/source."""

    source: int
    target: int
    d: int

    def __post_init__(self):
        if min(self.source, self.target, self.d) < 1:
            raise InvalidInput("levels and d must be positive")
        if self.target % self.source:
            raise InvalidInput(f"{self.source} does not divide {self.target}")
        if (self.target // self.source) % self.d:
            raise InvalidInput(f"d={self.d} does not divide {self.target // self.source}")


def degeneracy_i(f: QExpansion, spec: DegeneracySpec, prec: int | None = None) -> QExpansion:
    """c_m(i_d f) = c_{m/d}(f) if d | m, else 0. Result is tagged with the target level."""
    if f.level != spec.source:
        raise InvalidInput(f"form has level {f.level}, map starts at {spec.source}")
    if prec is None:
        prec = f.prec * spec.d
    if f.prec < prec // spec.d:
        raise InsufficientPrecision(f"i_{spec.d} to precision {prec} needs source precision {prec // spec.d}, have {f.prec}")
    d = spec.d
    src = f.poly.coeffs()
    out = [flint.fmpq(0)] * (prec + 1)
    for i in range(min(len(src), prec // d + 1)):
        out[i * d] = src[i]
    return QExpansion(flint.fmpq_poly(out), f.weight, spec.target, prec)


def degeneracy_rows(rows: RatMatrix, d: int, prec: int) -> RatMatrix:
    """i_d applied to each coefficient row (c_0..), producing rows of length prec + 1."""
    if rows.ncols - 1 < prec // d:
        raise InsufficientPrecision(f"i_{d} to precision {prec} needs {prec // d}, have {rows.ncols - 1}")
    src = rows.flint
    out = flint.fmpq_mat(rows.nrows, prec + 1)
    for i in range(rows.nrows):
        for j in range(prec // d + 1):
            x = src[i, j]
            if x != 0:
                out[i, j * d] = x
    return RatMatrix(out)


def pi_filter(f: QExpansion, d: int) -> QExpansion:
    """Keep the coefficients c_m with d | m."""
    if d < 1 or f.level % d:
        raise InvalidInput(f"d={d} does not divide the level {f.level}")
    src = f.poly.coeffs()
    out = [c if i % d == 0 else flint.fmpq(0) for i, c in enumerate(src)]
    return QExpansion(flint.fmpq_poly(out), f.weight, f.level, f.prec)


def pi_projector(f: QExpansion, N: int | None = None) -> QExpansion:
    """f - sum_p pi_p f + sum_{p<q} pi_{pq} f - ...  over primes dividing N."""
    if N is None:
        N = f.level
    if f.level != N:
        raise InvalidInput(f"form has level {f.level}, projector is for level {N}")
    acc = flint.fmpq_poly()
    for e in squarefree_divisors(N):
        acc += moebius(e) * pi_filter(f, e).poly
    return QExpansion(acc, f.weight, f.level, f.prec)


def _coprime_columns(N: int, prec: int) -> list[int]:
    return [m for m in range(prec + 1) if gcd(m, N) == 1]


def k0_precision(k: int, N: int) -> int:
    """Precision at which the coprime-coefficient test decides membership in K_0.

    The coprime part sum_e mu(e) V_e U_e f of f has level N * rad(N), so its
    vanishing up to that Sturm bound forces it to vanish identically.
    """
    return sturm_bound(k, N * radical(N))


def _k0_left_kernel(S: SpaceBasis) -> Subspace:
    cols = _coprime_columns(S.level, S.prec)
    if S.dim == 0:
        return Subspace.zero(0)
    if not cols:
        return Subspace.full(S.dim)
    return left_kernel(S.basis.take_cols(cols))


def k0_coordinates(S: SpaceBasis, data_dir=None, exact: bool = True) -> Subspace:
    """K_0 in the coordinates of the basis of S (a subspace of Q^dim).

    With ``exact`` the test runs at :func:`k0_precision`, fetching a longer
    copy of the same space when S is shorter. Without it, only the stored
    window is used, which can give a larger space.
    """
    if S.prec < S.sturm:
        raise InsufficientPrecision(f"precision {S.prec} below the Sturm bound {S.sturm}")
    need = k0_precision(S.weight, S.level)
    if not exact or S.prec >= need:
        return _k0_left_kernel(S)
    longer = get_space(S.weight, S.level, need, S.cuspidal, data_dir)
    if longer.basis.first_cols(S.prec + 1) != S.basis:
        raise NotInSpace(f"basis of level {S.level} at precision {need} does not extend the given one")
    return _k0_left_kernel(longer)


def k0_subspace(S: SpaceBasis, data_dir=None, exact: bool = True) -> Subspace:
    """Forms in S whose coefficients c_m vanish for every m with gcd(m, N) = 1, on S's window."""
    coords = k0_coordinates(S, data_dir, exact)
    if coords.dim == 0:
        return Subspace.zero(S.prec + 1)
    return Subspace.span(coords.basis @ S.basis)


def oldsum_subspace(k: int, N: int, prec: int | None = None, cuspidal: bool = True, data_dir=None) -> Subspace:
    """sum over primes p | N of i_p(S_k(Gamma0(N/p))) (or of M_k when not cuspidal)."""
    if prec is None:
        prec = sturm_bound(k, N)
    parts = Subspace.zero(prec + 1)
    for p in prime_divisors(N):
        sub = get_space(k, N // p, None, cuspidal, data_dir)
        if sub.dim == 0:
            continue
        need = prec // p
        if sub.prec < need:
            sub = get_space(k, N // p, need, cuspidal, data_dir)
        img = degeneracy_rows(sub.basis, p, prec)
        parts = subspace_sum(parts, Subspace.span(img))
    return parts


def _basis_strings(w: Subspace) -> list[list[str]]:
    return [[str(x) for x in row] for row in w.basis.flint.table()]


@dataclass(frozen=True)
class Theorem1Report:
    k: int
    N: int
    prec: int
    k0_prec: int
    cuspidal: bool
    dim_space: int
    dim_K0: int
    dim_oldsum: int
    oldsum_in_K0: bool
    equal: bool
    source: str
    k0: Subspace = field(repr=False, compare=False)
    oldsum: Subspace = field(repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return self.equal and self.oldsum_in_K0

    def to_dict(self, bases: bool = True) -> dict:
        out = {
            "k": self.k,
            "N": self.N,
            "cuspidal": self.cuspidal,
            "prec": self.prec,
            "k0_prec": self.k0_prec,
            "dim_space": self.dim_space,
            "dim_K0": self.dim_K0,
            "dim_oldsum": self.dim_oldsum,
            "oldsum_in_K0": self.oldsum_in_K0,
            "equal": self.equal,
            "source": self.source,
        }
        if bases:
            out["bases"] = {"K0": _basis_strings(self.k0), "oldsum": _basis_strings(self.oldsum)}
        return out


def verify_theorem1(k: int, N: int, cuspidal: bool = True, data_dir=None, strict: bool = False) -> Theorem1Report:
    """Compare K_0(N) with the sum of the i_p images, both as subspaces of the Sturm window.

    K_0 is found exactly (see :func:`k0_precision`); the images are then
    checked to lie in S, to have vanishing coprime coefficients and to span it.
    """
    B = sturm_bound(k, N)
    S = get_space(k, N, None, cuspidal, data_dir).truncate(B)
    k0 = k0_subspace(S, data_dir)
    old = oldsum_subspace(k, N, B, cuspidal, data_dir)
    cols = _coprime_columns(N, B)
    inside = S.subspace().contains(old) and (old.dim == 0 or old.basis.take_cols(cols).is_zero()) and k0.contains(old)
    rep = Theorem1Report(k, N, B, k0_precision(k, N), cuspidal, S.dim, k0.dim, old.dim, inside, k0 == old, S.source, k0, old)
    if strict and not rep.passed:
        raise Theorem1Violation(f"K_0 has dim {k0.dim}, the i_p images span {old.dim} (k={k}, N={N})")
    return rep


@dataclass(frozen=True)
class QuotientSpace:
    """S / K_0 with the section spanned by basis rows at the non-pivot positions of K_0."""

    ambient: SpaceBasis
    k0: Subspace
    k0_coords: Subspace
    section_index: tuple[int, ...]
    section: RatMatrix
    projection: RatMatrix

    @property
    def dim(self) -> int:
        return len(self.section_index)

    @property
    def level(self) -> int:
        return self.ambient.level

    def project(self, coords: RatMatrix) -> RatMatrix:
        """Ambient basis coordinates (rows) to section coordinates (rows)."""
        return coords @ self.projection

    def inclusion(self) -> RatMatrix:
        """Section coordinates to ambient basis coordinates: rows e_j, j in section_index."""
        return RatMatrix.identity(self.ambient.dim).take_rows(self.section_index)

    def coefficient(self, coords: RatMatrix, m: int) -> RatMatrix:
        """c_m of quotient elements given by section coordinates; defined only for gcd(m, N) = 1."""
        if gcd(m, self.level) != 1:
            raise InvalidInput(f"c_{m} is not defined on the quotient at level {self.level}")
        if m > self.ambient.prec:
            raise InsufficientPrecision(f"c_{m} beyond precision {self.ambient.prec}")
        return coords @ self.section.take_cols([m])


def quotient_space(S: SpaceBasis, data_dir=None) -> QuotientSpace:
    kc = k0_coordinates(S, data_dir)
    piv = set(kc.pivots)
    keep = tuple(j for j in range(S.dim) if j not in piv)
    n = S.dim
    # x -> x - x[:, P] K, then keep the non-pivot columns
    red = RatMatrix.identity(n)
    if kc.dim:
        sel = RatMatrix.identity(n).take_cols(kc.pivots)
        red = red - sel @ kc.basis
    proj = red.take_cols(keep) if keep else RatMatrix.zeros(n, 0)
    section = S.basis.take_rows(keep) if keep else RatMatrix.zeros(0, S.prec + 1)
    k0 = Subspace.span(kc.basis @ S.basis) if kc.dim else Subspace.zero(S.prec + 1)
    return QuotientSpace(S, k0, kc, keep, section, proj)
