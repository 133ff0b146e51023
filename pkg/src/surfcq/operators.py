"""Differential-operator algebra and operator-ordering analysis.

Operators live in normal form (all derivatives to the right of coefficient
functions) on an explicit coordinate tuple. Adjoints are formal: taken under
a declared integration weight with boundary terms discarded, so hermiticity
claims are statements about the symbol algebra, not about domains.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import sympy as sp

from .kernel import canon, generators, hbar, is_zero, to_exp

I = sp.I


class DiffOp:
    """Linear differential operator: sum over multi-indices of coeff * d^idx."""

    def __init__(self, coords, terms: Dict[Tuple[int, ...], sp.Expr]):
        self.coords = tuple(coords)
        self.terms: Dict[Tuple[int, ...], sp.Expr] = {}
        for k, c in terms.items():
            c = canon(c)
            if c != 0:
                self.terms[tuple(k)] = c

    def __repr__(self):
        if not self.terms:
            return '0'
        bits = []
        for k in sorted(self.terms, key=lambda k: (sum(k), k)):
            dpart = ''.join(f' d{x}^{n}' if n > 1 else f' d{x}'
                            for x, n in zip(self.coords, k) if n)
            bits.append(f'({self.terms[k]}){dpart}')
        return ' + '.join(bits)

    def __add__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return DiffOp(self.coords, out)

    def __sub__(self, other):
        return self + other * sp.S.NegativeOne

    def __mul__(self, scalar):
        return DiffOp(self.coords, {k: c * scalar for k, c in self.terms.items()})

    __rmul__ = __mul__

    def apply(self, expr):
        tot = sp.S.Zero
        for k, c in self.terms.items():
            d = expr
            for x, n in zip(self.coords, k):
                if n:
                    d = sp.diff(d, x, n)
            tot += c * d
        return tot

    def coefficient(self, idx: Tuple[int, ...]):
        return self.terms.get(tuple(idx), sp.S.Zero)

    @property
    def order(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def is_null(self) -> bool:
        return all(is_zero(c) for c in self.terms.values())

    def map_coefficients(self, fn):
        return DiffOp(self.coords, {k: fn(c) for k, c in self.terms.items()})


def mult_op(coords, f) -> DiffOp:
    """Multiplication operator psi -> f*psi."""
    return DiffOp(coords, {(0,) * len(coords): f})


def zero_op(coords) -> DiffOp:
    return DiffOp(coords, {})


def _binom(al, ga):
    return sp.Mul(*[sp.binomial(a, g) for a, g in zip(al, ga)])


def _dpow(expr, coords, idx):
    for x, n in zip(coords, idx):
        if n:
            expr = sp.diff(expr, x, n)
    return expr


def compose(A: DiffOp, B: DiffOp) -> DiffOp:
    """Operator product A(B(.)) in normal form, via the Leibniz rule."""
    out: Dict[Tuple[int, ...], sp.Expr] = {}
    for al, ca in A.terms.items():
        for be, cb in B.terms.items():
            for ga in iproduct(*[range(a + 1) for a in al]):
                rest = tuple(a - g for a, g in zip(al, ga))
                dcb = _dpow(cb, A.coords, rest)
                if dcb == 0:
                    continue
                idx = tuple(g + b for g, b in zip(ga, be))
                out[idx] = out.get(idx, 0) + ca * _binom(al, ga) * dcb
    return DiffOp(A.coords, out)


def commutator(A: DiffOp, B: DiffOp) -> DiffOp:
    return compose(A, B) - compose(B, A)


def anticommutator_half(A: DiffOp, B: DiffOp) -> DiffOp:
    return (compose(A, B) + compose(B, A)) * sp.Rational(1, 2)


def adjoint(A: DiffOp, weight) -> DiffOp:
    """Formal adjoint w.r.t. the inner product with integration weight
    `weight`; boundary terms are discarded."""
    out: Dict[Tuple[int, ...], sp.Expr] = {}
    w = sp.sympify(weight)
    for al, ca in A.terms.items():
        g = sp.conjugate(ca) * w
        sign = sp.S.NegativeOne ** sum(al)
        for ga in iproduct(*[range(a + 1) for a in al]):
            rest = tuple(a - g2 for a, g2 in zip(al, ga))
            dg = _dpow(g, A.coords, rest)
            if dg == 0:
                continue
            out[ga] = out.get(ga, 0) + sign * _binom(al, ga) * dg / w
    return DiffOp(A.coords, out)


def op_equal(A: DiffOp, B: DiffOp) -> bool:
    keys = set(A.terms) | set(B.terms)
    return all(is_zero(A.terms.get(k, 0) - B.terms.get(k, 0)) for k in keys)


def is_formally_hermitian(A: DiffOp, weight) -> bool:
    return op_equal(A, adjoint(A, weight))


# ---------------------------------------------------------------------------
# quantization maps

def quantize_symmetrized(classical, momentum_table: Dict[sp.Symbol, DiffOp],
                         coords) -> DiffOp:
    """Monomial-wise Weyl-style ordering 1/2(f*W + W~*f).

    Each expanded term c(q)*p_a*p_b*... maps to half the sum of the operator
    word with the coefficient on the left and the reversed word with the
    coefficient on the right.
    """
    psyms = set(momentum_table)
    out = zero_op(coords)
    for term in sp.Add.make_args(sp.expand(sp.sympify(classical))):
        coeff, word = sp.S.One, []
        for fac in sp.Mul.make_args(term):
            base, ex = fac.as_base_exp()
            if base in psyms:
                if not (ex.is_Integer and ex > 0):
                    raise ValueError(f'momentum power {fac} is not a positive integer')
                word += [momentum_table[base]] * int(ex)
            else:
                coeff *= fac
        fop = mult_op(coords, coeff)
        W = fop
        for p in word:
            W = compose(W, p)
        Wr = fop
        for p in reversed(word):
            Wr = compose(p, Wr)
        out = out + (W + Wr) * sp.Rational(1, 2)
    return out


def momentum_word(momenta: Sequence[DiffOp]) -> DiffOp:
    """Compose a sequence of momentum operators left to right."""
    if not momenta:
        raise ValueError('empty word')
    W = momenta[0]
    for p in momenta[1:]:
        W = compose(W, p)
    return W


# ---------------------------------------------------------------------------
# ordering ansatz and the linear solver over its weights

@dataclass
class OrderingAnsatz:
    """Weighted family of candidate operator orderings for one observable.

    `words` are the candidate operators, `weights` the matching symbols; with
    normalize=True the weights are constrained to sum to one, so the family
    interpolates between orderings rather than rescaling the observable.
    """
    label: str
    words: Tuple[DiffOp, ...]
    weights: Tuple[sp.Symbol, ...]
    normalize: bool = True

    def __post_init__(self):
        if len(self.words) != len(self.weights):
            raise ValueError('one weight per word')

    def operator(self) -> DiffOp:
        out = zero_op(self.words[0].coords)
        for w, W in zip(self.weights, self.words):
            out = out + W * w
        return out

    def constraints(self) -> List[sp.Expr]:
        if self.normalize:
            return [sp.Add(*self.weights) - 1]
        return []


@dataclass
class OrderingSolution:
    """Outcome of a linear ordering-weight solve.

    feasible=True: `family` maps every unknown to an expression in the free
    unknowns (`free`); a unique solution has no free unknowns. feasible=False:
    `witness` names a residual coefficient that no weight choice can cancel.
    """
    unknowns: Tuple[sp.Symbol, ...]
    feasible: bool
    family: Optional[Dict[sp.Symbol, sp.Expr]] = None
    free: Tuple[sp.Symbol, ...] = ()
    witness: Optional[str] = None
    equations: List[sp.Expr] = field(default_factory=list)

    def pins(self, s: sp.Symbol) -> Optional[sp.Rational]:
        """The forced rational value of s, if the family fixes it."""
        if not self.feasible or s not in self.family:
            return None
        v = self.family[s]
        return v if v.is_Rational else None


def _coefficient_rows(expr, unknowns) -> List[Tuple[sp.Expr, sp.Expr]]:
    # (monomial, coefficient) pairs of the normalized numerator, polynomial
    # in everything except the unknowns; Poly runs in generator space since
    # exp atoms in Poly coefficients force EX-domain arithmetic
    e = to_exp(sp.sympify(expr))
    fwd, back = generators(e)
    num = sp.expand(sp.fraction(sp.together(e.xreplace(fwd)))[0])
    if num == 0:
        return []
    others = sorted(num.free_symbols - set(unknowns), key=sp.default_sort_key)
    if not others:
        return [(sp.S.One, num)]
    p = sp.Poly(num, *others)
    rows = []
    for monom, coeff in zip(p.monoms(), p.coeffs()):
        mexpr = sp.Mul(*[g ** k for g, k in zip(p.gens, monom)]).xreplace(back)
        rows.append((mexpr, sp.expand(coeff)))
    return rows


def ordering_solve(residuals: Iterable[DiffOp], unknowns: Sequence[sp.Symbol],
                   extra_equations: Iterable[sp.Expr] = ()) -> OrderingSolution:
    """Solve residual == 0 for all residual operators, linearly in `unknowns`.

    Every coefficient of every residual term is normalized and expanded over
    the non-unknown symbols; each polynomial coefficient must vanish. The
    system is solved exactly over the rationals. An empty solution set comes
    back with a witness: a residual monomial whose coefficient is free of the
    unknowns and nonzero, or the contradiction row of the reduced system.
    """
    unknowns = tuple(unknowns)
    unk = set(unknowns)
    rows: List[Tuple[sp.Expr, sp.Expr]] = []
    for R in residuals:
        for idx in sorted(R.terms, key=lambda k: (sum(k), k)):
            rows.extend(_coefficient_rows(R.terms[idx], unknowns))
    eqs: List[sp.Expr] = []
    seen = set()
    for _, c in rows:
        if c not in seen:
            seen.add(c)
            eqs.append(c)
    for c in extra_equations:
        c = sp.expand(sp.sympify(c))
        if c not in seen:
            seen.add(c)
            eqs.append(c)
    for c in eqs:
        p = sp.Poly(c, *unknowns) if unk & c.free_symbols else None
        if p is not None and p.total_degree() > 1:
            raise ValueError(f'equation not linear in unknowns: {c}')
    sol = sp.linsolve(eqs, list(unknowns))
    if sol is sp.S.EmptySet:
        return OrderingSolution(unknowns, False, witness=_witness(rows, eqs, unknowns),
                                equations=eqs)
    vec = next(iter(sol))
    family = {u: sp.sympify(v) for u, v in zip(unknowns, vec)}
    free = tuple(u for u in unknowns if family[u] == u)
    return OrderingSolution(unknowns, True, family=family, free=free, equations=eqs)


def _witness(rows, eqs, unknowns) -> str:
    unk = set(unknowns)
    for monom, coeff in rows:
        if not (coeff.free_symbols & unk) and not is_zero(coeff):
            return (f'residual numerator has monomial {monom} with coefficient '
                    f'{coeff}, independent of {tuple(str(u) for u in unknowns)} '
                    f'and nonzero')
    A, b = sp.linear_eq_to_matrix(eqs, list(unknowns))
    M = A.row_join(b)
    R, _ = M.rref()
    for i in range(R.rows):
        if all(R[i, j] == 0 for j in range(A.cols)) and R[i, A.cols] != 0:
            return f'reduced linear system contains the row 0 = {R[i, A.cols]}'
    return 'linear system is inconsistent'


# ---------------------------------------------------------------------------
# surface-attached operator constructions (surface passed duck-typed: needs
# coords, embedding, ginv, sqrtg, mean_curvature, gauss_curvature,
# laplace_beltrami(), normal)

def hermitian_momentum(surface, mu) -> DiffOp:
    """-i hbar (d_mu + (1/2) d_mu ln sqrt(g)): symmetric under the sqrt(g)
    measure by construction."""
    coords = surface.coords
    k = coords.index(mu)
    idx = tuple(1 if j == k else 0 for j in range(len(coords)))
    corr = canon(sp.diff(sp.log(surface.sqrtg), mu) / 2)
    terms = {idx: -I * hbar}
    if corr != 0:
        terms[(0,) * len(coords)] = -I * hbar * corr
    return DiffOp(coords, terms)


def hamiltonian_operator(surface, m, alpha, beta) -> DiffOp:
    """-(hbar^2/2m)(Laplace-Beltrami + alpha*M^2 - beta*K)."""
    lb = surface.laplace_beltrami()
    pot = mult_op(surface.coords,
                  alpha * surface.mean_curvature ** 2 - beta * surface.gauss_curvature)
    return (lb + pot) * (-hbar ** 2 / (2 * m))


def geometric_momentum(surface) -> List[DiffOp]:
    """Cartesian components -i hbar (g^{mu nu} x_i,nu d_mu + M n_i)."""
    coords = surface.coords
    n = len(coords)
    J = surface.embedding.jacobian(coords)
    ops = []
    for i in range(3):
        terms: Dict[Tuple[int, ...], sp.Expr] = {}
        for mu in range(n):
            coeff = canon(sum(surface.ginv[mu, nu] * J[i, nu] for nu in range(n)))
            if coeff != 0:
                idx = tuple(1 if k == mu else 0 for k in range(n))
                terms[idx] = terms.get(idx, 0) - I * hbar * coeff
        n_i = surface.mean_curvature * surface.normal[i]
        if n_i != 0:
            z = (0,) * n
            terms[z] = terms.get(z, 0) - I * hbar * canon(n_i)
        ops.append(DiffOp(coords, terms))
    return ops


def heisenberg_momentum(surface, m, H: DiffOp) -> List[DiffOp]:
    """(m/i hbar)[x_i, H] for the three Cartesian position letters."""
    ops = []
    for i in range(3):
        xi = mult_op(surface.coords, surface.embedding[i])
        ops.append(commutator(xi, H) * (m / (I * hbar)))
    return ops


def momentum_from_heisenberg(surface, m, H: DiffOp) -> List[DiffOp]:
    """heisenberg_momentum with a shape check: each component must come out
    first order, otherwise H is not a legitimate kinetic Hamiltonian for a
    momentum read-off and this raises."""
    ops = heisenberg_momentum(surface, m, H)
    for i, op in enumerate(ops):
        if op.order != 1:
            raise ValueError(
                f'component {i}: [x, H] has differential order {op.order}, '
                f'expected 1')
    return ops


@dataclass
class AnomalyReport:
    """One quantum-classical consistency check: the commutator of two
    operators against i*hbar times a quantization of their Dirac bracket."""
    label: str
    residual: DiffOp
    vanishes: bool
    residual_text: str

    @classmethod
    def build(cls, label: str, lhs: DiffOp, quantized_bracket: DiffOp):
        res = lhs - quantized_bracket * (I * hbar)
        null = res.is_null()
        if null:
            res = zero_op(lhs.coords)
        return cls(label=label, residual=res, vanishes=null,
                   residual_text=repr(res))
