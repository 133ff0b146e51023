"""Second-class constraint analysis: singular Lagrangians of the form
L0 - lam*f, the primary-constraint chain, the constraint matrix and its
inverse, and Dirac brackets evaluated on the constraint shell.

The multiplier velocity never appears in L, so p_lam is the primary
constraint; the chain closes when a constraint finally depends on lam
itself. All on-shell work happens through an explicit reduction plan that
records which variable each constraint was solved for.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import sympy as sp

from .kernel import canon, generators, is_zero, solve_linear, to_exp


class DynamicsError(RuntimeError):
    pass


class SingularLagrangianError(DynamicsError):
    pass


class ChainError(DynamicsError):
    pass


class InversionError(DynamicsError):
    pass


@dataclass(frozen=True)
class PhaseSpace:
    """Ordered canonical pairs (q_i, p_i)."""
    pairs: Tuple[Tuple[sp.Symbol, sp.Symbol], ...]

    @property
    def coords(self) -> Tuple[sp.Symbol, ...]:
        return tuple(q for q, _ in self.pairs)

    @property
    def momenta(self) -> Tuple[sp.Symbol, ...]:
        return tuple(p for _, p in self.pairs)

    def momentum_of(self, q: sp.Symbol) -> sp.Symbol:
        for qq, pp in self.pairs:
            if qq == q:
                return pp
        raise KeyError(q)

    def poisson_bracket(self, f, g):
        f, g = sp.sympify(f), sp.sympify(g)
        tot = sp.S.Zero
        for q, p in self.pairs:
            fq, gp = sp.diff(f, q), sp.diff(g, p)
            if fq != 0 and gp != 0:
                tot += fq * gp
            fp, gq = sp.diff(f, p), sp.diff(g, q)
            if fp != 0 and gq != 0:
                tot -= fp * gq
        return canon(tot)


class LagrangianSystem:
    """L(q, qdot; lam) = L0 - lam*f with a velocityless multiplier."""

    def __init__(self, coords: Sequence[sp.Symbol], vels: Sequence[sp.Symbol],
                 lagrangian, multiplier: sp.Symbol,
                 multiplier_velocity: Optional[sp.Symbol] = None):
        self.coords = tuple(coords)
        self.vels = tuple(vels)
        if len(self.coords) != len(self.vels):
            raise DynamicsError('one velocity per coordinate')
        self.lagrangian = sp.sympify(lagrangian)
        self.multiplier = multiplier
        mv = multiplier_velocity
        if mv is None:
            mv = sp.Symbol(f'{multiplier.name}dot', real=True)
        if sp.diff(self.lagrangian, mv) != 0:
            raise SingularLagrangianError(
                'multiplier velocity appears in L; the primary constraint '
                'p_lam = 0 requires dL/dlamdot == 0')

    @classmethod
    def free_particle_constrained(cls, coords: Sequence[sp.Symbol], mass,
                                  constraint, multiplier: sp.Symbol
                                  ) -> 'LagrangianSystem':
        """Flat kinetic term minus lam * f(q)."""
        vels = [sp.Symbol(f'{q.name}dot', real=True) for q in coords]
        L = mass / 2 * sum(qd ** 2 for qd in vels) - multiplier * constraint
        return cls(coords, vels, L, multiplier)


class HamiltonianSystem:
    """Primary Hamiltonian H_p = H0 + u_mult * p_lam on the extended phase
    space; u_mult is recorded, never solved for."""

    def __init__(self, phase: PhaseSpace, base_hamiltonian, multiplier,
                 multiplier_momentum, u_mult: sp.Symbol):
        self.phase = phase
        self.base_hamiltonian = sp.sympify(base_hamiltonian)
        self.multiplier = multiplier
        self.multiplier_momentum = multiplier_momentum
        self.u_mult = u_mult
        self.hamiltonian = self.base_hamiltonian + u_mult * multiplier_momentum

    def poisson_bracket(self, f, g):
        return self.phase.poisson_bracket(f, g)


def legendre_transform(lag: LagrangianSystem,
                       u_mult: Optional[sp.Symbol] = None) -> HamiltonianSystem:
    """Invert p = dL/dqdot for the coordinate velocities (the system must be
    linear and invertible there) and attach the multiplier pair."""
    ps = [sp.Symbol(f'p_{q.name}', real=True) for q in lag.coords]
    eqs = [sp.expand(sp.diff(lag.lagrangian, qd) - p)
           for qd, p in zip(lag.vels, ps)]
    A, b = sp.linear_eq_to_matrix(eqs, lag.vels)
    if A.det() == 0:
        raise SingularLagrangianError(
            'velocity Hessian is singular beyond the multiplier direction')
    sol = A.LUsolve(b)
    vsub = {qd: canon(s) for qd, s in zip(lag.vels, sol)}
    H0 = canon(sum(p * vsub[qd] for p, qd in zip(ps, lag.vels))
               - lag.lagrangian.subs(vsub))
    lam = lag.multiplier
    plam = sp.Symbol(f'p_{lam.name}', real=True)
    phase = PhaseSpace(tuple(zip(lag.coords, ps)) + ((lam, plam),))
    if u_mult is None:
        u_mult = sp.Symbol('u_mult', real=True)
    return HamiltonianSystem(phase, H0, lam, plam, u_mult)


@dataclass
class ConstraintChain:
    """phi_1 = p_lam and its successors phi_{k+1} = {phi_k, H_p}; the last
    entry is the first constraint that depends on the multiplier."""
    constraints: List[sp.Expr]
    multiplier: sp.Symbol

    @property
    def length(self) -> int:
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def __getitem__(self, k):
        return self.constraints[k]


def constraint_chain(ham: HamiltonianSystem, max_length: int = 8) -> ConstraintChain:
    phis: List[sp.Expr] = [ham.multiplier_momentum]
    while True:
        nxt = ham.poisson_bracket(phis[-1], ham.hamiltonian)
        phis.append(nxt)
        if sp.diff(nxt, ham.multiplier) != 0:
            break
        if len(phis) >= max_length:
            raise ChainError(f'constraint chain did not close within '
                             f'{max_length} steps')
    return ConstraintChain(phis, ham.multiplier)


@dataclass
class ReductionPlan:
    """How to push expressions onto the constraint shell.

    surface_solution is applied first (chart substitution for an embedded
    case, the solved surface equation for an intrinsic one), then the stated
    momentum is solved from phi_3, the multiplier from phi_4, and the
    multiplier momentum is set to zero. cleanup, when present, runs right
    after the surface substitution (for inverse-trig collapses that the
    substitution exposes)."""
    surface_solution: Dict[sp.Symbol, sp.Expr] = field(default_factory=dict)
    momentum: Optional[sp.Symbol] = None
    cleanup: Optional[Callable[[sp.Expr], sp.Expr]] = None

    def describe(self) -> Dict[str, str]:
        out = {str(k): str(v) for k, v in self.surface_solution.items()}
        if self.momentum is not None:
            out[str(self.momentum)] = 'solved from phi_3'
        return out


class DiracStructure:
    """Constraint matrix C_ij = {phi_i, phi_j} on shell, its inverse, and
    Dirac brackets.

    Brackets come back uncancelled (a difference of normalized pieces);
    weak_equal tests them by numerator expansion, which is much cheaper than
    normalizing every bracket eagerly.
    """

    def __init__(self, ham: HamiltonianSystem, chain: ConstraintChain,
                 plan: ReductionPlan, check_inverse: bool = True):
        self.ham = ham
        self.chain = chain
        self.plan = plan
        self._subs_chain: List[Tuple[sp.Symbol, sp.Expr]] = []
        self._vec_cache: Dict[sp.Expr, List[sp.Expr]] = {}
        self._build_reduction()
        self._build_matrix(check_inverse)

    # -- reduction ---------------------------------------------------------

    def _pullback(self, e):
        e = sp.sympify(e).subs(list(self.plan.surface_solution.items()))
        if self.plan.cleanup is not None:
            e = self.plan.cleanup(e)
        return e

    def _build_reduction(self):
        phis = self.chain.constraints
        lam = self.ham.multiplier
        plam = self.ham.multiplier_momentum
        if len(phis) < 4:
            raise ChainError('reduction expects a length-4 chain')
        pv = self.plan.momentum
        if pv is not None:
            phi3 = self._pullback(phis[2])
            self._subs_chain.append((pv, solve_linear(phi3, pv)))
        phi4 = self._pullback(phis[3]).subs(self._subs_chain)
        self._subs_chain.append((lam, solve_linear(phi4, lam)))
        self._subs_chain.append((plam, sp.S.Zero))

    def onshell(self, e):
        e = self._pullback(e)
        for s in self._subs_chain:
            e = e.subs([s])
        return canon(e)

    @property
    def solved(self) -> Dict[sp.Symbol, sp.Expr]:
        return dict(self._subs_chain)

    # -- constraint matrix -------------------------------------------------

    def _build_matrix(self, check_inverse: bool):
        phis = self.chain.constraints
        n = len(phis)
        C = sp.zeros(n, n)
        for i in range(n):
            for j in range(i + 1, n):
                C[i, j] = self.onshell(self.ham.poisson_bracket(phis[i], phis[j]))
                C[j, i] = -C[i, j]
        self.C = C
        if n != 4:
            raise InversionError('inverse implemented for length-4 chains')
        # antisymmetric 4x4: Minv[i,j] = -eps_{ijkl} M[k,l] / pf, with the
        # Pfaffian pf = M01*M23 - M02*M13 + M03*M12; the generic adjugate
        # stalls on these entries
        fwd, back = generators(sp.Tuple(*[to_exp(e) for e in C]))
        M = sp.Matrix(n, n, [to_exp(e).xreplace(fwd) for e in C])
        pf = M[0, 1] * M[2, 3] - M[0, 2] * M[1, 3] + M[0, 3] * M[1, 2]
        if pf == 0:
            raise InversionError('constraint matrix is singular (zero Pfaffian); '
                                 'the constraints are not second class')
        Minv = sp.zeros(n, n)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                k, l = [t for t in range(n) if t not in (i, j)]
                Minv[i, j] = sp.cancel(sp.together(
                    -_eps4((i, j, k, l)) * M[k, l] / pf))
        if check_inverse:
            for i in range(n):
                for j in range(n):
                    s = sum(M[i, k] * Minv[k, j] for k in range(n)) \
                        - (1 if i == j else 0)
                    num, _ = sp.fraction(sp.together(s))
                    if sp.expand(num) != 0:
                        raise InversionError(f'C*Cinv != I at ({i},{j})')
        self.Cinv = Minv.applyfunc(lambda e: e.xreplace(back))

    # -- Dirac brackets ----------------------------------------------------

    def _bracket_vector(self, f):
        key = sp.sympify(f)
        if key not in self._vec_cache:
            self._vec_cache[key] = [self.onshell(self.ham.poisson_bracket(key, ph))
                                    for ph in self.chain]
        return self._vec_cache[key]

    def dirac_bracket(self, f, g):
        """{f, g}_D on shell, returned uncancelled."""
        base = self.onshell(self.ham.poisson_bracket(f, g))
        uf, ug = self._bracket_vector(f), self._bracket_vector(g)
        corr = sp.S.Zero
        n = self.chain.length
        for i in range(n):
            if uf[i] == 0:
                continue
            for j in range(n):
                if ug[j] == 0 or self.Cinv[i, j] == 0:
                    continue
                corr -= uf[i] * self.Cinv[i, j] * ug[j]
        return base - corr

    def dirac_bracket_canonical(self, f, g):
        return canon(self.dirac_bracket(f, g))

    def weak_equal(self, raw, want) -> bool:
        """raw == want after pushing want through the on-shell map."""
        return is_zero(raw - self.onshell(want))

    def equations_of_motion(self, variables, hamiltonian) -> Dict[sp.Symbol, sp.Expr]:
        """qdot = {q, H}_D for the listed phase-space variables."""
        return {z: self.dirac_bracket_canonical(z, hamiltonian)
                for z in variables}


def _eps4(seq) -> int:
    s, p = 1, list(seq)
    for i in range(4):
        for j in range(i + 1, 4):
            if p[i] > p[j]:
                s = -s
    return s
