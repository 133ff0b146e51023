"""Parametrized surfaces embedded in R^3: metric data, curvatures, and the
operator constructions attached to a surface.

The normal is oriented as r_u x r_v / |r_u x r_v| in the declared coordinate
order. Gauss curvature is available twice: from the shape operator and from
the Brioschi formula (first fundamental form only), which is what the
Theorema Egregium checks compare.
"""
from __future__ import annotations

import json
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

import sympy as sp

from . import operators as ops
from .kernel import (EqualityConfig, EvalError, Verdict, canon, equals,
                     eval_numeric, is_zero, make_symbol, parse, sample_points)


class SurfaceError(ValueError):
    pass


class Surface:
    def __init__(self, name: str, coords: Sequence[sp.Symbol],
                 embedding: Sequence, params: Sequence[sp.Symbol] = (),
                 implicit: Optional[sp.Expr] = None,
                 domain: Optional[Dict[sp.Symbol, Tuple[float, float]]] = None):
        self.name = name
        self.coords = tuple(coords)
        if len(self.coords) != 2:
            raise SurfaceError('surfaces are two-dimensional: exactly two coordinates')
        self.embedding = sp.Matrix([sp.sympify(c) for c in embedding])
        if self.embedding.shape != (3, 1):
            raise SurfaceError('embedding must have three components')
        self.params = tuple(params)
        self.implicit = sp.sympify(implicit) if implicit is not None else None
        self.domain = dict(domain or {})

    def __repr__(self):
        return f'Surface({self.name!r}, coords={self.coords})'

    # -- first fundamental form -------------------------------------------

    @cached_property
    def jacobian(self) -> sp.Matrix:
        return self.embedding.jacobian(self.coords)

    @cached_property
    def g(self) -> sp.Matrix:
        J = self.jacobian
        return (J.T * J).applyfunc(canon)

    @property
    def first_fundamental_form(self) -> sp.Matrix:
        return self.g

    @cached_property
    def ginv(self) -> sp.Matrix:
        return self.g.inv().applyfunc(canon)

    @cached_property
    def detg(self):
        return canon(self.g.det())

    @cached_property
    def sqrtg(self):
        # factoring first lets perfect even powers leave the radical
        return sp.sqrt(sp.factor(self.detg))

    # -- normal and second fundamental form -------------------------------
    #
    # Curvatures are computed square-root-free: square roots of exp-form trig
    # content are branch-ambiguous, so detg**2 and the unnormalized normal
    # carry all the simplification and sqrtg enters only as a single inert
    # common factor that cancels structurally where it must.

    @cached_property
    def _normal_raw(self) -> sp.Matrix:
        ru, rv = self.jacobian[:, 0], self.jacobian[:, 1]
        return ru.cross(rv).applyfunc(canon)

    @cached_property
    def normal(self) -> sp.Matrix:
        return (self._normal_raw / self.sqrtg).applyfunc(sp.cancel)

    @cached_property
    def _h_raw(self) -> sp.Matrix:
        # second fundamental form scaled by sqrtg
        return sp.Matrix(2, 2, lambda i, j: canon(
            sp.diff(self.embedding, self.coords[i], self.coords[j])
            .dot(self._normal_raw)))

    @cached_property
    def h(self) -> sp.Matrix:
        return (self._h_raw / self.sqrtg).applyfunc(sp.cancel)

    @property
    def second_fundamental_form(self) -> sp.Matrix:
        return self.h

    @cached_property
    def shape_operator(self) -> sp.Matrix:
        return (self.ginv * self.h).applyfunc(sp.cancel)

    @cached_property
    def mean_curvature(self):
        num = canon((self.ginv * self._h_raw).trace())
        if num == 0:
            return sp.S.Zero
        return sp.cancel(num / (2 * self.sqrtg))

    @cached_property
    def gauss_curvature(self):
        return canon(self._h_raw.det() / self.detg ** 2)

    @cached_property
    def brioschi_gauss_curvature(self):
        """Gauss curvature from E, F, G alone (Brioschi determinant form)."""
        u, v = self.coords
        E, F, G = self.g[0, 0], self.g[0, 1], self.g[1, 1]
        Eu, Ev = sp.diff(E, u), sp.diff(E, v)
        Fu, Fv = sp.diff(F, u), sp.diff(F, v)
        Gu, Gv = sp.diff(G, u), sp.diff(G, v)
        Evv, Guu, Fuv = sp.diff(Ev, v), sp.diff(Gu, u), sp.diff(Fu, v)
        M1 = sp.Matrix([
            [-Evv / 2 + Fuv - Guu / 2, Eu / 2, Fu - Ev / 2],
            [Fv - Gu / 2, E, F],
            [Gv / 2, F, G]])
        M2 = sp.Matrix([
            [0, Ev / 2, Gu / 2],
            [Ev / 2, E, F],
            [Gu / 2, F, G]])
        return canon((M1.det() - M2.det()) / (E * G - F ** 2) ** 2)

    # -- operators ---------------------------------------------------------

    @cached_property
    def _laplace_beltrami(self) -> ops.DiffOp:
        n = len(self.coords)
        out: Dict[Tuple[int, ...], sp.Expr] = {}
        for mu in range(n):
            for nu in range(n):
                if self.ginv[mu, nu] == 0:
                    continue
                idx = tuple((1 if k == mu else 0) + (1 if k == nu else 0)
                            for k in range(n))
                out[idx] = out.get(idx, 0) + self.ginv[mu, nu]
                first = canon(sp.diff(self.sqrtg * self.ginv[mu, nu],
                                      self.coords[mu]) / self.sqrtg)
                if first != 0:
                    idx1 = tuple(1 if k == nu else 0 for k in range(n))
                    out[idx1] = out.get(idx1, 0) + first
        return ops.DiffOp(self.coords, out)

    def laplace_beltrami(self) -> ops.DiffOp:
        return self._laplace_beltrami

    def hermitian_momentum(self, mu) -> ops.DiffOp:
        return ops.hermitian_momentum(self, mu)

    def hamiltonian_operator(self, m, alpha, beta) -> ops.DiffOp:
        return ops.hamiltonian_operator(self, m, alpha, beta)

    def geometric_momentum(self):
        return ops.geometric_momentum(self)

    def heisenberg_momentum(self, m, H):
        return ops.heisenberg_momentum(self, m, H)

    def momentum_from_heisenberg(self, m, H):
        return ops.momentum_from_heisenberg(self, m, H)

    def geometric_potential(self, alpha, beta):
        return canon(alpha * self.mean_curvature ** 2 - beta * self.gauss_curvature)

    # -- checks ------------------------------------------------------------

    def equality_config(self, seed: int = 0, samples: int = 20) -> EqualityConfig:
        return EqualityConfig(samples=samples, seed=seed, domains=dict(self.domain))

    def check_regular(self, seed: int = 0, samples: int = 8) -> None:
        """Numeric immersion check: det g must stay away from zero on sampled
        domain points. Raises SurfaceError on failure."""
        cfg = self.equality_config(seed=seed, samples=samples)
        syms = set(self.coords) | set(self.params)
        bad = []

        def validate(pt):
            try:
                val = eval_numeric(self.detg, pt, cfg)
            except EvalError:
                return False
            if abs(val) < 1e-12:
                bad.append(pt)
            return True

        sample_points(syms, cfg, validate=validate)
        if bad:
            raise SurfaceError(f'{self.name}: degenerate metric at {bad[0]}')

    def check_implicit(self, seed: int = 0) -> Verdict:
        """Verify the embedding satisfies the declared implicit equation."""
        if self.implicit is None:
            raise SurfaceError(f'{self.name}: no implicit form declared')
        x, y, z = sp.symbols('x y z', real=True)
        pulled = self.implicit.subs(
            {x: self.embedding[0], y: self.embedding[1], z: self.embedding[2]},
            simultaneous=True)
        return equals(pulled, 0, self.equality_config(seed=seed))


# ---------------------------------------------------------------------------
# JSON loading

def load_surface(source) -> Surface:
    """Build a Surface from a JSON file path, JSON text, or a dict.

    Schema: name, coords (two names), embedding {x,y,z}, optional params
    [{name, positive}], optional implicit (in x, y, z and params), optional
    domain {coord: [lo, hi]}. Expressions use the kernel grammar. The loaded
    surface is regularity-checked, and the implicit form, when present, is
    verified against the embedding.
    """
    if isinstance(source, dict):
        data = source
    else:
        text = None
        try:
            with open(source) as fh:
                text = fh.read()
        except (OSError, TypeError):
            text = source
        data = json.loads(text)
    try:
        name = data['name']
        coord_names = data['coords']
        emb = data['embedding']
    except KeyError as exc:
        raise SurfaceError(f'missing field {exc}') from None
    if len(coord_names) != 2:
        raise SurfaceError('coords must list exactly two names')
    coords = tuple(make_symbol(n, 'coordinate') for n in coord_names)
    params = tuple(make_symbol(p['name'], 'parameter', positive=p.get('positive', False))
                   for p in data.get('params', ()))
    table = {s.name: s for s in coords + params}
    try:
        embedding = [parse(emb[ax], table) for ax in ('x', 'y', 'z')]
    except KeyError as exc:
        raise SurfaceError(f'embedding missing component {exc}') from None
    implicit = None
    if data.get('implicit'):
        itable = dict(table)
        for ax in ('x', 'y', 'z'):
            itable.setdefault(ax, sp.Symbol(ax, real=True))
        implicit = parse(data['implicit'], itable)
    domain = {}
    for cname, rng in (data.get('domain') or {}).items():
        if cname not in table:
            raise SurfaceError(f'domain for unknown symbol {cname!r}')
        lo, hi = float(rng[0]), float(rng[1])
        domain[table[cname]] = (lo, hi)
    s = Surface(name, coords, embedding, params=params, implicit=implicit,
                domain=domain)
    s.check_regular()
    if s.implicit is not None:
        verdict = s.check_implicit()
        if not verdict:
            raise SurfaceError(f'{name}: embedding does not satisfy the '
                               f'implicit equation ({verdict.value})')
    return s


# ---------------------------------------------------------------------------
# builtin surfaces

def catenoid(radius: Optional[sp.Symbol] = None) -> Surface:
    """Catenoid of neck radius a, chart (theta, rho): the axial coordinate is
    arclength along the profile."""
    a = radius if radius is not None else make_symbol('a', 'parameter', positive=True)
    th = make_symbol('theta', 'coordinate')
    rho = make_symbol('rho', 'coordinate')
    ch = sp.cosh(rho / a)
    x, y, z = sp.symbols('x y z', real=True)
    return Surface('catenoid', (th, rho),
                   [a * ch * sp.cos(th), a * ch * sp.sin(th), rho],
                   params=(a,),
                   implicit=x ** 2 + y ** 2 - a ** 2 * sp.cosh(z / a) ** 2,
                   domain={th: (0.3, 1.2), rho: (-0.9, 0.9)})


def helicoid(pitch: Optional[sp.Symbol] = None) -> Surface:
    """Helicoid of pitch a, chart (u, v): u the ruling coordinate, v the turn
    angle."""
    a = pitch if pitch is not None else make_symbol('a', 'parameter', positive=True)
    u = make_symbol('u', 'coordinate')
    v = make_symbol('v', 'coordinate')
    x, y, z = sp.symbols('x y z', real=True)
    return Surface('helicoid', (u, v),
                   [u * sp.cos(v), u * sp.sin(v), a * v],
                   params=(a,),
                   implicit=z - a * sp.atan2(y, x),
                   domain={u: (0.4, 1.6), v: (0.2, 1.2)})


def sphere(radius: Optional[sp.Symbol] = None) -> Surface:
    R = radius if radius is not None else make_symbol('R', 'parameter', positive=True)
    th = make_symbol('theta', 'coordinate')
    ph = make_symbol('phi', 'coordinate')
    x, y, z = sp.symbols('x y z', real=True)
    return Surface('sphere', (th, ph),
                   [R * sp.sin(th) * sp.cos(ph), R * sp.sin(th) * sp.sin(ph),
                    R * sp.cos(th)],
                   params=(R,),
                   implicit=x ** 2 + y ** 2 + z ** 2 - R ** 2,
                   domain={th: (0.4, 1.2), ph: (0.2, 1.3)})


def plane() -> Surface:
    u = make_symbol('u', 'coordinate')
    v = make_symbol('v', 'coordinate')
    z = sp.Symbol('z', real=True)
    return Surface('plane', (u, v), [u, v, sp.S.Zero], implicit=z)


BUILTIN_SURFACES = {'catenoid': catenoid, 'helicoid': helicoid,
                    'sphere': sphere, 'plane': plane}
