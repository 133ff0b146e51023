"""Reference results and ordering-family definitions for the built-in cases.

Everything the case runner compares against lives here, keyed by meaning:
primary Hamiltonians, constraint chains, inverse constraint-matrix entries,
reduced dynamics, operator fixtures, anomaly residuals, and the ordering
families (with their known solution manifolds) for the embedded audits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import sympy as sp

from . import operators as ops
from . import surfaces as sf
from .kernel import hbar

I = sp.I


def _avg(A: ops.DiffOp, B: ops.DiffOp) -> ops.DiffOp:
    return (A + B) * sp.Rational(1, 2)


def _sym(*names):
    return sp.symbols(' '.join(names), real=True)


@dataclass
class AnsatzFamily:
    """A concrete weighted-word ansatz for one case's momentum audits."""
    label: str
    unknowns: Tuple[sp.Symbol, ...]
    constraints: List[sp.Expr]
    residuals: List[ops.DiffOp]
    description: str = ''


@dataclass
class CaseReference:
    """Golden data for one built-in case."""
    name: str
    kind: str                              # 'intrinsic' | 'embedded'
    surface: Callable[[], sf.Surface]
    classical: Dict[str, object]
    quantum: Dict[str, object]
    annotations: Dict[str, object] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# shared symbols

a = sp.Symbol('a', positive=True)
m = sp.Symbol('m', positive=True)
alpha = sp.Symbol('alpha', real=True)
beta = sp.Symbol('beta', real=True)
lam = sp.Symbol('lam', real=True)
r_family = sp.Symbol('r', positive=True)

x, y, z = sp.symbols('x y z', real=True)
p_x, p_y, p_z = sp.symbols('p_x p_y p_z', real=True)
H_letter = sp.Symbol('H_op', real=True)


def _delta(i, j):
    return 1 if i == j else 0


# ---------------------------------------------------------------------------
# catenoid, intrinsic chart

def _catenoid_intrinsic() -> CaseReference:
    surface = sf.catenoid()
    th, rho = surface.coords
    p_r, p_th, p_rho = _sym('p_r', 'p_theta', 'p_rho')
    r = r_family
    ch_r, sh_r = sp.cosh(rho / r), sp.sinh(rho / r)
    Dr = r * ch_r - rho * sh_r
    ch, sh, tnh = sp.cosh(rho / a), sp.sinh(rho / a), sp.tanh(rho / a)
    Hred = (p_th ** 2 + a ** 2 * p_rho ** 2) / (2 * m * a ** 2 * ch ** 2)
    classical = {
        'primary_hamiltonian':
            r ** 2 * ch_r ** 2 / (2 * m * Dr ** 2) * p_r ** 2
            - r * sh_r / (m * Dr) * p_r * p_rho
            + p_th ** 2 / (2 * m * r ** 2 * ch_r ** 2) + p_rho ** 2 / (2 * m)
            + lam * (r - a),
        'phi_2': a - r,
        'phi_3': r * (-(r * ch_r ** 2 / (m * Dr ** 2)) * p_r
                      + (sh_r / (m * Dr)) * p_rho),
        'phi_4': (r ** 2 * ch_r ** 2 / (m * Dr ** 2)) * lam
                 + r ** 2 * ch_r * (r * p_rho - 2 * rho * p_r
                                    + r * sp.cosh(2 * rho / r) * p_rho
                                    - (r * p_r + rho * p_rho)
                                    * sp.sinh(2 * rho / r)) ** 2
                 / (4 * m ** 2 * Dr ** 5)
                 - p_th ** 2 / (m ** 2 * r ** 2 * Dr * ch_r ** 3),
        'constraint_matrix_inverse': {
            (0, 1): (1 / (m * a ** 6 * ch ** 4))
                    * ((-5 * p_th ** 2 + a ** 2 * p_rho ** 2) * rho ** 2 / ch ** 4
                       + a * (-p_th ** 2 + a ** 2 * p_rho ** 2) * (2 * a - rho * tnh)
                       + (1 / ch ** 2) * (-a ** 4 * p_rho ** 2
                                          + p_th ** 2 * (5 * a ** 2 + 4 * rho ** 2)
                                          + 2 * a * (-5 * p_th ** 2
                                                     + a ** 2 * p_rho ** 2)
                                          * rho * tnh)),
            (0, 2): -(p_rho / (a ** 3 * ch ** 5)) * (a * ch - rho * sh)
                    * (2 * rho + a * sp.sinh(2 * rho / a)),
            (0, 3): (m / a ** 2) * (a - rho * tnh) ** 2,
            (1, 2): -(m / a ** 2) * (a - rho * tnh) ** 2,
        },
        'reduced_hamiltonian': Hred,
        'equations_of_motion': {
            th: p_th / (m * a ** 2 * ch ** 2),
            rho: p_rho / (m * ch ** 2),
            p_th: sp.S.Zero,
            p_rho: (2 / a) * tnh * Hred,
        },
    }
    quantum = {
        'hamiltonian_terms': {
            (2, 0): -hbar ** 2 / (2 * m) / (a ** 2 * ch ** 2),
            (0, 2): -hbar ** 2 / (2 * m) / ch ** 2,
            (0, 0): -hbar ** 2 / (2 * m) * beta / (a ** 2 * ch ** 4),
        },
        'momentum_terms': {
            th: {(1, 0): -I * hbar},
            rho: {(0, 1): -I * hbar, (0, 0): -I * hbar * tnh / a},
        },
        'conserved_momenta': (th,),
        'audit_momentum': rho,
        'bracket_in_letters': (2 / a) * tnh * H_letter,
        'letter_style': 'hamiltonian',
        'anomaly_residual': -beta * I * hbar ** 3 * sh / (m * a ** 3 * ch ** 5),
        'family_label': 'coefficient-symmetrized, Hamiltonian kept as a letter',
    }
    annotations = {
        'gauss_curvature': -1 / (a ** 2 * ch ** 4),
        'schrodinger_beta': sp.Rational(1),
        'expected_beta_pin': sp.Rational(0),
    }
    return CaseReference('catenoid-intrinsic', 'intrinsic', sf.catenoid,
                         classical, quantum, annotations)


# ---------------------------------------------------------------------------
# helicoid, intrinsic chart

def _helicoid_intrinsic() -> CaseReference:
    surface = sf.helicoid()
    u, v = surface.coords
    p_r, p_u, p_v = _sym('p_r', 'p_u', 'p_v')
    r = r_family
    Hred = (p_u ** 2 + p_v ** 2 / (a ** 2 + u ** 2)) / (2 * m)
    classical = {
        'primary_hamiltonian':
            ((r ** 2 + u ** 2) * p_r ** 2 - 2 * r * v * p_r * p_v
             + v ** 2 * (u ** 2 * p_u ** 2 + p_v ** 2)) / (2 * m * u ** 2 * v ** 2)
            + lam * (r - a),
        'phi_2': a - r,
        'phi_3': (p_v * r * v - p_r * (r ** 2 + u ** 2)) / (m * u ** 2 * v ** 2),
        'phi_4': ((r ** 2 + u ** 2) / (m * u ** 2 * v ** 2)) * lam
                 + 2 * (p_v * v - p_r * r)
                 * (p_r * (r ** 2 + u ** 2) - p_u * r * u * v ** 2 - p_v * r * v)
                 / (m ** 2 * u ** 4 * v ** 4),
        'constraint_matrix_inverse': {
            (0, 1): 2 * p_v * u * v * (3 * a ** 4 * p_u
                                       + 2 * a ** 2 * u * (p_u * u + p_v * v)
                                       - p_u * u ** 4) / (m * (a ** 2 + u ** 2) ** 4),
            (0, 2): 2 * u * v * (a ** 2 * p_u * v + p_v * u)
                    / ((a ** 2 + u ** 2) ** 2),
            (0, 3): m * u ** 2 * v ** 2 / (a ** 2 + u ** 2),
            (1, 2): -m * u ** 2 * v ** 2 / (a ** 2 + u ** 2),
        },
        'reduced_hamiltonian': Hred,
        'equations_of_motion': {
            u: p_u / m,
            v: p_v / (m * (u ** 2 + a ** 2)),
            p_u: u * p_v ** 2 / (m * (a ** 2 + u ** 2) ** 2),
            p_v: sp.S.Zero,
        },
    }
    quantum = {
        'hamiltonian_terms': {
            (2, 0): -hbar ** 2 / (2 * m),
            (0, 2): -hbar ** 2 / (2 * m) / (a ** 2 + u ** 2),
            (1, 0): -hbar ** 2 / (2 * m) * u / (a ** 2 + u ** 2),
            (0, 0): -hbar ** 2 / (2 * m) * beta * a ** 2 / (a ** 2 + u ** 2) ** 2,
        },
        'momentum_terms': {
            u: {(1, 0): -I * hbar, (0, 0): -I * hbar * u / (2 * (a ** 2 + u ** 2))},
            v: {(0, 1): -I * hbar},
        },
        'conserved_momenta': (v,),
        'audit_momentum': u,
        'bracket_in_letters': u * p_v ** 2 / (m * (a ** 2 + u ** 2) ** 2),
        'letter_style': 'momenta',
        'anomaly_residual': -(I * hbar ** 3 * u / (4 * m * (a ** 2 + u ** 2) ** 3))
                            * (a ** 2 * (-5 + 8 * beta) + u ** 2),
        'family_label': 'coefficient-symmetrized momentum word',
    }
    annotations = {
        'gauss_curvature': -a ** 2 / (a ** 2 + u ** 2) ** 2,
        'schrodinger_beta': sp.Rational(1),
        'expected_infeasible': True,
    }
    return CaseReference('helicoid-intrinsic', 'intrinsic', sf.helicoid,
                         classical, quantum, annotations)


# ---------------------------------------------------------------------------
# catenoid, embedded chart

def _catenoid_embedded() -> CaseReference:
    ch, sh, tnh = sp.cosh(z / a), sp.sinh(z / a), sp.tanh(z / a)
    kappa = [x, y, -a * sh * ch]
    p_amb = [p_x, p_y, p_z]
    H_free = (p_x ** 2 + p_y ** 2 + p_z ** 2) / (2 * m)
    classical = {
        'constraint': x ** 2 + y ** 2 - a ** 2 * ch ** 2,
        'phi_2': -(x ** 2 + y ** 2 - a ** 2 * ch ** 2),
        'phi_3': (-2 * (p_x * x + p_y * y) + a * p_z * sp.sinh(2 * z / a)) / m,
        'phi_4': lam * (-a ** 2 + 8 * (x ** 2 + y ** 2)
                        + a ** 2 * sp.cosh(4 * z / a)) / (2 * m)
                 - 2 * (p_x ** 2 + p_y ** 2 - p_z ** 2 * sp.cosh(2 * z / a)) / m ** 2,
        'constraint_matrix_inverse': {
            (0, 1): (12 * (p_x ** 2 + p_y ** 2) + 5 * p_z ** 2
                     - 4 * (p_x ** 2 + p_y ** 2 + 2 * p_z ** 2) * sp.cosh(2 * z / a)
                     + 3 * p_z ** 2 * sp.cosh(4 * z / a))
                    / (8 * a ** 4 * m * ch ** 8),
            (0, 2): -tnh / (a ** 3 * ch ** 4) * p_z,
            (0, 3): m / (4 * a ** 2 * ch ** 4),
            (1, 2): -m / (4 * a ** 2 * ch ** 4),
        },
        'reduced_hamiltonian': H_free,
        'position_momentum': lambda i, j:
            _delta(i, j) - kappa[i] * kappa[j] / (a ** 2 * ch ** 4),
        'momentum_momentum': lambda i, j:
            -(kappa[i] * p_amb[j] * (_delta(0, j) + _delta(1, j)
                                     - _delta(2, j) * sp.cosh(2 * z / a))
              - kappa[j] * p_amb[i] * (_delta(0, i) + _delta(1, i)
                                       - _delta(2, i) * sp.cosh(2 * z / a))) \
            / (a ** 2 * ch ** 4),
        'momentum_hamiltonian': lambda i:
            -kappa[i] * (p_x ** 2 + p_y ** 2 + p_z ** 2) / (m * a ** 2 * ch ** 4)
            + 2 * kappa[i] * p_z ** 2 / (m * a ** 2 * ch ** 2),
        'tangent_covector': kappa,
    }
    b = beta
    w01, w02, w03 = sp.symbols('w01 w02 w03', real=True)
    w11, w12, w13 = sp.symbols('w11 w12 w13', real=True)
    w21, w22, w23 = sp.symbols('w21 w22 w23', real=True)
    quantum = {
        'family': build_catenoid_embedded_family,
        'family_label': 'per-component split family with Hamiltonian sector',
        'expected_family': {
            w01: sp.Rational(5, 2) - sp.Rational(9, 4) * b, w02: b - 1,
            w03: sp.Rational(5, 4) * b - sp.Rational(1, 2),
            w11: sp.Rational(5, 2) - sp.Rational(9, 4) * b, w12: b - 1,
            w13: sp.Rational(5, 4) * b - sp.Rational(1, 2),
            w21: b / 4 + sp.Rational(1, 2), w22: sp.Rational(1, 4) - b / 4,
            w23: sp.Rational(1, 4),
        },
        'printed_weights_at_beta_1': {
            'transverse': (sp.Rational(1, 4), 0, sp.Rational(3, 4)),
            'axial': (sp.Rational(3, 4), 0, sp.Rational(1, 4)),
        },
    }
    annotations = {'printed_ordering_beta': sp.Rational(1)}
    return CaseReference('catenoid-embedded', 'embedded', sf.catenoid,
                         classical, quantum, annotations)


def build_catenoid_embedded_family(surface: sf.Surface, H: ops.DiffOp,
                                   pg: Sequence[ops.DiffOp], mass,
                                   beta_sym) -> AnsatzFamily:
    """Per Cartesian component: fixed Hamiltonian sector plus three weighted
    words (plain-symmetrized, sandwich, split-symmetrized) built on p_z^2;
    the split factor pair differs between the transverse and axial
    components."""
    th, rho = surface.coords
    aa = surface.params[0]
    ch = sp.cosh(rho / aa)
    coords = surface.coords
    kappa = [aa * ch * sp.cos(th), aa * ch * sp.sin(th),
             -aa * sp.sinh(rho / aa) * ch]
    pz2 = ops.compose(pg[2], pg[2])
    splits = [(2 / (mass * aa ** 2 * ch ** 2), kappa[0]),
              (2 / (mass * aa ** 2 * ch ** 2), kappa[1]),
              (-2 * sp.tanh(rho / aa) / (mass * aa * ch ** 2), ch ** 2)]
    residuals, unknowns, constraints = [], [], []
    for i in range(3):
        cH = -2 * kappa[i] / (aa ** 2 * ch ** 4)
        McH = ops.mult_op(coords, cH)
        Hsec = _avg(ops.compose(McH, H), ops.compose(H, McH))
        f = 2 * kappa[i] / (mass * aa ** 2 * ch ** 2)
        Mf = ops.mult_op(coords, f)
        g1, g2 = splits[i]
        M1, M2 = ops.mult_op(coords, g1), ops.mult_op(coords, g2)
        W1 = _avg(ops.compose(Mf, pz2), ops.compose(pz2, Mf))
        W2 = ops.compose(pg[2], ops.compose(Mf, pg[2]))
        W3 = _avg(ops.compose(M1, ops.compose(pz2, M2)),
                  ops.compose(M2, ops.compose(pz2, M1)))
        ws = sp.symbols(f'w{i}1 w{i}2 w{i}3', real=True)
        unknowns.extend(ws)
        constraints.append(ws[0] + ws[1] + ws[2] - 1)
        Q = Hsec + W1 * ws[0] + W2 * ws[1] + W3 * ws[2]
        residuals.append(ops.commutator(pg[i], H) - Q * (I * hbar))
    return AnsatzFamily(
        label='split-family',
        unknowns=tuple(unknowns),
        constraints=constraints,
        residuals=residuals,
        description='H-sector fixed; weights per component over plain/'
                    'sandwich/split words on p_z^2')


# ---------------------------------------------------------------------------
# helicoid, embedded chart

def _helicoid_embedded() -> CaseReference:
    chi = [y, -x, (x ** 2 + y ** 2) / a]
    r2 = x ** 2 + y ** 2
    H_free = (p_x ** 2 + p_y ** 2 + p_z ** 2) / (2 * m)
    classical = {
        'constraint': z - a * sp.atan2(y, x),
        'phi_2': -(z - a * sp.atan2(y, x)),
        'phi_3': (a * (p_y * x - p_x * y) - p_z * (x ** 2 + y ** 2))
                 / (m * (x ** 2 + y ** 2)),
        'phi_4': lam * (a ** 2 + x ** 2 + y ** 2) / (m * (x ** 2 + y ** 2))
                 + 2 * a * (-p_y * x + p_x * y) * (p_x * x + p_y * y)
                 / (m ** 2 * (x ** 2 + y ** 2) ** 2),
        'constraint_matrix_inverse': {
            (0, 1): 4 * a ** 2 * (p_y * x - p_x * y) ** 2
                    / (m * (x ** 2 + y ** 2) * (a ** 2 + x ** 2 + y ** 2) ** 2),
            (0, 2): 2 * a ** 2 * (p_x * x + p_y * y)
                    / (a ** 2 + x ** 2 + y ** 2) ** 2,
            (0, 3): m * (x ** 2 + y ** 2) / (a ** 2 + x ** 2 + y ** 2),
            (1, 2): -m * (x ** 2 + y ** 2) / (a ** 2 + x ** 2 + y ** 2),
        },
        'reduced_hamiltonian': H_free,
        'position_momentum': lambda i, j:
            _delta(i, j) - a ** 2 * chi[i] * chi[j] / (r2 * (a ** 2 + r2)),
        'momentum_momentum': lambda i, j:
            -a ** 2 / (r2 * (a ** 2 + r2)) * (
                chi[i] * (_delta(0, j) * p_y - _delta(1, j) * p_x
                          + _delta(2, j) * 2 * (x * p_x + y * p_y) / a)
                - chi[j] * (_delta(0, i) * p_y - _delta(1, i) * p_x
                            + _delta(2, i) * 2 * (x * p_x + y * p_y) / a)),
        'momentum_hamiltonian': lambda i:
            -2 * a * (p_x * x + p_y * y) * p_z * chi[i] / (m * r2 * (a ** 2 + r2)),
        'tangent_covector': chi,
    }
    al1, al2, al3 = sp.symbols('alpha1 alpha2 alpha3', real=True)
    quantum = {
        'family': build_helicoid_embedded_family,
        'family_label': 'shared three-weight family over coefficient/word '
                        'placements',
        'expected_family': {
            al1: 2 * beta / 3, al2: 2 * beta / 3, al3: 1 - 4 * beta / 3,
        },
        'derived_beta_relation': beta - sp.Rational(3, 4) * (1 - al3),
        'printed_beta_relation': beta + sp.Rational(3, 4) * (1 - al3),
    }
    annotations = {'printed_relation_sign_differs': True}
    return CaseReference('helicoid-embedded', 'embedded', sf.helicoid,
                         classical, quantum, annotations)


def build_helicoid_embedded_family(surface: sf.Surface, H: ops.DiffOp,
                                   pg: Sequence[ops.DiffOp], mass,
                                   beta_sym) -> AnsatzFamily:
    """One shared three-weight family: each classical monomial c*p_a*p_z maps
    to alpha1*Mc(S) + alpha2*S(Mc) + alpha3*(1/2)(p_a Mc p_z + p_z Mc p_a)
    with S the symmetrized momentum pair."""
    u, v = surface.coords
    aa = surface.params[0]
    coords = surface.coords
    chi = [u * sp.sin(v), -u * sp.cos(v), u ** 2 / aa]
    xb, yb = u * sp.cos(v), u * sp.sin(v)
    al = sp.symbols('alpha1 alpha2 alpha3', real=True)
    residuals = []
    for i in range(3):
        gi = 2 * aa * chi[i] / (mass * u ** 2 * (aa ** 2 + u ** 2))
        Q = ops.zero_op(coords)
        for cfun, pa in ((xb * gi, pg[0]), (yb * gi, pg[1])):
            Mc = ops.mult_op(coords, cfun)
            S = _avg(ops.compose(pa, pg[2]), ops.compose(pg[2], pa))
            W1 = ops.compose(Mc, S)
            W2 = ops.compose(S, Mc)
            W3 = _avg(ops.compose(pa, ops.compose(Mc, pg[2])),
                      ops.compose(pg[2], ops.compose(Mc, pa)))
            Q = Q + W1 * (-al[0]) + W2 * (-al[1]) + W3 * (-al[2])
        residuals.append(ops.commutator(pg[i], H) - Q * (I * hbar))
    return AnsatzFamily(
        label='pair-family',
        unknowns=al,
        constraints=[al[0] + al[1] + al[2] - 1],
        residuals=residuals,
        description='classical monomials c*p*p_z quantized with weighted '
                    'coefficient placement, one weight triple shared by all '
                    'components')


# ---------------------------------------------------------------------------

_BUILDERS = {
    'catenoid-intrinsic': _catenoid_intrinsic,
    'helicoid-intrinsic': _helicoid_intrinsic,
    'catenoid-embedded': _catenoid_embedded,
    'helicoid-embedded': _helicoid_embedded,
}


def case_names() -> Tuple[str, ...]:
    return tuple(_BUILDERS)


def reference_for(name: str) -> CaseReference:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f'no built-in case named {name!r}; '
                       f'available: {", ".join(_BUILDERS)}') from None
