"""Expression substrate: parsing, printing, calculus, canonicalization, and
the equality oracle used by every other module.

Expressions are sympy trees. Canonicalization works on an exponential basis:
circular/hyperbolic functions are rewritten to exp node-by-node, every exp
atom is mapped to a power product of dummy generators (one generator per
monomial kernel of the exp arguments), and rational normalization happens in
that generator space.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import sympy as sp

hbar = sp.Symbol('hbar', positive=True)

_TRIGH = (sp.sinh, sp.cosh, sp.tanh, sp.coth, sp.sin, sp.cos, sp.tan, sp.cot)
_TRIGH_SET = frozenset(_TRIGH)


class ParseError(ValueError):
    """Syntax error with a character position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f'{message} (at position {pos})')
        self.pos = pos


class CyclicBindingError(ValueError):
    pass


class EvalError(ValueError):
    pass


# ---------------------------------------------------------------------------
# symbols

SYMBOL_KINDS = ('coordinate', 'momentum', 'multiplier', 'parameter')
_kind_registry: Dict[sp.Symbol, str] = {}


def make_symbol(name: str, kind: str = 'parameter', positive: bool = False) -> sp.Symbol:
    """Create (or fetch) a real symbol and record its kind.

    Re-registering a name with a different kind raises: kinds are fixed at
    creation.
    """
    if kind not in SYMBOL_KINDS:
        raise ValueError(f'unknown symbol kind {kind!r}')
    s = sp.Symbol(name, real=True, positive=True) if positive else sp.Symbol(name, real=True)
    old = _kind_registry.get(s)
    if old is not None and old != kind:
        raise ValueError(f'symbol {name!r} already registered as {old}')
    _kind_registry[s] = kind
    return s


def kind_of(s: sp.Symbol) -> Optional[str]:
    return _kind_registry.get(s)


# ---------------------------------------------------------------------------
# canonicalization on the exponential basis

def to_exp(e):
    """Rewrite circular/hyperbolic functions to exp form, node by node.

    A blanket rewrite(exp) is avoided: it also rewrites Pow into exp(log),
    which destroys the rational structure the normalizer relies on.
    """
    e = sp.sympify(e)
    if e.has(*_TRIGH):
        e = e.replace(lambda x: x.func in _TRIGH_SET, lambda x: x.rewrite(sp.exp))
    return e


def _kernel_terms(arg):
    out = []
    for term in sp.Add.make_args(sp.expand(arg)):
        c, K = term.as_coeff_Mul(rational=True)
        if K.could_extract_minus_sign():
            c, K = -c, -K
        out.append((c, K))
    return out


def generators(e):
    """Forward/backward maps between exp atoms and dummy generators.

    exp(sum_K q_K*K) -> prod_K t_K**(q_K/s_K) with t_K = exp(s_K*K), s_K the
    rational gcd of the coefficients seen for kernel K. Generators are created
    in sort-key order under distinct names; with identical dummy names sympy's
    generator ordering falls back on set-iteration order, which makes the
    downstream gcd cost nondeterministic.
    """
    atoms = sorted(e.atoms(sp.exp), key=sp.default_sort_key)
    decomp = {f: _kernel_terms(f.args[0]) for f in atoms}
    coeffs: Dict = {}
    for terms in decomp.values():
        for c, K in terms:
            coeffs.setdefault(K, []).append(c)
    dummy, scale, back = {}, {}, {}
    for n, (K, cs) in enumerate(sorted(coeffs.items(),
                                       key=lambda kc: sp.default_sort_key(kc[0]))):
        s = sp.Rational(reduce(sp.igcd, [abs(c.p) for c in cs]),
                        reduce(sp.ilcm, [c.q for c in cs]))
        d = (sp.Dummy(f't{n}', positive=True) if not K.has(sp.I)
             else sp.Dummy(f't{n}', nonzero=True))
        dummy[K], scale[K] = d, s
        back[d] = sp.exp(s * K)
    fwd = {}
    for f, terms in decomp.items():
        fwd[f] = sp.Mul(*[dummy[K] ** int(c / scale[K]) for c, K in terms])
    return fwd, back


def simplify(e):
    """Canonical form: rational normalization over the exponential basis.

    Idempotent and value-preserving; transcendental applications other than
    the rewritten trig/hyperbolic family are treated as atoms.
    """
    e = to_exp(sp.sympify(e))
    fwd, back = generators(e)
    return sp.cancel(sp.together(e.xreplace(fwd))).xreplace(back)


canon = simplify


def is_zero(e) -> bool:
    """Decide e == 0 by expanding the numerator in generator space."""
    e = to_exp(sp.sympify(e))
    fwd, _ = generators(e)
    num, _den = sp.fraction(sp.together(e.xreplace(fwd)))
    return sp.expand(num) == 0


def solve_linear(expr, x):
    """Solve expr == 0 for x; the numerator must be linear in x."""
    e = to_exp(sp.sympify(expr))
    fwd, back = generators(e)
    num, _den = sp.fraction(sp.together(e.xreplace(fwd)))
    cs = sp.Poly(num, x).all_coeffs()
    if len(cs) != 2:
        raise ValueError(f'not linear in {x}: degree {len(cs) - 1}')
    return sp.cancel(-cs[1] / cs[0]).xreplace(back)


def numerator_coefficients(e, keep: Iterable[sp.Symbol]) -> List[sp.Expr]:
    """Polynomial coefficients of the normalized numerator of e, taken with
    respect to every free symbol except those in `keep`.

    The returned expressions depend only on `keep` symbols (typically solver
    unknowns); e == 0 identically iff all of them vanish. Poly runs entirely
    in generator space: exp atoms inside Poly coefficients would force the
    symbolic-domain (EX) arithmetic, which is catastrophically slow.
    """
    keep = set(keep)
    e = to_exp(sp.sympify(e))
    fwd, _ = generators(e)
    num = sp.expand(sp.fraction(sp.together(e.xreplace(fwd)))[0])
    if num == 0:
        return []
    others = sorted(num.free_symbols - keep, key=sp.default_sort_key)
    if not others:
        return [num]
    return [sp.expand(c) for c in sp.Poly(num, *others).coeffs()]


# ---------------------------------------------------------------------------
# parser

_FUNCTIONS: Dict[str, Tuple[Callable, int]] = {
    'sin': (sp.sin, 1), 'cos': (sp.cos, 1), 'tan': (sp.tan, 1),
    'sinh': (sp.sinh, 1), 'cosh': (sp.cosh, 1), 'tanh': (sp.tanh, 1),
    'exp': (sp.exp, 1), 'ln': (sp.log, 1), 'sqrt': (sp.sqrt, 1),
    'arctan': (sp.atan, 1), 'arctan2': (sp.atan2, 2),
}

_CONSTANTS = {'I': sp.I, 'hbar': hbar}


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self):
        t = self.text
        i = self.pos
        while i < len(t) and t[i].isspace():
            i += 1
        self.pos = i
        if i >= len(t):
            return ('end', '', i)
        c = t[i]
        if c.isdigit():
            j = i
            while j < len(t) and t[j].isdigit():
                j += 1
            if j < len(t) and t[j] == '.':
                raise ParseError('floating-point literals are not allowed; '
                                 'use exact rationals p/q', j)
            return ('number', t[i:j], i)
        if c.isalpha() or c == '_':
            j = i
            while j < len(t) and (t[j].isalnum() or t[j] == '_'):
                j += 1
            return ('name', t[i:j], i)
        if t.startswith('**', i):
            return ('op', '^', i)
        if c in '+-*/^(),':
            return ('op', c, i)
        raise ParseError(f'unexpected character {c!r}', i)

    def next(self):
        kind, val, start = self.peek()
        self.pos = start + (2 if (kind, val) == ('op', '^')
                            and self.text.startswith('**', start) else len(val) or 0)
        if kind == 'end':
            self.pos = len(self.text)
        return (kind, val, start)


class _Parser:
    def __init__(self, text: str, symbols: Optional[Dict[str, sp.Symbol]] = None):
        self.tk = _Tokenizer(text)
        self.symbols = symbols or {}

    def parse(self):
        e = self.expr()
        kind, val, pos = self.tk.peek()
        if kind != 'end':
            raise ParseError(f'unexpected {val!r}', pos)
        return e

    def expr(self):
        e = self.term()
        while True:
            kind, val, _ = self.tk.peek()
            if kind == 'op' and val in '+-':
                self.tk.next()
                rhs = self.term()
                e = e + rhs if val == '+' else e - rhs
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            kind, val, _ = self.tk.peek()
            if kind == 'op' and val in '*/':
                self.tk.next()
                rhs = self.factor()
                e = e * rhs if val == '*' else e / rhs
            else:
                return e

    def factor(self):
        kind, val, _ = self.tk.peek()
        if kind == 'op' and val == '-':
            self.tk.next()
            return -self.factor()
        if kind == 'op' and val == '+':
            self.tk.next()
            return self.factor()
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.tk.peek()
        if kind == 'op' and val == '^':
            self.tk.next()
            return base ** self.factor()
        return base

    def atom(self):
        kind, val, pos = self.tk.next()
        if kind == 'number':
            return sp.Integer(val)
        if kind == 'name':
            nkind, nval, _ = self.tk.peek()
            if (nkind, nval) == ('op', '('):
                if val not in _FUNCTIONS:
                    raise ParseError(f'unknown function {val!r}', pos)
                fn, arity = _FUNCTIONS[val]
                self.tk.next()
                args = [self.expr()]
                while True:
                    k2, v2, p2 = self.tk.next()
                    if (k2, v2) == ('op', ')'):
                        break
                    if (k2, v2) != ('op', ','):
                        raise ParseError("expected ',' or ')'", p2)
                    args.append(self.expr())
                if len(args) != arity:
                    raise ParseError(
                        f'{val} takes {arity} argument(s), got {len(args)}', pos)
                return fn(*args)
            if val in _CONSTANTS:
                return _CONSTANTS[val]
            if val in self.symbols:
                return self.symbols[val]
            return sp.Symbol(val, real=True)
        if (kind, val) == ('op', '('):
            e = self.expr()
            k2, v2, p2 = self.tk.next()
            if (k2, v2) != ('op', ')'):
                raise ParseError("expected ')'", p2)
            return e
        raise ParseError(f'unexpected {val!r}' if val else 'unexpected end of input', pos)


def parse(text: str, symbols: Optional[Dict[str, sp.Symbol]] = None):
    """Parse an expression string into a sympy expression.

    Grammar: infix + - * / ^ (also **), calls name(arg{,arg}), identifiers,
    exact integer/rational literals, reserved I and hbar. Identifiers not in
    `symbols` become real sympy Symbols.
    """
    return _Parser(text, symbols).parse()


# ---------------------------------------------------------------------------
# printer

_FN_NAMES = {sp.sin: 'sin', sp.cos: 'cos', sp.tan: 'tan', sp.sinh: 'sinh',
             sp.cosh: 'cosh', sp.tanh: 'tanh', sp.exp: 'exp', sp.log: 'ln',
             sp.atan: 'arctan', sp.atan2: 'arctan2'}


def _print_atom(e) -> str:
    s = print_expr(e)
    if isinstance(e, (sp.Symbol, sp.Integer, sp.Function)) and not s.startswith('-'):
        return s
    if e is sp.I:
        return s
    if isinstance(e, sp.Pow) and e.args[1] == sp.Rational(1, 2):
        return s  # sqrt(...) call form binds tightly
    return f'({s})'


def print_expr(e) -> str:
    """Print in the parse() grammar; parse(print_expr(e)) == e."""
    e = sp.sympify(e)
    if e is sp.I:
        return 'I'
    if isinstance(e, sp.Integer):
        return str(e)
    if isinstance(e, sp.Rational):
        return f'{e.p}/{e.q}'
    if isinstance(e, sp.Symbol):
        return e.name
    if isinstance(e, sp.Add):
        parts = []
        for i, t in enumerate(e.as_ordered_terms()):
            if t.could_extract_minus_sign():
                parts.append(('- ' if i else '-') + _print_atom(-t))
            else:
                parts.append(('+ ' if i else '') + _print_atom(t))
        return ' '.join(parts)
    if isinstance(e, sp.Mul):
        coeff, rest = e.as_coeff_Mul()
        num, den = [], []
        if coeff != 1:
            if coeff == -1:
                num.append(None)  # bare sign
            else:
                if coeff.p != 1 or coeff.is_Integer:
                    num.append(str(abs(coeff.p)))
                if abs(coeff.p) == 1 and not coeff.is_Integer:
                    num.append('1')
                if coeff.p < 0:
                    num.insert(0, None)
                if not coeff.is_Integer:
                    den.append(str(coeff.q))
        for f in sp.Mul.make_args(rest):
            b, ex = f.as_base_exp()
            if ex.is_Integer and ex < 0:
                den.append(_print_atom(b) if ex == -1 else _print_atom(b ** -ex))
            else:
                num.append(_print_atom(f))
        sign = ''
        if num and num[0] is None:
            sign = '-'
            num = [x for x in num if x is not None]
        if len(num) > 1 and num[0] == '1':
            num = num[1:]
        ns = '*'.join(num) if num else '1'
        if den:
            ds = '*'.join(den)
            if len(den) > 1:
                ds = f'({ds})'
            return f'{sign}{ns}/{ds}'
        return f'{sign}{ns}'
    if isinstance(e, sp.Pow):
        b, ex = e.args
        if ex == sp.Rational(1, 2):
            return f'sqrt({print_expr(b)})'
        if ex == sp.Rational(-1, 2):
            return f'1/sqrt({print_expr(b)})'
        if ex.is_Integer and ex < 0:
            return f'1/{_print_atom(b ** -ex)}'
        return f'{_print_atom(b)}^{_print_atom(ex)}'
    if e.func in _FN_NAMES:
        args = ', '.join(print_expr(a) for a in e.args)
        return f'{_FN_NAMES[e.func]}({args})'
    raise ValueError(f'cannot print {type(e).__name__}: {e}')


# ---------------------------------------------------------------------------
# calculus, substitution

def differentiate(e, s):
    return simplify(sp.diff(sp.sympify(e), s))


def substitute(e, bindings: Dict):
    """Chained substitution, then simplify. A binding whose replacement
    mentions another bound symbol is resolved through that binding; cyclic
    dependencies raise CyclicBindingError."""
    bindings = {sp.sympify(k): sp.sympify(v) for k, v in bindings.items()}
    keys = set(bindings)
    graph = {k: bindings[k].free_symbols & keys for k in keys}
    seen, order = set(), []
    done = set()

    def visit(k):
        if k in done:
            return
        if k in seen:
            raise CyclicBindingError(f'cyclic binding through {k}')
        seen.add(k)
        for nxt in sorted(graph[k], key=sp.default_sort_key):
            visit(nxt)
        done.add(k)
        order.append(k)

    for k in sorted(keys, key=sp.default_sort_key):
        visit(k)
    out = sp.sympify(e)
    for k in reversed(order):  # dependents first, so replacements resolve fully
        out = out.subs(k, bindings[k])
    return simplify(out)


# ---------------------------------------------------------------------------
# equality oracle

class Verdict(Enum):
    PROVED_EQUAL = 'ProvedEqual'
    NUMERICALLY_EQUAL = 'NumericallyEqual'
    NUMERICALLY_UNEQUAL = 'NumericallyUnequal'

    def __bool__(self):
        return self is not Verdict.NUMERICALLY_UNEQUAL


@dataclass
class EqualityConfig:
    samples: int = 20
    rel_tol: float = 1e-9
    seed: int = 0
    domains: Dict[sp.Symbol, Tuple[float, float]] = field(default_factory=dict)
    default_domain: Tuple[float, float] = (0.3, 1.7)

    def domain(self, s) -> Tuple[float, float]:
        return self.domains.get(s, self.default_domain)


def eval_numeric(e, point: Dict, cfg: Optional[EqualityConfig] = None) -> complex:
    """Double-precision value of e at a point binding every free symbol."""
    e = sp.sympify(e)
    missing = e.free_symbols - set(point)
    if missing:
        raise EvalError(f'unbound symbols: {sorted(missing, key=str)}')
    val = e.xreplace({s: sp.Float(v) if not isinstance(v, complex)
                      else sp.Float(v.real) + sp.I * sp.Float(v.imag)
                      for s, v in point.items()})
    val = sp.N(val)
    if val.has(sp.zoo, sp.nan, sp.oo, -sp.oo) or not val.is_number:
        raise EvalError(f'pole or undefined value at {point}')
    c = complex(val)
    if abs(c) > 1e150:
        raise EvalError(f'pole (magnitude overflow) at {point}')
    return c


def sample_points(symbols, cfg: EqualityConfig, validate=None, tries: int = 60):
    """Draw cfg.samples points from the per-symbol domains; a validate
    callback may reject a draw (e.g. a pole of either compared expression)."""
    rng = random.Random(cfg.seed)
    symbols = sorted(symbols, key=sp.default_sort_key)
    points = []
    for _ in range(cfg.samples):
        for _attempt in range(tries):
            pt = {s: rng.uniform(*cfg.domain(s)) for s in symbols}
            if validate is None or validate(pt):
                points.append(pt)
                break
        else:
            raise EvalError('sampling domain exhausted (all draws rejected)')
    return points


def equals(a, b, cfg: Optional[EqualityConfig] = None) -> Verdict:
    """Three-way equality: symbolic proof first, then seeded numeric sampling.

    Numerics never upgrade to a symbolic claim: the strongest numeric answer
    is NumericallyEqual.
    """
    a, b = sp.sympify(a), sp.sympify(b)
    if is_zero(a - b):
        return Verdict.PROVED_EQUAL
    cfg = cfg or EqualityConfig()
    syms = (a.free_symbols | b.free_symbols)
    values = []

    def validate(pt):
        try:
            values.append((eval_numeric(a, pt), eval_numeric(b, pt)))
            return True
        except EvalError:
            return False

    sample_points(syms, cfg, validate=validate)
    for va, vb in values[-cfg.samples:]:
        if abs(va - vb) > cfg.rel_tol * (1 + max(abs(va), abs(vb))):
            return Verdict.NUMERICALLY_UNEQUAL
    return Verdict.NUMERICALLY_EQUAL
