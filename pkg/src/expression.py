#!/usr/bin/env python3
"""Scalar expressions over chart coordinates x1..x{dim}.

The grammar is documented in GRAMMAR.md. Parsing produces an immutable AST of
frozen dataclasses; evaluation walks the AST with plain floats or dual numbers,
so the same tree yields values, first-order jets and second-order jets.
"""

from dataclasses import dataclass
import logging
import operator
from typing import Union

import numpy as np
import pyparsing as pp

import constants as c
from exceptions import DimensionError, DomainError, ExpressionSyntaxError, UnknownVariable
import jets

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written in the source


@dataclass(frozen=True)
class Neg:
    arg: 'Node'


@dataclass(frozen=True)
class BinOp:
    op: str
    left: 'Node'
    right: 'Node'


@dataclass(frozen=True)
class Pow:
    base: 'Node'
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    arg: 'Node'


Node = Union[Const, Var, Neg, BinOp, Pow, Call]

_BINARY = {'+': operator.add, '-': operator.sub, '*': operator.mul, '/': operator.truediv}
_FUNCTIONS = {'sin': jets.sin, 'cos': jets.cos, 'exp': jets.exp, 'ln': jets.ln, 'sqrt': jets.sqrt}


def _fold_left(tokens):
    tokens = list(tokens)
    node = tokens[0]
    for op, right in zip(tokens[1::2], tokens[2::2]):
        node = BinOp(op, node, right)
    return node


def _build_grammar() -> pp.ParserElement:
    expr = pp.Forward().set_name('expression')
    lpar, rpar = pp.Suppress('('), pp.Suppress(')')

    number = pp.Regex(r'(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?').set_name('number')
    number.set_parse_action(lambda t: Const(float(t[0])))
    variable = pp.Regex(r'x\d+(?![A-Za-z_0-9])').set_name('variable')
    variable.set_parse_action(lambda t: Var(int(t[0][1:])))
    call = pp.one_of(list(c.FUNCTIONS), as_keyword=True) + lpar - expr - rpar
    call.set_parse_action(lambda t: Call(t[0], t[1]))
    group = lpar - expr - rpar
    atom = (call | number | variable | group).set_name('operand')

    integer = pp.Regex(r'[+-]?\d+(?![.\deE])').set_name('integer exponent')
    integer.set_parse_action(lambda t: int(t[0]))
    exponent = integer | (lpar + integer + rpar)
    power = atom + pp.Optional(pp.Suppress('^') - exponent)
    power.set_parse_action(lambda t: Pow(t[0], t[1]) if len(t) == 2 else t[0])

    unary = pp.Forward().set_name('operand')
    negation = pp.Suppress('-') - unary
    negation.set_parse_action(lambda t: Neg(t[0]))
    unary <<= negation | power

    term = unary + pp.ZeroOrMore(pp.one_of('* /') - unary)
    term.set_parse_action(_fold_left)
    expr <<= term + pp.ZeroOrMore(pp.one_of('+ -') - term)
    expr.set_parse_action(_fold_left)
    return expr


_GRAMMAR = _build_grammar()


def _check_dim(dim: int) -> None:
    if not isinstance(dim, (int, np.integer)) or dim <= 0 or dim % 2:
        raise DimensionError(f'Dimension must be a positive even integer, got {dim!r}')


def _variables(node: Node):
    if isinstance(node, Var):
        yield node
    elif isinstance(node, (Neg, Call)):
        yield from _variables(node.arg)
    elif isinstance(node, Pow):
        yield from _variables(node.base)
    elif isinstance(node, BinOp):
        yield from _variables(node.left)
        yield from _variables(node.right)


def print_expression(node: Node) -> str:
    """Render an AST so that parsing the result gives back the same AST."""
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return f'x{node.index}'
    if isinstance(node, Neg):
        return '-' + print_expression(node.arg)
    if isinstance(node, BinOp):
        return f'({print_expression(node.left)} {node.op} {print_expression(node.right)})'
    if isinstance(node, Call):
        return f'{node.name}({print_expression(node.arg)})'
    base = print_expression(node.base)
    if isinstance(node.base, (Neg, Pow)):
        base = f'({base})'
    return f'{base}^{node.exponent}'


def _finite(node: Node, result, x: np.ndarray):
    if not np.isfinite(jets.primal(result)):
        raise DomainError(node, x)
    return result


class Expression:
    """A parsed scalar field on R^dim."""

    def __init__(self, ast: Node, dim: int, source: str = ''):
        _check_dim(dim)
        for var in _variables(ast):
            if not 1 <= var.index <= dim:
                raise UnknownVariable(f'x{var.index}', dim)
        self.ast = ast
        self.dim = int(dim)
        self.source = source or print_expression(ast)

    def __repr__(self):
        return f'Expression({self.source!r}, dim={self.dim})'

    def __str__(self):
        return print_expression(self.ast)

    def __eq__(self, other):
        return isinstance(other, Expression) and (self.ast, self.dim) == (other.ast, other.dim)

    def __hash__(self):
        return hash((self.ast, self.dim))

    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f'Point of shape {x.shape} for an expression on R^{self.dim}')
        return x

    def _walk(self, node: Node, args: list, x: np.ndarray, differentiate: bool):
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Var):
            return args[node.index - 1]
        if isinstance(node, Neg):
            return -self._walk(node.arg, args, x, differentiate)
        if isinstance(node, BinOp):
            left = self._walk(node.left, args, x, differentiate)
            right = self._walk(node.right, args, x, differentiate)
            if node.op == '/' and jets.primal(right) == 0.0:
                raise DomainError(node, x)
            return _finite(node, _BINARY[node.op](left, right), x)
        if isinstance(node, Pow):
            base = self._walk(node.base, args, x, differentiate)
            if node.exponent < 0 and jets.primal(base) == 0.0:
                raise DomainError(node, x)
            try:
                result = jets.power(base, node.exponent)
            except OverflowError:
                raise DomainError(node, x)
            return _finite(node, result, x)
        arg = self._walk(node.arg, args, x, differentiate)
        a = jets.primal(arg)
        if node.name == 'ln' and a <= 0.0:
            raise DomainError(node, x)
        if node.name == 'sqrt' and (a < 0.0 or (differentiate and a == 0.0)):
            raise DomainError(node, x)
        try:
            result = _FUNCTIONS[node.name](arg)
        except OverflowError:
            raise DomainError(node, x)
        return _finite(node, result, x)

    def evaluate(self, x) -> float:
        x = self._point(x)
        return float(self._walk(self.ast, list(x), x, differentiate=False))

    def eval_jet1(self, x) -> jets.Jet1:
        x = self._point(x)
        result = self._walk(self.ast, jets.seed_first_order(x), x, differentiate=True)
        return jets.to_jet1(result, self.dim)

    def eval_jet2(self, x) -> jets.Jet2:
        x = self._point(x)
        result = self._walk(self.ast, jets.seed_second_order(x), x, differentiate=True)
        return jets.to_jet2(result, self.dim)


def parse(src: str, dim: int) -> Expression:
    _check_dim(dim)
    if not src or not src.strip():
        raise ExpressionSyntaxError(src, 0, 'Expected non-empty expression')
    try:
        ast = _GRAMMAR.parse_string(src, parse_all=True)[0]
    except pp.ParseBaseException as e:
        raise ExpressionSyntaxError(src, e.loc, e.msg) from None
    logger.debug('Parsed %r as %s', src, print_expression(ast))
    return Expression(ast, dim, src)


def eval_jet2(f: Expression, x) -> jets.Jet2:
    return f.eval_jet2(x)


def constant(value: float, dim: int) -> Expression:
    return Expression(Const(float(value)), dim)
