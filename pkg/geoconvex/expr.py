'''
Arithmetic expressions over named real variables: a hand-written recursive descent parser, a
canonical printer, and a compiler to vectorised numpy closures.

Grammar, lowest precedence first:

    expr     → term ( ( "+" | "-" ) term )* ;
    term     → unary ( ( "*" | "/" ) unary )* ;
    unary    → "-" unary | power ;
    power    → primary ( "^" unary )? ;
    primary  → NUMBER | NAME | NAME "(" expr ( "," expr )* ")" | "(" expr ")" ;

`^` binds tighter than unary minus and is right-associative, so `-x^2` is `-(x^2)` and `2^3^2` is
`2^(3^2)`.
'''
import dataclasses
import functools
import logging
import re
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from geoconvex.exceptions import (ExpressionDomainError, ExpressionOverflow, ExpressionSyntaxError,
                                  UnboundVariable, UnknownFunction)


logger = logging.getLogger('geoconvex')


DEFAULT_STEP = 1e-5

# Integer literal exponents up to this size are computed by repeated multiplication
MAX_MULTIPLY_EXPONENT = 64


@dataclasses.dataclass(frozen=True)
class Number:
    value: float

@dataclasses.dataclass(frozen=True)
class Variable:
    name: str

@dataclasses.dataclass(frozen=True)
class Negate:
    operand: 'Node'

@dataclasses.dataclass(frozen=True)
class BinaryOp:
    op: str
    left: 'Node'
    right: 'Node'

@dataclasses.dataclass(frozen=True)
class Call:
    name: str
    args: Tuple['Node', ...]


Node = Union[Number, Variable, Negate, BinaryOp, Call]

Evaluator = Callable[[Mapping[str, np.ndarray]], np.ndarray]


def _log(x):
    if np.any(x <= 0):
        raise ExpressionDomainError('log', 'argument must be positive')
    return np.log(x)

def _sqrt(x):
    if np.any(x < 0):
        raise ExpressionDomainError('sqrt', 'argument must be non-negative')
    return np.sqrt(x)


# name -> (arity, implementation)
FUNCTIONS: Dict[str, Tuple[int, Callable]] = {
    'sin': (1, np.sin),
    'cos': (1, np.cos),
    'tan': (1, np.tan),
    'exp': (1, np.exp),
    'log': (1, _log),
    'sqrt': (1, _sqrt),
    'abs': (1, np.abs),
    'min': (2, np.minimum),
    'max': (2, np.maximum),
    'pow': (2, None),  # compiled as the ^ operator
}


class Token(NamedTuple):
    kind: str
    text: str
    offset: int


_TOKEN_RE = re.compile(r'''
    (?P<space>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
''', re.VERBOSE)


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode('utf8'))


def tokenize(text: str) -> List[Token]:
    '''
    Split expression text into tokens, terminated by an EOF token. Offsets are byte offsets into the
    UTF-8 encoding of `text`.
    '''
    tokens: List[Token] = []
    index = 0

    while index < len(text):
        match = _TOKEN_RE.match(text, index)
        if not match:
            raise ExpressionSyntaxError(text, _byte_offset(text, index), f'unexpected character "{text[index]}"')

        if match.lastgroup != 'space':
            tokens.append(Token(match.lastgroup or '', match.group(), _byte_offset(text, index)))
        index = match.end()

    tokens.append(Token('eof', '', _byte_offset(text, len(text))))
    return tokens


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.current = 0

    def peek(self) -> Token:
        return self.tokens[self.current]

    def advance(self) -> Token:
        token = self.tokens[self.current]
        if token.kind != 'eof':
            self.current += 1
        return token

    def match(self, *ops: str) -> Optional[Token]:
        'Consume and return the next token if it is one of `ops`'
        token = self.peek()
        if token.kind == 'op' and token.text in ops:
            return self.advance()
        return None

    def error(self, reason: str, token: Optional[Token]=None) -> ExpressionSyntaxError:
        token = token or self.peek()
        if token.kind == 'eof':
            reason = f'{reason}, found end of input'
        else:
            reason = f'{reason}, found "{token.text}"'
        return ExpressionSyntaxError(self.text, token.offset, reason)

    def parse(self) -> Node:
        node = self.expr()
        if self.peek().kind != 'eof':
            raise self.error('expected an operator')
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            token = self.match('+', '-')
            if not token:
                return node
            node = BinaryOp(token.text, node, self.term())

    def term(self) -> Node:
        node = self.unary()
        while True:
            token = self.match('*', '/')
            if not token:
                return node
            node = BinaryOp(token.text, node, self.unary())

    def unary(self) -> Node:
        if self.match('-'):
            return Negate(self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.primary()
        if self.match('^'):
            # right operand is a unary, which recurses back into power: right-associative
            return BinaryOp('^', node, self.unary())
        return node

    def primary(self) -> Node:
        token = self.peek()

        if token.kind == 'number':
            self.advance()
            value = float(token.text)
            if not np.isfinite(value):
                raise ExpressionSyntaxError(self.text, token.offset, f'literal {token.text} is not finite')
            return Number(value)

        if token.kind == 'name':
            self.advance()
            name = token.text.lower()

            if self.match('('):
                if name not in FUNCTIONS:
                    raise UnknownFunction(token.text, token.offset)
                return self.call(name, token)

            if name in FUNCTIONS:
                raise self.error(f'function {name} must be called with arguments', self.peek())
            return Variable(token.text)

        if self.match('('):
            node = self.expr()
            if not self.match(')'):
                raise self.error('expected ")"')
            return node

        raise self.error('expected a number, variable or "("')

    def call(self, name: str, token: Token) -> Node:
        args = [self.expr()]
        while self.match(','):
            args.append(self.expr())
        if not self.match(')'):
            raise self.error('expected "," or ")"')

        arity = FUNCTIONS[name][0]
        if len(args) != arity:
            raise ExpressionSyntaxError(
                self.text, token.offset, f'{name} takes {arity} argument(s), {len(args)} given'
            )
        return Call(name, tuple(args))


def render(node: Node) -> str:
    '''
    Print a node in canonical form: fully parenthesized infix, shortest round-trip float literals
    and lowercase function names.
    '''
    if isinstance(node, Number):
        text = repr(float(node.value))
        # a negative literal reads back as a negated one
        return f'({text})' if text.startswith('-') else text
    if isinstance(node, Variable):
        return node.name
    if isinstance(node, Negate):
        return f'(-{render(node.operand)})'
    if isinstance(node, BinaryOp):
        return f'({render(node.left)} {node.op} {render(node.right)})'
    return f'{node.name}({", ".join(render(a) for a in node.args)})'


def free_variables(node: Node) -> List[str]:
    'Variable names in order of first appearance'
    found: Dict[str, None] = {}

    def walk(n: Node):
        if isinstance(n, Variable):
            found.setdefault(n.name)
        elif isinstance(n, Negate):
            walk(n.operand)
        elif isinstance(n, BinaryOp):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Call):
            for a in n.args:
                walk(a)

    walk(node)
    return list(found)


def _finite(values, operation: str):
    if not np.all(np.isfinite(values)):
        raise ExpressionOverflow(operation, 'result overflowed')
    return values


def _integer_literal(node: Node) -> Optional[int]:
    'Return the exponent if `node` is a small integer literal, optionally negated'
    sign = 1
    if isinstance(node, Negate):
        sign, node = -1, node.operand
    if isinstance(node, Number) and node.value.is_integer() and abs(node.value) <= MAX_MULTIPLY_EXPONENT:
        return sign * int(node.value)
    return None


def _integer_power(base, exponent: int):
    if exponent == 0:
        return np.ones_like(base, dtype=float)

    result = base
    for _ in range(abs(exponent) - 1):
        result = result * base

    if exponent < 0:
        if np.any(result == 0):
            raise ExpressionDomainError('^', 'zero raised to a negative power')
        result = 1.0 / result
    return result


def _real_power(base, exponent):
    base, exponent = np.broadcast_arrays(np.asarray(base, dtype=float), np.asarray(exponent, dtype=float))

    if np.any((base < 0) & (exponent != np.round(exponent))):
        raise ExpressionDomainError('^', 'non-integer power of a negative base')
    if np.any((base == 0) & (exponent < 0)):
        raise ExpressionDomainError('^', 'zero raised to a negative power')

    return np.power(base, exponent)


def _divide(numerator, denominator):
    if np.any(denominator == 0):
        raise ExpressionDomainError('/', 'division by zero')
    return numerator / denominator


_ARITHMETIC = {
    '+': lambda a, b: a + b,
    '-': lambda a, b: a - b,
    '*': lambda a, b: a * b,
    '/': _divide,
}


def compile_node(node: Node) -> Evaluator:
    '''
    Compile an AST into a closure evaluating the node over an environment of numpy arrays (or
    scalars). Every intermediate result is checked for finiteness.
    '''
    if isinstance(node, Number):
        value = float(node.value)
        return lambda env: value

    if isinstance(node, Variable):
        name = node.name
        return lambda env: env[name]

    if isinstance(node, Negate):
        operand = compile_node(node.operand)
        return lambda env: -operand(env)

    if isinstance(node, Call) and node.name == 'pow':
        return compile_node(BinaryOp('^', node.args[0], node.args[1]))

    if isinstance(node, BinaryOp):
        left = compile_node(node.left)

        if node.op == '^':
            exponent = _integer_literal(node.right)
            if exponent is not None:
                return lambda env: _finite(_integer_power(left(env), exponent), '^')

            right = compile_node(node.right)
            return lambda env: _finite(_real_power(left(env), right(env)), '^')

        right = compile_node(node.right)
        apply = _ARITHMETIC[node.op]
        op = node.op
        return lambda env: _finite(apply(left(env), right(env)), op)

    # function call
    func = FUNCTIONS[node.name][1]
    args = [compile_node(a) for a in node.args]
    name = node.name
    return lambda env: _finite(func(*(a(env) for a in args)), name)


@dataclasses.dataclass(frozen=True)
class Expression:
    '''
    An immutable parsed expression with its declared variable list. Evaluation is reentrant.
    '''
    root: Node
    variables: Tuple[str, ...]

    def __post_init__(self):
        for name in free_variables(self.root):
            if name not in self.variables:
                raise UnboundVariable(name)

    def __str__(self):
        return self.text

    @property
    def text(self) -> str:
        return render(self.root)

    @property
    def free_variables(self) -> List[str]:
        return free_variables(self.root)

    @functools.cached_property
    def _evaluator(self) -> Evaluator:
        return compile_node(self.root)

    def _check_bound(self, binding: Mapping):
        for name in self.variables:
            if name not in binding:
                raise UnboundVariable(name)

    def evaluate(self, binding: Mapping[str, float]) -> float:
        '''
        Evaluate at a single binding of every declared variable.
        '''
        self._check_bound(binding)
        env = {name: np.float64(binding[name]) for name in self.variables}

        with np.errstate(all='ignore'):
            return float(self._evaluator(env))

    def evaluate_array(self, env: Mapping[str, np.ndarray]) -> np.ndarray:
        '''
        Evaluate elementwise over broadcastable arrays of variable values. Raises if any element is
        out of domain.
        '''
        self._check_bound(env)
        arrays = {name: np.asarray(env[name], dtype=float) for name in self.variables}
        shape = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else ()

        with np.errstate(all='ignore'):
            result = self._evaluator(arrays)

        return np.broadcast_to(np.asarray(result, dtype=float), shape)


def parse(text: str, variables: Optional[Sequence[str]]=None) -> Expression:
    '''
    Parse expression text.

    Params:
        text:       Expression source
        variables:  Declared variable list; defaults to the free variables sorted by name
    Returns:
        Expression
    '''
    if not text or not text.strip():
        raise ExpressionSyntaxError(text, 0, 'empty expression')

    root = Parser(text).parse()

    if variables is None:
        variables = sorted(free_variables(root))

    logger.debug('Parsed "%s" as %s over %s', text, render(root), variables)
    return Expression(root, tuple(variables))


def evaluate(e: Expression, b: Mapping[str, float]) -> float:
    return e.evaluate(b)


def derivative_fd(e: Expression, var: str, b: Mapping[str, float], step: float=DEFAULT_STEP) -> float:
    '''
    Central difference (e(x+h) - e(x-h)) / 2h along `var`.
    '''
    if var not in e.variables:
        raise UnboundVariable(var)

    forward = {**b, var: b[var] + step}
    backward = {**b, var: b[var] - step}
    return (e.evaluate(forward) - e.evaluate(backward)) / (2 * step)


def replace(node: Node, replacements: Mapping[str, Node]) -> Node:
    'Simultaneously substitute variables by nodes'
    if isinstance(node, Variable):
        return replacements.get(node.name, node)
    if isinstance(node, Negate):
        return Negate(replace(node.operand, replacements))
    if isinstance(node, BinaryOp):
        return BinaryOp(node.op, replace(node.left, replacements), replace(node.right, replacements))
    if isinstance(node, Call):
        return Call(node.name, tuple(replace(a, replacements) for a in node.args))
    return node


def substitute(e: Expression, values: Mapping[str, float]) -> Expression:
    '''
    Fix some variables to constants, for example the index n of a bifunction family.
    '''
    root = replace(e.root, {name: Number(float(v)) for name, v in values.items()})
    return Expression(root, tuple(v for v in e.variables if v not in values))


def compose(e: Expression, replacements: Mapping[str, Expression], variables: Sequence[str]) -> Expression:
    '''
    Substitute expressions for variables of `e`, eg. g∘f is compose(g, {'u': f}, f.variables).
    '''
    root = replace(e.root, {name: sub.root for name, sub in replacements.items()})
    return Expression(root, tuple(variables))


def _balanced(nodes: Sequence[Node], combine: Callable[[Node, Node], Node]) -> Node:
    'Fold nodes pairwise, so the tree depth grows with log2 of the count'
    level = list(nodes)
    while len(level) > 1:
        paired = [combine(a, b) for a, b in zip(level[0::2], level[1::2])]
        if len(level) % 2:
            paired.append(level[-1])
        level = paired
    return level[0]


def total(exprs: Sequence[Expression], variables: Sequence[str]) -> Expression:
    'Sum of expressions'
    root = _balanced([e.root for e in exprs], lambda a, b: BinaryOp('+', a, b))
    return Expression(root, tuple(variables))


def weighted_sum(exprs: Sequence[Expression], weights: Sequence[float], variables: Sequence[str]) -> Expression:
    terms = [
        Expression(BinaryOp('*', Number(float(w)), e.root), tuple(variables))
        for e, w in zip(exprs, weights)
    ]
    return total(terms, variables)


def pointwise_max(exprs: Sequence[Expression], variables: Sequence[str]) -> Expression:
    'Nested binary max() of the family'
    root = _balanced([e.root for e in exprs], lambda a, b: Call('max', (a, b)))
    return Expression(root, tuple(variables))
