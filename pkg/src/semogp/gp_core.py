"""Expression-tree programs: construction, variation, and vectorized evaluation.

Programs are binary arithmetic trees over the four operators +, -, * and a
protected division. Terminals are feature references and ephemeral random
constants. Trees are immutable values: variation builds new trees that share
unchanged subtrees with their parents.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

FUNCTIONS = ("+", "-", "*", "/")
DIV_EPSILON = 1e-9
# Magnitude clamp applied after every function node. Without it, repeated
# multiplication overflows float64 well inside the depth limit.
VALUE_CLAMP = 1e10
FUNCTION_POINT_BIAS = 0.9
CROSSOVER_DEPTH_RETRIES = 5


@dataclass(frozen=True)
class Feature:
    """Terminal referencing one input feature."""

    index: int


@dataclass(frozen=True)
class Constant:
    """Terminal holding an ephemeral random constant."""

    value: float


@dataclass(frozen=True)
class Call:
    """Application of a binary operator to two subtrees."""

    op: str
    left: "Node"
    right: "Node"


Node = Union[Feature, Constant, Call]
Path = tuple[int, ...]


@dataclass
class Individual:
    """A program plus its cached behaviour and objective values.

    The caches are either None or consistent with the tree and the dataset
    the evaluator was built on; evaluated individuals are never mutated.
    """

    tree: Node
    semantics: np.ndarray | None = None
    objectives: np.ndarray | None = None


Population = list[Individual]


@dataclass(frozen=True)
class PrimitiveSet:
    """Available terminals and operators for tree construction."""

    n_features: int
    functions: tuple[str, ...] = FUNCTIONS
    const_low: float = -1.0
    const_high: float = 1.0

    def __post_init__(self):
        if self.n_features < 1:
            raise ValueError("primitive set needs at least one feature")
        if not self.functions:
            raise ValueError("primitive set needs at least one function")
        unknown = set(self.functions) - set(FUNCTIONS)
        if unknown:
            raise ValueError(f"unknown functions: {sorted(unknown)}")

    def random_terminal(self, rng: random.Random) -> Node:
        # Uniform over the feature references plus one constant slot.
        pick = rng.randrange(self.n_features + 1)
        if pick == self.n_features:
            return Constant(rng.uniform(self.const_low, self.const_high))
        return Feature(pick)

    def random_function(self, rng: random.Random) -> str:
        return self.functions[rng.randrange(len(self.functions))]


def grow_tree(ps: PrimitiveSet, target_depth: int, rng: random.Random, _depth: int = 0) -> Node:
    """Grow-method tree of depth at most target_depth (root at depth 0).

    The root is a function node whenever target_depth >= 1, so grown trees
    always reach depth 1 or more unless a bare terminal was requested.
    """
    at_limit = _depth >= target_depth
    if at_limit or (_depth >= 1 and rng.random() < 0.5):
        return ps.random_terminal(rng)
    op = ps.random_function(rng)
    return Call(
        op,
        grow_tree(ps, target_depth, rng, _depth + 1),
        grow_tree(ps, target_depth, rng, _depth + 1),
    )


def full_tree(ps: PrimitiveSet, target_depth: int, rng: random.Random, _depth: int = 0) -> Node:
    """Full-method tree of exactly target_depth (root at depth 0)."""
    if _depth >= target_depth:
        return ps.random_terminal(rng)
    op = ps.random_function(rng)
    return Call(
        op,
        full_tree(ps, target_depth, rng, _depth + 1),
        full_tree(ps, target_depth, rng, _depth + 1),
    )


def ramped_half_and_half(
    pop_size: int,
    ps: PrimitiveSet,
    rng: random.Random,
    min_depth: int = 2,
    max_depth: int = 6,
) -> list[Node]:
    """Initial trees with depths ramped across [min_depth, max_depth].

    Alternates the full and grow methods while cycling the target depth, the
    classic half-and-half initialization.
    """
    if pop_size < 2:
        raise ValueError("population size must be at least 2")
    if not 1 <= min_depth <= max_depth:
        raise ValueError("need 1 <= min_depth <= max_depth")
    span = max_depth - min_depth + 1
    trees = []
    for i in range(pop_size):
        depth = min_depth + (i % span)
        method = full_tree if i % 2 == 0 else grow_tree
        trees.append(method(ps, depth, rng))
    return trees


def evaluate_semantics(tree: Node, features: np.ndarray) -> np.ndarray:
    """Program outputs over every row of a feature matrix.

    Division is protected (denominators below 1e-9 in magnitude yield 1.0)
    and every function-node result is clamped to +-1e10, so the output is
    finite for any tree and any finite inputs.
    """
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]

    def walk(node: Node) -> np.ndarray:
        if isinstance(node, Feature):
            return features[:, node.index]
        if isinstance(node, Constant):
            return np.full(n, node.value)
        a = walk(node.left)
        b = walk(node.right)
        if node.op == "+":
            out = a + b
        elif node.op == "-":
            out = a - b
        elif node.op == "*":
            out = a * b
        else:
            small = np.abs(b) < DIV_EPSILON
            out = np.divide(a, np.where(small, 1.0, b))
            out = np.where(small, 1.0, out)
        return np.clip(out, -VALUE_CLAMP, VALUE_CLAMP)

    result = walk(tree)
    # A bare feature terminal returns a view into the read-only matrix.
    return np.array(result, dtype=np.float64)


def tree_depth(tree: Node) -> int:
    """Depth of the deepest node, with a lone node at depth 0."""
    if isinstance(tree, Call):
        return 1 + max(tree_depth(tree.left), tree_depth(tree.right))
    return 0


def node_count(tree: Node) -> int:
    if isinstance(tree, Call):
        return 1 + node_count(tree.left) + node_count(tree.right)
    return 1


def iter_paths(tree: Node, _prefix: Path = ()):
    """Yield (path, node) pairs in preorder; paths are tuples of 0/1 steps."""
    yield _prefix, tree
    if isinstance(tree, Call):
        yield from iter_paths(tree.left, _prefix + (0,))
        yield from iter_paths(tree.right, _prefix + (1,))


def subtree_at(tree: Node, path: Path) -> Node:
    node = tree
    for step in path:
        node = node.left if step == 0 else node.right
    return node


def replace_subtree(tree: Node, path: Path, replacement: Node) -> Node:
    """New tree with the subtree at path swapped out; shares all other nodes."""
    if not path:
        return replacement
    if not isinstance(tree, Call):
        raise ValueError("path descends below a terminal")
    if path[0] == 0:
        return Call(tree.op, replace_subtree(tree.left, path[1:], replacement), tree.right)
    return Call(tree.op, tree.left, replace_subtree(tree.right, path[1:], replacement))


def pick_crossover_point(tree: Node, rng: random.Random) -> Path:
    # Koza-style bias: prefer function nodes 90% of the time when any exist.
    function_paths = []
    terminal_paths = []
    for path, node in iter_paths(tree):
        (function_paths if isinstance(node, Call) else terminal_paths).append(path)
    if function_paths and (not terminal_paths or rng.random() < FUNCTION_POINT_BIAS):
        pool = function_paths
    else:
        pool = terminal_paths
    return pool[rng.randrange(len(pool))]


def pick_uniform_point(tree: Node, rng: random.Random) -> Path:
    paths = [path for path, _ in iter_paths(tree)]
    return paths[rng.randrange(len(paths))]


def subtree_crossover(
    p1: Node, p2: Node, rng: random.Random, max_depth: int = 17
) -> tuple[Node, Node]:
    """Exchange one subtree between two parents.

    Point selection is retried up to five times when an offspring would
    exceed max_depth; after that the parents are returned unchanged. Parents
    are never modified (trees are immutable).
    """
    for _ in range(1 + CROSSOVER_DEPTH_RETRIES):
        point1 = pick_crossover_point(p1, rng)
        point2 = pick_crossover_point(p2, rng)
        child1 = replace_subtree(p1, point1, subtree_at(p2, point2))
        child2 = replace_subtree(p2, point2, subtree_at(p1, point1))
        if tree_depth(child1) <= max_depth and tree_depth(child2) <= max_depth:
            return child1, child2
    return p1, p2


def subtree_mutation(
    tree: Node,
    ps: PrimitiveSet,
    rng: random.Random,
    max_depth: int = 17,
    subtree_depth: int = 4,
) -> Node:
    """Replace one uniformly chosen node's subtree with a fresh grown subtree.

    The fresh subtree's target depth is drawn from [0, subtree_depth] and
    capped so the result never exceeds max_depth.
    """
    path = pick_uniform_point(tree, rng)
    budget = max_depth - len(path)
    target = min(rng.randint(0, subtree_depth), budget)
    fresh = grow_tree(ps, target, rng)
    return replace_subtree(tree, path, fresh)


def to_prefix(tree: Node) -> str:
    """Serialize a tree to prefix form, e.g. (+ x0 (* 0.5 x1))."""
    if isinstance(tree, Feature):
        return f"x{tree.index}"
    if isinstance(tree, Constant):
        return repr(tree.value)
    return f"({tree.op} {to_prefix(tree.left)} {to_prefix(tree.right)})"


def parse_prefix(text: str) -> Node:
    """Parse the prefix form produced by to_prefix."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()

    def read(pos: int) -> tuple[Node, int]:
        tok = tokens[pos]
        if tok == "(":
            op = tokens[pos + 1]
            if op not in FUNCTIONS:
                raise ValueError(f"unknown operator {op!r}")
            left, pos = read(pos + 2)
            right, pos = read(pos)
            if tokens[pos] != ")":
                raise ValueError("expected closing parenthesis")
            return Call(op, left, right), pos + 1
        if tok.startswith("x") and tok[1:].isdigit():
            return Feature(int(tok[1:])), pos + 1
        return Constant(float(tok)), pos + 1

    node, end = read(0)
    if end != len(tokens):
        raise ValueError("trailing tokens after program")
    return node


@dataclass(frozen=True)
class GPParams:
    """Run-level genetic programming parameters."""

    pop_size: int = 100
    generations: int = 30
    init_min_depth: int = 2
    init_max_depth: int = 6
    max_depth: int = 17
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_subtree_depth: int = 4

    def __post_init__(self):
        if self.pop_size < 2:
            raise ValueError("pop_size must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        if not 1 <= self.init_min_depth <= self.init_max_depth <= self.max_depth:
            raise ValueError("need 1 <= init_min_depth <= init_max_depth <= max_depth")
        for name in ("crossover_rate", "mutation_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass
class Variation:
    """Crossover-plus-mutation policy used by the engines to breed offspring.

    The crossover hook takes two evaluated individuals and a generator and
    returns two offspring trees; None selects plain subtree crossover.
    """

    primitives: PrimitiveSet
    params: GPParams = field(default_factory=GPParams)
    crossover: Callable[[Individual, Individual, random.Random], tuple[Node, Node]] | None = None

    def _cross(self, a: Individual, b: Individual, rng: random.Random) -> tuple[Node, Node]:
        if self.crossover is not None:
            return self.crossover(a, b, rng)
        return subtree_crossover(a.tree, b.tree, rng, self.params.max_depth)

    def _mutate(self, tree: Node, rng: random.Random) -> Node:
        if rng.random() < self.params.mutation_rate:
            return subtree_mutation(
                tree,
                self.primitives,
                rng,
                self.params.max_depth,
                self.params.mutation_subtree_depth,
            )
        return tree

    def breed_pair(self, a: Individual, b: Individual, rng: random.Random) -> tuple[Node, Node]:
        if rng.random() < self.params.crossover_rate:
            t1, t2 = self._cross(a, b, rng)
        else:
            t1, t2 = a.tree, b.tree
        return self._mutate(t1, rng), self._mutate(t2, rng)

    def breed_one(self, a: Individual, b: Individual, rng: random.Random) -> Node:
        if rng.random() < self.params.crossover_rate:
            tree = self._cross(a, b, rng)[0]
        else:
            tree = a.tree
        return self._mutate(tree, rng)
