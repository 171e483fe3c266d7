"""Knowledge-graph triple scoring with Grassmann embeddings.

Entities and relations are stored as ``p x (n-p)`` parameter blocks. A block
``B`` becomes the frame ``exp([[0, B], [-B^T, 0]]) [I_p; 0]``. This is the
same rotation as the Grassmann module's ``exp([X, I_{n,p}])`` for the tangent
with block ``-B``; :func:`grassmann_tangent` makes the sign flip explicit.
"""

from dataclasses import dataclass

import numpy as np

from gyromat import matker as mk
from gyromat.errors import ConfigError, DimMismatch, EmptyQuery
from gyromat.grassmann import onb_add, principal_angle_distance, tangent_from_block


def _block(B):
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    mk.as_matrix(B, square=False)
    return B


def skew_generator(B):
    """``[[0, B], [-B^T, 0]]``."""
    B = _block(B)
    p, q = B.shape
    G = np.zeros((p + q, p + q))
    G[:p, p:] = B
    G[p:, :p] = -B.T
    return G


def grassmann_tangent(B):
    """Tangent at ``I_{n,p}`` whose commutator with ``I_{n,p}`` is ``skew_generator(B)``."""
    return tangent_from_block(-_block(B))


def materialize(B):
    """Orthonormal ``n x p`` frame for a parameter block ``B``."""
    B = _block(B)
    p = B.shape[0]
    return mk.mat_exp(skew_generator(B))[:, :p].copy()


def relation_apply(A, B):
    """Relation scaling: materialize the entrywise product ``A * B``."""
    A = _block(A)
    B = _block(B)
    if A.shape != B.shape:
        raise DimMismatch(f"relation scaler {A.shape} vs entity block {B.shape}")
    return materialize(A * B)


@dataclass(frozen=True)
class EntityEmbedding:
    B: np.ndarray
    bias: float = 0.0


@dataclass(frozen=True)
class RelationEmbedding:
    A: np.ndarray
    B_R: np.ndarray


def compose_head(s, r):
    """Frame ``(A * S) + R`` for subject ``s`` under relation ``r``."""
    shapes = {_block(s.B).shape, _block(r.A).shape, _block(r.B_R).shape}
    if len(shapes) != 1:
        raise DimMismatch(f"embedding blocks disagree in shape: {sorted(shapes)}")
    return onb_add(relation_apply(r.A, s.B), materialize(r.B_R))


def score_frame(head, O, b_s, b_o):
    """Score against an explicit object frame ``O``; depends only on ``span(O)``."""
    d = principal_angle_distance(head, O)
    return -d * d + float(b_s) + float(b_o)


def score(s, r, o):
    """``-d((A * S) + R, O)^2 + b_s + b_o`` with ``d`` the principal-angle distance.

    One bias per entity, used in both the subject and object role.
    """
    if _block(o.B).shape != _block(s.B).shape:
        raise DimMismatch("subject and object blocks differ in shape")
    return score_frame(compose_head(s, r), materialize(o.B), s.bias, o.bias)


@dataclass(frozen=True)
class KgcModel:
    n: int
    p: int
    entities: dict
    relations: dict

    def __post_init__(self):
        if not 0 < self.p < self.n:
            raise ConfigError(f"invalid Grassmannian ({self.n}, {self.p})")
        shape = (self.p, self.n - self.p)
        for name, e in self.entities.items():
            if _block(e.B).shape != shape:
                raise DimMismatch(f"entity {name!r} block is not {shape}")
        for name, r in self.relations.items():
            if _block(r.A).shape != shape or _block(r.B_R).shape != shape:
                raise DimMismatch(f"relation {name!r} blocks are not {shape}")

    def score(self, s, r, o):
        try:
            return score(self.entities[s], self.relations[r], self.entities[o])
        except KeyError as exc:
            raise ConfigError(f"unknown entity or relation {exc.args[0]!r}") from None


def rank_of_truth(scores, truth):
    """Pessimistic 1-based rank: every candidate scoring at least the truth ranks ahead."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise EmptyQuery("query has no candidates")
    if not 0 <= truth < scores.size:
        raise ConfigError(f"truth index {truth} outside {scores.size} candidates")
    return int(np.count_nonzero(scores >= scores[truth]))


def rank_metrics(scores, truths):
    """Mean reciprocal rank and hits at 1, 3 and 10 over a batch of queries.

    Returns ``(mrr, h1, h3, h10)``.
    """
    scores = list(scores)
    truths = list(truths)
    if not scores:
        raise EmptyQuery("no queries")
    if len(scores) != len(truths):
        raise DimMismatch(f"{len(scores)} score lists but {len(truths)} truth indices")
    ranks = np.array([rank_of_truth(s, t) for s, t in zip(scores, truths)])
    return (
        float(np.mean(1.0 / ranks)),
        float(np.mean(ranks <= 1)),
        float(np.mean(ranks <= 3)),
        float(np.mean(ranks <= 10)),
    )


def toy_fit(triples, n, p, entity_names, relation_names, iterations=300, step=0.3, init_scale=0.5, seed=0):
    """Gradient-free fit of a small model by greedy random perturbation.

    Each iteration perturbs one entity or relation block and keeps the change
    if the mean margin between true triples and object-corrupted triples
    grows. Entity blocks start with entries of scale ``init_scale`` so that
    entities are distinguishable from the start. Intended for graphs with at
    most 20 entities. Returns ``(model, margin)``.
    """
    if len(entity_names) > 20:
        raise ConfigError("toy fit supports at most 20 entities")
    if not triples:
        raise EmptyQuery("no training triples")
    if len(entity_names) < 2:
        raise ConfigError("toy fit needs at least two entities to form corrupted triples")
    rng = np.random.default_rng(seed)
    shape = (p, n - p)
    ents = {e: EntityEmbedding(rng.standard_normal(shape) * init_scale) for e in entity_names}
    rels = {
        r: RelationEmbedding(np.ones(shape), rng.standard_normal(shape) * 0.1)
        for r in relation_names
    }

    def objective(ents, rels):
        total = 0.0
        for s, r, o in triples:
            true = score(ents[s], rels[r], ents[o])
            rivals = [score(ents[s], rels[r], ents[c]) for c in entity_names if c != o]
            total += true - max(rivals)
        return total / len(triples)

    best = objective(ents, rels)
    names = [("e", e) for e in entity_names] + [("r", r) for r in relation_names]
    for _ in range(iterations):
        kind, name = names[rng.integers(len(names))]
        delta = rng.standard_normal(shape) * step
        if kind == "e":
            trial = dict(ents)
            trial[name] = EntityEmbedding(ents[name].B + delta, ents[name].bias)
            val = objective(trial, rels)
            if val > best:
                ents, best = trial, val
        else:
            trial = dict(rels)
            trial[name] = RelationEmbedding(rels[name].A, rels[name].B_R + delta)
            val = objective(ents, trial)
            if val > best:
                rels, best = trial, val
    return KgcModel(n, p, ents, rels), best
