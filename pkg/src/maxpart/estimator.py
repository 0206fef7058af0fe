"""scikit-learn style front ends.

``MaxSATSolver`` is fitted on a formula and exposes the optimum as fitted
attributes; ``FormulaGraph`` and ``LouvainCommunities`` chain in a
``sklearn.pipeline.Pipeline`` to partition a formula's graph.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .community import detect_communities
from .engine import ALGORITHMS, GRAPH_MODELS, MERGE_MODES, Status, solve
from .graphrep import WeightedGraph, build_cvig, build_res
from .wcnf import WcnfFormula, parse_wcnf


def check_formula(X) -> WcnfFormula:
    """Coerce ``X`` (formula, path, WCNF text or bytes) into a :class:`WcnfFormula`."""
    if isinstance(X, WcnfFormula):
        return X
    if isinstance(X, Path):
        return parse_wcnf(X)
    if isinstance(X, bytes):
        return parse_wcnf(X)
    if isinstance(X, str):
        if "\n" not in X and Path(X).is_file():
            return parse_wcnf(Path(X))
        return parse_wcnf(X)
    raise TypeError(f"expected a WcnfFormula, path or WCNF text, got {type(X).__name__}")


def check_graph(X) -> WeightedGraph:
    if not isinstance(X, WeightedGraph):
        raise TypeError(f"expected a WeightedGraph, got {type(X).__name__}")
    return X


def _check_choice(name: str, value, allowed) -> None:
    if value not in allowed:
        raise ValueError(f"{name}={value!r} is not one of {allowed}")


class MaxSATSolver(BaseEstimator):
    """Partial MaxSAT solver with estimator-style parameters.

    Parameters
    ----------
    algorithm : {"linear-su", "linear-us", "msu3", "part-msu3"}
    graph : {"cvig", "res"}
        Graph model used to partition soft clauses (``part-msu3`` only).
    merge : {"seq", "balanced"}
        Merge order of partitions (``part-msu3`` only).
    seed : int
    timeout : float or None
        Seconds; :class:`maxpart.satcore.SolveTimeout` is raised past it.

    Attributes
    ----------
    status_ : Status
    cost_ : int or None
        Number of falsified soft clauses at the optimum.
    model_ : ndarray of int
        Signed literals, one per variable.
    stats_ : Stats
    """

    def __init__(self, algorithm="part-msu3", graph="res", merge="balanced", seed=0, timeout=None):
        self.algorithm = algorithm
        self.graph = graph
        self.merge = merge
        self.seed = seed
        self.timeout = timeout

    def fit(self, X, y=None):
        _check_choice("algorithm", self.algorithm, ALGORITHMS)
        _check_choice("graph", self.graph, GRAPH_MODELS)
        _check_choice("merge", self.merge, MERGE_MODES)
        formula = check_formula(X)
        result = solve(formula, self.algorithm, self.graph, self.merge, self.seed, self.timeout)
        self.status_ = result.status
        self.cost_ = result.cost
        self.model_ = None if result.model is None else np.asarray(result.model, dtype=np.int64)
        self.stats_ = result.stats
        self.n_partitions_ = result.stats.partitions
        return self

    @property
    def is_optimal_(self) -> bool:
        check_is_fitted(self, "status_")
        return self.status_ is Status.OPTIMUM

    def assignment(self) -> np.ndarray:
        """Boolean array, ``assignment()[v - 1]`` is the value of variable ``v``."""
        check_is_fitted(self, "status_")
        if self.model_ is None:
            raise ValueError("hard clauses are unsatisfiable; no model")
        return self.model_ > 0


class FormulaGraph(TransformerMixin, BaseEstimator):
    """Transform a formula into its CVIG or RES graph."""

    def __init__(self, model="res"):
        self.model = model

    def fit(self, X=None, y=None):
        _check_choice("model", self.model, GRAPH_MODELS)
        return self

    def transform(self, X):
        formula = check_formula(X)
        return build_cvig(formula) if self.model == "cvig" else build_res(formula)


class LouvainCommunities(ClusterMixin, BaseEstimator):
    """Community detection by greedy modularity maximization.

    ``labels_[i]`` is the community of ``nodes_[i]`` (nodes in sorted order).
    """

    def __init__(self, seed=0, shuffle=False, refine=True, restarts=8):
        self.seed = seed
        self.shuffle = shuffle
        self.refine = refine
        self.restarts = restarts

    def fit(self, X, y=None):
        g = check_graph(X)
        a = detect_communities(g, seed=self.seed, shuffle=self.shuffle, refine=self.refine, restarts=self.restarts)
        self.nodes_ = g.nodes
        self.labels_ = np.array([a.community_of[u] for u in self.nodes_], dtype=np.int64)
        self.modularity_ = a.modularity
        self.n_communities_ = a.num_communities
        self.assignment_ = a
        return self
