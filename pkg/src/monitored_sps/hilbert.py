"""Truncated Hilbert space of dot + cavity + external mode.

States are ``|dot, n_cav, n_ext>`` with at most two quanta in total, where the
dot contributes one quantum when excited. ``|G,0,2>`` stands in for every state
with two or more external photons.

Operators are built in an untruncated product space (three quanta headroom per
mode) and then projected onto the nine retained states. Projecting *after*
forming products matters for the Hamiltonian: ``a sigma+`` acting on
``|G,1,1>`` passes through ``|X,1,1>`` (three quanta) before landing on
``|X,0,1>``, and truncating each factor separately would break Hermiticity.
"""

from __future__ import annotations

import csv
import enum
import functools
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

MAX_QUANTA = 2
_PAD = 3  # per-mode cutoff of the untruncated space used for products


class Dot(enum.IntEnum):
    G = 0
    X = 1


class BasisState(NamedTuple):
    dot: Dot
    n_cav: int
    n_ext: int

    @property
    def quanta(self) -> int:
        return int(self.dot) + self.n_cav + self.n_ext

    def label(self) -> str:
        return f"|{self.dot.name},{self.n_cav},{self.n_ext}>"


@dataclass(frozen=True)
class StateSpace:
    """Ordered basis with a reverse index.

    Ordering is quanta-major, then dot (G before X), then cavity photons, so
    the nine states come out as::

        |G,0,0>  |G,0,1> |G,1,0> |X,0,0>  |G,0,2> |G,1,1> |G,2,0> |X,0,1> |X,1,0>
    """

    states: tuple[BasisState, ...]
    index: dict[BasisState, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.states)})

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return len(self.states)

    def __getitem__(self, key: BasisState | tuple) -> int:
        return self.index[_as_state(key)]

    def quanta(self) -> np.ndarray:
        return np.array([s.quanta for s in self.states])

    def dot_excited(self) -> np.ndarray:
        return np.array([s.dot == Dot.X for s in self.states], dtype=float)

    def ket(self, key) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self[key]] = 1.0
        return v

    def projector(self, key) -> np.ndarray:
        v = self.ket(key)
        return np.outer(v, v.conj())


def _as_state(key) -> BasisState:
    if isinstance(key, BasisState):
        return key
    dot, n_cav, n_ext = key
    if isinstance(dot, str):
        dot = Dot[dot]
    return BasisState(Dot(dot), int(n_cav), int(n_ext))


def _sort_key(s: BasisState):
    return (s.quanta, int(s.dot), s.n_cav)


def build_space() -> StateSpace:
    candidates = (
        BasisState(d, c, e)
        for d, c, e in itertools.product(Dot, range(MAX_QUANTA + 1), range(MAX_QUANTA + 1))
    )
    kept = sorted((s for s in candidates if s.quanta <= MAX_QUANTA), key=_sort_key)
    return StateSpace(tuple(kept))


# -- untruncated product space -------------------------------------------------

_FULL = [BasisState(d, c, e) for d, c, e in itertools.product(Dot, range(_PAD + 1), range(_PAD + 1))]
_FULL_INDEX = {s: i for i, s in enumerate(_FULL)}


def _full_operator(rule) -> np.ndarray:
    """Matrix of ``rule(state) -> (amplitude, target) | None`` on the padded space.

    Targets beyond the padding are dropped.
    """
    m = np.zeros((len(_FULL), len(_FULL)), dtype=complex)
    for j, s in enumerate(_FULL):
        out = rule(s)
        if out is None:
            continue
        amp, target = out
        i = _FULL_INDEX.get(target)
        if i is not None:
            m[i, j] += amp
    return m


@functools.lru_cache(maxsize=None)
def _full_primitives() -> dict[str, np.ndarray]:
    a = _full_operator(
        lambda s: (np.sqrt(s.n_cav), s._replace(n_cav=s.n_cav - 1)) if s.n_cav > 0 else None
    )
    b = _full_operator(
        lambda s: (np.sqrt(s.n_ext), s._replace(n_ext=s.n_ext - 1)) if s.n_ext > 0 else None
    )
    sm = _full_operator(lambda s: (1.0, s._replace(dot=Dot.G)) if s.dot == Dot.X else None)
    return {"a": a, "b": b, "sigma_minus": sm}


def _full(kind: str) -> np.ndarray:
    p = _full_primitives()
    a, b, sm = p["a"], p["b"], p["sigma_minus"]
    dag = lambda m: m.conj().T  # noqa: E731
    table = {
        "a": lambda: a,
        "a_dag": lambda: dag(a),
        "b_dag": lambda: dag(b),
        "sigma_minus": lambda: sm,
        "sigma_plus": lambda: dag(sm),
        "proj_X": lambda: dag(sm) @ sm,
        "a_bdag": lambda: a @ dag(b),
    }
    if kind not in table:
        raise ValueError(f"unknown operator kind {kind!r}; expected one of {sorted(table)}")
    return table[kind]()


OPERATOR_KINDS = ("a", "a_dag", "b_dag", "sigma_minus", "sigma_plus", "proj_X", "a_bdag")


def _project(space: StateSpace, m: np.ndarray) -> np.ndarray:
    idx = [_FULL_INDEX[s] for s in space.states]
    return np.ascontiguousarray(m[np.ix_(idx, idx)])


def make_operator(kind: str, space: StateSpace) -> np.ndarray:
    """Ladder/transition operator as a dense complex matrix on ``space``.

    Matrix elements whose target lies outside the truncated space are zero,
    e.g. ``sigma_plus`` annihilates ``|G,0,2>``.
    """
    return _project(space, _full(kind))


def hamiltonian(g: float, space: StateSpace) -> np.ndarray:
    """Jaynes-Cummings coupling ``i g (a^dag sigma- - a sigma+)`` with hbar = 1."""
    if g < 0:
        raise ValueError("g must be non-negative")
    full = 1j * g * (_full("a_dag") @ _full("sigma_minus") - _full("a") @ _full("sigma_plus"))
    return _project(space, full)


def operator_to_csv(matrix: np.ndarray, path: str | Path) -> None:
    """Dump nonzero entries as ``row,col,re,im`` (17 significant digits)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "re", "im"])
        for (i, j), v in np.ndenumerate(matrix):
            if v != 0:
                w.writerow([i, j, f"{v.real:.17g}", f"{v.imag:.17g}"])
