"""
Espacios de resultados discretos y eventos.

Los átomos generan el álgebra de eventos (uniones finitas de átomos).
Los espacios de rejilla conservan la topología de celdas necesaria para
formar sucesiones de refinamiento anidadas.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from utils.exceptions import NonProductSpaceError, RejectedInputError

SPACE_KINDS = ("lattice", "grid", "line", "points")
MEASURE_KINDS = ("counting-normalized", "lebesgue-cell")
PRODUCT_KINDS = ("lattice", "grid")


@dataclass(frozen=True)
class MeasureSpec:
    """Medida de referencia ν sobre el espacio de resultados."""

    kind: str
    total: Optional[float] = None
    infinite: bool = False

    def __post_init__(self):
        if self.kind not in MEASURE_KINDS:
            raise RejectedInputError(
                f"Tipo de medida no soportado: {self.kind}. Tipos soportados: {', '.join(MEASURE_KINDS)}",
                reason="invalid_measure",
            )
        if self.infinite and self.total is not None:
            raise RejectedInputError("Una medida infinita no tiene total finito", reason="invalid_measure")

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "total": self.total, "infinite": self.infinite}


@dataclass(frozen=True)
class Atom:
    """Átomo del espacio: índice, coordenadas y peso μ({x})."""

    index: int
    coord: Tuple[float, ...]
    weight: float


@dataclass(frozen=True)
class EventSet:
    """Evento Δ: conjunto ordenado de índices de átomos."""

    atom_indices: Tuple[int, ...]
    space_size: int

    def __post_init__(self):
        previous = -1
        for index in self.atom_indices:
            if not 0 <= index < self.space_size:
                raise RejectedInputError(
                    f"Índice de átomo {index} fuera de rango [0, {self.space_size})",
                    reason="index_out_of_range",
                )
            if index <= previous:
                raise RejectedInputError(
                    "Los índices de un evento deben ser estrictamente crecientes",
                    reason="unsorted_event",
                )
            previous = index

    @classmethod
    def of(cls, indices: Iterable[int], space_size: int) -> "EventSet":
        return cls(tuple(sorted({int(i) for i in indices})), int(space_size))

    def as_array(self) -> np.ndarray:
        return np.array(self.atom_indices, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.atom_indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.atom_indices)

    def __contains__(self, index: object) -> bool:
        return index in set(self.atom_indices)

    def _check_compatible(self, other: "EventSet") -> None:
        if self.space_size != other.space_size:
            raise RejectedInputError(
                "Los eventos pertenecen a espacios de tamaño distinto",
                reason="space_mismatch",
            )

    def union(self, other: "EventSet") -> "EventSet":
        self._check_compatible(other)
        return EventSet.of(set(self.atom_indices) | set(other.atom_indices), self.space_size)

    def difference(self, other: "EventSet") -> "EventSet":
        self._check_compatible(other)
        return EventSet.of(set(self.atom_indices) - set(other.atom_indices), self.space_size)

    def intersection(self, other: "EventSet") -> "EventSet":
        self._check_compatible(other)
        return EventSet.of(set(self.atom_indices) & set(other.atom_indices), self.space_size)

    def issubset(self, other: "EventSet") -> bool:
        self._check_compatible(other)
        return set(self.atom_indices) <= set(other.atom_indices)

    def is_disjoint(self, other: "EventSet") -> bool:
        self._check_compatible(other)
        return not set(self.atom_indices) & set(other.atom_indices)


@dataclass(frozen=True, eq=False)
class OutcomeSpace:
    """
    Espacio de resultados finito.

    Tipos:
        lattice: ℤ_d × ℤ_d con adyacencia periódica
        grid: celdas cuadradas que teselan [−L, L]², adyacencia de 4 vecinos
        line: celdas de una dimensión (marginal de una rejilla)
        points: conjunto finito sin topología
    """

    kind: str
    shape: Tuple[int, ...]
    coords: np.ndarray
    weights: np.ndarray
    measure: MeasureSpec
    origin: Optional[Tuple[float, ...]] = None
    step: Optional[float] = None

    def __post_init__(self):
        if self.kind not in SPACE_KINDS:
            raise RejectedInputError(
                f"Tipo de espacio no soportado: {self.kind}. Tipos soportados: {', '.join(SPACE_KINDS)}",
                reason="invalid_space",
            )
        size = int(np.prod(self.shape))
        if self.weights.shape != (size,) or self.coords.shape[0] != size:
            raise RejectedInputError(
                f"Pesos/coordenadas incompatibles con la forma {self.shape}",
                reason="invalid_space",
            )
        if size == 0:
            raise RejectedInputError("El espacio de resultados está vacío", reason="invalid_space")
        if np.any(self.weights < 0.0) or not np.all(np.isfinite(self.weights)):
            raise RejectedInputError("Los pesos de medida deben ser no negativos y finitos", reason="negative_weight")
        if self.measure.kind == "counting-normalized" and not np.allclose(
            self.weights, self.weights[0], rtol=1e-12, atol=0.0
        ):
            raise RejectedInputError(
                "Una medida de conteo normalizada requiere pesos iguales",
                reason="inconsistent_measure",
            )
        if self.measure.kind == "lebesgue-cell" and self.kind == "grid":
            cell_area = self.step ** 2 / math.pi
            if not np.allclose(self.weights, cell_area, rtol=1e-12, atol=0.0):
                raise RejectedInputError(
                    "Los pesos de una rejilla deben ser las áreas de celda h²/π",
                    reason="inconsistent_measure",
                )
        self.coords.setflags(write=False)
        self.weights.setflags(write=False)

    # Constructores

    @classmethod
    def points(cls, count: int, weight: float = 1.0, coords: Optional[Sequence[float]] = None) -> "OutcomeSpace":
        """Conjunto finito de puntos con medida de conteo."""
        values = np.arange(count, dtype=np.float64) if coords is None else np.asarray(coords, dtype=np.float64)
        return cls(
            kind="points",
            shape=(int(count),),
            coords=values.reshape(int(count), -1),
            weights=np.full(int(count), float(weight)),
            measure=MeasureSpec("counting-normalized", total=float(count) * float(weight)),
        )

    @classmethod
    def lattice(cls, dim: int) -> "OutcomeSpace":
        """Retículo ℤ_d × ℤ_d con peso 1/d por átomo (μ(X) = d)."""
        q, p = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
        coords = np.stack([q.reshape(-1), p.reshape(-1)], axis=1).astype(np.float64)
        return cls(
            kind="lattice",
            shape=(int(dim), int(dim)),
            coords=coords,
            weights=np.full(dim * dim, 1.0 / dim),
            measure=MeasureSpec("counting-normalized", total=float(dim)),
        )

    @classmethod
    def grid(cls, half_width: float, cell_size: float) -> "OutcomeSpace":
        """Rejilla de celdas de lado h que tesela [−L, L]², peso h²/π por celda."""
        cells = int(round(2.0 * half_width / cell_size))
        centers = -half_width + cell_size * (np.arange(cells) + 0.5)
        x, y = np.meshgrid(centers, centers, indexing="ij")
        coords = np.stack([x.reshape(-1), y.reshape(-1)], axis=1)
        return cls(
            kind="grid",
            shape=(cells, cells),
            coords=coords,
            weights=np.full(cells * cells, cell_size ** 2 / math.pi),
            measure=MeasureSpec("lebesgue-cell", infinite=True),
            origin=(-float(half_width), -float(half_width)),
            step=float(cell_size),
        )

    @classmethod
    def line(cls, origin: float, step: float, count: int, weight: float) -> "OutcomeSpace":
        """Celdas unidimensionales (marginal de una rejilla)."""
        centers = origin + step * (np.arange(count) + 0.5)
        return cls(
            kind="line",
            shape=(int(count),),
            coords=centers.reshape(-1, 1),
            weights=np.full(int(count), float(weight)),
            measure=MeasureSpec("lebesgue-cell", infinite=True),
            origin=(float(origin),),
            step=float(step),
        )

    # Propiedades

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    @property
    def is_product(self) -> bool:
        return self.kind in PRODUCT_KINDS

    @property
    def axis_sizes(self) -> Tuple[int, int]:
        if not self.is_product:
            raise NonProductSpaceError(self.kind)
        return int(self.shape[0]), int(self.shape[1])

    @property
    def half_width(self) -> Optional[float]:
        if self.origin is None:
            return None
        return -self.origin[0]

    def atom(self, index: int) -> Atom:
        self._check_index(index)
        return Atom(index=index, coord=tuple(float(c) for c in self.coords[index]), weight=float(self.weights[index]))

    def atoms(self) -> List[Atom]:
        return [self.atom(i) for i in range(self.size)]

    def _check_index(self, index: int) -> None:
        if not 0 <= index < self.size:
            raise RejectedInputError(
                f"Índice de átomo {index} fuera de rango [0, {self.size})",
                reason="index_out_of_range",
            )

    # Eventos

    def event(self, indices: Iterable[int]) -> EventSet:
        return EventSet.of(indices, self.size)

    def empty_event(self) -> EventSet:
        return EventSet((), self.size)

    def full_event(self) -> EventSet:
        return EventSet(tuple(range(self.size)), self.size)

    def singleton(self, index: int) -> EventSet:
        self._check_index(index)
        return EventSet((int(index),), self.size)

    def complement(self, event: EventSet) -> EventSet:
        self._check_event(event)
        return self.full_event().difference(event)

    def measure_of(self, event: EventSet) -> float:
        """ν(Δ) como suma de los pesos de sus átomos (siempre finita)."""
        self._check_event(event)
        if len(event) == 0:
            return 0.0
        return float(np.sum(self.weights[event.as_array()]))

    def _check_event(self, event: EventSet) -> None:
        if event.space_size != self.size:
            raise RejectedInputError(
                f"El evento pertenece a un espacio de {event.space_size} átomos, no de {self.size}",
                reason="space_mismatch",
            )

    # Estructura producto

    def product_index(self, i: int, j: int) -> int:
        n_q, n_p = self.axis_sizes
        if not (0 <= i < n_q and 0 <= j < n_p):
            raise RejectedInputError(f"Índices producto ({i}, {j}) fuera de rango", reason="index_out_of_range")
        return i * n_p + j

    def axis_indices(self, index: int) -> Tuple[int, int]:
        n_q, n_p = self.axis_sizes
        self._check_index(index)
        return index // n_p, index % n_p

    def product_event(self, q_indices: Iterable[int], p_indices: Iterable[int]) -> EventSet:
        """Evento Δq × Δp a partir de índices de cada eje."""
        return self.event(self.product_index(i, j) for i in q_indices for j in p_indices)

    def column_event(self, q_index: int) -> EventSet:
        """Franja {q} × (todo p)."""
        n_q, n_p = self.axis_sizes
        return self.product_event([q_index], range(n_p))

    def row_event(self, p_index: int) -> EventSet:
        """Franja (todo q) × {p}."""
        n_q, n_p = self.axis_sizes
        return self.product_event(range(n_q), [p_index])

    # Topología

    def neighbors(self, index: int) -> Tuple[int, ...]:
        """Átomos adyacentes (clausura discreta de un átomo)."""
        self._check_index(index)
        if self.kind == "points":
            return ()
        if self.kind == "line":
            return tuple(j for j in (index - 1, index + 1) if 0 <= j < self.size)
        n_q, n_p = self.axis_sizes
        i, j = index // n_p, index % n_p
        if self.kind == "lattice":
            candidates = {((i + di) % n_q) * n_p + (j + dj) % n_p for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1))}
            candidates.discard(index)
            return tuple(sorted(candidates))
        result = []
        for di, dj in ((-1, 0), (0, -1), (0, 1), (1, 0)):
            a, b = i + di, j + dj
            if 0 <= a < n_q and 0 <= b < n_p:
                result.append(a * n_p + b)
        return tuple(sorted(result))

    def locate(self, coord: Sequence[float]) -> Optional[int]:
        """Índice de la celda que contiene un punto (rejillas y líneas)."""
        if self.kind not in ("grid", "line"):
            raise RejectedInputError(
                f"Solo las rejillas permiten localizar puntos, tipo recibido: {self.kind}",
                reason="not_a_grid",
            )
        cells = []
        for axis, value in enumerate(coord[: len(self.origin)]):
            k = int(math.floor((float(value) - self.origin[axis]) / self.step))
            if not 0 <= k < self.shape[axis]:
                return None
            cells.append(k)
        if self.kind == "line":
            return cells[0]
        return cells[0] * self.shape[1] + cells[1]

    def refine_event(self, event: EventSet, child: "OutcomeSpace") -> EventSet:
        """
        Proyecta un evento de esta rejilla sobre una rejilla hija anidada.

        Retorna los átomos hijos cuyo centro cae en alguna celda del evento.

        Raises:
            RejectedInputError: Si las rejillas no están anidadas
        """
        self._check_event(event)
        if self.kind != child.kind or self.kind not in ("grid", "line"):
            raise RejectedInputError("Solo se refinan rejillas del mismo tipo", reason="not_nested")
        ratio = self.step / child.step
        if (
            self.origin != child.origin
            or abs(ratio - round(ratio)) > 1e-9
            or round(ratio) < 1
            or child.shape[0] != self.shape[0] * round(ratio)
        ):
            raise RejectedInputError(
                "Las rejillas no están anidadas (origen, paso o extensión incompatibles)",
                reason="not_nested",
            )
        members = set(event.atom_indices)
        selected = [k for k in range(child.size) if self.locate(child.coords[k]) in members]
        return child.event(selected)

    def cell_size_label(self) -> Dict[str, Any]:
        return {"kind": self.kind, "shape": list(self.shape), "step": self.step}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "shape": list(self.shape),
            "weights": [float(w) for w in self.weights],
            "coords": [[float(c) for c in row] for row in self.coords],
            "measure": self.measure.to_dict(),
            "origin": list(self.origin) if self.origin is not None else None,
            "step": self.step,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "OutcomeSpace":
        measure = payload.get("measure") or {"kind": "counting-normalized"}
        origin = payload.get("origin")
        shape = tuple(int(s) for s in payload["shape"])
        size = int(np.prod(shape))
        coords = payload.get("coords")
        coord_array = (
            np.arange(size, dtype=np.float64).reshape(size, 1)
            if coords is None
            else np.asarray(coords, dtype=np.float64).reshape(size, -1)
        )
        return cls(
            kind=payload["kind"],
            shape=shape,
            coords=coord_array,
            weights=np.asarray(payload["weights"], dtype=np.float64),
            measure=MeasureSpec(
                kind=measure["kind"],
                total=measure.get("total"),
                infinite=bool(measure.get("infinite", False)),
            ),
            origin=tuple(float(o) for o in origin) if origin is not None else None,
            step=payload.get("step"),
        )
