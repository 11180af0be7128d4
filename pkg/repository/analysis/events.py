"""
Enumeración de eventos para los análisis.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from config.settings import EXHAUSTIVE_EVENT_LIMIT, RANDOM_EVENT_COUNT
from repository.povm.outcome_space import EventSet, OutcomeSpace
from utils.exceptions import RejectedInputError

EVENT_KINDS = ("exhaustive", "empty", "full", "singleton", "random")


@dataclass(frozen=True)
class TaggedEvent:
    """Evento con su origen en la enumeración."""

    event: EventSet
    kind: str


def needs_random_events(space: OutcomeSpace, limit: int = EXHAUSTIVE_EVENT_LIMIT) -> bool:
    return space.size > limit


def enumerate_events(
    space: OutcomeSpace,
    rng: Optional[np.random.Generator] = None,
    limit: int = EXHAUSTIVE_EVENT_LIMIT,
    random_count: int = RANDOM_EVENT_COUNT,
) -> List[TaggedEvent]:
    """
    Eventos a analizar.

    Hasta `limit` átomos se recorren los 2^n eventos en orden de máscara de
    bits. Por encima: vacío, total, todos los singletons y `random_count`
    eventos aleatorios (cada átomo con probabilidad ½).

    Raises:
        RejectedInputError: Si hacen falta eventos aleatorios y no hay generador
    """
    n = space.size
    if not needs_random_events(space, limit):
        return [
            TaggedEvent(space.event(i for i in range(n) if mask >> i & 1), "exhaustive")
            for mask in range(1 << n)
        ]
    if rng is None:
        raise RejectedInputError(
            f"El espacio tiene {n} átomos (> {limit}); los eventos aleatorios requieren una semilla",
            reason="seed_required",
        )
    events = [
        TaggedEvent(space.empty_event(), "empty"),
        TaggedEvent(space.full_event(), "full"),
    ]
    events.extend(TaggedEvent(space.singleton(i), "singleton") for i in range(n))
    for _ in range(random_count):
        mask = rng.random(n) < 0.5
        events.append(TaggedEvent(space.event(np.flatnonzero(mask).tolist()), "random"))
    return events
