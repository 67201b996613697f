"""Node-by-node breadth-first augmenting-path search (the plain Ford-Fulkerson step)."""

from __future__ import annotations

import time
from collections import deque
from typing import Optional

from .bulk_search import TIMEOUT_STRIDE, SearchTimeout
from .network import SINK, SOURCE, TENetwork


def find_augmenting_path_bfs(net: TENetwork, stats=None, deadline: Optional[float] = None) -> Optional[list]:
    """FIFO search over ``net.residual_neighbors``; every dequeue is one
    expansion. Stops as soon as SINK is generated."""
    parent: dict = {SOURCE: None}
    queue = deque([SOURCE])
    expansions = generated = 0
    neighbors = net.residual_neighbors
    try:
        while queue:
            node = queue.popleft()
            expansions += 1
            if deadline is not None and expansions % TIMEOUT_STRIDE == 0 and time.monotonic() > deadline:
                raise SearchTimeout
            for succ, _ in neighbors(node):
                if succ in parent:
                    continue
                parent[succ] = node
                generated += 1
                if succ == SINK:
                    path = [SINK]
                    while path[-1] != SOURCE:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return path
                queue.append(succ)
        return None
    finally:
        if stats is not None:
            stats.expansions += expansions
            stats.generated += generated
