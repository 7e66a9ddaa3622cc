"""Held-Karp dynamic programming over subsets."""

import logging
import time
from typing import Optional

import numpy as np

from ..base import BaseTspSolver, TspResult
from ..config import SolveLimits
from ..core import Tour, TspInstance
from ..errors import MemoryLimitError

logger = logging.getLogger(__name__)

HARD_NODE_CAP = 20
DEFAULT_TABLE_BYTES = 512 * 2 ** 20


def table_bytes(n: int) -> int:
    """Size of the value table plus the int8 parent table for ``n`` nodes."""
    states = (n - 1) * 2 ** (n - 1)
    return states * (8 + 1)


class HeldKarpSolver(BaseTspSolver):
    """Exact solver: ``dp[S, j]`` is the cheapest path from node 0 through ``S`` ending at ``j``.

    Nodes ``1..n-1`` are bit positions ``0..n-2``. Integer instances run the
    recursion in int64 so ties and cutoffs compare exactly.
    """

    name = "held_karp"

    def __init__(self, limits: Optional[SolveLimits] = None, max_table_bytes: int = DEFAULT_TABLE_BYTES):
        super().__init__(limits)
        self.max_table_bytes = max_table_bytes

    def check_size(self, n: int) -> None:
        if n > HARD_NODE_CAP:
            raise MemoryLimitError(f"Held-Karp is capped at n={HARD_NODE_CAP}, got n={n}")
        if table_bytes(n) > self.max_table_bytes:
            raise MemoryLimitError(
                f"Held-Karp table for n={n} needs {table_bytes(n)} bytes, cap is {self.max_table_bytes}"
            )

    def solve(self, inst: TspInstance, cutoff: Optional[float] = None) -> TspResult:
        """Exact optimum; ``cutoff`` is irrelevant since the table always finishes."""
        n = inst.n
        self.check_size(n)
        started = time.perf_counter()

        matrix = inst.matrix()
        if inst.is_integer:
            dtype = np.int64
            unreachable = np.iinfo(np.int64).max // 4
        else:
            dtype = np.float64
            unreachable = np.inf

        m = n - 1
        full = (1 << m) - 1
        inner = matrix[1:, 1:].astype(dtype)
        dp = np.full((1 << m, m), unreachable, dtype=dtype)
        parent = np.full((1 << m, m), -1, dtype=np.int8)
        bits = np.arange(m)
        for j in range(m):
            dp[1 << j, j] = matrix[0, j + 1]

        for mask in range(1, full + 1):
            members = bits[(mask >> bits) & 1 == 1]
            if members.size < 2:
                continue
            previous = mask ^ (1 << members)
            # candidates[a, k] = dp[S - {j_a}, k] + c(k, j_a)
            candidates = dp[previous] + inner[:, members].T
            best = candidates.argmin(axis=1)
            dp[mask, members] = candidates[np.arange(members.size), best]
            parent[mask, members] = best

        closing = dp[full] + matrix[1:, 0].astype(dtype)
        last = int(closing.argmin())

        path = []
        mask, j = full, last
        while j >= 0:
            path.append(j + 1)
            previous_j = int(parent[mask, j])
            mask ^= 1 << j
            j = previous_j
        tour = Tour((0,) + tuple(reversed(path)))

        result = self._result(inst, tour, proven_optimal=True, started=started)
        logger.debug("held-karp n=%d value=%s runtime=%.3fs", n, result.value, result.runtime)
        return result
