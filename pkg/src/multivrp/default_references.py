"""
Published scores of an exact-method reference solver on the validation sets,
stored here as constants so the gap can be computed offline.

Objectives are average total distance for CVRPTW and MDVRPTW (lower is
better) and average collected score for TOPTW and PCVRPTW (higher is better).
"""
from typing import List

from multivrp.models import ProblemType, ReferenceScore

REFERENCE_METHOD = "PyVRP"

REFERENCE_SCORES: List[ReferenceScore] = [
    ReferenceScore(
        problem=problem, num_services=size, score=score, agents=agents, method=REFERENCE_METHOD
    )
    for problem, size, score, agents in (
        (ProblemType.CVRPTW, 50, 14.478, 9.6),
        (ProblemType.CVRPTW, 100, 24.493, 16.9),
        (ProblemType.TOPTW, 50, 33.245, 5.0),
        (ProblemType.TOPTW, 100, 39.984, 5.0),
        (ProblemType.PCVRPTW, 50, 26.653, 5.0),
        (ProblemType.PCVRPTW, 100, 35.534, 5.0),
        (ProblemType.MDVRPTW, 50, 8.928, 10.5),
        (ProblemType.MDVRPTW, 100, 15.224, 17.9),
    )
]
