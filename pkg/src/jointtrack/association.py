"""Track/detection association in bounding-box space.

Joint detections are too jittery under occlusion to associate on, so
matching uses the box detector instead: each track's ground state predicts
the horizontal box center and, modelling the person as a cylinder of known
width, the box width

    u_bar = g(X)|_x,    w_bar = f_x * M_W / X_z .

The distance to a detected box compares only these two components (the
vertical center and box height carry no extra ground-plane information):

    d = sqrt((u_bar - u)^2 + (w_bar - w)^2)

A global nearest neighbor assignment (Hungarian solve on the gated cost
matrix) matches tracks to detections one-to-one: pairs farther apart than
the gate are forbidden, the match count is maximized over allowed pairs
and the total distance minimized among those matchings.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import BehindCameraError
from .geometry import CameraModel, GroundPlane
from .prior import PriorModel

MIN_ASSOCIATION_DEPTH = 0.1

# Any finite distance is dwarfed by this; used to forbid gated-out pairs
# while keeping the cost matrix solvable.
FORBIDDEN_COST = 1e12


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: center (u, v), width and height, in pixels."""

    u: float
    v: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError("box width and height must be positive")

    def center(self) -> np.ndarray:
        return np.array([self.u, self.v])

    def to_list(self) -> List[float]:
        return [self.u, self.v, self.w, self.h]

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "BoundingBox":
        u, v, w, h = (float(x) for x in values)
        return cls(u=u, v=v, w=w, h=h)


@dataclass(frozen=True)
class AssociationResult:
    """One-to-one assignment outcome.

    matches holds (track_id, detection_index, distance); ids and indices
    appear at most once across all fields.
    """

    matches: List[Tuple[int, int, float]]
    unmatched_tracks: List[int]
    unmatched_detections: List[int]

    def total_cost(self) -> float:
        return float(sum(m[2] for m in self.matches))


def expected_box(
    state_mean: np.ndarray,
    camera: CameraModel,
    ground: GroundPlane,
    prior: PriorModel,
) -> Tuple[float, float]:
    """Predicted (horizontal center, width) of a track's bounding box.

    Raises:
        BehindCameraError: reconstructed depth is below 0.1 m.
    """
    s = np.asarray(state_mean, dtype=float).ravel()
    ankle = ground.to_camera(s[0], s[1])
    depth = ankle[2]
    if depth <= MIN_ASSOCIATION_DEPTH:
        raise BehindCameraError(f"predicted depth {depth:.3f} m is too small")
    u_bar = camera.fx * ankle[0] / depth + camera.cx
    w_bar = camera.fx * prior.body_width / depth
    return float(u_bar), float(w_bar)


def box_distance(expected: Tuple[float, float], detected: BoundingBox) -> float:
    """Euclidean distance in (center-u, width) space; v and h are ignored."""
    du = expected[0] - detected.u
    dw = expected[1] - detected.w
    return float(np.hypot(du, dw))


def match_gnn(
    tracks: Sequence[Tuple[int, Tuple[float, float]]],
    detections: Sequence[BoundingBox],
    gate: float,
    forbidden_detections: Optional[Sequence[int]] = None,
) -> AssociationResult:
    """Globally optimal gated one-to-one matching.

    Args:
        tracks: (track_id, (u_bar, w_bar)) pairs.
        detections: detected boxes, indexed by position.
        gate: pairs with distance > gate are never matched.
        forbidden_detections: indices excluded from matching entirely
            (e.g. a detection reserved for target re-initialization).

    The assignment maximizes the number of gated matches and, among those,
    minimizes the total distance (Hungarian solve with forbidden pairs at
    a prohibitive constant).
    """
    if gate <= 0:
        raise ValueError("gate must be positive")
    blocked = set(forbidden_detections or ())
    track_ids = [tid for tid, _ in tracks]
    if not tracks or not detections:
        return AssociationResult(
            matches=[],
            unmatched_tracks=list(track_ids),
            unmatched_detections=[i for i in range(len(detections)) if i not in blocked],
        )

    cost = np.full((len(tracks), len(detections)), FORBIDDEN_COST)
    for i, (_, exp) in enumerate(tracks):
        for j, det in enumerate(detections):
            if j in blocked:
                continue
            d = box_distance(exp, det)
            if d <= gate:
                cost[i, j] = d

    rows, cols = linear_sum_assignment(cost)
    matches = []
    matched_tracks, matched_dets = set(), set()
    for i, j in zip(rows, cols):
        if cost[i, j] >= FORBIDDEN_COST:
            continue
        matches.append((track_ids[i], int(j), float(cost[i, j])))
        matched_tracks.add(track_ids[i])
        matched_dets.add(int(j))
    return AssociationResult(
        matches=matches,
        unmatched_tracks=[tid for tid in track_ids if tid not in matched_tracks],
        unmatched_detections=[
            j for j in range(len(detections)) if j not in matched_dets and j not in blocked
        ],
    )
