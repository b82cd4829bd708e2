"""Piecewise reference trajectories, Hermite-cubic turning segments, assembly.

A reference trajectory is an ordered sequence of cubic pieces in *tracking
order*. Connector pieces are traversed backward (the robot backs up along
them), so piece x-domains may overlap; ``RefTrajectory`` therefore keeps a
"function view" that resolves every abscissa to the piece of the robot's
final pass, which is what later planning queries evaluate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .geometry import Point2, eval_cubic, eval_cubic_slope


class TrajectoryError(ValueError):
    """Invalid trajectory construction or evaluation."""


class PieceKind(enum.Enum):
    """Provenance tag of a trajectory piece.

    Turn pieces keep their tag through later modifications so the planner can
    tell whether a collision point sits on an earlier detour.
    """

    INITIAL_LINE = "initial-line"
    VALID_PART = "valid-part"
    CONNECTION = "connection"
    TURN_I = "turn-I"
    TURN_II = "turn-II"
    TURN_III = "turn-III"


TURN_KINDS = frozenset({PieceKind.TURN_I, PieceKind.TURN_II, PieceKind.TURN_III})

# assembly stages in tracking order; "back-link" and "goal-link" connectors
# are traversed backward
STAGE_HEAD = "head"
STAGE_BACK_LINK = "back-link"
STAGE_TURN = "turn"
STAGE_TAIL = "tail"
STAGE_GOAL_LINK = "goal-link"
STAGES = (STAGE_HEAD, STAGE_BACK_LINK, STAGE_TURN, STAGE_TAIL, STAGE_GOAL_LINK)

_WIDTH_EPS = 1e-12
_JUNCTION_TOL = 1e-9


@dataclass(frozen=True)
class TrajectoryPiece:
    kind: PieceKind
    x_lo: float
    x_hi: float
    coeffs: tuple[float, float, float, float]
    reversed: bool = False
    stage: str = STAGE_HEAD
    obstacle_id: int | None = None
    turn_direction: int | None = None

    def __post_init__(self):
        if not (self.x_lo <= self.x_hi):
            raise TrajectoryError("piece domain is empty: [%r, %r]" % (self.x_lo, self.x_hi))

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    def eval(self, x: float) -> float:
        return float(eval_cubic(self.coeffs, x))

    def slope(self, x: float) -> float:
        return float(eval_cubic_slope(self.coeffs, x))

    def start_point(self) -> Point2:
        """Where tracking of this piece begins."""
        x = self.x_hi if self.reversed else self.x_lo
        return Point2(x, self.eval(x))

    def end_point(self) -> Point2:
        """Where tracking of this piece ends."""
        x = self.x_lo if self.reversed else self.x_hi
        return Point2(x, self.eval(x))


def line_piece(y: float, x_lo: float, x_hi: float, *, kind: PieceKind,
               reversed: bool = False, stage: str = STAGE_HEAD) -> TrajectoryPiece:
    return TrajectoryPiece(kind, x_lo, x_hi, (0.0, 0.0, 0.0, float(y)),
                           reversed=reversed, stage=stage)


@dataclass(frozen=True)
class RefTrajectory:
    """Ordered pieces plus the single-valued view used for evaluation."""

    pieces: tuple[TrajectoryPiece, ...]

    def __post_init__(self):
        if not self.pieces:
            raise TrajectoryError("trajectory needs at least one piece")

    @cached_property
    def _view(self) -> tuple[tuple[float, float, TrajectoryPiece], ...]:
        segs: list[tuple[float, float, TrajectoryPiece]] = []
        for piece in self.pieces:
            lo, hi = piece.x_lo, piece.x_hi
            kept: list[tuple[float, float, TrajectoryPiece]] = []
            for a, b, pc in segs:
                if a < lo - _WIDTH_EPS:
                    kept.append((a, min(b, lo), pc))
                if b > hi + _WIDTH_EPS:
                    kept.append((max(a, hi), b, pc))
            kept.append((lo, hi, piece))
            kept.sort(key=lambda seg: seg[0])
            segs = [s for s in kept if s[1] - s[0] > _WIDTH_EPS]
        return tuple(segs)

    @cached_property
    def _view_starts(self) -> np.ndarray:
        return np.array([seg[0] for seg in self._view])

    @property
    def domain(self) -> tuple[float, float]:
        return self._view[0][0], self._view[-1][1]

    def piece_at(self, x: float) -> TrajectoryPiece:
        """Piece of the final pass covering ``x`` (right-hand piece at junctions)."""
        lo, hi = self.domain
        if x < lo - _JUNCTION_TOL or x > hi + _JUNCTION_TOL:
            raise TrajectoryError("x=%r outside trajectory domain [%r, %r]" % (x, lo, hi))
        idx = int(np.searchsorted(self._view_starts, x, side="right")) - 1
        idx = max(idx, 0)
        return self._view[idx][2]

    def eval_and_slope(self, x: float) -> tuple[float, float]:
        piece = self.piece_at(x)
        return piece.eval(x), piece.slope(x)

    def eval(self, x: float) -> float:
        return self.piece_at(x).eval(x)

    def eval_many(self, xs: np.ndarray, clamp: bool = False) -> np.ndarray:
        """Vectorized final-pass evaluation; ``clamp`` extends end values outward."""
        xs = np.asarray(xs, dtype=float)
        lo, hi = self.domain
        q = np.clip(xs, lo, hi) if clamp else xs
        idx = np.clip(np.searchsorted(self._view_starts, q, side="right") - 1, 0, len(self._view) - 1)
        out = np.empty_like(q)
        for k, (_, _, piece) in enumerate(self._view):
            mask = idx == k
            if mask.any():
                out[mask] = eval_cubic(piece.coeffs, q[mask])
        return out

    def clip(self, lo: float, hi: float, *, stage: str) -> tuple[TrajectoryPiece, ...]:
        """Final-pass pieces restricted to [lo, hi], re-staged for a new assembly.

        Clipped initial-line pieces become valid parts; turn and connection
        provenance is preserved.
        """
        out: list[TrajectoryPiece] = []
        for a, b, piece in self._view:
            s, e = max(a, lo), min(b, hi)
            if e - s <= _WIDTH_EPS:
                continue
            kind = PieceKind.VALID_PART if piece.kind is PieceKind.INITIAL_LINE else piece.kind
            out.append(replace(piece, kind=kind, x_lo=s, x_hi=e, reversed=False, stage=stage))
        return tuple(out)

    def junction_gaps(self) -> list[float]:
        """Distance between consecutive pieces' tracked end and start points."""
        gaps = []
        for prev, nxt in zip(self.pieces, self.pieces[1:]):
            pe, ns = prev.end_point(), nxt.start_point()
            gaps.append(math.hypot(pe.x - ns.x, pe.y - ns.y))
        return gaps

    def to_records(self) -> list[dict]:
        recs = []
        for p in self.pieces:
            recs.append({
                "kind": p.kind.value,
                "stage": p.stage,
                "x_lo": p.x_lo,
                "x_hi": p.x_hi,
                "coeffs": list(p.coeffs),
                "reversed": p.reversed,
                "obstacle_id": p.obstacle_id,
                "turn_direction": p.turn_direction,
            })
        return recs

    def to_text(self) -> str:
        lines = []
        for r in self.to_records():
            lines.append("%s %s [%r, %r] coeffs=%r reversed=%s obstacle=%s" % (
                r["stage"], r["kind"], r["x_lo"], r["x_hi"], r["coeffs"],
                r["reversed"], r["obstacle_id"]))
        return "\n".join(lines)


def initial_trajectory(x_g: float) -> RefTrajectory:
    """Straight reference along the local x-axis from the origin to the goal."""
    if not (x_g > 0.0):
        raise TrajectoryError("goal abscissa must be positive, got %r" % (x_g,))
    return RefTrajectory((line_piece(0.0, 0.0, float(x_g), kind=PieceKind.INITIAL_LINE),))


# ---------------------------------------------------------------------------
# Hermite cubics and turning trajectories
# ---------------------------------------------------------------------------

def solve_hermite_cubic(p0: Point2, p1: Point2, slope0: float, slope1: float
                        ) -> tuple[float, float, float, float]:
    """Cubic y = ax^3 + bx^2 + cx + d matching positions and slopes at p0, p1.

    One step of iterative refinement keeps boundary residuals near machine
    precision even for ill-conditioned abscissa pairs.
    """
    x0, y0 = p0
    x1, y1 = p1
    if x0 == x1:
        raise TrajectoryError("Hermite endpoints share abscissa x=%r" % (x0,))
    m = np.array([
        [x0 ** 3, x0 ** 2, x0, 1.0],
        [x1 ** 3, x1 ** 2, x1, 1.0],
        [3.0 * x0 ** 2, 2.0 * x0, 1.0, 0.0],
        [3.0 * x1 ** 2, 2.0 * x1, 1.0, 0.0],
    ])
    rhs = np.array([y0, y1, slope0, slope1], dtype=float)
    coeffs = np.linalg.solve(m, rhs)
    coeffs += np.linalg.solve(m, rhs - m @ coeffs)
    a, b, c, d = (float(v) for v in coeffs)
    return a, b, c, d


@dataclass(frozen=True)
class TurningTrajectory:
    """Three-part detour: cubic in, horizontal bypass, cubic out."""

    entry: TrajectoryPiece     # cubic a -> b
    bypass: TrajectoryPiece    # horizontal b -> c (a single point when b.x == c.x)
    exit: TrajectoryPiece      # cubic c -> d
    a: Point2
    b: Point2
    c: Point2
    d: Point2
    slope_a: float
    slope_b: float
    slope_c: float
    slope_d: float
    direction: int | None = None
    rho: float | None = None
    delta: float | None = None
    obstacle_id: int | None = None

    @property
    def parts(self) -> tuple[TrajectoryPiece, TrajectoryPiece, TrajectoryPiece]:
        return self.entry, self.bypass, self.exit


def build_turning_trajectory(a: Point2, b: Point2, c: Point2, d: Point2,
                             slope_a: float, slope_b: float,
                             slope_c: float, slope_d: float,
                             *, direction: int | None = None,
                             rho: float | None = None,
                             delta: float | None = None,
                             obstacle_id: int | None = None) -> TurningTrajectory:
    if not (a.x <= b.x <= c.x <= d.x):
        raise TrajectoryError("turn anchors out of order: %r %r %r %r" % (a.x, b.x, c.x, d.x))
    if abs(b.y - c.y) > _JUNCTION_TOL:
        raise TrajectoryError("bypass endpoints differ in ordinate: %r vs %r" % (b.y, c.y))
    meta = dict(stage=STAGE_TURN, obstacle_id=obstacle_id, turn_direction=direction)
    entry = TrajectoryPiece(PieceKind.TURN_I, a.x, b.x,
                            solve_hermite_cubic(a, b, slope_a, slope_b), **meta)
    bypass = TrajectoryPiece(PieceKind.TURN_II, b.x, c.x,
                             (0.0, 0.0, 0.0, float(b.y)), **meta)
    exit_ = TrajectoryPiece(PieceKind.TURN_III, c.x, d.x,
                            solve_hermite_cubic(c, d, slope_c, slope_d), **meta)
    return TurningTrajectory(entry, bypass, exit_, a, b, c, d,
                             slope_a, slope_b, slope_c, slope_d,
                             direction=direction, rho=rho, delta=delta,
                             obstacle_id=obstacle_id)


# ---------------------------------------------------------------------------
# assembly of the modified reference trajectory
# ---------------------------------------------------------------------------

def assemble_modified(traj: RefTrajectory, turn: TurningTrajectory,
                      x_now: float, y_now: float, x_g: float) -> RefTrajectory:
    """Replace the stretch spanned by a turn, keeping valid parts and adding
    the connectors that make the result trackable from the robot's position.

    Piece layout, in tracking order:
      head       valid stretch of the old trajectory up to max(x_now, a.x)
      back-link  backward connector from the robot to the turn start
                 (horizontal at the robot's ordinate when a.x < 0, otherwise
                 a backward copy of the old trajectory)
      turn       the three turn parts
      tail       old trajectory from d.x to the goal (when d.x < x_g)
      goal-link  backward horizontal at 0 from d.x to the goal (when d.x > x_g)
    """
    x_a, x_d = turn.a.x, turn.d.x
    pieces: list[TrajectoryPiece] = []

    head_hi = max(x_now, x_a)
    if head_hi > 0.0:
        pieces.extend(traj.clip(0.0, head_hi, stage=STAGE_HEAD))

    skip_gap_check_at = -1
    if x_a < x_now:
        if x_a < 0.0:
            # reference restarts from the robot's own ordinate; the junction
            # with the head carries the robot's current tracking offset
            skip_gap_check_at = len(pieces) - 1 if pieces else -1
            pieces.append(line_piece(y_now, x_a, x_now, kind=PieceKind.CONNECTION,
                                     reversed=True, stage=STAGE_BACK_LINK))
        else:
            back = traj.clip(x_a, x_now, stage=STAGE_BACK_LINK)
            for pc in reversed(back):
                pieces.append(replace(pc, reversed=True))

    for part in turn.parts:
        if part.width > _WIDTH_EPS:
            pieces.append(part)

    if x_d < x_g:
        pieces.extend(traj.clip(x_d, x_g, stage=STAGE_TAIL))
    elif x_d > x_g:
        pieces.append(line_piece(0.0, x_g, x_d, kind=PieceKind.CONNECTION,
                                 reversed=True, stage=STAGE_GOAL_LINK))

    result = RefTrajectory(tuple(pieces))
    for i, gap in enumerate(result.junction_gaps()):
        if i == skip_gap_check_at:
            continue
        if gap > _JUNCTION_TOL:
            raise TrajectoryError(
                "discontinuity of %.3e between pieces %d and %d" % (gap, i, i + 1))
    return result
