"""Reference-trajectory pieces, Hermite solves, turning segments, assembly."""

import math

import numpy as np
import pytest

from reactive_nav.geometry import Point2, eval_cubic
from reactive_nav.trajectory import (
    PieceKind,
    RefTrajectory,
    TrajectoryError,
    TrajectoryPiece,
    assemble_modified,
    build_turning_trajectory,
    initial_trajectory,
    line_piece,
    solve_hermite_cubic,
)


class TestInitialTrajectory:
    def test_single_zero_piece(self):
        traj = initial_trajectory(44.5)
        assert len(traj.pieces) == 1
        assert traj.domain == (0.0, 44.5)
        assert traj.eval(20.0) == 0.0

    def test_midpoint(self):
        assert initial_trajectory(1.0).eval(0.5) == 0.0

    def test_flat_slope(self):
        traj = initial_trajectory(10.0)
        for x in (0.0, 3.3, 10.0):
            assert traj.eval_and_slope(x) == (0.0, 0.0)

    def test_rejects_nonpositive_goal(self):
        with pytest.raises(TrajectoryError):
            initial_trajectory(0.0)
        with pytest.raises(TrajectoryError):
            initial_trajectory(-2.0)


class TestEvalAndSlope:
    def test_cubic_piece(self):
        piece = TrajectoryPiece(PieceKind.VALID_PART, 0.0, 1.0, (-2.0, 3.0, 0.0, 0.0))
        traj = RefTrajectory((piece,))
        y, dy = traj.eval_and_slope(0.5)
        assert y == pytest.approx(0.5, abs=1e-12)
        assert dy == pytest.approx(1.5, abs=1e-12)

    def test_junction_uses_right_piece_and_is_continuous(self):
        left = TrajectoryPiece(PieceKind.VALID_PART, 0.0, 1.0, (0.0, 0.0, 1.0, 0.0))
        right = line_piece(1.0, 1.0, 2.0, kind=PieceKind.VALID_PART)
        traj = RefTrajectory((left, right))
        y, dy = traj.eval_and_slope(1.0)
        assert y == pytest.approx(1.0, abs=1e-9)
        assert dy == 0.0  # the right-hand (constant) piece answers
        assert abs(left.eval(1.0) - right.eval(1.0)) <= 1e-9

    def test_out_of_domain(self):
        traj = initial_trajectory(5.0)
        with pytest.raises(TrajectoryError):
            traj.eval(5.1)
        with pytest.raises(TrajectoryError):
            traj.eval(-0.1)

    def test_matches_horner_on_random_pairs(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            coeffs = tuple(rng.uniform(-2, 2, 4))
            lo = rng.uniform(-5, 5)
            piece = TrajectoryPiece(PieceKind.VALID_PART, lo, lo + rng.uniform(0.1, 5), coeffs)
            traj = RefTrajectory((piece,))
            for x in rng.uniform(piece.x_lo, piece.x_hi, 50):
                a, b, c, d = coeffs
                expected = a * x**3 + b * x**2 + c * x + d
                assert traj.eval(float(x)) == pytest.approx(expected, abs=1e-12)


class TestHermite:
    def test_unit_smoothstep(self):
        coeffs = solve_hermite_cubic(Point2(0, 0), Point2(1, 1), 0.0, 0.0)
        assert coeffs == pytest.approx((-2.0, 3.0, 0.0, 0.0), abs=1e-12)

    def test_stretched_smoothstep(self):
        coeffs = solve_hermite_cubic(Point2(0, 0), Point2(2, 1), 0.0, 0.0)
        assert coeffs == pytest.approx((-0.25, 0.75, 0.0, 0.0), abs=1e-12)

    def test_zero_data(self):
        coeffs = solve_hermite_cubic(Point2(0, 0), Point2(1, 0), 0.0, 0.0)
        assert coeffs == pytest.approx((0.0, 0.0, 0.0, 0.0), abs=1e-15)

    def test_shared_abscissa_rejected(self):
        with pytest.raises(TrajectoryError):
            solve_hermite_cubic(Point2(1, 0), Point2(1, 5), 0.0, 0.0)

    def test_boundary_residuals_random(self):
        rng = np.random.default_rng(31)
        for _ in range(1000):
            x0 = rng.uniform(-10, 10)
            dx = rng.uniform(0.1, 10) * (1 if rng.uniform() < 0.5 else -1)
            p0 = Point2(x0, rng.uniform(-10, 10))
            p1 = Point2(x0 + dx, rng.uniform(-10, 10))
            s0, s1 = rng.uniform(-5, 5, 2)
            a, b, c, d = solve_hermite_cubic(p0, p1, s0, s1)

            def val(x):
                return ((a * x + b) * x + c) * x + d

            def der(x):
                return (3 * a * x + 2 * b) * x + c

            assert abs(val(p0.x) - p0.y) <= 1e-9
            assert abs(val(p1.x) - p1.y) <= 1e-9
            assert abs(der(p0.x) - s0) <= 1e-9
            assert abs(der(p1.x) - s1) <= 1e-9


class TestTurningTrajectory:
    def test_point_bypass(self):
        turn = build_turning_trajectory(Point2(0, 0), Point2(5, 5), Point2(5, 5),
                                        Point2(9, 0), 0.0, 0.0, 0.0, 0.0)
        assert turn.bypass.width == 0.0
        assert turn.entry.slope(0.0) == pytest.approx(0.0, abs=1e-9)
        assert turn.entry.slope(5.0) == pytest.approx(0.0, abs=1e-9)
        assert turn.exit.slope(5.0) == pytest.approx(0.0, abs=1e-9)
        assert turn.exit.slope(9.0) == pytest.approx(0.0, abs=1e-9)
        assert turn.entry.eval(5.0) == pytest.approx(5.0, abs=1e-9)
        assert turn.exit.eval(9.0) == pytest.approx(0.0, abs=1e-9)

    def test_segment_bypass(self):
        turn = build_turning_trajectory(Point2(0, 0), Point2(1, 1), Point2(3, 1),
                                        Point2(4, 0), 0.0, 0.0, 0.0, 0.0)
        assert turn.entry.coeffs == pytest.approx((-2.0, 3.0, 0.0, 0.0), abs=1e-12)
        assert turn.bypass.eval(2.0) == 1.0
        assert (turn.bypass.x_lo, turn.bypass.x_hi) == (1.0, 3.0)
        # part III mirrors part I shifted to [3, 4]
        for t in np.linspace(0, 1, 11):
            assert turn.exit.eval(3.0 + t) == pytest.approx(1.0 - turn.entry.eval(t), abs=1e-9)

    def test_slope_continuity_at_bypass(self):
        turn = build_turning_trajectory(Point2(-1, 0.5), Point2(2, 4), Point2(3.5, 4),
                                        Point2(6, -0.2), 0.8, 0.0, 0.0, -0.3)
        assert turn.entry.slope(2.0) == pytest.approx(0.0, abs=1e-9)
        assert turn.exit.slope(3.5) == pytest.approx(0.0, abs=1e-9)
        assert turn.bypass.slope(3.0) == 0.0

    def test_anchor_order_enforced(self):
        with pytest.raises(TrajectoryError):
            build_turning_trajectory(Point2(2, 0), Point2(1, 1), Point2(3, 1),
                                     Point2(4, 0), 0, 0, 0, 0)

    def test_bypass_ordinates_must_match(self):
        with pytest.raises(TrajectoryError):
            build_turning_trajectory(Point2(0, 0), Point2(1, 1), Point2(3, 2),
                                     Point2(4, 0), 0, 0, 0, 0)


def simple_turn(a, b, c, d):
    return build_turning_trajectory(Point2(*a), Point2(*b), Point2(*c), Point2(*d),
                                    0.0, 0.0, 0.0, 0.0, direction=1, obstacle_id=1)


class TestAssemble:
    def test_plain_insertion(self):
        base = initial_trajectory(10.0)
        turn = simple_turn((1, 0), (4, 3), (6, 3), (9, 0))
        out = assemble_modified(base, turn, x_now=0.0, y_now=0.0, x_g=10.0)
        stages = [p.stage for p in out.pieces]
        assert stages == ["head", "turn", "turn", "turn", "tail"]
        assert out.pieces[0].x_hi == 1.0
        assert out.pieces[-1].x_lo == 9.0
        assert out.domain == (0.0, 10.0)
        assert max(out.junction_gaps()) <= 1e-9

    def test_exact_goal_landing(self):
        base = initial_trajectory(10.0)
        turn = simple_turn((1, 0), (4, 3), (6, 3), (10, 0))
        out = assemble_modified(base, turn, 0.0, 0.0, 10.0)
        stages = [p.stage for p in out.pieces]
        assert "tail" not in stages and "goal-link" not in stages
        assert out.domain == (0.0, 10.0)

    def test_restart_below_origin(self):
        base = initial_trajectory(10.0)
        turn = build_turning_trajectory(Point2(-1, 2), Point2(2, 4), Point2(3, 4),
                                        Point2(6, 0), 0.0, 0.0, 0.0, 0.0,
                                        direction=1, obstacle_id=2)
        out = assemble_modified(base, turn, x_now=0.5, y_now=2.0, x_g=10.0)
        stages = [p.stage for p in out.pieces]
        assert stages == ["head", "back-link", "turn", "turn", "turn", "tail"]
        link = out.pieces[1]
        assert link.reversed
        assert (link.x_lo, link.x_hi) == (-1.0, 0.5)
        assert link.eval(0.0) == 2.0
        assert out.domain[0] == -1.0

    def test_goal_overshoot_link(self):
        base = initial_trajectory(10.0)
        turn = simple_turn((5, 0), (7, 3), (8, 3), (11, 0))
        out = assemble_modified(base, turn, 0.0, 0.0, 10.0)
        link = out.pieces[-1]
        assert link.stage == "goal-link"
        assert link.reversed
        assert (link.x_lo, link.x_hi) == (10.0, 11.0)
        assert link.eval(10.5) == 0.0
        # the turn's own tail is shadowed by the goal-link in the final pass
        assert out.eval(10.5) == 0.0

    def test_backward_copy_link(self):
        base = initial_trajectory(10.0)
        turn = simple_turn((1, 0), (4, 3), (6, 3), (9, 0))
        out = assemble_modified(base, turn, x_now=2.0, y_now=0.0, x_g=10.0)
        stages = [p.stage for p in out.pieces]
        assert stages == ["head", "back-link", "turn", "turn", "turn", "tail"]
        link = out.pieces[1]
        assert link.reversed and (link.x_lo, link.x_hi) == (1.0, 2.0)
        # final pass over [1, 2] belongs to the turn, not the old line
        assert out.eval(1.5) == pytest.approx(turn.entry.eval(1.5), abs=1e-12)

    def test_discontinuous_turn_rejected(self):
        base = initial_trajectory(10.0)
        bad = simple_turn((1, 0), (4, 3), (6, 3), (9, 1.0))  # lands off the line
        with pytest.raises(TrajectoryError):
            assemble_modified(base, bad, 0.0, 0.0, 10.0)

    def test_clip_retags_initial_line(self):
        base = initial_trajectory(10.0)
        turn = simple_turn((1, 0), (4, 3), (6, 3), (9, 0))
        out = assemble_modified(base, turn, 0.0, 0.0, 10.0)
        assert out.pieces[0].kind is PieceKind.VALID_PART
        assert out.pieces[1].kind is PieceKind.TURN_I
        assert out.pieces[1].obstacle_id == 1
        # a second modification elsewhere keeps turn provenance
        turn2 = build_turning_trajectory(Point2(9.2, 0), Point2(9.5, -1), Point2(9.6, -1),
                                         Point2(9.9, 0), 0.0, 0.0, 0.0, 0.0,
                                         direction=-1, obstacle_id=3)
        out2 = assemble_modified(out, turn2, 0.0, 0.0, 10.0)
        kinds = [p.kind for p in out2.pieces]
        assert PieceKind.TURN_I in kinds and PieceKind.TURN_III in kinds
        head_kinds = [p.kind for p in out2.pieces if p.stage == "head"]
        assert PieceKind.TURN_I in head_kinds  # old turn survives inside the head

    def test_smoothness_at_rejoin_anchors(self):
        base = initial_trajectory(10.0)
        a, d = Point2(1, 0), Point2(9, 0)
        turn = build_turning_trajectory(a, Point2(4, 3), Point2(6, 3), d,
                                        0.0, 0.0, 0.0, 0.0, direction=1, obstacle_id=1)
        out = assemble_modified(base, turn, 0.0, 0.0, 10.0)
        # slopes match the old trajectory at both rejoin points
        assert out.pieces[1].slope(a.x) == pytest.approx(0.0, abs=1e-9)
        assert out.pieces[3].slope(d.x) == pytest.approx(0.0, abs=1e-9)


class TestSerialization:
    def test_records(self):
        base = initial_trajectory(10.0)
        turn = simple_turn((1, 0), (4, 3), (6, 3), (9, 0))
        out = assemble_modified(base, turn, 0.0, 0.0, 10.0)
        recs = out.to_records()
        assert len(recs) == len(out.pieces)
        assert recs[1]["kind"] == "turn-I"
        assert recs[1]["obstacle_id"] == 1
        assert len(recs[0]["coeffs"]) == 4
        text = out.to_text()
        assert "turn-I" in text and text.count("\n") == len(recs) - 1

    def test_eval_many_matches_scalar(self):
        base = initial_trajectory(10.0)
        turn = simple_turn((1, 0), (4, 3), (6, 3), (9, 0))
        out = assemble_modified(base, turn, 0.0, 0.0, 10.0)
        xs = np.linspace(0, 10, 257)
        ys = out.eval_many(xs)
        for x, y in zip(xs, ys):
            assert y == pytest.approx(out.eval(float(x)), abs=1e-12)

    def test_eval_many_clamped(self):
        traj = initial_trajectory(5.0)
        ys = traj.eval_many(np.array([-3.0, 8.0]), clamp=True)
        assert list(ys) == [0.0, 0.0]
