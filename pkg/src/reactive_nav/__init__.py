"""Reactive 2D navigation: local trajectory modification around convex
obstacles, waypoint tracking control, and a deterministic closed-loop
simulator."""

__version__ = "0.1.0"
