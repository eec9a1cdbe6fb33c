"""Invariants of real-analytic germs from the geometry of gradient canyons."""
