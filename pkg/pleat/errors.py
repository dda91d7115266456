# pleat/errors.py

from __future__ import annotations

from typing import Optional


class PleatError(ValueError):
    """Base class for geometric failures. `where` is an arc length when known."""

    def __init__(self, message: str, where: Optional[float] = None):
        if where is not None:
            message = f"{message} (at s={where:.6g})"
        super().__init__(message)
        self.where = where


class FrameUndefined(PleatError):
    pass


class Degenerate(PleatError):
    pass


class NotProper(PleatError):
    pass


class LengthMismatch(PleatError):
    pass


class RulingTangent(PleatError):
    pass


class TooShort(PleatError):
    pass


class FenchelObstruction(PleatError):
    pass


class NoIntersection(PleatError):
    pass


class TangentHit(PleatError):
    pass


class OnRegressionCurve(PleatError):
    pass


class DepthExhausted(PleatError):
    pass


class RefusedSingular(PleatError):
    pass


class VanishingSpeed(PleatError):
    pass


class SeamError(PleatError):
    def __init__(self, message: str, gap: float):
        super().__init__(f"{message}: gap {gap:.3e}")
        self.gap = gap
