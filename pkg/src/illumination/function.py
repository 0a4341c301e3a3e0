"""A prepared function: expression, derivatives and compiled evaluators."""

from __future__ import annotations

from functools import lru_cache
from typing import Optional

import numpy as np

from .expr import Expr, as_polynomial, compile_expr, differentiate, parse, poly_to_expr, to_text
from .exactpoly import Polynomial


class Function:
    """``f`` together with ``f'`` and ``f''`` ready for repeated evaluation.

    Accepts formula text, an :class:`Expr`, a :class:`Polynomial` or any
    object with a ``to_expr()`` method (the structured forms in
    :mod:`illumination.convexity`).  Instances carry a private cache used by
    the engine for per-window sample tables.
    """

    def __init__(self, f, text: Optional[str] = None):
        self.structure = None
        if isinstance(f, Function):
            f = f.expr
        if isinstance(f, str):
            text = f if text is None else text
            f = parse(f)
        elif isinstance(f, Polynomial):
            self.structure = f
            f = poly_to_expr(f)
        elif hasattr(f, "to_expr"):
            self.structure = f
            f = f.to_expr()
        if not isinstance(f, Expr):
            raise TypeError(f"cannot build a function from {type(f).__name__}")
        self.expr = f
        self.text = text if text is not None else to_text(f)
        self.d1 = differentiate(f)
        self.d2 = differentiate(self.d1)
        self.polynomial = as_polynomial(f)
        self.value = compile_expr(f)
        self.slope = compile_expr(self.d1)
        self.curvature = compile_expr(self.d2)
        self.values = compile_expr(f, vectorized=True)
        self.slopes = compile_expr(self.d1, vectorized=True)
        self.curvatures = compile_expr(self.d2, vectorized=True)
        self.cache: dict = {}

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return self.values(x)
        return self.value(float(x))

    def __repr__(self):
        return f"Function({self.text!r})"

    def gs(self, s: float, c: float) -> float:
        """``g_s(c) = f(c) + (s - c) f'(c)``, the value at ``s`` of the tangent at ``c``."""
        return self.value(c) + (s - c) * self.slope(c)


@lru_cache(maxsize=256)
def _prepared(f) -> Function:
    return Function(f)


def as_function(f) -> Function:
    """``f`` as a :class:`Function`; text and polynomials are prepared once."""
    if isinstance(f, Function):
        return f
    if isinstance(f, (str, Polynomial, Expr)):
        return _prepared(f)
    return Function(f)
