"""Minimal computer-algebra kernel over t, x_1..x_n, psi, psi*."""
from .calculus import Lambda, conjugate, desugar, diff, differentiate, substitute
from .core import (CPSI, HALF, I, MINUS_ONE, ONE, PHI_E, PSI, RHO_E, T, ZERO, CRational,
                   Expr, abs_, add, as_expr, const, cos, exp_, func, im_, is_real, ln, mul,
                   neg, power, re_, simplify, sin, sqrt, sub, sym, x)
from .numeric import (SamplePoint, Sampler, SingularEvaluation, ZeroTest, eval_batch,
                      eval_numeric, is_zero, jet_names)
from .parse import ParseError, UnknownSymbolError, IndexOutOfRangeError, parse
from .printing import pretty, to_text

__all__ = [
    "CPSI", "HALF", "I", "MINUS_ONE", "ONE", "PHI_E", "PSI", "RHO_E", "T", "ZERO",
    "CRational", "Expr", "Lambda", "ParseError", "UnknownSymbolError", "IndexOutOfRangeError",
    "SamplePoint", "Sampler", "SingularEvaluation", "ZeroTest", "abs_", "add", "as_expr",
    "conjugate", "const", "cos", "desugar", "diff", "differentiate", "eval_batch",
    "eval_numeric", "exp_", "func", "im_", "is_real", "is_zero", "jet_names", "ln", "mul",
    "neg", "parse", "power", "pretty", "re_", "simplify", "sin", "sqrt", "sub", "substitute",
    "sym", "to_text", "x",
]
