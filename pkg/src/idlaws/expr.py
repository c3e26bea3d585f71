"""A deliberately tiny arithmetic expression language for JSON densities.

Grammar: numbers, one free variable, ``+ - * / ^`` (``^`` is power),
unary minus, the functions ``exp``, ``log``, ``sqrt``, ``abs`` and the constants
``pi`` and ``e``.  Expressions compile to vectorised numpy callables.
"""

import ast
import math

import numpy as np

__all__ = ["Expr", "ExprError"]


class ExprError(ValueError):
    pass


_FUNCS = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


def _check(node, var):
    if isinstance(node, ast.Expression):
        _check(node.body, var)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise ExprError(f"operator {type(node.op).__name__} is not allowed")
        _check(node.left, var)
        _check(node.right, var)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise ExprError("only unary + and - are allowed")
        _check(node.operand, var)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ExprError("unknown function")
        if len(node.args) != 1 or node.keywords:
            raise ExprError(f"{node.func.id} takes exactly one argument")
        _check(node.args[0], var)
    elif isinstance(node, ast.Name):
        if node.id != var and node.id not in _CONSTS:
            raise ExprError(f"unknown name {node.id!r} (variable is {var!r})")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise ExprError("only numeric constants are allowed")
    else:
        raise ExprError(f"syntax {type(node).__name__} is not allowed")


class _Sub(ast.NodeTransformer):
    def __init__(self, var, repl):
        self.var, self.repl = var, repl

    def visit_Name(self, node):
        if node.id == self.var:
            return self.repl
        return node


class Expr:
    """Compiled single-variable expression; call it on scalars or arrays."""

    def __init__(self, text, var="r"):
        self.text = str(text)
        self.var = var
        try:
            tree = ast.parse(self.text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ExprError(f"cannot parse {text!r}: {exc.msg}") from None
        _check(tree, var)
        self._tree = tree

    def _eval(self, node, x):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, x), self._eval(node.right, x))
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, x)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call):
            return _FUNCS[node.func.id](self._eval(node.args[0], x))
        if isinstance(node, ast.Name):
            return x if node.id == self.var else _CONSTS[node.id]
        return float(node.value)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = self._eval(self._tree.body, x)
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy() if np.ndim(out) < x.ndim else np.asarray(out, dtype=float)

    def substitute(self, replacement, var=None):
        """Return a new Expr with the variable replaced by ``replacement``.

        ``replacement`` is expression text in the variable ``var`` (default:
        same variable).
        """
        var = var or self.var
        repl = ast.parse(str(replacement).replace("^", "**"), mode="eval").body
        tree = _Sub(self.var, repl).visit(ast.parse(self.text.replace("^", "**"), mode="eval"))
        ast.fix_missing_locations(tree)
        return Expr(ast.unparse(tree).replace("**", "^"), var=var)

    def __repr__(self):
        return f"Expr({self.text!r}, var={self.var!r})"

    def __eq__(self, other):
        return isinstance(other, Expr) and self.text == other.text and self.var == other.var

    def __hash__(self):
        return hash((self.text, self.var))
