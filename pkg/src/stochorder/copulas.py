"""Exchangeable copula constructions used to model dependent component lives.

Two constructive families plus reference handles:

* generator form: C_f(p_1,...,p_n) = p_[1] * prod_{i>=2} f(p_[i]) over the
  increasing rearrangement, valid iff f(1)=1, f increasing, and f(p)/p
  decreasing (antistarshaped);
* diagonal form: given an n-diagonal d, with f(u) = (n u - d(u))/(n-1),
  C_d(p) = (1/n) sum_i min{f over n-1 cyclically rotated slots, d on the
  remaining one}; its diagonal section is exactly d, and at n=2 it reduces
  to the min{p1, p2, (d(p1)+d(p2))/2} copula.

Handles are evaluated on demand only — the downstream use is boundary
sections and diagonal identities, not densities or sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from . import funcalc

_POINT_TOL = 1e-9
_VALIDATION_COUNT = 513
MAX_DIAGONAL_DIMENSION = 12  # config sanity cap for the cyclic-average form


class CopulaValidationError(ValueError):
    """Generator/diagonal/handle parameters violate a construction condition."""


FunctionLike = Union[Callable[[float], float], funcalc.Expr, str]


def _coerce_fn(fn: FunctionLike, what: str):
    expr = None
    label = None
    if isinstance(fn, str):
        expr = funcalc.parse(fn)
        label = fn
        fn = funcalc.compile_fn(expr)
    elif isinstance(fn, funcalc.Expr):
        expr = fn
        label = funcalc.render(expr)
        fn = funcalc.compile_fn(expr)
    else:
        label = getattr(fn, "__name__", what)
    return fn, expr, label


@dataclass(frozen=True)
class DuranteGenerator:
    """Validated generator f for the product-form exchangeable copula."""

    fn: Callable[[float], float]
    n: int
    label: str
    expr: Optional[funcalc.Expr] = None


@dataclass(frozen=True)
class Diagonal:
    """Validated n-dimensional diagonal function."""

    fn: Callable[[float], float]
    n: int
    label: str
    expr: Optional[funcalc.Expr] = None


@dataclass(frozen=True)
class CopulaHandle:
    """One exchangeable copula; used as survival or distributional copula
    by the caller (the construction is role-agnostic)."""

    kind: str  # product|comonotone|durante|jaworski|cuadras_auge|frechet
    n: int
    label: str
    generator: Optional[DuranteGenerator] = None
    diagonal: Optional[Diagonal] = None
    theta: Optional[float] = None
    gamma: Optional[float] = None


def _sample_points(count: int = _VALIDATION_COUNT) -> list:
    # include both endpoints: the conditions constrain f(1) and d(0), d(1)
    return [i / (count - 1) for i in range(count)]


def validate_generator(f: FunctionLike, n: int) -> DuranteGenerator:
    """Accept f iff f(1)=1, f increasing, and f(p)/p decreasing on a dense grid.

    The three conditions are exactly what makes the product form a copula;
    each failure is reported with its witness point.
    """
    if not (isinstance(n, int) and n >= 2):
        raise CopulaValidationError(f"dimension must be an integer >= 2, got {n!r}")
    fn, expr, label = _coerce_fn(f, "generator")
    pts = _sample_points()
    vals = []
    for p in pts:
        v = float(fn(p))
        if not math.isfinite(v):
            raise CopulaValidationError(f"{label}: non-finite value {v!r} at p={p}")
        vals.append(v)
    if abs(vals[-1] - 1.0) > _POINT_TOL:
        raise CopulaValidationError(f"{label}: f(1) = {vals[-1]!r}, expected 1")
    for p, q, a, b in zip(pts, pts[1:], vals, vals[1:]):
        if b < a - _POINT_TOL:
            raise CopulaValidationError(
                f"{label}: decreasing on [{p}, {q}] (f drops {a!r} -> {b!r})")
    prev_ratio = None
    prev_p = None
    for p, v in zip(pts, vals):
        if p == 0.0:
            continue
        r = v / p
        if prev_ratio is not None and r > prev_ratio + _POINT_TOL:
            raise CopulaValidationError(
                f"{label}: f(p)/p increases on [{prev_p}, {p}] "
                f"({prev_ratio!r} -> {r!r}); not antistarshaped")
        prev_ratio = r
        prev_p = p
    return DuranteGenerator(fn=fn, n=n, label=label, expr=expr)


def durante_eval(gen: DuranteGenerator, point: Sequence[float]) -> float:
    """C_f at a point: smallest component times f of each larger one."""
    _check_point(point, gen.n)
    ordered = sorted(point)
    value = ordered[0]
    for p in ordered[1:]:
        value *= float(gen.fn(p))
    return value


def validate_diagonal(d: FunctionLike, n: int) -> Diagonal:
    """Accept d iff d(0)=0, d(1)=1, d(p) <= p, and adjacent increments lie
    in [0, n*(p2-p1)] on a dense grid (discrete slack 1e-9*n)."""
    if not (isinstance(n, int) and n >= 2):
        raise CopulaValidationError(f"dimension must be an integer >= 2, got {n!r}")
    if n > MAX_DIAGONAL_DIMENSION:
        raise CopulaValidationError(
            f"dimension {n} exceeds cap {MAX_DIAGONAL_DIMENSION}")
    fn, expr, label = _coerce_fn(d, "diagonal")
    pts = _sample_points()
    vals = []
    for p in pts:
        v = float(fn(p))
        if not math.isfinite(v):
            raise CopulaValidationError(f"{label}: non-finite value {v!r} at p={p}")
        vals.append(v)
    if abs(vals[0]) > _POINT_TOL:
        raise CopulaValidationError(f"{label}: d(0) = {vals[0]!r}, expected 0")
    if abs(vals[-1] - 1.0) > _POINT_TOL:
        raise CopulaValidationError(f"{label}: d(1) = {vals[-1]!r}, expected 1")
    slack = 1e-9 * n
    for p, v in zip(pts, vals):
        if v > p + _POINT_TOL:
            raise CopulaValidationError(
                f"{label}: d({p}) = {v!r} exceeds p")
    for p1, p2, a, b in zip(pts, pts[1:], vals, vals[1:]):
        inc = b - a
        if inc < -slack:
            raise CopulaValidationError(
                f"{label}: decreasing on [{p1}, {p2}] ({a!r} -> {b!r})")
        if inc > n * (p2 - p1) + slack:
            raise CopulaValidationError(
                f"{label}: increment {inc!r} on [{p1}, {p2}] exceeds "
                f"Lipschitz bound {n}*(p2-p1)")
    return Diagonal(fn=fn, n=n, label=label, expr=expr)


def jaworski_f(d: Diagonal, u: float) -> float:
    """The companion function f(u) = (n u - d(u))/(n-1); satisfies d <= f <= 1."""
    return (d.n * u - float(d.fn(u))) / (d.n - 1)


def jaworski_eval(d: Diagonal, point: Sequence[float]) -> float:
    """Cyclic-permutation average of mins; diagonal section equals d exactly.

    For rotation i, component k sits in slot tau^i(k) = k+i mod n (1-based,
    0 mapped to n); the first n-1 slots go through f, the last through d, so
    each component takes the d-role in exactly one rotation.
    """
    n = d.n
    _check_point(point, n)
    fvals = [jaworski_f(d, p) for p in point]
    dvals = [float(d.fn(p)) for p in point]
    total = 0.0
    for i in range(1, n + 1):
        # slot tau^i(k): k = 1..n-1 are f-slots, k = n is the d-slot
        term = math.inf
        for k in range(1, n):
            idx = (k + i) % n
            idx = n if idx == 0 else idx
            term = min(term, fvals[idx - 1])
        idx = (n + i) % n
        idx = n if idx == 0 else idx
        term = min(term, dvals[idx - 1])
        total += term
    return total / n


def product(n: int) -> CopulaHandle:
    _check_dimension(n)
    return CopulaHandle(kind="product", n=n, label=f"product:{n}")


def comonotone(n: int) -> CopulaHandle:
    _check_dimension(n)
    return CopulaHandle(kind="comonotone", n=n, label=f"comonotone:{n}")


def durante(f: FunctionLike, n: int) -> CopulaHandle:
    gen = validate_generator(f, n)
    return CopulaHandle(kind="durante", n=n,
                        label=f"durante:f={gen.label},n={n}", generator=gen)


def jaworski(d: FunctionLike, n: int) -> CopulaHandle:
    diag = validate_diagonal(d, n)
    return CopulaHandle(kind="jaworski", n=n,
                        label=f"diagonal:d={diag.label},n={n}", diagonal=diag)


def cuadras_auge(theta: float) -> CopulaHandle:
    """Bivariate family min(u,v)^theta * (uv)^(1-theta), theta in (0,1)."""
    if not 0.0 < theta < 1.0:
        raise CopulaValidationError(f"theta must lie in (0,1), got {theta!r}")
    return CopulaHandle(kind="cuadras_auge", n=2,
                        label=f"cuadras-auge:theta={theta:g}", theta=theta)


def frechet(gamma: float) -> CopulaHandle:
    """Bivariate mixture gamma*min(u,v) + (1-gamma)*uv, gamma in (0,1)."""
    if not 0.0 < gamma < 1.0:
        raise CopulaValidationError(f"gamma must lie in (0,1), got {gamma!r}")
    return CopulaHandle(kind="frechet", n=2,
                        label=f"frechet:gamma={gamma:g}", gamma=gamma)


def _check_dimension(n: int) -> None:
    if not (isinstance(n, int) and 2 <= n <= MAX_DIAGONAL_DIMENSION):
        raise CopulaValidationError(
            f"dimension must be an integer in [2, {MAX_DIAGONAL_DIMENSION}], got {n!r}")


def _check_point(point: Sequence[float], n: int) -> None:
    if len(point) != n:
        raise ValueError(f"point has {len(point)} components, copula needs {n}")
    for p in point:
        if not (math.isfinite(p) and -1e-12 <= p <= 1.0 + 1e-12):
            raise ValueError(f"component {p!r} outside [0,1]")


def cop_eval(handle: CopulaHandle, point: Sequence[float]) -> float:
    """Evaluate the copula at a point in [0,1]^n."""
    _check_point(point, handle.n)
    if handle.kind == "product":
        return math.prod(point)
    if handle.kind == "comonotone":
        return min(point)
    if handle.kind == "durante":
        return durante_eval(handle.generator, point)
    if handle.kind == "jaworski":
        return jaworski_eval(handle.diagonal, point)
    if handle.kind == "cuadras_auge":
        u, v = point
        if u <= 0.0 or v <= 0.0:
            return 0.0
        return min(u, v) ** handle.theta * (u * v) ** (1.0 - handle.theta)
    if handle.kind == "frechet":
        u, v = point
        return handle.gamma * min(u, v) + (1.0 - handle.gamma) * u * v
    raise ValueError(f"unknown copula kind {handle.kind!r}")


def boundary_section(handle: CopulaHandle, p: float, i: int) -> float:
    """Closed form of C at (p, ...(i times)..., p, 1, ..., 1).

    These sections are the system distortions of k-out-of-n structures; they
    must agree with generic evaluation (asserted in tests, not here).
    """
    n = handle.n
    if not 1 <= i <= n:
        raise ValueError(f"i must lie in [1, {n}], got {i!r}")
    if not -1e-12 <= p <= 1.0 + 1e-12:
        raise ValueError(f"p must lie in [0,1], got {p!r}")
    if i == 1:
        return p  # uniform margins
    if handle.kind == "product":
        return p ** i
    if handle.kind == "comonotone":
        return p
    if handle.kind == "durante":
        return p * float(handle.generator.fn(p)) ** (i - 1)
    if handle.kind == "jaworski":
        d = handle.diagonal
        return ((n - i) * jaworski_f(d, p) + i * float(d.fn(p))) / n
    if handle.kind == "cuadras_auge":
        return p ** (2.0 - handle.theta)  # i == 2: the diagonal section
    if handle.kind == "frechet":
        return handle.gamma * p + (1.0 - handle.gamma) * p * p
    raise ValueError(f"unknown copula kind {handle.kind!r}")


def copula_spotcheck(handle: CopulaHandle, count: int = 17) -> dict:
    """Numerical sanity for copula axioms on a coarse grid.

    Checks uniform margins, coordinate monotonicity, exchangeability under
    a few permutations, and (n=2) nonnegative rectangle volumes.  Returns a
    report dict; failures are listed, not raised.
    """
    n = handle.n
    pts = [i / (count - 1) for i in range(count)]
    failures = []
    checks = 0

    for slot in range(n):
        for p in pts:
            point = [1.0] * n
            point[slot] = p
            checks += 1
            v = cop_eval(handle, point)
            if abs(v - p) > _POINT_TOL:
                failures.append(f"margin slot {slot}: C={v!r} at p={p}")

    levels = [0.25, 0.75, 1.0]
    for slot in range(n):
        for level in levels:
            prev = None
            for p in pts:
                point = [level] * n
                point[slot] = p
                v = cop_eval(handle, point)
                checks += 1
                if prev is not None and v < prev - _POINT_TOL:
                    failures.append(
                        f"coordinate {slot} decreasing at p={p} (level {level})")
                prev = v

    sample = [pts[1], pts[len(pts) // 2], pts[-2]]
    base_point = (sample * ((n // 3) + 1))[:n]
    base_val = cop_eval(handle, base_point)
    for shift in range(1, n):
        rotated = base_point[shift:] + base_point[:shift]
        checks += 1
        if abs(cop_eval(handle, rotated) - base_val) > _POINT_TOL:
            failures.append(f"not exchangeable under rotation {shift}")

    if n == 2:
        for i in range(count - 1):
            for j in range(count - 1):
                a1, b1 = pts[i], pts[i + 1]
                a2, b2 = pts[j], pts[j + 1]
                vol = (cop_eval(handle, (b1, b2)) - cop_eval(handle, (a1, b2))
                       - cop_eval(handle, (b1, a2)) + cop_eval(handle, (a1, a2)))
                checks += 1
                if vol < -_POINT_TOL:
                    failures.append(
                        f"negative rectangle volume {vol!r} at [{a1},{b1}]x[{a2},{b2}]")
    return {"ok": not failures, "failures": failures, "checks": checks,
            "label": handle.label}


def _split_top_level(text: str, sep: str) -> list:
    parts = []
    depth = 0
    current = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts


def parse_copula_spec(text: str) -> CopulaHandle:
    """Textual forms: `durante:f=<expr>,n=<int>`, `diagonal:d=<expr>,n=<int>`,
    `product:<n>`, `comonotone:<n>`, `cuadras-auge:theta=<v>`, `frechet:gamma=<v>`.

    Commas inside expressions (min/max calls) are respected.
    """
    text = text.strip()
    try:
        if text.startswith("product:"):
            return product(int(text[len("product:"):]))
        if text.startswith("comonotone:"):
            return comonotone(int(text[len("comonotone:"):]))
        if text.startswith("cuadras-auge:"):
            rest = text[len("cuadras-auge:"):].strip()
            if not rest.startswith("theta="):
                raise CopulaValidationError(
                    f"expected cuadras-auge:theta=<v>, got {text!r}")
            return cuadras_auge(funcalc.parse_constant(rest[len("theta="):]))
        if text.startswith("frechet:"):
            rest = text[len("frechet:"):].strip()
            if not rest.startswith("gamma="):
                raise CopulaValidationError(
                    f"expected frechet:gamma=<v>, got {text!r}")
            return frechet(funcalc.parse_constant(rest[len("gamma="):]))
        for prefix, key, builder in (("durante:", "f", durante),
                                     ("diagonal:", "d", jaworski)):
            if text.startswith(prefix):
                body = text[len(prefix):]
                parts = [s.strip() for s in _split_top_level(body, ",")]
                expr_text = None
                n = None
                for part in parts:
                    if part.startswith(key + "="):
                        expr_text = part[len(key) + 1:]
                    elif part.startswith("n="):
                        n = int(part[2:])
                    else:
                        raise CopulaValidationError(
                            f"unexpected field {part!r} in {text!r}")
                if expr_text is None or n is None:
                    raise CopulaValidationError(
                        f"{prefix[:-1]} spec needs {key}=<expr> and n=<int>, got {text!r}")
                return builder(expr_text, n)
    except (ValueError, funcalc.ExprError) as ex:
        if isinstance(ex, CopulaValidationError):
            raise
        raise CopulaValidationError(f"bad copula spec {text!r}: {ex}") from None
    raise CopulaValidationError(f"unrecognized copula spec {text!r}")
