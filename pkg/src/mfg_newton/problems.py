"""Mean field game problem definitions and the builtin benchmark instances.

A problem bundles the Hamiltonian, the local coupling F, the diffusion, the
initial density and the terminal cost. Field callables are vectorized: they
take node coordinates of shape (n, dim) and return shape (n,). Momentum
fields have shape (dim, n) with the component axis first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expr import compile_expression
from .grid import GridSpec


@dataclass(frozen=True)
class Coupling:
    """Local coupling F(m) with derivative, optionally position dependent.

    monotone records whether F' > 0 holds on positive densities, which the
    uniqueness theory assumes; solvers run either way.
    """

    f: Callable
    f_prime: Callable
    monotone: bool = True
    label: str = ""

    def value(self, m: np.ndarray, x: np.ndarray | None = None) -> np.ndarray:
        return np.asarray(self.f(np.asarray(m, dtype=float), x), dtype=float)

    def derivative(self, m: np.ndarray, x: np.ndarray | None = None) -> np.ndarray:
        return np.asarray(self.f_prime(np.asarray(m, dtype=float), x), dtype=float)


@dataclass(frozen=True)
class Hamiltonian:
    """Hamiltonian H(x, m, p) in one of two closed forms.

    separable_quadratic: H = quad_coeff |p|^2 - V(x). The classical case has
    quad_coeff 1/2 so that D_pH = p; one benchmark uses coefficient 1.

    nonseparable_congestion: H = |p|^2 / (2 (1 + slope m)^gamma) with m
    clamped at zero, so crowded regions are expensive to cross.
    """

    kind: str = "separable_quadratic"
    quad_coeff: float = 0.5
    potential: Callable = field(default=lambda x: np.zeros(np.shape(x)[0]))
    gamma: float = 0.0
    congestion_slope: float = 4.0

    def __post_init__(self):
        if self.kind not in ("separable_quadratic", "nonseparable_congestion"):
            raise ValueError(f"unknown Hamiltonian kind {self.kind!r}")

    @property
    def separable(self) -> bool:
        return self.kind == "separable_quadratic"

    def _congestion_factor(self, m: np.ndarray) -> np.ndarray:
        # (1 + slope*m)^gamma with m clamped below at zero
        return (1.0 + self.congestion_slope * np.maximum(m, 0.0)) ** self.gamma

    def value(self, x, m, p) -> np.ndarray:
        p2 = np.sum(np.square(p), axis=0)
        if self.separable:
            return self.quad_coeff * p2 - self.potential(x)
        return p2 / (2.0 * self._congestion_factor(m))

    def grad_p(self, x, m, p) -> np.ndarray:
        if self.separable:
            return 2.0 * self.quad_coeff * np.asarray(p)
        return np.asarray(p) / self._congestion_factor(m)

    def hess_coeff(self, m) -> np.ndarray:
        """Scalar lambda with D_ppH = lambda * I (both forms are isotropic)."""
        m = np.asarray(m, dtype=float)
        if self.separable:
            return np.full(m.shape, 2.0 * self.quad_coeff)
        return 1.0 / self._congestion_factor(m)

    def hess_pp(self, x, m, p) -> np.ndarray:
        lam = self.hess_coeff(m)
        d = np.shape(p)[0]
        return lam[..., None, None] * np.eye(d)

    def dm(self, x, m, p) -> np.ndarray:
        """Partial derivative of H in m (zero for the separable form)."""
        m = np.asarray(m, dtype=float)
        p2 = np.sum(np.square(p), axis=0)
        if self.separable:
            return np.zeros(m.shape)
        s, g = self.congestion_slope, self.gamma
        base = -(g * s / 2.0) * p2 * (1.0 + s * np.maximum(m, 0.0)) ** (-g - 1.0)
        return np.where(m < 0.0, 0.0, base)

    def p_from_drift(self, q, m) -> np.ndarray:
        """Invert q = D_pH(x, m, p) for p."""
        if self.separable:
            return np.asarray(q) / (2.0 * self.quad_coeff)
        return np.asarray(q) * self._congestion_factor(m)


@dataclass(frozen=True)
class MfgProblem:
    """A complete mean field game instance on the unit torus."""

    dim: int
    horizon: float
    nu: float
    hamiltonian: Hamiltonian
    coupling: Coupling
    m0: Callable
    terminal_g: Callable
    label: str = ""

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")

    @property
    def sigma(self) -> float:
        return float(np.sqrt(2.0 * self.nu))


def sample(fn: Callable, grid: GridSpec) -> np.ndarray:
    """Evaluate a field callable at every node, flat order.

    Scalar returns broadcast. Non-finite values raise with the offending
    node's coordinates so a bad config line is easy to locate.
    """
    nodes = grid.nodes()
    vals = np.asarray(fn(nodes), dtype=float)
    if vals.ndim == 0:
        vals = np.full(grid.n_nodes, float(vals))
    if vals.shape != (grid.n_nodes,):
        raise ValueError(f"field evaluated to shape {vals.shape}, expected ({grid.n_nodes},)")
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        where = ", ".join(f"{c:g}" for c in nodes[bad])
        raise ValueError(f"field is not finite at node {bad} (x = {where})")
    return vals


def _interval_indicator(lo: float, hi: float):
    def ind(x1):
        return ((x1 >= lo) & (x1 <= hi)).astype(float)

    return ind


def _test1() -> MfgProblem:
    ind = _interval_indicator(0.25, 0.75)

    def m0(x):
        x1 = x[:, 0]
        return 4.0 * np.sin(2.0 * np.pi * (x1 - 0.25)) ** 2 * ind(x1)

    def f(m, x):
        return 4.0 * np.minimum(4.0, m) - 3.0 * m0(x)

    def f_prime(m, x):
        return np.where(m < 4.0, 4.0, 0.0)

    return MfgProblem(
        dim=1,
        horizon=0.05,
        nu=0.05,
        hamiltonian=Hamiltonian(kind="separable_quadratic", quad_coeff=0.5),
        coupling=Coupling(f=f, f_prime=f_prime, monotone=False, label="kinked attraction"),
        m0=m0,
        terminal_g=lambda x: np.zeros(x.shape[0]),
        label="test1",
    )


def _quadratic_coupling() -> Coupling:
    return Coupling(
        f=lambda m, x=None: m * m,
        f_prime=lambda m, x=None: 2.0 * m,
        monotone=True,
        label="m^2",
    )


def _test2(nu: float, label: str) -> MfgProblem:
    def potential(x):
        x1 = x[:, 0]
        return 200.0 * np.cos(2.0 * np.pi * x1) - 10.0 * np.cos(4.0 * np.pi * x1)

    def m0(x):
        return 1.0 + 0.5 * np.cos(2.0 * np.pi * x[:, 0])

    def g(x):
        x1 = x[:, 0]
        return np.sin(4.0 * np.pi * x1) + 0.1 * np.cos(10.0 * np.pi * x1)

    return MfgProblem(
        dim=1,
        horizon=0.01,
        nu=nu,
        hamiltonian=Hamiltonian(kind="separable_quadratic", quad_coeff=0.5, potential=potential),
        coupling=_quadratic_coupling(),
        m0=m0,
        terminal_g=g,
        label=label,
    )


def _test3() -> MfgProblem:
    ind = _interval_indicator(0.375, 0.625)

    def m0(x):
        return 4.0 * ind(x[:, 0])

    def g(x):
        x1 = x[:, 0]
        return 10.0 * np.minimum((x1 - 0.3) ** 2, (x1 - 0.7) ** 2)

    return MfgProblem(
        dim=1,
        horizon=1.0,
        nu=0.05,
        hamiltonian=Hamiltonian(kind="nonseparable_congestion", gamma=1.5),
        coupling=Coupling(
            f=lambda m, x=None: m,
            f_prime=lambda m, x=None: np.ones_like(m),
            monotone=True,
            label="linear",
        ),
        m0=m0,
        terminal_g=g,
        label="test3",
    )


def _test4() -> MfgProblem:
    def potential(x):
        x1, x2 = x[:, 0], x[:, 1]
        return -(np.sin(2 * np.pi * x1) + np.sin(2 * np.pi * x2) + np.cos(4 * np.pi * x1))

    def m0(x):
        x1, x2 = x[:, 0], x[:, 1]
        return 1.0 + 0.5 * np.cos(2 * np.pi * x1) + 0.5 * np.cos(2 * np.pi * x2)

    def g(x):
        x1, x2 = x[:, 0], x[:, 1]
        return np.cos(2 * np.pi * x1) + np.cos(2 * np.pi * x2)

    return MfgProblem(
        dim=2,
        horizon=1.0,
        nu=0.4,
        hamiltonian=Hamiltonian(kind="separable_quadratic", quad_coeff=1.0, potential=potential),
        coupling=_quadratic_coupling(),
        m0=m0,
        terminal_g=g,
        label="test4",
    )


_BUILTINS: dict[str, Callable[[], MfgProblem]] = {
    "test1": _test1,
    "test2a": lambda: _test2(0.4, "test2a"),
    "test2b": lambda: _test2(0.02, "test2b"),
    "test3": _test3,
    "test4": _test4,
}


def builtin_problem(problem_id: str) -> MfgProblem:
    """Return one of the five builtin benchmark instances by id."""
    try:
        return _BUILTINS[problem_id]()
    except KeyError:
        known = ", ".join(sorted(_BUILTINS))
        raise ValueError(f"unknown problem id {problem_id!r} (known: {known})") from None


def expression_problem(
    dim: int,
    horizon: float,
    nu: float,
    v: str = "0",
    m0: str = "1",
    g: str = "0",
    f: str = "0",
    f_prime: str | None = None,
    quad_coeff: float = 0.5,
    kind: str = "separable_quadratic",
    gamma: float = 1.5,
    label: str = "custom",
) -> MfgProblem:
    """Build a problem from expression strings (variables x1, x2, m).

    The coupling derivative defaults to a central difference of f when no
    f_prime expression is given; the step 1e-6 keeps the quasi-Newton blocks
    accurate to about 1e-9 for smooth couplings.
    """
    v_fn = compile_expression(v)
    m0_fn = compile_expression(m0)
    g_fn = compile_expression(g)
    f_fn = compile_expression(f)
    fp_fn = compile_expression(f_prime) if f_prime is not None else None

    def coords(x, n):
        if x is None:
            return {}
        x = np.asarray(x, dtype=float)
        out = {"x1": x[:, 0]}
        if x.shape[1] > 1:
            out["x2"] = x[:, 1]
        else:
            out["x2"] = np.zeros(n)
        return out

    def spatial(fn):
        def call(x):
            out = fn(**coords(x, x.shape[0]))
            return np.broadcast_to(out, (x.shape[0],)).astype(float)

        return call

    def f_call(m, x=None):
        m = np.asarray(m, dtype=float)
        kw = coords(x, m.shape[0])
        kw = {k: np.broadcast_to(vv, m.shape) for k, vv in kw.items()}
        return np.broadcast_to(f_fn(m=m, **kw), m.shape).astype(float)

    def fp_call(m, x=None):
        if fp_fn is not None:
            m = np.asarray(m, dtype=float)
            kw = coords(x, m.shape[0])
            kw = {k: np.broadcast_to(vv, m.shape) for k, vv in kw.items()}
            return np.broadcast_to(fp_fn(m=m, **kw), m.shape).astype(float)
        eps = 1e-6
        return (f_call(np.asarray(m) + eps, x) - f_call(np.asarray(m) - eps, x)) / (2 * eps)

    return MfgProblem(
        dim=dim,
        horizon=horizon,
        nu=nu,
        hamiltonian=Hamiltonian(kind=kind, quad_coeff=quad_coeff, potential=spatial(v_fn), gamma=gamma),
        coupling=Coupling(f=f_call, f_prime=fp_call, monotone=False, label="expression"),
        m0=spatial(m0_fn),
        terminal_g=spatial(g_fn),
        label=label,
    )
