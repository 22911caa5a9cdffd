"""Gauss-Kronrod panel quadrature and Gregory end corrections.

The integrators here are vectorized: the integrand receives every node of
every active panel in one call.  Batched integrands return an array of
shape ``(m, n_nodes)`` and are integrated simultaneously on a shared panel
layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:14:2] = _WG[:3][::-1]
NODES_PER_PANEL = NODES.size


@dataclass(frozen=True)
class PanelRule:
    """Nodes and weights of a composite GK15 rule on fixed panel edges."""

    edges: np.ndarray
    nodes: np.ndarray  # (n_panels * 15,)
    kronrod: np.ndarray
    gauss: np.ndarray

    @classmethod
    def from_edges(cls, edges) -> PanelRule:
        edges = np.asarray(edges, dtype=float)
        lo, hi = edges[:-1], edges[1:]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
        wk = (half[:, None] * KRONROD_WEIGHTS[None, :]).ravel()
        wg = (half[:, None] * GAUSS_WEIGHTS[None, :]).ravel()
        return cls(edges, nodes, wk, wg)

    @property
    def n_panels(self) -> int:
        return self.edges.size - 1

    def apply(self, values):
        """Integrate sampled ``values`` (..., n_nodes).

        Returns ``(integral, error, panel_error)`` where ``panel_error`` has
        shape (..., n_panels).
        """
        shape = values.shape[:-1] + (self.n_panels, NODES_PER_PANEL)
        v = values.reshape(shape)
        wk = self.kronrod.reshape(self.n_panels, NODES_PER_PANEL)
        wg = self.gauss.reshape(self.n_panels, NODES_PER_PANEL)
        pk = np.sum(v * wk, axis=-1)
        pg = np.sum(v * wg, axis=-1)
        panel_err = np.abs(pk - pg)
        return np.sum(pk, axis=-1), np.sum(panel_err, axis=-1), panel_err

    def bisect(self, mask) -> PanelRule:
        """Split the panels flagged in ``mask`` in half."""
        lo, hi = self.edges[:-1], self.edges[1:]
        mids = 0.5 * (lo + hi)[np.asarray(mask, dtype=bool)]
        return PanelRule.from_edges(np.union1d(self.edges, mids))


@dataclass(frozen=True)
class QuadResult:
    value: float | np.ndarray
    error: float | np.ndarray
    rule: PanelRule


def integrate(fn, edges, rtol=1e-12, atol=0.0, max_panels=20000) -> QuadResult:
    """Adaptive composite Gauss-Kronrod integration over ``[edges[0], edges[-1]]``.

    Panels whose Kronrod/Gauss discrepancy is too large are bisected until
    every row satisfies ``error <= max(atol, rtol * |value|)``.
    """
    rule = PanelRule.from_edges(edges)
    while True:
        values = np.asarray(fn(rule.nodes), dtype=float)
        value, error, panel_err = rule.apply(values)
        target = np.maximum(atol, rtol * np.abs(value))
        if np.all(error <= target):
            return QuadResult(value, error, rule)
        if rule.n_panels >= max_panels:
            raise ConvergenceError(
                f"quadrature did not converge: error {np.max(error):.3e} with {rule.n_panels} panels"
            )
        failing = np.atleast_1d(error > target)
        pe = np.atleast_2d(panel_err)[failing]
        # split the worst panels of every failing row
        mask = np.any(pe >= 0.25 * pe.max(axis=-1, keepdims=True), axis=0)
        rule = rule.bisect(mask)


# Gregory coefficients: trapezoid tail = integral/h + sum_j c_j * forward_diff^j f_0
GREGORY = (-1.0 / 12, 1.0 / 24, -19.0 / 720, 3.0 / 160, -863.0 / 60480, 275.0 / 24192)


def gregory_correction(samples) -> float:
    """End correction for a trapezoid sum running from ``samples[0]`` to infinity.

    With unit spacing, ``samples[0]/2 + sum_{j>=1} f_j`` equals
    ``integral_{x_0}^inf f + gregory_correction(f_0, f_1, ...)``; forward
    differences up to order ``len(samples) - 1`` are used.
    """
    diffs = np.asarray(samples, dtype=float)
    total = 0.0
    for coeff in GREGORY[: len(diffs) - 1]:
        diffs = np.diff(diffs)
        total += coeff * diffs[0]
    return total
