"""Iterative foreground refinement by color-model fitting and graph min-cut.

The refinement alternates two steps for a fixed number of rounds: fit
K-component spherical Gaussian color models to the current foreground and
background pixel sets, then relabel pixels by solving an exact s-t min-cut
over unary model-likelihood costs plus a contrast-weighted smoothness cost on
8-neighbor edges. Everything is deterministic: k-means uses quantile
initialization instead of random restarts and the cut is an exact max-flow.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow
from scipy.special import logsumexp

from .exceptions import DegenerateTrimap
from .validation import check_binary_mask, check_rgb_frame, check_same_shape

# trimap levels
DEFINITE_BG = 0
PROBABLE_BG = 1
PROBABLE_FG = 2
DEFINITE_FG = 3

# capacities are scaled to integers for the exact max-flow solver, which
# works in int32: the scale and the unary clamp keep every capacity and the
# total cut value well inside that range for frames up to 256 x 256
_CAP_SCALE = 128
_MAX_UNARY = 100.0
_KMEANS_ROUNDS = 10


class ColorModel:
    """K-component spherical Gaussian mixture fit by deterministic k-means."""

    def __init__(self, means, variances, weights):
        self.means = means          # (k, 3)
        self.variances = variances  # (k,)
        self.weights = weights      # (k,)

    @classmethod
    def fit(cls, pixels: np.ndarray, k: int) -> "ColorModel":
        """Fit to an (N, 3) pixel array. Falls back to one component when N < k."""
        pixels = np.asarray(pixels, dtype=np.float64)
        if len(pixels) == 0:
            raise ValueError("cannot fit a color model to zero pixels")
        if len(pixels) < k:
            k = 1
        labels = _kmeans_labels(pixels, k)
        means = np.zeros((k, 3))
        variances = np.zeros(k)
        weights = np.zeros(k)
        for c in range(k):
            member = pixels[labels == c]
            weights[c] = len(member) / len(pixels)
            if len(member) == 0:
                continue
            means[c] = member.mean(axis=0)
            variances[c] = ((member - means[c]) ** 2).mean() + 1e-6
        return cls(means, variances, weights)

    def log_likelihood(self, pixels: np.ndarray) -> np.ndarray:
        """Per-pixel log p(x) under the mixture, for an (N, 3) array."""
        pixels = np.asarray(pixels, dtype=np.float64)
        comps = []
        for c in range(len(self.weights)):
            if self.weights[c] == 0:
                comps.append(np.full(len(pixels), -np.inf))
                continue
            sq = ((pixels - self.means[c]) ** 2).sum(axis=1)
            log_norm = -1.5 * np.log(2.0 * np.pi * self.variances[c])
            comps.append(np.log(self.weights[c]) + log_norm - sq / (2.0 * self.variances[c]))
        return logsumexp(np.stack(comps, axis=0), axis=0)


def _kmeans_labels(pixels: np.ndarray, k: int) -> np.ndarray:
    """Lloyd's algorithm with quantile initialization (no randomness)."""
    if k == 1:
        return np.zeros(len(pixels), dtype=int)
    order = np.lexsort((pixels[:, 2], pixels[:, 1], pixels[:, 0], pixels.sum(axis=1)))
    idx = np.linspace(0, len(pixels) - 1, k).round().astype(int)
    centers = pixels[order[idx]].copy()
    labels = np.zeros(len(pixels), dtype=int)
    for _ in range(_KMEANS_ROUNDS):
        d = ((pixels[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d.argmin(axis=1)
        for c in range(k):
            member = pixels[labels == c]
            if len(member):
                centers[c] = member.mean(axis=0)
    return labels


def edge_contrast_beta(frame: np.ndarray) -> float:
    """1 / (2 * mean squared color difference) over all 8-neighbor edges."""
    diffs = []
    for dy, dx in ((0, 1), (1, 0), (1, 1), (1, -1)):
        a, b = _neighbor_views(frame, dy, dx)
        diffs.append(((a - b) ** 2).sum(axis=-1).ravel())
    mean_sq = float(np.concatenate(diffs).mean())
    if mean_sq <= 0:
        return 0.0
    return 1.0 / (2.0 * mean_sq)


def _neighbor_views(arr: np.ndarray, dy: int, dx: int):
    """Aligned views (a, b) such that b is a shifted by (dy, dx)."""
    h, w = arr.shape[:2]
    ys = slice(0, h - dy)
    ys2 = slice(dy, h)
    if dx >= 0:
        xs, xs2 = slice(0, w - dx), slice(dx, w)
    else:
        xs, xs2 = slice(-dx, w), slice(0, w + dx)
    return arr[ys, xs], arr[ys2, xs2]


def refine_foreground(frame: np.ndarray, trimap: np.ndarray, iterations: int = 5,
                      k: int = 5, gamma: float = 50.0) -> np.ndarray:
    """Refine a trimap into a binary foreground mask.

    Definite trimap labels are hard constraints: definite foreground pixels are
    always set in the output and definite background pixels never are. With no
    probable pixels the output is exactly the definite foreground set.
    """
    frame = check_rgb_frame(frame)
    trimap = np.asarray(trimap)
    check_same_shape(frame, trimap, "frame", "trimap")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")

    h, w = trimap.shape
    fg_seed = (trimap == DEFINITE_FG) | (trimap == PROBABLE_FG)
    bg_seed = (trimap == DEFINITE_BG) | (trimap == PROBABLE_BG)
    if not fg_seed.any() or not bg_seed.any():
        raise DegenerateTrimap("trimap needs at least one foreground and one background pixel")

    probable = (trimap == PROBABLE_FG) | (trimap == PROBABLE_BG)
    if not probable.any():
        return trimap == DEFINITE_FG

    pixels = frame.reshape(-1, 3)
    beta = edge_contrast_beta(frame)
    n_rows, n_cols, n_caps = _smoothness_arcs(frame, beta, gamma)

    fg = fg_seed.copy()
    fg_model = bg_model = None
    for _ in range(iterations):
        if fg.any():
            fg_model = ColorModel.fit(pixels[fg.ravel()], k)
        if (~fg).any():
            bg_model = ColorModel.fit(pixels[~fg.ravel()], k)
        cost_fg = -fg_model.log_likelihood(pixels)
        cost_bg = -bg_model.log_likelihood(pixels)
        # every pixel pays exactly one of the two unary costs, so a per-pixel
        # shift keeps the argmin while making capacities nonnegative
        shift = np.minimum(cost_fg, cost_bg)
        cost_fg = np.clip(cost_fg - shift, 0.0, _MAX_UNARY)
        cost_bg = np.clip(cost_bg - shift, 0.0, _MAX_UNARY)
        fg_side = _solve_cut(trimap, cost_fg, cost_bg, n_rows, n_cols, n_caps, h, w, gamma)
        fg = fg_side & probable
        fg |= trimap == DEFINITE_FG
    return fg


def _smoothness_arcs(frame: np.ndarray, beta: float, gamma: float):
    """Directed integer-capacity arcs for all 8-neighbor pixel pairs."""
    h, w = frame.shape[:2]
    index = np.arange(h * w).reshape(h, w)
    rows, cols, caps = [], [], []
    for dy, dx in ((0, 1), (1, 0), (1, 1), (1, -1)):
        ia, ib = _neighbor_views(index, dy, dx)
        fa, fb = _neighbor_views(frame, dy, dx)
        weight = gamma * np.exp(-beta * ((fa - fb) ** 2).sum(axis=-1))
        cap = np.rint(weight * _CAP_SCALE).astype(np.int32).ravel()
        rows += [ia.ravel(), ib.ravel()]
        cols += [ib.ravel(), ia.ravel()]
        caps += [cap, cap]
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(caps)


def _solve_cut(trimap, cost_fg, cost_bg, n_rows, n_cols, n_caps, h, w, gamma):
    """Exact min-cut; returns the boolean foreground side as an H x W mask."""
    n = h * w
    source, sink = n, n + 1
    flat = trimap.ravel()

    # terminal capacities: source->p pays the background cost when p is cut to
    # the sink side, p->sink pays the foreground cost
    cap_src = np.rint(cost_bg * _CAP_SCALE).astype(np.int32)
    cap_snk = np.rint(cost_fg * _CAP_SCALE).astype(np.int32)
    # unbreakable: exceeds everything that can flow through one pixel
    big = np.int32((8 * gamma + _MAX_UNARY) * _CAP_SCALE + 1)
    cap_src[flat == DEFINITE_FG] = big
    cap_snk[flat == DEFINITE_FG] = 0
    cap_src[flat == DEFINITE_BG] = 0
    cap_snk[flat == DEFINITE_BG] = big

    pix = np.arange(n)
    rows = np.concatenate([n_rows, np.full(n, source), pix, pix, np.full(n, sink)])
    cols = np.concatenate([n_cols, pix, np.full(n, source), np.full(n, sink), pix])
    # zero-capacity reverse arcs keep the flow matrix sparsity symmetric
    caps = np.concatenate([n_caps, cap_src, np.zeros(n, np.int32), cap_snk, np.zeros(n, np.int32)])

    graph = csr_matrix((caps.astype(np.int32), (rows, cols)), shape=(n + 2, n + 2))
    result = maximum_flow(graph, source, sink)
    residual = graph - result.flow
    residual.data = (residual.data > 0).astype(np.int8)
    residual.eliminate_zeros()
    reachable = breadth_first_order(residual, source, directed=True, return_predecessors=False)
    fg_side = np.zeros(n + 2, dtype=bool)
    fg_side[reachable] = True
    return fg_side[:n].reshape(h, w)


def seed_trimap(skin_mask: np.ndarray, border: int = 1) -> np.ndarray:
    """Trimap from a skin mask: set pixels probable fg, rest probable bg,
    border ring definite bg."""
    skin_mask = check_binary_mask(skin_mask)
    trimap = np.where(skin_mask, PROBABLE_FG, PROBABLE_BG).astype(np.uint8)
    if border > 0:
        trimap[:border, :] = DEFINITE_BG
        trimap[-border:, :] = DEFINITE_BG
        trimap[:, :border] = DEFINITE_BG
        trimap[:, -border:] = DEFINITE_BG
    return trimap
