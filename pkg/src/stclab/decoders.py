"""Decoders for vectorized space-time transmissions.

Three families over the same model y = sum_i H_i s_i + noise:

* ``ml_exhaustive`` scans every candidate symbol vector (|S|^(n^2) work).
* ``sphere_decode`` returns the identical maximum-likelihood answer via a
  depth-first radius search after a QR factorization.
* ``recursive_decode`` decodes one n-symbol group per round (n * |S|^n
  candidate evaluations total): each round picks the group whose removal
  leaves the best-behaved linear system (largest det/kappa of the Gram of
  the remaining columns), scans that group while zero-forcing and
  quantizing the rest, subtracts the estimate and recurses.

All argmin scans enumerate candidates in odometer order over the sorted
alphabet and keep the first minimum, so ties resolve to the
lexicographically smallest symbol vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .algebra import NotApplicableError
from .alphabet import Alphabet, Quantizer
from .linalg import (
    PSEUDO_SOLVE_KAPPA,
    SINGULARITY_RTOL,
    condition_number,
    det_hermitian,
    hermitian_gram,
)

DEFAULT_BUDGET = 2**24


class BudgetExceededError(ValueError):
    """The configured candidate budget cannot cover the requested search."""


@dataclass(frozen=True)
class SelectionScore:
    """Ranking of one symbol group during a recursion round.

    ``det_value`` and ``kappa_value`` belong to the Gram matrix of the
    equivalent channels of the *other* remaining groups; large determinant
    and small condition number both favor zero-forcing them.
    """

    index: int
    det_value: float
    kappa_value: float
    ratio: float


@dataclass(frozen=True)
class SphereConfig:
    initial_radius_policy: str = "zf-babai"  # or "infinite"
    natural_order: bool = True  # False: closest-first child ordering

    def __post_init__(self):
        if self.initial_radius_policy not in ("zf-babai", "infinite"):
            raise ValueError(f"unknown radius policy {self.initial_radius_policy!r}")


@dataclass(frozen=True)
class DecodeResult:
    """Decoded symbol block plus per-run accounting.

    ``symbols[i]`` is the estimate of group s_i in original order;
    ``step_order`` is the decode order (identity for the one-shot decoders);
    ``residual`` is ||y - sum_i H_i s_i||^2 recomputed from scratch.
    """

    symbols: np.ndarray = field(repr=False)
    step_order: tuple
    candidates_examined: int
    metric_evals: int
    pseudo_solve_flags: tuple
    residual: float


def residual_norm2(y: np.ndarray, equivalents, symbols: np.ndarray) -> float:
    """Canonical decoder metric ||y - sum_i H_i s_i||^2."""
    r = np.asarray(y, dtype=np.complex128).copy()
    for eq, s in zip(equivalents, np.asarray(symbols, dtype=np.complex128)):
        r -= eq @ s
    return float(np.vdot(r, r).real)


def _blocks_of(g: np.ndarray, n: int):
    return tuple(g[:, i * n : (i + 1) * n] for i in range(n))


def ml_exhaustive(
    y: np.ndarray,
    g: np.ndarray,
    alphabet: Alphabet,
    budget: int = DEFAULT_BUDGET,
    backend: str | None = None,
) -> DecodeResult:
    """Globally optimal argmin of ||y - g s||^2 over all symbol vectors."""
    y = np.asarray(y, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    k = g.shape[1]
    m = len(alphabet)
    total = m**k
    if total > budget:
        raise BudgetExceededError(
            f"exhaustive search needs {total} candidates (> budget {budget}); use sphere_decode"
        )
    kern = kernels.get_backend(backend)
    idx, _, leaves = kern.ml_scan(y, g, alphabet.points)
    n = math.isqrt(k)
    symbols = alphabet.points[idx].reshape(n, n) if n * n == k else alphabet.points[idx][None, :]
    return DecodeResult(
        symbols=symbols,
        step_order=tuple(range(symbols.shape[0])),
        candidates_examined=int(leaves),
        metric_evals=0,
        pseudo_solve_flags=(False,) * symbols.shape[0],
        residual=residual_norm2(y, _blocks_of(g, symbols.shape[1]), symbols),
    )


def _babai_indices(r: np.ndarray, z: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Nearest-plane start point: back-substitute and quantize level by level."""
    k = z.size
    idx = np.zeros(k, dtype=np.int64)
    svals = np.zeros(k, dtype=np.complex128)
    for level in range(k - 1, -1, -1):
        rhs = z[level] - r[level, level + 1 :] @ svals[level + 1 :]
        est = rhs / r[level, level]
        idx[level] = int(np.argmin(np.abs(est - points) ** 2))
        svals[level] = points[idx[level]]
    return idx


def sphere_decode(
    y: np.ndarray,
    g: np.ndarray,
    alphabet: Alphabet,
    config: SphereConfig | None = None,
    backend: str | None = None,
    budget: int = DEFAULT_BUDGET,
) -> DecodeResult:
    """Exact ML decoding by sphere search; same argmin and tie rule as
    :func:`ml_exhaustive`, but only the visited leaves are counted.

    The initial radius comes from the Babai point under the default policy
    (that preprocessing point is not counted as a visited leaf).  If g is
    rank-deficient the search degrades to a flagged exhaustive scan.
    """
    config = config or SphereConfig()
    y = np.asarray(y, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    k = g.shape[1]
    n = math.isqrt(k)
    kern = kernels.get_backend(backend)

    q, r = np.linalg.qr(g)
    diag = np.abs(np.diag(r))
    if diag.min() <= SINGULARITY_RTOL * max(diag.max(), 1e-300):
        ml = ml_exhaustive(y, g, alphabet, budget=budget, backend=backend)
        return DecodeResult(
            symbols=ml.symbols,
            step_order=ml.step_order,
            candidates_examined=ml.candidates_examined,
            metric_evals=0,
            pseudo_solve_flags=(True,) * n,
            residual=ml.residual,
        )
    z = q.conj().T @ y
    init_idx = None
    if config.initial_radius_policy == "zf-babai":
        init_idx = _babai_indices(r, z, alphabet.points)
    idx, _, leaves = kern.sphere_scan(r, z, alphabet.points, init_idx, config.natural_order)
    symbols = alphabet.points[idx].reshape(n, n)
    return DecodeResult(
        symbols=symbols,
        step_order=tuple(range(n)),
        candidates_examined=int(leaves),
        metric_evals=0,
        pseudo_solve_flags=(False,) * n,
        residual=residual_norm2(y, _blocks_of(g, n), symbols),
    )


def selection_scores(equivalents, excluded=()) -> list:
    """Rank every non-excluded group for decode order.

    The score of group i is det/kappa of the Gram of the model with group i
    removed (the system that will be zero-forced once i is hypothesized).
    A singular Gram is not an error: kappa is +inf and the ratio 0.
    """
    excluded = frozenset(excluded)
    remaining = [i for i in range(len(equivalents)) if i not in excluded]
    if len(remaining) < 2:
        raise ValueError("selection needs at least two remaining groups")
    scores = []
    for i in remaining:
        gi = np.hstack([equivalents[j] for j in remaining if j != i])
        gram = hermitian_gram(gi)
        det = det_hermitian(gram)
        kappa = condition_number(gram)
        ratio = det / kappa if np.isfinite(kappa) else 0.0
        scores.append(SelectionScore(index=i, det_value=det, kappa_value=kappa, ratio=ratio))
    return scores


def _argmax_score(scores, key) -> SelectionScore:
    best = scores[0]
    for sc in scores[1:]:
        if key(sc) > key(best):  # strict: ties keep the lowest index
            best = sc
    return best


def golden_shortcut_metric(equivalents) -> int:
    """Determinant-only group selection for 2x2 codes.

    For the golden code the Gram with the larger determinant provably also
    has the smaller condition number, so the first-round det/kappa rule
    collapses to an argmax over determinants.  Returns the index to decode
    first; agrees with the full ratio rule whenever scores are separated.
    """
    if len(equivalents) != 2:
        raise NotApplicableError("the determinant shortcut applies to 2x2 codes only")
    return _argmax_score(selection_scores(equivalents), lambda sc: sc.det_value).index


def recursive_decode(
    y: np.ndarray,
    equivalents,
    alphabet: Alphabet,
    quantizer: Quantizer | None = None,
    budget: int = DEFAULT_BUDGET,
    backend: str | None = None,
    selector: str = "ratio",
) -> DecodeResult:
    """Group-by-group decoding in n rounds of |S|^n candidate evaluations.

    Round structure: rank the remaining groups (``selector`` picks the
    ranking key: "ratio" for det/kappa, "det" for determinant only), then for
    every candidate of the chosen group zero-force the remaining symbols
    from the reduced receive vector, quantize them component-wise and score
    the combination; keep the argmin, subtract its contribution and recurse.
    The last remaining group is scanned directly, with nothing left to
    zero-force.  Ill-conditioned Grams fall back to an SVD least-squares
    zero-forcing map and flag the step.
    """
    if selector not in ("ratio", "det"):
        raise ValueError(f"unknown selector {selector!r}")
    if quantizer is not None and not np.array_equal(quantizer.alphabet.points, alphabet.points):
        raise ValueError("quantizer alphabet differs from the scan alphabet")
    y = np.asarray(y, dtype=np.complex128)
    equivalents = tuple(np.asarray(eq, dtype=np.complex128) for eq in equivalents)
    n_groups = len(equivalents)
    n = equivalents[0].shape[1]
    m = len(alphabet)
    per_step = m**n
    if per_step > budget:
        raise BudgetExceededError(
            f"recursive step needs {per_step} candidates (> budget {budget})"
        )
    kern = kernels.get_backend(backend)
    points = alphabet.points

    y_work = y.copy()
    remaining = list(range(n_groups))
    symbols = np.zeros((n_groups, n), dtype=np.complex128)
    step_order: list = []
    flags: list = []
    candidates = 0
    metric_evals = 0

    while len(remaining) > 1:
        scores = selection_scores(equivalents, excluded=set(step_order))
        metric_evals += len(scores)
        key = (lambda sc: sc.ratio) if selector == "ratio" else (lambda sc: sc.det_value)
        chosen = _argmax_score(scores, key)
        pick = chosen.index
        others = [j for j in remaining if j != pick]
        gr = np.hstack([equivalents[j] for j in others])
        gram = hermitian_gram(gr)
        pseudo = not np.isfinite(chosen.kappa_value) or chosen.kappa_value > PSEUDO_SOLVE_KAPPA
        if pseudo:
            w, *_ = np.linalg.lstsq(gram, gr.conj().T, rcond=SINGULARITY_RTOL)
        else:
            w = np.linalg.solve(gram, gr.conj().T)
        idx, _, leaves = kern.zf_scan(y_work, equivalents[pick], w, gr, points)
        symbols[pick] = points[idx]
        y_work = y_work - equivalents[pick] @ symbols[pick]
        remaining.remove(pick)
        step_order.append(pick)
        flags.append(bool(pseudo))
        candidates += int(leaves)

    last = remaining[0]
    idx, _, leaves = kern.ml_scan(y_work, equivalents[last], points)
    symbols[last] = points[idx]
    step_order.append(last)
    flags.append(False)
    candidates += int(leaves)

    return DecodeResult(
        symbols=symbols,
        step_order=tuple(step_order),
        candidates_examined=candidates,
        metric_evals=metric_evals,
        pseudo_solve_flags=tuple(flags),
        residual=residual_norm2(y, equivalents, symbols),
    )


DECODER_NAMES = ("ml", "sphere", "recursive", "golden-shortcut")


def run_decoder(
    name: str,
    y: np.ndarray,
    equivalents,
    alphabet: Alphabet,
    budget: int = DEFAULT_BUDGET,
    backend: str | None = None,
    sphere_config: SphereConfig | None = None,
) -> DecodeResult:
    """Dispatch a decoder by CLI name over the equivalent-channel model."""
    if name == "ml":
        return ml_exhaustive(y, np.hstack(equivalents), alphabet, budget=budget, backend=backend)
    if name == "sphere":
        return sphere_decode(
            y, np.hstack(equivalents), alphabet, config=sphere_config, backend=backend, budget=budget
        )
    if name == "recursive":
        return recursive_decode(y, equivalents, alphabet, budget=budget, backend=backend)
    if name == "golden-shortcut":
        if len(equivalents) != 2:
            raise NotApplicableError("golden-shortcut decoding applies to 2x2 codes only")
        return recursive_decode(y, equivalents, alphabet, budget=budget, backend=backend, selector="det")
    raise ValueError(f"unknown decoder {name!r}; choose from {DECODER_NAMES}")


def search_size(name: str, n: int, alphabet_size: int) -> int:
    """Worst-case candidate count a decoder will evaluate for a degree-n code."""
    if name in ("ml", "sphere"):
        return alphabet_size ** (n * n)
    if name in ("recursive", "golden-shortcut"):
        return n * alphabet_size**n
    raise ValueError(f"unknown decoder {name!r}")
