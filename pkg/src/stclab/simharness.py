"""Monte Carlo experiments: error-rate curves, first-round selection
statistics, and CSV reporting.

Reproducibility contract: every trial draws from its own generator keyed by
(master_seed, stream, point, trial), so results are independent of chunking,
thread count and execution order.  Wall-clock timings are kept out of the
emitted files for the same reason; they are printed, not persisted.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter

import numpy as np

from . import __version__, kernels
from .algebra import CodeSpec, generator_matrix
from .alphabet import Alphabet
from .channel import sample_channel, sample_symbols, transmit, trial_rng
from .decoders import DEFAULT_BUDGET, run_decoder, search_size
from .linalg import SINGULARITY_RTOL

STREAM_ERROR_RATE = 101
STREAM_SELECTION = 202
TRIAL_CHUNK = 256
STATS_CHUNK = 2048
HIST_BINS = 60
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class ExperimentConfig:
    spec: CodeSpec
    alphabet: Alphabet
    snr_grid_db: tuple = ()
    trials_per_point: int = 1000
    decoders: tuple = ("recursive",)
    master_seed: int = 0
    stats_trials: int = 0
    threads: int | None = None
    budget: int = DEFAULT_BUDGET
    backend: str | None = None

    def __post_init__(self):
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        grid = tuple(float(s) for s in self.snr_grid_db)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("snr grid must be strictly increasing")
        object.__setattr__(self, "snr_grid_db", grid)
        object.__setattr__(self, "decoders", tuple(self.decoders))


def wilson_interval(errors: int, trials: int):
    """95% Wilson score interval for a binomial rate."""
    if trials <= 0:
        return 0.0, 1.0
    p = errors / trials
    z2 = _Z95 * _Z95
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = _Z95 * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class RateRow:
    """One (SNR point, decoder) cell of an error-rate experiment."""

    snr_db: float
    decoder: str
    trials: int
    codeword_errors: int
    symbol_errors: int
    symbols_total: int
    total_candidates: int
    wall_time: float = 0.0

    @property
    def cer(self) -> float:
        return self.codeword_errors / self.trials

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.symbols_total

    @property
    def mean_candidates(self) -> float:
        return self.total_candidates / self.trials

    def cer_ci95(self):
        return wilson_interval(self.codeword_errors, self.trials)

    def ser_ci95(self):
        return wilson_interval(self.symbol_errors, self.symbols_total)


@dataclass
class StatsBlock:
    """First-round selection statistics over sampled channels."""

    trials: int
    histograms: dict = field(repr=False)  # name -> (bin_edges, counts)
    pearson_r_kappa_ratio: float = 0.0
    pearson_r_det_ratio: float = 0.0
    agreement_kappa_ratio: float = 0.0
    agreement_det_ratio: float = 0.0
    min_kappa_median: float = 0.0
    kappa_all_p90: float = 0.0


@dataclass
class SimReport:
    config: dict
    rows: list = field(default_factory=list)
    stats: StatsBlock | None = None
    skipped: list = field(default_factory=list)  # (decoder, reason)


def codeword_energy(spec: CodeSpec, alphabet: Alphabet) -> float:
    """E ||X||_F^2 under uniform i.i.d. symbols: mean_energy * ||G||_F^2."""
    g = generator_matrix(spec)
    return float(alphabet.mean_energy * np.sum(np.abs(g) ** 2))


def sigma2_for_snr_db(spec: CodeSpec, alphabet: Alphabet, snr_db: float) -> float:
    """Noise variance per complex receive dimension for a target SNR.

    SNR is defined as E||HX||_F^2 / E||N||_F^2 with the channel entries unit
    variance, so E||HX||^2 = n * E||X||^2 and sigma2 = E||X||^2 / (n * snr).
    Equivalent to normalizing codewords to E||X||_F^2 = n^2 and using
    sigma2 = n / snr.
    """
    snr_lin = 10.0 ** (snr_db / 10.0)
    return codeword_energy(spec, alphabet) / (spec.n * snr_lin)


def _config_echo(cfg: ExperimentConfig) -> dict:
    spec, alphabet = cfg.spec, cfg.alphabet
    energy = codeword_energy(spec, alphabet)
    return {
        "stclab_version": __version__,
        "kernel_backend": cfg.backend or kernels.BACKEND,
        "code": spec.label,
        "n": spec.n,
        "gamma": spec.gamma,
        "alpha": spec.alpha,
        "alphabet": alphabet.label,
        "alphabet_mean_energy": alphabet.mean_energy,
        "master_seed": cfg.master_seed,
        "snr_grid_db": cfg.snr_grid_db,
        "trials_per_point": cfg.trials_per_point,
        "stats_trials": cfg.stats_trials,
        "decoders": cfg.decoders,
        "budget": cfg.budget,
        "codeword_energy": energy,
        "codeword_energy_per_n2": energy / (spec.n * spec.n),
        "snr_definition": "E||HX||^2/E||N||^2; sigma2 = codeword_energy/(n*snr_linear)",
    }


def _usable_decoders(cfg: ExperimentConfig):
    usable, skipped = [], []
    m = len(cfg.alphabet)
    for name in cfg.decoders:
        size = search_size(name, cfg.spec.n, m)
        if name in ("ml", "recursive", "golden-shortcut") and size > cfg.budget:
            hint = "; use the sphere decoder" if name == "ml" else ""
            skipped.append((name, f"search size {size} exceeds budget {cfg.budget}{hint}"))
        elif name == "golden-shortcut" and cfg.spec.n != 2:
            skipped.append((name, "golden-shortcut applies to 2x2 codes only"))
        else:
            usable.append(name)
    return usable, skipped


def run_error_rate(cfg: ExperimentConfig) -> SimReport:
    """Codeword/symbol error rates per SNR point and decoder.

    Each trial draws a fresh channel, symbol block and noise vector; every
    configured decoder sees the same realizations (paired comparison).
    """
    if not cfg.snr_grid_db:
        raise ValueError("snr grid must be nonempty")
    spec, alphabet = cfg.spec, cfg.alphabet
    n = spec.n
    decoders, skipped = _usable_decoders(cfg)
    report = SimReport(config=_config_echo(cfg), skipped=skipped)
    if not decoders:
        return report

    def run_chunk(point_idx: int, sigma2: float, t0: int, t1: int):
        counts = {d: [0, 0, 0, 0.0] for d in decoders}  # cw, sym, cand, secs
        for t in range(t0, t1):
            rng = trial_rng(cfg.master_seed, STREAM_ERROR_RATE, point_idx, t)
            h = sample_channel(n, rng)
            s = sample_symbols(alphabet, n, rng)
            tx = transmit(spec, s, h, sigma2, rng)
            for d in decoders:
                tic = perf_counter()
                res = run_decoder(
                    d, tx.y, tx.context.equivalents, alphabet, budget=cfg.budget, backend=cfg.backend
                )
                toc = perf_counter()
                wrong = int(np.count_nonzero(res.symbols != s))
                c = counts[d]
                c[0] += wrong > 0
                c[1] += wrong
                c[2] += res.candidates_examined
                c[3] += toc - tic
        return counts

    threads = cfg.threads or 1
    for point_idx, snr_db in enumerate(cfg.snr_grid_db):
        sigma2 = sigma2_for_snr_db(spec, alphabet, snr_db)
        edges = list(range(0, cfg.trials_per_point, TRIAL_CHUNK)) + [cfg.trials_per_point]
        chunk_args = [(point_idx, sigma2, a, b) for a, b in zip(edges, edges[1:])]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda args: run_chunk(*args), chunk_args))
        else:
            results = [run_chunk(*args) for args in chunk_args]
        for d in decoders:
            cw = sum(r[d][0] for r in results)
            sym = sum(r[d][1] for r in results)
            cand = sum(r[d][2] for r in results)
            secs = sum(r[d][3] for r in results)
            report.rows.append(
                RateRow(
                    snr_db=snr_db,
                    decoder=d,
                    trials=cfg.trials_per_point,
                    codeword_errors=cw,
                    symbol_errors=sym,
                    symbols_total=cfg.trials_per_point * n * n,
                    total_candidates=cand,
                    wall_time=secs,
                )
            )
    return report


def _selection_chunk(spec: CodeSpec, master_seed: int, t0: int, t1: int):
    """Vectorized first-round scores for trials t0..t1-1.

    Uses one batched eigendecomposition per group: for the Hermitian PSD
    Gram the eigenvalues are its singular values, so det is their product
    and kappa their max/min ratio (same sentinel as linalg.condition_number).
    """
    n = spec.n
    count = t1 - t0
    h = np.empty((count, n, n), dtype=np.complex128)
    for t in range(t0, t1):
        rng = trial_rng(master_seed, STREAM_SELECTION, t)
        h[t - t0] = sample_channel(n, rng)
    blocks = [spec.gamma_blocks[i].reshape(n, n, n) for i in range(n)]
    eqs = []
    for i in range(n):
        m_i = h * spec.omega_table[:, i][None, None, :]
        eqs.append(np.einsum("tab,jbm->tjam", m_i, blocks[i]).reshape(count, n * n, n))
    dets = np.empty((count, n))
    kappas = np.empty((count, n))
    ratios = np.empty((count, n))
    for i in range(n):
        gi = np.concatenate([eqs[j] for j in range(n) if j != i], axis=2)
        gram = np.einsum("tar,tac->trc", gi.conj(), gi)
        lam = np.linalg.eigvalsh(gram)
        dets[:, i] = np.prod(np.maximum(lam, 0.0), axis=1)
        lam_min, lam_max = lam[:, 0], lam[:, -1]
        ok = lam_min > SINGULARITY_RTOL * lam_max
        kappas[:, i] = np.where(ok, lam_max / np.where(ok, lam_min, 1.0), np.inf)
        ratios[:, i] = np.where(ok, dets[:, i] / kappas[:, i], 0.0)
    return dets, kappas, ratios


def run_selection_stats(cfg: ExperimentConfig) -> SimReport:
    """Distributions and index correlations of the first-round selection rule."""
    if cfg.stats_trials < 1000:
        raise ValueError("stats_trials must be >= 1000")
    spec = cfg.spec
    trials = cfg.stats_trials
    edges = list(range(0, trials, STATS_CHUNK)) + [trials]
    chunk_args = [(a, b) for a, b in zip(edges, edges[1:])]

    def worker(bounds):
        return _selection_chunk(spec, cfg.master_seed, *bounds)

    threads = cfg.threads or 1
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(worker, chunk_args))
    else:
        parts = [worker(b) for b in chunk_args]
    dets = np.concatenate([p[0] for p in parts])
    kappas = np.concatenate([p[1] for p in parts])
    ratios = np.concatenate([p[2] for p in parts])

    i_min_kappa = np.argmin(kappas, axis=1)
    i_max_det = np.argmax(dets, axis=1)
    i_max_ratio = np.argmax(ratios, axis=1)
    min_kappa = kappas.min(axis=1)
    max_det = dets.max(axis=1)
    max_ratio = ratios.max(axis=1)

    finite_kappa = kappas[np.isfinite(kappas)]
    stats = StatsBlock(
        trials=trials,
        histograms={
            "min_kappa": _histogram(min_kappa, log=True),
            "max_det": _histogram(max_det),
            "max_ratio": _histogram(max_ratio),
        },
        pearson_r_kappa_ratio=float(np.corrcoef(i_min_kappa, i_max_ratio)[0, 1]),
        pearson_r_det_ratio=float(np.corrcoef(i_max_det, i_max_ratio)[0, 1]),
        agreement_kappa_ratio=float(np.mean(i_min_kappa == i_max_ratio)),
        agreement_det_ratio=float(np.mean(i_max_det == i_max_ratio)),
        min_kappa_median=float(np.median(min_kappa)),
        kappa_all_p90=float(np.quantile(finite_kappa, 0.9)),
    )
    return SimReport(config=_config_echo(cfg), stats=stats)


def _histogram(values: np.ndarray, log: bool = False):
    """Deterministic fixed-bin histogram covering the full value range."""
    values = values[np.isfinite(values)]
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        hi = lo + 1.0
    if log and lo > 0:
        edges = np.logspace(math.log10(lo), math.log10(hi), HIST_BINS + 1)
        edges[0], edges[-1] = lo, hi  # logspace endpoints can round inward
    else:
        edges = np.linspace(lo, hi, HIST_BINS + 1)
    counts, edges = np.histogram(values, bins=edges)
    return edges, counts


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    if isinstance(x, complex):
        return f"{x.real:.12g}{x.imag:+.12g}j"
    if isinstance(x, (tuple, list)):
        return ",".join(_fmt(v) for v in x)
    return str(x)


def emit_report(report: SimReport, prefix) -> list:
    """Write the report as CSV files plus a plain-text header.

    Emits <prefix>_header.txt always, <prefix>_rates.csv when error-rate
    rows exist, and <prefix>_hist.csv / <prefix>_corr.csv when a stats block
    exists.  Integer counters are included so every rate can be recovered
    exactly; wall times are deliberately not persisted.
    """
    prefix = Path(prefix)
    if prefix.parent and not prefix.parent.exists():
        prefix.parent.mkdir(parents=True, exist_ok=True)
    written = []

    header = prefix.with_name(prefix.name + "_header.txt")
    with open(header, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in report.config.items():
            fh.write(f"{key} = {_fmt(value)}\n")
        for name, reason in report.skipped:
            fh.write(f"skipped_decoder = {name}: {reason}\n")
    written.append(header)

    if report.rows:
        rates = prefix.with_name(prefix.name + "_rates.csv")
        with open(rates, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(
                "snr_db,decoder,trials,codeword_errors,codeword_error_rate,"
                "cer_ci95_low,cer_ci95_high,symbol_errors,symbols_total,"
                "symbol_error_rate,ser_ci95_low,ser_ci95_high,"
                "total_candidates,mean_candidates\n"
            )
            for row in report.rows:
                c_lo, c_hi = row.cer_ci95()
                s_lo, s_hi = row.ser_ci95()
                fh.write(
                    f"{_fmt(row.snr_db)},{row.decoder},{row.trials},"
                    f"{row.codeword_errors},{_fmt(row.cer)},{_fmt(c_lo)},{_fmt(c_hi)},"
                    f"{row.symbol_errors},{row.symbols_total},"
                    f"{_fmt(row.ser)},{_fmt(s_lo)},{_fmt(s_hi)},"
                    f"{row.total_candidates},{_fmt(row.mean_candidates)}\n"
                )
        written.append(rates)

    if report.stats is not None:
        hist = prefix.with_name(prefix.name + "_hist.csv")
        with open(hist, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("metric,bin_left,bin_right,count\n")
            for name, (edges, counts) in report.stats.histograms.items():
                for left, right, count in zip(edges[:-1], edges[1:], counts):
                    fh.write(f"{name},{_fmt(float(left))},{_fmt(float(right))},{int(count)}\n")
        written.append(hist)

        corr = prefix.with_name(prefix.name + "_corr.csv")
        st = report.stats
        with open(corr, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("statistic,value\n")
            fh.write(f"trials,{st.trials}\n")
            fh.write(f"pearson_r_min_kappa_vs_max_ratio,{_fmt(st.pearson_r_kappa_ratio)}\n")
            fh.write(f"pearson_r_max_det_vs_max_ratio,{_fmt(st.pearson_r_det_ratio)}\n")
            fh.write(f"agreement_min_kappa_vs_max_ratio,{_fmt(st.agreement_kappa_ratio)}\n")
            fh.write(f"agreement_max_det_vs_max_ratio,{_fmt(st.agreement_det_ratio)}\n")
            fh.write(f"min_kappa_median,{_fmt(st.min_kappa_median)}\n")
            fh.write(f"kappa_all_p90,{_fmt(st.kappa_all_p90)}\n")
        written.append(corr)

    return written
