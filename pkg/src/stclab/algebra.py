"""Construction of n x n algebraic space-time codes.

A code is described numerically by a :class:`CodeSpec`: the n x n table of
Galois conjugates of the (shaping-scaled) basis elements, the twist scalar
gamma, and the per-column block matrices that place the n symbol groups into
codeword columns.  The encoder realizes the transposed left regular
representation; the generator matrix is its vectorized block form.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import hermitian_gram, vectorize


class SpecParseError(ValueError):
    """A code-spec file is malformed; the message names the offending field."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible shapes for the requested operation."""


class NotApplicableError(ValueError):
    """The operation's structural preconditions (degree, flags) do not hold."""


@dataclass(frozen=True)
class CodeSpec:
    """Complete numeric description of an n x n algebraic space-time code.

    ``omega_table[j, i]`` holds the j-th Galois conjugate of the i-th basis
    element with the shaping scalar already folded in.  ``gamma_blocks[i]``
    is the (n^2 x n) matrix whose j-th n-row block maps symbol group s_i to
    the j-th codeword column of its component matrix.
    """

    label: str
    n: int
    gamma: complex
    alpha: complex
    omega_table: np.ndarray = field(repr=False)
    gamma_blocks: tuple = field(repr=False)
    unitary_gamma: bool = True

    def __post_init__(self):
        n = self.n
        if n < 1:
            raise ValueError("degree n must be positive")
        omega = np.array(self.omega_table, dtype=np.complex128)
        if omega.shape != (n, n):
            raise ValueError(f"omega_table must be {n}x{n}, got {omega.shape}")
        if not np.all(np.isfinite(omega)):
            raise ValueError("omega_table entries must be finite")
        scale = max(np.max(np.abs(omega)), 1.0)
        for j in range(n):
            for k in range(j + 1, n):
                if np.max(np.abs(omega[j] - omega[k])) <= 1e-12 * scale:
                    raise ValueError(f"omega_table rows {j} and {k} coincide")
        if self.unitary_gamma and abs(abs(self.gamma) ** 2 - 1.0) > 1e-9:
            raise ValueError("unitary-gamma spec requires |gamma|^2 == 1")
        blocks = []
        for i, blk in enumerate(self.gamma_blocks):
            b = np.array(blk, dtype=np.complex128)
            if b.shape != (n * n, n):
                raise ValueError(f"gamma_blocks[{i}] must be {n * n}x{n}, got {b.shape}")
            if not np.all(np.isfinite(b)):
                raise ValueError(f"gamma_blocks[{i}] entries must be finite")
            b.setflags(write=False)
            blocks.append(b)
        if len(blocks) != n:
            raise ValueError(f"expected {n} gamma blocks, got {len(blocks)}")
        omega.setflags(write=False)
        object.__setattr__(self, "omega_table", omega)
        object.__setattr__(self, "gamma_blocks", tuple(blocks))
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "alpha", complex(self.alpha))


def rho_scalar(spec: CodeSpec, i: int) -> np.ndarray:
    """Transposed regular representation of the i-th basis element (0-based):
    the diagonal matrix of its Galois conjugates."""
    if not 0 <= i < spec.n:
        raise IndexError(f"basis index {i} out of range for degree {spec.n}")
    return np.diag(spec.omega_table[:, i])


def cyclic_gamma_blocks(n: int, gamma: complex) -> tuple:
    """Symbol-placement blocks of a degree-n cyclic algebra with twist gamma.

    Block row j (rows j*n..j*n+n-1) maps a symbol group to codeword column j;
    entry [k, m] of that block is 1 when k == (j - m) mod n and m <= j, and
    gamma when k == (j - m) mod n and m > j (the wrap-around positions).
    All n groups share the same block matrix.
    """
    if n < 2:
        raise ValueError("cyclic construction needs degree n >= 2")
    blk = np.zeros((n * n, n), dtype=np.complex128)
    for j in range(n):
        for m in range(n):
            k = (j - m) % n
            blk[j * n + k, m] = 1.0 if m <= j else gamma
    blk.setflags(write=False)
    return tuple(blk for _ in range(n))


def encode(spec: CodeSpec, s: np.ndarray) -> np.ndarray:
    """Codeword matrix for a symbol block ``s`` of shape (n, n), row i = group s_i."""
    n = spec.n
    s = np.asarray(s, dtype=np.complex128)
    if s.shape != (n, n):
        raise DimensionMismatchError(f"symbol block must be {n}x{n}, got {s.shape}")
    x = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        cols = (spec.gamma_blocks[i] @ s[i]).reshape(n, n)  # row j = column j
        x += spec.omega_table[:, i][:, None] * cols.T
    return x


def generator_matrix(spec: CodeSpec) -> np.ndarray:
    """n^2 x n^2 generator: vec(encode(s)) == generator_matrix(spec) @ s.reshape(-1)."""
    n = spec.n
    g = np.empty((n * n, n * n), dtype=np.complex128)
    for i in range(n):
        diag_rep = np.tile(spec.omega_table[:, i], n)[:, None]
        g[:, i * n : (i + 1) * n] = diag_rep * spec.gamma_blocks[i]
    return g


def stack_symbols(s: np.ndarray) -> np.ndarray:
    """Concatenate groups s_0..s_{n-1} into one length-n^2 vector."""
    return np.asarray(s, dtype=np.complex128).reshape(-1)


def split_symbols(vec: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`stack_symbols`."""
    return np.asarray(vec, dtype=np.complex128).reshape(n, n)


def covariance_closed_form_2x2(spec: CodeSpec, h: np.ndarray):
    """Closed-form Gram entries (a, a_omega, b) of the two equivalent channels
    of a 2x2 spec over a real quadratic extension with unitary gamma.

    With h1, h2 the columns of H and the first basis column of the spec's
    conjugate table (a0, a1) = (alpha, sigma(alpha)):

        a       = |a0|^2 ||h1||^2 + |a1|^2 ||h2||^2
        a_omega = same with the second basis column
        b       = gamma * conj(a0) a1 <h1, h2> + conj(a1) a0 <h2, h1>

    where <u, v> = u^dagger v.  The Gram of the first equivalent channel is
    [[a, b], [b*, a]]; the second is [[a_omega, Nb], [(Nb)*, a_omega]] with
    N = omega * sigma(omega) the real norm of the basis ratio.
    """
    if spec.n != 2:
        raise NotApplicableError("closed forms only apply to 2x2 specs")
    if not spec.unitary_gamma:
        raise NotApplicableError("closed forms require |gamma| == 1")
    omega = spec.omega_table[0, 1] / spec.omega_table[0, 0]
    omega_conj = spec.omega_table[1, 1] / spec.omega_table[1, 0]
    if abs(omega.imag) > 1e-9 * abs(omega) or abs(omega_conj.imag) > 1e-9 * abs(omega_conj):
        raise NotApplicableError("closed forms require a real quadratic basis ratio")
    h = np.asarray(h, dtype=np.complex128)
    if h.shape != (2, 2):
        raise DimensionMismatchError(f"channel must be 2x2, got {h.shape}")
    h1, h2 = h[:, 0], h[:, 1]
    a0, a1 = spec.omega_table[0, 0], spec.omega_table[1, 0]
    n1, n2 = np.vdot(h1, h1).real, np.vdot(h2, h2).real
    a = abs(a0) ** 2 * n1 + abs(a1) ** 2 * n2
    w0, w1 = spec.omega_table[0, 1], spec.omega_table[1, 1]
    a_omega = abs(w0) ** 2 * n1 + abs(w1) ** 2 * n2
    b = spec.gamma * np.conj(a0) * a1 * np.vdot(h1, h2) + np.conj(a1) * a0 * np.vdot(h2, h1)
    return float(a), float(a_omega), complex(b)


# ---------------------------------------------------------------------------
# Built-in codes
# ---------------------------------------------------------------------------

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


def golden_code(alpha_coeffs=(1.0 + 1.0j, -1.0j)) -> CodeSpec:
    """The 2x2 code from the quaternion algebra (5, i) over Q(i).

    The quadratic generator is the golden ratio w = (1+sqrt(5))/2, gamma = i.
    ``alpha_coeffs = (c0, c1)`` gives the shaping scalar alpha = c0 + c1*w,
    with Galois conjugate c0 + c1*sigma(w); the default is 1 + i*(1 - w).
    """
    w = GOLDEN_RATIO
    w_conj = (1.0 - math.sqrt(5.0)) / 2.0
    c0, c1 = complex(alpha_coeffs[0]), complex(alpha_coeffs[1])
    alpha = c0 + c1 * w
    alpha_conj = c0 + c1 * w_conj
    omega = np.array(
        [
            [alpha * 1.0, alpha * w],
            [alpha_conj * 1.0, alpha_conj * w_conj],
        ],
        dtype=np.complex128,
    )
    return CodeSpec(
        label="golden",
        n=2,
        gamma=1j,
        alpha=alpha,
        omega_table=omega,
        gamma_blocks=cyclic_gamma_blocks(2, 1j),
        unitary_gamma=True,
    )


# Q(i)-coefficients of the degree-4 basis elements over powers (1, t, t^2, t^3)
# of t = 2*cos(2*pi/15); the Galois generator sends t to 2*cos(4*pi/15).
_PERFECT4_BASIS_COEFFS = (
    (1.0 - 3.0j, 0.0, 1.0j, 0.0),
    (0.0, 1.0 - 3.0j, 0.0, 1.0j),
    (-1.0j, -3.0 + 4.0j, 0.0, 1.0 - 1.0j),
    (-1.0 + 1.0j, -3.0, 1.0, 1.0),
)


def perfect_code_4x4(gamma: complex = 1j, alpha_coeffs=(1.0, 0.0, 0.0, 0.0)) -> CodeSpec:
    """The 4x4 code over Q(i, t), t = 2*cos(2*pi/15), with its standard basis.

    ``alpha_coeffs`` are Q(i)-coefficients of the shaping scalar over powers
    of t (default: no shaping).  gamma defaults to i.
    """
    conjugate_t = [2.0 * math.cos(2.0 * math.pi * (2**j) / 15.0) for j in range(4)]
    omega = np.empty((4, 4), dtype=np.complex128)
    for j, t in enumerate(conjugate_t):
        powers = np.array([1.0, t, t * t, t * t * t], dtype=np.complex128)
        alpha_j = np.dot(np.asarray(alpha_coeffs, dtype=np.complex128), powers)
        for i, coeffs in enumerate(_PERFECT4_BASIS_COEFFS):
            omega[j, i] = alpha_j * np.dot(np.asarray(coeffs, dtype=np.complex128), powers)
    powers0 = np.array([1.0, conjugate_t[0], conjugate_t[0] ** 2, conjugate_t[0] ** 3])
    alpha0 = complex(np.dot(np.asarray(alpha_coeffs, dtype=np.complex128), powers0))
    return CodeSpec(
        label="perfect4",
        n=4,
        gamma=complex(gamma),
        alpha=alpha0,
        omega_table=omega,
        gamma_blocks=cyclic_gamma_blocks(4, gamma),
        unitary_gamma=abs(abs(complex(gamma)) - 1.0) <= 1e-9,
    )


def cyclic_spec(
    n: int,
    gamma: complex,
    omega_table: np.ndarray,
    label: str = "cyclic",
    alpha: complex = 1.0,
) -> CodeSpec:
    """Generic cyclic-algebra spec from a raw conjugate table."""
    gamma = complex(gamma)
    return CodeSpec(
        label=label,
        n=n,
        gamma=gamma,
        alpha=complex(alpha),
        omega_table=omega_table,
        gamma_blocks=cyclic_gamma_blocks(n, gamma),
        unitary_gamma=abs(abs(gamma) - 1.0) <= 1e-9,
    )


BUILTIN_CODES = {
    "golden": golden_code,
    "perfect4": perfect_code_4x4,
}


# ---------------------------------------------------------------------------
# Spec files
# ---------------------------------------------------------------------------


def _parse_complex(value, where: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(x, (int, float)) for x in value)
    ):
        raise SpecParseError(f"field {where!r}: expected [re, im] pair, got {value!r}")
    return complex(value[0], value[1])


def _parse_complex_matrix(rows, shape, where: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != shape[0]:
        raise SpecParseError(f"field {where!r}: expected {shape[0]} rows")
    out = np.empty(shape, dtype=np.complex128)
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != shape[1]:
            raise SpecParseError(f"field {where!r}: row {r} must have {shape[1]} entries")
        for c, entry in enumerate(row):
            out[r, c] = _parse_complex(entry, f"{where}[{r}][{c}]")
    return out


def load_spec(path) -> CodeSpec:
    """Load a code spec from its JSON file format.

    Schema: { label, n, gamma: [re, im], alpha: [re, im],
    omega_table: n x n of [re, im] (shaping already folded in),
    gamma_blocks: "cyclic" | n explicit (n^2 x n) arrays, unitary_gamma: bool }.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON in {path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise SpecParseError("spec file must contain a JSON object")
    for key in ("label", "n", "gamma", "omega_table", "gamma_blocks"):
        if key not in raw:
            raise SpecParseError(f"missing required field {key!r}")
    if not isinstance(raw["n"], int) or raw["n"] < 1:
        raise SpecParseError(f"field 'n': expected a positive integer, got {raw['n']!r}")
    n = raw["n"]
    gamma = _parse_complex(raw["gamma"], "gamma")
    alpha = _parse_complex(raw.get("alpha", [1.0, 0.0]), "alpha")
    omega = _parse_complex_matrix(raw["omega_table"], (n, n), "omega_table")
    blocks_raw = raw["gamma_blocks"]
    if blocks_raw == "cyclic":
        blocks = cyclic_gamma_blocks(n, gamma)
    elif isinstance(blocks_raw, list) and len(blocks_raw) == n:
        blocks = tuple(
            _parse_complex_matrix(blk, (n * n, n), f"gamma_blocks[{i}]")
            for i, blk in enumerate(blocks_raw)
        )
    else:
        raise SpecParseError("field 'gamma_blocks': expected \"cyclic\" or a list of n blocks")
    unitary = raw.get("unitary_gamma", abs(abs(gamma) - 1.0) <= 1e-9)
    if not isinstance(unitary, bool):
        raise SpecParseError("field 'unitary_gamma': expected a boolean")
    try:
        return CodeSpec(
            label=str(raw["label"]),
            n=n,
            gamma=gamma,
            alpha=alpha,
            omega_table=omega,
            gamma_blocks=blocks,
            unitary_gamma=unitary,
        )
    except ValueError as exc:
        raise SpecParseError(f"inconsistent spec: {exc}") from exc


def save_spec(spec: CodeSpec, path, cyclic_blocks: bool = True) -> None:
    """Write a spec in the JSON file format read by :func:`load_spec`."""

    def pair(z):
        return [z.real, z.imag]

    doc = {
        "label": spec.label,
        "n": spec.n,
        "gamma": pair(spec.gamma),
        "alpha": pair(spec.alpha),
        "omega_table": [[pair(z) for z in row] for row in spec.omega_table],
        "unitary_gamma": spec.unitary_gamma,
    }
    if cyclic_blocks and all(
        np.array_equal(b, cyclic_gamma_blocks(spec.n, spec.gamma)[0]) for b in spec.gamma_blocks
    ):
        doc["gamma_blocks"] = "cyclic"
    else:
        doc["gamma_blocks"] = [[[pair(z) for z in row] for row in b] for b in spec.gamma_blocks]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def spec_from_source(source: str, omega_file=None) -> CodeSpec:
    """Resolve a CLI spec source: builtin name, 'cyclic:<n>:<re>:<im>', or file path."""
    if source in BUILTIN_CODES:
        return BUILTIN_CODES[source]()
    if source.startswith("cyclic:"):
        parts = source.split(":")
        if len(parts) != 4:
            raise SpecParseError("cyclic spec source must look like cyclic:<n>:<gamma re>:<gamma im>")
        try:
            n = int(parts[1])
            gamma = complex(float(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise SpecParseError(f"cannot parse cyclic spec source {source!r}: {exc}") from exc
        if omega_file is None:
            raise SpecParseError("cyclic:<n>:... sources require an omega table file (--omega-file)")
        try:
            with open(omega_file, "r", encoding="utf-8") as fh:
                rows = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecParseError(f"invalid JSON in omega file: {exc.msg}") from exc
        omega = _parse_complex_matrix(rows, (n, n), "omega_table")
        return cyclic_spec(n, gamma, omega, label=f"cyclic{n}")
    return load_spec(source)


def verify_identities(spec: CodeSpec, trials: int = 200, seed: int = 0) -> list:
    """Self-check suite used by the CLI `verify` subcommand.

    Returns a list of (check_name, passed, detail) triples.
    """
    from . import channel  # local import to avoid a cycle

    rng = np.random.default_rng([seed, 0xC0DE])
    g = generator_matrix(spec)
    n = spec.n

    def random_block():
        z = rng.standard_normal((n, n, 2))
        return z[..., 0] + 1j * z[..., 1]

    results = []

    worst = 0.0
    for _ in range(trials):
        s = random_block()
        lhs = vectorize(encode(spec, s))
        rhs = g @ stack_symbols(s)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    results.append(("encode/generator identity", worst <= 1e-10, f"max |vec(X) - G s| = {worst:.3e}"))

    worst = 0.0
    for _ in range(trials):
        h = channel.sample_channel(n, rng)
        s = random_block()
        eqs = channel.equivalent_channels(spec, h)
        lhs = sum(eqs[i] @ s[i] for i in range(n))
        rhs = vectorize(h @ encode(spec, s))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    results.append(("equivalent-channel identity", worst <= 1e-10, f"max residual = {worst:.3e}"))

    det_g = abs(np.linalg.det(g))
    results.append(("invertible generator", det_g > 1e-9, f"|det G| = {det_g:.6e}"))

    if spec.n == 2 and spec.unitary_gamma:
        worst = 0.0
        for _ in range(trials):
            h = channel.sample_channel(2, rng)
            a, a_omega, b = covariance_closed_form_2x2(spec, h)
            eqs = channel.equivalent_channels(spec, h)
            nm = (spec.omega_table[0, 1] / spec.omega_table[0, 0]).real * (
                spec.omega_table[1, 1] / spec.omega_table[1, 0]
            ).real
            g1 = np.array([[a, b], [np.conj(b), a]])
            g2 = np.array([[a_omega, nm * b], [np.conj(nm * b), a_omega]])
            worst = max(
                worst,
                float(np.linalg.norm(hermitian_gram(eqs[0]) - g1)),
                float(np.linalg.norm(hermitian_gram(eqs[1]) - g2)),
            )
        results.append(("2x2 covariance closed forms", worst <= 1e-9, f"max |Gram - closed form| = {worst:.3e}"))

    if spec.n == 4:
        expected = cyclic_gamma_blocks(4, spec.gamma)
        same = all(np.array_equal(a, b) for a, b in zip(spec.gamma_blocks, expected))
        results.append(("degree-4 block pattern", same, "blocks match the cyclic wrap pattern"))

    return results
