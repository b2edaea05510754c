"""Base-2 digital sequences and exhaustive net verification.

Generates the first ``2^m`` points of a base-2 digital sequence (van der
Corput in dimension 1, direction-number construction above it) and checks
the defining property of a quality-``t`` net directly: every base-``b``
elementary interval of volume ``b^(t-m)`` must contain exactly ``b^t`` of
the ``b^m`` points.

Points are kept as unsigned 64-bit integers holding the leading base-2
digits of each coordinate, so interval membership is exact bit arithmetic
rather than float comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, ContractError

# Digits produced per coordinate; 53 keeps every generated coordinate an
# exactly representable binary64 value.
PRECISION_DEPTH = 53

_DATA_FILE = "joe_kuo_64.txt"


class DirectionTable:
    """Per-dimension generator data parsed from a direction-number file.

    File format (whitespace separated, ``#`` starts a comment line), one
    line per dimension ``d >= 2``::

        d  s  a  m_1 m_2 ... m_s

    where ``s`` is the degree of a primitive polynomial over GF(2), ``a``
    packs its middle coefficients, and the ``m_i`` are odd initial
    direction integers with ``m_i < 2^i``.  Dimension 1 is the van der
    Corput identity and carries no line.
    """

    def __init__(self, rows: dict[int, tuple[int, int, list[int]]]):
        self._rows = rows
        self.max_dim = max(rows) if rows else 1
        self._cache: dict[tuple[int, int], np.ndarray] = {}

    @classmethod
    def from_text(cls, text: str) -> "DirectionTable":
        rows: dict[int, tuple[int, int, list[int]]] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 4:
                raise ValueError(f"direction-number line {lineno}: too few fields")
            d, s, a = int(parts[0]), int(parts[1]), int(parts[2])
            ms = [int(x) for x in parts[3:]]
            if len(ms) != s:
                raise ValueError(
                    f"direction-number line {lineno}: expected {s} initial "
                    f"integers, got {len(ms)}"
                )
            for i, m in enumerate(ms, start=1):
                if m % 2 == 0 or not 0 < m < 2**i:
                    raise ValueError(
                        f"direction-number line {lineno}: m_{i}={m} is not an "
                        f"odd integer below 2^{i}"
                    )
            rows[d] = (s, a, ms)
        return cls(rows)

    def direction_integers(self, d: int, depth: int = PRECISION_DEPTH) -> np.ndarray:
        """Direction integers ``V[j, k]`` scaled to ``depth`` digits.

        ``V[j, k]`` is the generator column for digit ``k+1`` of dimension
        ``j+1``; a point with index ``i`` is the XOR of the columns picked
        by the set bits of ``i``.
        """
        if d < 1:
            raise ContractError("dimension must be >= 1")
        if d > self.max_dim:
            raise CapacityError(
                f"dimension {d} exceeds the bundled direction-number table "
                f"(max {self.max_dim})"
            )
        key = (d, depth)
        if key not in self._cache:
            v = np.zeros((d, depth), dtype=np.uint64)
            # Dimension 1: identity generator matrix (van der Corput).
            v[0, :] = [1 << (depth - k) for k in range(1, depth + 1)]
            for j in range(2, d + 1):
                s, a, m_init = self._rows[j]
                m = list(m_init)
                for k in range(s, depth):
                    # m_k = 2 a_1 m_{k-1} ^ ... ^ 2^{s-1} a_{s-1} m_{k-s+1}
                    #       ^ 2^s m_{k-s} ^ m_{k-s}
                    new = m[k - s] ^ (m[k - s] << s)
                    for i in range(1, s):
                        if (a >> (s - 1 - i)) & 1:
                            new ^= m[k - i] << i
                    m.append(new)
                v[j - 1, :] = [m[k] << (depth - 1 - k) for k in range(depth)]
            self._cache[key] = v
        return self._cache[key]


_default_table: DirectionTable | None = None


def load_direction_numbers() -> DirectionTable:
    """Parse the bundled direction-number file (cached)."""
    global _default_table
    if _default_table is None:
        text = resources.files("rqmc.data").joinpath(_DATA_FILE).read_text()
        _default_table = DirectionTable.from_text(text)
    return _default_table


@dataclass(frozen=True)
class NetSpec:
    """Parameters of a generated point set: quality t, 2^m points, d dims."""

    t: int
    m: int
    d: int
    b: int = 2
    table: DirectionTable | None = None

    def __post_init__(self):
        if self.b < 2:
            raise ContractError("base must be >= 2")
        if self.t < 0 or self.m < 0 or self.t > self.m:
            raise ContractError("need 0 <= t <= m")
        if self.d < 1:
            raise ContractError("dimension must be >= 1")


@dataclass
class PointSet:
    """Points in [0,1)^d with exact digit representation.

    ``ints[i, j] / 2^depth`` is coordinate ``j`` of point ``i``; digits
    beyond ``depth`` are zero.
    """

    ints: np.ndarray  # (n, d) uint64
    depth: int

    def __post_init__(self):
        self.ints = np.ascontiguousarray(self.ints, dtype=np.uint64)
        if self.ints.ndim != 2:
            raise ContractError("point integers must be a 2-d array")
        if not 1 <= self.depth <= 64:
            raise ContractError("depth must be in 1..64")
        if self.depth < 64 and self.ints.size:
            if int(self.ints.max()) >> self.depth:
                raise ContractError("digit integer exceeds the declared depth")

    @property
    def n(self) -> int:
        return self.ints.shape[0]

    @property
    def d(self) -> int:
        return self.ints.shape[1]

    @property
    def coords(self) -> np.ndarray:
        """Coordinates as float64, correctly rounded from the digit string."""
        return self.ints.astype(np.float64) * 2.0 ** -self.depth

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class ElementaryInterval:
    """Half-open box prod_i [c_i/b^k_i, (c_i+1)/b^k_i) in base b."""

    digit_counts: tuple[int, ...]
    cells: tuple[int, ...]
    b: int = 2

    def __post_init__(self):
        for k, c in zip(self.digit_counts, self.cells):
            if k < 0 or not 0 <= c < self.b**k:
                raise ContractError("cell index out of range for digit count")

    @property
    def volume(self) -> float:
        return float(self.b) ** -sum(self.digit_counts)

    @property
    def lower(self) -> np.ndarray:
        return np.array(
            [c / self.b**k for k, c in zip(self.digit_counts, self.cells)]
        )

    @property
    def upper(self) -> np.ndarray:
        return np.array(
            [(c + 1) / self.b**k for k, c in zip(self.digit_counts, self.cells)]
        )

    def contains(self, u: Sequence[float]) -> bool:
        return bool(np.all(self.lower <= u) and np.all(u < self.upper))


def radical_inverse(i: int, b: int) -> float:
    """Digit-reversed fraction of ``i`` in base ``b``.

    Exact integer digit reversal followed by one correctly rounded
    division, so indices below ``b^53`` stay distinct in dimension one.
    """
    if i < 0:
        raise ContractError("index must be >= 0")
    if b < 2:
        raise ContractError("base must be >= 2")
    rev, scale = 0, 1
    while i > 0:
        i, digit = divmod(i, b)
        rev = rev * b + digit
        scale *= b
    return rev / scale


def generate_points(
    indices: np.ndarray | Sequence[int],
    d: int,
    table: DirectionTable | None = None,
    depth: int = PRECISION_DEPTH,
) -> PointSet:
    """Points of the base-2 digital sequence at the given index positions."""
    table = table or load_direction_numbers()
    idx = np.asarray(indices, dtype=np.uint64)
    if idx.ndim != 1:
        raise ContractError("indices must be one-dimensional")
    v = table.direction_integers(d, depth)
    out = np.zeros((idx.size, d), dtype=np.uint64)
    if idx.size:
        nbits = int(idx.max()).bit_length()
        if nbits > depth:
            raise CapacityError(
                f"index {int(idx.max())} needs {nbits} digits, above the "
                f"{depth}-digit precision"
            )
        for bit in range(nbits):
            mask = (idx >> np.uint64(bit)) & np.uint64(1) == 1
            if mask.any():
                out[mask] ^= v[:, bit]
    return PointSet(out, depth)


def generate_net(spec: NetSpec) -> PointSet:
    """First ``2^m`` sequence points, in natural index order."""
    if spec.b != 2:
        raise ContractError("generation is implemented for base 2 only")
    if spec.m > PRECISION_DEPTH:
        raise CapacityError(f"m={spec.m} exceeds {PRECISION_DEPTH}-digit precision")
    table = spec.table or load_direction_numbers()
    return generate_points(np.arange(2**spec.m, dtype=np.uint64), spec.d, table)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All (k_1..k_parts) with sum == total, in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def locate_cell(
    point: Sequence[float], shape: Sequence[int], b: int = 2
) -> tuple[int, ...]:
    """Cell indices of the shape-(k_1..k_d) elementary interval holding ``point``."""
    cells = []
    for u, k in zip(point, shape):
        if not 0.0 <= u < 1.0:
            raise ContractError(f"coordinate {u!r} outside [0,1)")
        cells.append(min(int(math.floor(u * b**k)), b**k - 1))
    return tuple(cells)


def _cell_columns(points, shape: Sequence[int], b: int) -> list[np.ndarray]:
    """Per-dimension cell indices for every point, as integer arrays."""
    if isinstance(points, PointSet) and b == 2:
        cols = []
        for j, k in enumerate(shape):
            if k == 0:
                cols.append(np.zeros(points.n, dtype=np.int64))
            else:
                cols.append(
                    (points.ints[:, j] >> np.uint64(points.depth - k)).astype(np.int64)
                )
        return cols
    coords = points.coords if isinstance(points, PointSet) else np.asarray(points)
    return [
        np.minimum(np.floor(coords[:, j] * b**k).astype(np.int64), b**k - 1)
        for j, k in enumerate(shape)
    ]


@dataclass
class VerifyResult:
    passed: bool
    violation: ElementaryInterval | None
    expected_count: int
    observed_count: int | None
    shapes_checked: int

    def __bool__(self) -> bool:
        return self.passed


def verify_net(
    points,
    t: int,
    m: int,
    d: int | None = None,
    b: int = 2,
    work_budget: int = 10**8,
) -> VerifyResult:
    """Exhaustively test the quality-``t`` net property of ``b^m`` points.

    Enumerates every shape ``(k_1..k_d)`` with ``sum k_i = m - t`` and
    counts the points in each of its ``b^(m-t)`` cells; each must hold
    exactly ``b^t`` points.  On failure the first violating interval in
    lexicographic shape/cell order is reported.

    This is a test oracle, exponential in ``m - t``; ``work_budget`` caps
    the number of point-in-cell assignments.

    Parameters
    ----------
    points : PointSet or (n, d) float array
        Exactly ``b^m`` points in ``[0,1)^d``.
    t, m : int
        Net quality and size parameters, ``0 <= t <= m``.
    d : int, optional
        Dimension; inferred from ``points`` when omitted.
    """
    if isinstance(points, PointSet):
        n, pd = points.n, points.d
    else:
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        n, pd = points.shape
        if points.size and (points.min() < 0.0 or points.max() >= 1.0):
            raise ContractError("coordinates must lie in [0,1)")
    d = pd if d is None else d
    if d != pd:
        raise ContractError(f"points have dimension {pd}, expected {d}")
    if t < 0 or m < 0 or t > m:
        raise ContractError("need 0 <= t <= m")
    if n != b**m:
        raise ContractError(f"expected {b**m} points for m={m}, got {n}")

    q = m - t
    n_shapes = math.comb(q + d - 1, d - 1)
    if n_shapes * n > work_budget:
        raise CapacityError(
            f"exhaustive verification needs {n_shapes * n:.3g} point-cell "
            f"tests, above the budget of {work_budget:.3g}"
        )

    expected = b**t
    shapes_checked = 0
    for shape in _compositions(q, d):
        cols = _cell_columns(points, shape, b)
        flat = np.zeros(n, dtype=np.int64)
        for k, col in zip(shape, cols):
            flat = flat * b**k + col
        counts = np.bincount(flat, minlength=b**q)
        shapes_checked += 1
        if not np.all(counts == expected):
            bad = int(np.argmin(counts == expected))
            cells = []
            rem = bad
            for k in reversed(shape):
                rem, c = divmod(rem, b**k)
                cells.append(c)
            cells.reverse()
            return VerifyResult(
                passed=False,
                violation=ElementaryInterval(shape, tuple(cells), b),
                expected_count=expected,
                observed_count=int(counts[bad]),
                shapes_checked=shapes_checked,
            )
    return VerifyResult(
        passed=True,
        violation=None,
        expected_count=expected,
        observed_count=None,
        shapes_checked=shapes_checked,
    )


def certify_t(
    d: int,
    m_max: int,
    table: DirectionTable | None = None,
    work_budget: int = 10**8,
) -> int:
    """Smallest ``t`` for which the first ``2^m`` points pass verification
    for every ``m`` in ``t..m_max``.

    The generator's quality parameter is a property of its direction
    numbers; it is measured here rather than assumed.
    """
    table = table or load_direction_numbers()
    full = generate_net(NetSpec(t=0, m=m_max, d=d, table=table))
    for t in range(m_max + 1):
        ok = True
        for m in range(t, m_max + 1):
            prefix = PointSet(full.ints[: 2**m], full.depth)
            if not verify_net(prefix, t, m, d, work_budget=work_budget):
                ok = False
                break
        if ok:
            return t
    raise RuntimeError(f"no t <= {m_max} certified for dimension {d}")
