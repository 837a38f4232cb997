"""Plug-in discrete estimators: entropy, MI, conditional MI and KL divergence (bits).

Counts are integers indexed ``(x, y, z)`` = (Alice, Bob, Eve) bits, so tables
from independent workers merge exactly by addition.
"""

from dataclasses import dataclass

import numpy as np

AXES = {"x": 0, "y": 1, "z": 2}


class AbsoluteContinuityError(ValueError):
    """``p`` puts mass on a bin where ``q`` has none."""


@dataclass(frozen=True)
class JointCounts:
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table)
        if t.shape != (2, 2, 2):
            raise ValueError(f"count table must be 2x2x2, got {t.shape}")
        if np.any(t < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "table", t.astype(np.int64))

    @classmethod
    def zeros(cls):
        return cls(np.zeros((2, 2, 2), dtype=np.int64))

    @property
    def total(self):
        return int(self.table.sum())

    def __add__(self, other):
        return JointCounts(self.table + other.table)

    def probabilities(self):
        if self.total <= 0:
            raise ValueError("estimation needs a non-empty count table")
        return self.table / self.total


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if edges.ndim != 1 or masses.shape != (edges.size - 1,):
            raise ValueError("need len(edges) == len(masses) + 1")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if np.any(masses < 0) or abs(masses.sum() - 1.0) > 1e-9:
            raise ValueError("masses must be non-negative and sum to 1")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses)

    @property
    def centers(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def counts_from_bits(x, y, z):
    """Count table from three equal-length arrays of 0/1 symbols."""
    x, y, z = (np.asarray(a, dtype=np.int64) for a in (x, y, z))
    if np.any((x > 1) | (y > 1) | (z > 1) | (x < 0) | (y < 0) | (z < 0)):
        raise ValueError("symbols must be 0 or 1 (no drops)")
    flat = np.bincount(4 * x + 2 * y + z, minlength=8)
    return JointCounts(flat.reshape(2, 2, 2))


def accumulate(records):
    """Count ``(alice, bob, eve)`` triples from kept trial records."""
    records = list(records)
    if not records:
        raise ValueError("no records to accumulate")
    bits = np.array([(int(r.alice), int(r.bob), int(r.eve)) for r in records])
    if np.any(bits > 1):
        raise ValueError("records must not contain dropped symbols")
    return counts_from_bits(bits[:, 0], bits[:, 1], bits[:, 2])


def _plogp_sum(p):
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def entropy_of(counts, margin):
    """Entropy in bits of the marginal over ``margin`` (e.g. ``"xz"`` or ``{"x", "z"}``)."""
    keep = {AXES[v] for v in margin}
    if not keep:
        raise ValueError("margin must name at least one variable")
    drop = tuple(sorted(set(AXES.values()) - keep))
    return _plogp_sum(counts.probabilities().sum(axis=drop).ravel())


def conditional_mi_entropy(counts):
    """``H(X,Z) + H(Y,Z) - H(Z) - H(X,Y,Z)``."""
    return (
        entropy_of(counts, "xz") + entropy_of(counts, "yz") - entropy_of(counts, "z") - entropy_of(counts, "xyz")
    )


def conditional_mi_kl(counts):
    """``D( p(x,y,z) || p(x,z) p(y,z) / p(z) )``."""
    p = counts.probabilities()
    pxz = p.sum(axis=1, keepdims=True)
    pyz = p.sum(axis=0, keepdims=True)
    pz = p.sum(axis=(0, 1), keepdims=True)
    nz = p > 0
    # p(y,z)/p(z) first: it is exactly 1 when Z determines Y, making the result exactly 0
    ratio = np.divide(pyz, pz, out=np.zeros_like(pyz), where=pz > 0)
    ref = np.broadcast_to(pxz * ratio, p.shape)[nz]
    return float((p[nz] * np.log2(p[nz] / ref)).sum())


def conditional_mi(counts):
    """``I(X;Y|Z)`` in bits via the divergence form, cross-checked against the entropy identity."""
    via_entropy = conditional_mi_entropy(counts)
    via_kl = conditional_mi_kl(counts)
    if abs(via_entropy - via_kl) > 1e-10:
        raise ArithmeticError(f"CMI forms disagree: {via_entropy!r} vs {via_kl!r}")
    return max(via_kl, 0.0)


def mutual_information(counts):
    """``I(X;Y)`` in bits from the (x, y) marginal."""
    return max(entropy_of(counts, "x") + entropy_of(counts, "y") - entropy_of(counts, "xy"), 0.0)


def kl_divergence(p, q):
    """``D(p || q)`` in bits between histograms on identical bins."""
    if p.edges.shape != q.edges.shape or not np.array_equal(p.edges, q.edges):
        raise ValueError("histograms must share bin edges")
    support = p.masses > 0
    if np.any(q.masses[support] <= 0):
        raise AbsoluteContinuityError("p has mass where q has none")
    pm, qm = p.masses[support], q.masses[support]
    return max(float((pm * np.log2(pm / qm)).sum()), 0.0)


def empirical_pdf(samples, bin_count, value_range, add_half=False):
    """Normalised histogram; samples outside ``value_range`` land in the edge bins.

    ``add_half`` adds 0.5 to every bin count before normalising, so the
    result can serve as the reference ``q`` of a divergence.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("no samples")
    lo, hi = value_range
    if bin_count < 2 or not lo < hi:
        raise ValueError("need bin_count >= 2 and lo < hi")
    edges = np.linspace(lo, hi, bin_count + 1)
    counts = np.histogram(np.clip(x, lo, hi), bins=edges)[0].astype(float)
    if add_half:
        counts += 0.5
    return Histogram(edges, counts / counts.sum())


def analytic_pdf(cdf, bin_count, value_range):
    """Bin masses of a distribution on ``[0, inf)`` given its cdf, tails folded into the edge bins."""
    lo, hi = value_range
    edges = np.linspace(lo, hi, bin_count + 1)
    c = np.asarray(cdf(edges), dtype=float)
    c[0] = 0.0
    c[-1] = 1.0
    return Histogram(edges, np.diff(c))
