"""Split adelic vector bundles over a finite adelic curve.

"Split" means the norms at all places are diagonal in one shared basis.  The
per-vector degrees ``d_i = -sum_omega nu(omega) c_{i,omega}`` then determine
the degree, the slopes, the Harder-Narasimhan R-filtration and its casting
to the trivially valued field.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .curve import ARCH, AdelicCurve, Place, log_abs, standard_rational_curve, trivial_curve
from .logscalar import LogScalar, lmax, lmin, lsum
from .norms import (
    HERMITIAN,
    ULTRAMETRIC,
    DiagonalNorm,
    dual_norm,
    monomials,
    symmetric_power_norm,
    tensor_norm,
    direct_sum_norm,
    vector_log_norm,
)

__all__ = [
    "SplitAdelicBundle",
    "RFiltration",
    "line_degrees",
    "arakelov_degree",
    "slope",
    "hn_filtration",
    "min_slope",
    "max_slope",
    "positive_degree",
    "vector_degree",
    "lambda_max",
    "dual_bundle",
    "tensor_bundle",
    "direct_sum_bundle",
    "symmetric_power_bundle",
    "cast_to_trivial",
    "hn_bruteforce_oracle",
    "random_split_bundle",
    "arch_free_curve",
    "cast_bundle",
]


def _flavor_for(place: Place) -> str:
    return HERMITIAN if place.flavor == ARCH else ULTRAMETRIC


@dataclass(frozen=True)
class RFiltration:
    """Decreasing R-filtration given by its jumps ``(value, multiplicity)``.

    ``dim F^t`` counts the basis directions whose jump value is ``>= t``.
    """

    jumps: tuple[tuple[LogScalar, int], ...]

    def __post_init__(self):
        jumps = tuple((v if isinstance(v, LogScalar) else LogScalar(v), int(m)) for v, m in self.jumps)
        for (v, m), (w, _) in zip(jumps, jumps[1:]):
            if not v > w:
                raise ValueError("jump values must be strictly decreasing")
        if any(m <= 0 for _, m in jumps):
            raise ValueError("multiplicities must be positive")
        object.__setattr__(self, "jumps", jumps)

    @classmethod
    def from_values(cls, values: Sequence[LogScalar]) -> RFiltration:
        counts: dict[LogScalar, int] = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        ordered = sorted(counts, key=_SortKey, reverse=True)
        return cls(tuple((v, counts[v]) for v in ordered))

    @property
    def dim(self) -> int:
        return sum(m for _, m in self.jumps)

    @property
    def values(self) -> list[LogScalar]:
        """Jump values with multiplicity, largest first."""
        return [v for v, m in self.jumps for _ in range(m)]

    def dim_at(self, t) -> int:
        return sum(m for v, m in self.jumps if v >= t)

    def integral_positive(self) -> LogScalar:
        """``int_0^inf dim F^t dt`` integrated over the step structure."""
        total = LogScalar.zero()
        positive = [v for v, _ in self.jumps if v.sign() > 0]
        # dim F^t is constant on each interval between consecutive positive jumps
        breaks = sorted(positive, key=_SortKey)
        lower = LogScalar.zero()
        for b in breaks:
            total = total + (b - lower) * self.dim_at(b)
            lower = b
        return total

    def first_moment(self) -> LogScalar:
        """``int_R t d(dim F^t)``; the measure has mass ``-m`` at each jump."""
        return -lsum(v * m for v, m in self.jumps)

    def symmetric_power(self, delta: int) -> RFiltration:
        """Filtration on ``S^delta`` with values ``sum a_i tau_i``."""
        vals = self.values
        return RFiltration.from_values(
            [lsum(v * k for v, k in zip(vals, a) if k) for a in monomials(len(vals), delta)]
        )

    def to_json(self) -> list:
        return [{"value": v.to_json(), "float": float(v), "multiplicity": m} for v, m in self.jumps]


class _SortKey:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return self.v < other.v


@dataclass(frozen=True)
class SplitAdelicBundle:
    curve: AdelicCurve
    basis_labels: tuple[str, ...]
    norms: Mapping[str, DiagonalNorm]

    def __post_init__(self):
        object.__setattr__(self, "basis_labels", tuple(self.basis_labels))
        norms = dict(self.norms)
        for place in self.curve.places:
            if place.id not in norms:
                raise ValueError(f"no norm at place {place.id}")
            n = norms[place.id]
            if n.basis_labels != self.basis_labels:
                raise ValueError(f"norm at {place.id} uses a different basis")
            if n.flavor != _flavor_for(place):
                raise ValueError(f"place {place.id} needs a {_flavor_for(place)} norm")
        extra = set(norms) - {p.id for p in self.curve.places}
        if extra:
            raise ValueError(f"norms at unknown places: {sorted(extra)}")
        object.__setattr__(self, "norms", norms)

    @classmethod
    def unit(cls, curve: AdelicCurve, dim: int, labels=None) -> SplitAdelicBundle:
        labels = tuple(labels) if labels is not None else tuple(f"e{i}" for i in range(dim))
        return cls(curve, labels, {p.id: DiagonalNorm.unit(_flavor_for(p), dim, labels) for p in curve})

    @classmethod
    def from_weights(cls, curve: AdelicCurve, weights: Mapping[str, Sequence], labels=None) -> SplitAdelicBundle:
        """Build from ``{place_id: [c_1, ..., c_r]}``; missing places get unit norms."""
        dim = len(next(iter(weights.values()))) if weights else 0
        labels = tuple(labels) if labels is not None else tuple(f"e{i}" for i in range(dim))
        norms = {}
        for p in curve:
            ws = weights.get(p.id, [LogScalar.zero()] * len(labels))
            norms[p.id] = DiagonalNorm(_flavor_for(p), labels, tuple(ws))
        return cls(curve, labels, norms)

    @property
    def dim(self) -> int:
        return len(self.basis_labels)

    def to_json(self) -> dict:
        return {
            "curve": self.curve.to_json(),
            "labels": list(self.basis_labels),
            "norms": {pid: [w.to_json() for w in n.log_weights] for pid, n in self.norms.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> SplitAdelicBundle:
        try:
            curve = AdelicCurve.from_json(data["curve"])
            weights = {pid: [LogScalar.from_json(w) for w in ws] for pid, ws in data["norms"].items()}
            return cls.from_weights(curve, weights, data.get("labels"))
        except (KeyError, TypeError, StopIteration) as exc:
            raise ValueError(f"malformed bundle JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> SplitAdelicBundle:
        return cls.from_json(json.loads(Path(path).read_text()))


def line_degrees(b: SplitAdelicBundle) -> list[LogScalar]:
    return [
        -lsum(b.norms[p.id].log_weights[i] * p.mass for p in b.curve.places)
        for i in range(b.dim)
    ]


def arakelov_degree(b: SplitAdelicBundle) -> LogScalar:
    return lsum(line_degrees(b))


def slope(b: SplitAdelicBundle) -> LogScalar:
    if b.dim == 0:
        raise ValueError("slope of the zero bundle")
    return arakelov_degree(b) / b.dim


def hn_filtration(b: SplitAdelicBundle) -> RFiltration:
    if b.dim == 0:
        raise ValueError("HN filtration of the zero bundle")
    return RFiltration.from_values(line_degrees(b))


def max_slope(b: SplitAdelicBundle) -> LogScalar:
    if b.dim == 0:
        raise ValueError("maximal slope of the zero bundle")
    return lmax(line_degrees(b))


def min_slope(b: SplitAdelicBundle) -> LogScalar:
    if b.dim == 0:
        raise ValueError("minimal slope of the zero bundle")
    return lmin(line_degrees(b))


def positive_degree(b: SplitAdelicBundle) -> LogScalar:
    return lsum(d for d in line_degrees(b) if d.sign() > 0)


def vector_degree(b: SplitAdelicBundle, coords: Sequence) -> float:
    """``-sum_omega nu(omega) ln||s||_omega`` for the vector with the given coordinates."""
    total = 0.0
    for p in b.curve.places:
        total -= float(p.mass) * float(vector_log_norm(b.norms[p.id], p, coords))
    return total


def lambda_max(b: SplitAdelicBundle) -> LogScalar:
    """First minimum; attained on a basis vector for split bundles."""
    return max_slope(b)


def _placewise(b1: SplitAdelicBundle, b2: SplitAdelicBundle, op, labels) -> SplitAdelicBundle:
    if b1.curve != b2.curve:
        raise ValueError("bundles live on different curves")
    norms = {p.id: op(b1.norms[p.id], b2.norms[p.id]) for p in b1.curve}
    return SplitAdelicBundle(b1.curve, labels or next(iter(norms.values())).basis_labels, norms)


def dual_bundle(b: SplitAdelicBundle) -> SplitAdelicBundle:
    return SplitAdelicBundle(b.curve, b.basis_labels, {k: dual_norm(n) for k, n in b.norms.items()})


def tensor_bundle(b1: SplitAdelicBundle, b2: SplitAdelicBundle) -> SplitAdelicBundle:
    return _placewise(b1, b2, tensor_norm, None)


def direct_sum_bundle(b1: SplitAdelicBundle, b2: SplitAdelicBundle) -> SplitAdelicBundle:
    if set(b1.basis_labels) & set(b2.basis_labels):
        b2 = SplitAdelicBundle(
            b2.curve,
            tuple(f"{l}'" for l in b2.basis_labels),
            {
                k: DiagonalNorm(n.flavor, tuple(f"{l}'" for l in n.basis_labels), n.log_weights)
                for k, n in b2.norms.items()
            },
        )
    return _placewise(b1, b2, direct_sum_norm, None)


def symmetric_power_bundle(b: SplitAdelicBundle, delta: int) -> SplitAdelicBundle:
    norms = {k: symmetric_power_norm(n, delta) for k, n in b.norms.items()}
    labels = tuple(",".join(map(str, a)) for a in monomials(b.dim, delta))
    return SplitAdelicBundle(b.curve, labels, norms)


def cast_to_trivial(b: SplitAdelicBundle) -> DiagonalNorm:
    """Ultrametric norm over the trivially valued field encoding the HN filtration.

    ``||s||_0 = exp(-sup{t : s in F^t})``, so ``e_i`` gets weight ``-d_i``.
    """
    if b.dim == 0:
        raise ValueError("cannot cast the zero bundle")
    return DiagonalNorm(ULTRAMETRIC, b.basis_labels, tuple(-d for d in line_degrees(b)))


def cast_bundle(b: SplitAdelicBundle) -> SplitAdelicBundle:
    """The cast norm as a bundle over a single trivial place of mass 1."""
    curve = trivial_curve()
    return SplitAdelicBundle(curve, b.basis_labels, {curve.places[0].id: cast_to_trivial(b)})


def _subspace_degree(b: SplitAdelicBundle, vectors: Sequence[Sequence[int]]) -> float:
    """Degree of the span of one or two integer vectors with restricted norms."""
    if len(vectors) == 1:
        return vector_degree(b, vectors[0])
    u, v = vectors
    total = 0.0
    pairs = list(itertools.combinations(range(b.dim), 2))
    pluecker = [(i, j, u[i] * v[j] - u[j] * v[i]) for i, j in pairs]
    for p in b.curve.places:
        c = b.norms[p.id].log_weights
        entries = [(i, j, x) for i, j, x in pluecker if x]
        if p.flavor == ARCH:
            # Cauchy-Binet: Gram determinant of the restricted inner product
            logs = [math.log(abs(x)) + float(c[i]) + float(c[j]) for i, j, x in entries]
            top = max(logs)
            lnorm = top + 0.5 * math.log(math.fsum(math.exp(2 * (l - top)) for l in logs))
        else:
            lnorm = float(lmax(log_abs(x, p) + c[i] + c[j] for i, j, x in entries))
        total -= float(p.mass) * lnorm
    return total


def hn_bruteforce_oracle(b: SplitAdelicBundle, coord_bound: int) -> float:
    """Largest slope over subspaces spanned by one or two integer vectors.

    Coordinates range over ``[-coord_bound, coord_bound]``; only ``dim <= 3``.
    """
    if b.dim == 0 or b.dim > 3:
        raise ValueError("oracle supports 1 <= dim <= 3")
    rng = range(-coord_bound, coord_bound + 1)
    vecs = []
    for v in itertools.product(rng, repeat=b.dim):
        if any(v):
            first = next(x for x in v if x)
            if first > 0 and math.gcd(*v) == 1:
                vecs.append(v)
    best = max(_subspace_degree(b, [v]) for v in vecs)
    if b.dim >= 2:
        for u, v in itertools.combinations(vecs, 2):
            if any(u[i] * v[j] - u[j] * v[i] for i, j in itertools.combinations(range(b.dim), 2)):
                best = max(best, _subspace_degree(b, [u, v]) / 2)
    return best


_RANDOM_PRIMES = (2, 3, 5, 7)


def _random_weight(rng: random.Random) -> LogScalar:
    p = rng.choice(_RANDOM_PRIMES)
    q = Fraction(rng.randint(-3, 3), rng.choice((1, 2)))
    return LogScalar.log_prime(p, q)


def random_split_bundle(rng: random.Random, curve: AdelicCurve | None = None, dim: int | None = None) -> SplitAdelicBundle:
    """Seeded fuzzing bundle: weights ``q ln p`` with ``q in {-3..3}/{1,2}``, ``p <= 7``, ``dim <= 5``."""
    curve = curve if curve is not None else standard_rational_curve(7)
    dim = dim if dim is not None else rng.randint(1, 5)
    weights = {}
    for p in curve:
        ws = []
        for _ in range(dim):
            w = _random_weight(rng)
            if rng.random() < 0.3:
                w = w + _random_weight(rng)
            ws.append(w)
        weights[p.id] = ws
    return SplitAdelicBundle.from_weights(curve, weights)


def arch_free_curve() -> AdelicCurve:
    """Two trivial places with masses 1 and 1/2 (the product formula holds trivially)."""
    return trivial_curve((1, Fraction(1, 2)))
