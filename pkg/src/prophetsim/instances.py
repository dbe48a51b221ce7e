"""Problem instances: buyers with finite-support valuation distributions plus
a feasibility structure, with JSON (de)serialization and random generators.

File schema (JSON)::

    {
      "kind": "single_item" | "matroid" | "matching" | "xos",
      "name": "optional label",
      "items": m,                      # matching / xos only
      "matroid": {"type": "uniform", "rank": k}
               | {"type": "partition", "block_of": [...], "caps": [...]}
               | {"type": "graphic", "vertices": V, "edges": [[u,v], ...]},
      "buyers": [
        {"support": [{"prob": p, "value": scalar
                                        | [per-item values]
                                        | {"clauses": [[...], ...]}}, ...]},
        ...
      ]
    }
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .common import ValidationError
from .distributions import PROB_TOL, DiscreteDistribution
from .matroids import GraphicMatroid, Matroid, PartitionMatroid, UniformMatroid
from .valuations import BuyerValuationDistribution, XosValuation

KINDS = ("single_item", "matroid", "matching", "xos")


class VectorDistribution:
    """Finite support over per-item value vectors (unit-demand buyers)."""

    __slots__ = ("probs", "support", "m", "_cum")

    def __init__(self, support: Sequence[tuple[float, Sequence[float]]]):
        if not support:
            raise ValidationError("vector support must be nonempty")
        self.probs = [float(p) for p, _ in support]
        self.support = [tuple(float(x) for x in vec) for _, vec in support]
        self.m = len(self.support[0])
        for p in self.probs:
            if not (0 < p <= 1):
                raise ValidationError(f"support probability {p} outside (0, 1]")
        for vec in self.support:
            if len(vec) != self.m:
                raise ValidationError("ragged per-item value arrays in support")
            for x in vec:
                if not math.isfinite(x) or x < 0:
                    raise ValidationError(f"value {x} must be finite and >= 0")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > PROB_TOL:
            raise ValidationError(f"support probabilities sum to {total}, not 1")
        cum = []
        acc = 0.0
        for p in self.probs:
            acc += p
            cum.append(acc)
        cum[-1] = 1.0
        self._cum = cum

    def __len__(self):
        return len(self.support)

    def __eq__(self, other):
        return (
            isinstance(other, VectorDistribution)
            and self.probs == other.probs
            and self.support == other.support
        )

    def index_from_uniform(self, u: float) -> int:
        from bisect import bisect_right

        return bisect_right(self._cum, u)


@dataclass
class Instance:
    kind: str
    buyers: list  # DiscreteDistribution | VectorDistribution | BuyerValuationDistribution
    items: Optional[int] = None
    matroid: Optional[Matroid] = None
    name: str = "unnamed"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown instance kind {self.kind!r}")
        if not self.buyers:
            raise ValidationError("instance needs at least one buyer")
        if self.kind == "single_item":
            self._expect_buyers(DiscreteDistribution)
        elif self.kind == "matroid":
            self._expect_buyers(DiscreteDistribution)
            if self.matroid is None:
                raise ValidationError("matroid instance needs a matroid")
            if self.matroid.ground_size != len(self.buyers):
                raise ValidationError("matroid ground size must equal buyer count")
        elif self.kind == "matching":
            self._expect_buyers(VectorDistribution)
            self._check_items()
        else:
            self._expect_buyers(BuyerValuationDistribution)
            self._check_items()

    def _expect_buyers(self, cls):
        for i, b in enumerate(self.buyers):
            if not isinstance(b, cls):
                raise ValidationError(
                    f"buyer {i}: expected {cls.__name__} for kind {self.kind!r}"
                )

    def _check_items(self):
        ms = {b.m for b in self.buyers}
        if len(ms) != 1:
            raise ValidationError("buyers disagree on item count")
        m = ms.pop()
        if self.items is None:
            self.items = m
        elif self.items != m:
            raise ValidationError("declared item count does not match buyer supports")

    @property
    def n(self) -> int:
        return len(self.buyers)

    def support_sizes(self) -> list[int]:
        return [len(b) for b in self.buyers]

    def product_support_size(self) -> int:
        size = 1
        for b in self.buyers:
            size *= len(b)
        return size

    def iter_profiles(self):
        """Yield (support index tuple, joint probability) over all profiles."""
        probs = [b.probs for b in self.buyers]
        for combo in itertools.product(*(range(len(b)) for b in self.buyers)):
            p = 1.0
            for i, k in enumerate(combo):
                p *= probs[i][k]
            yield combo, p

    def profile_from_uniforms(self, us: Sequence[float]) -> tuple[int, ...]:
        return tuple(b.index_from_uniform(u) for b, u in zip(self.buyers, us))

    # Realized values per kind -------------------------------------------------

    def scalar_values(self, profile: Sequence[int]) -> list[float]:
        return [b.values[k] for b, k in zip(self.buyers, profile)]

    def value_vectors(self, profile: Sequence[int]) -> list[tuple[float, ...]]:
        return [b.support[k] for b, k in zip(self.buyers, profile)]

    def xos_valuations(self, profile: Sequence[int]) -> list[XosValuation]:
        return [b.support[k] for b, k in zip(self.buyers, profile)]


# JSON (de)serialization -------------------------------------------------------


def _buyer_to_json(kind: str, buyer) -> dict:
    support = []
    if kind in ("single_item", "matroid"):
        for v, p in zip(buyer.values, buyer.probs):
            support.append({"prob": p, "value": v})
    elif kind == "matching":
        for p, vec in zip(buyer.probs, buyer.support):
            support.append({"prob": p, "value": list(vec)})
    else:
        for p, v in zip(buyer.probs, buyer.support):
            support.append({"prob": p, "value": {"clauses": [list(c) for c in v.clauses]}})
    return {"support": support}


def _matroid_to_json(matroid: Matroid) -> dict:
    if isinstance(matroid, UniformMatroid):
        return {"type": "uniform", "rank": matroid.k}
    if isinstance(matroid, PartitionMatroid):
        return {"type": "partition", "block_of": matroid.block_of, "caps": matroid.caps}
    if isinstance(matroid, GraphicMatroid):
        return {
            "type": "graphic",
            "vertices": matroid.num_vertices,
            "edges": [list(e) for e in matroid.edges],
        }
    raise ValidationError(f"unserializable matroid {matroid!r}")


def instance_to_json(inst: Instance) -> dict:
    doc = {"kind": inst.kind, "name": inst.name}
    if inst.kind in ("matching", "xos"):
        doc["items"] = inst.items
    if inst.kind == "matroid":
        doc["matroid"] = _matroid_to_json(inst.matroid)
    doc["buyers"] = [_buyer_to_json(inst.kind, b) for b in inst.buyers]
    return doc


def save_instance(inst: Instance, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_json(inst), fh, indent=2)
        fh.write("\n")


def _parse_matroid(doc: dict, n: int) -> Matroid:
    kind = doc.get("type")
    if kind == "uniform":
        return UniformMatroid(n, int(doc["rank"]))
    if kind == "partition":
        return PartitionMatroid(doc["block_of"], doc["caps"])
    if kind == "graphic":
        return GraphicMatroid(int(doc["vertices"]), [tuple(e) for e in doc["edges"]])
    raise ValidationError(f"unknown matroid type {kind!r}")


def _parse_buyer(kind: str, i: int, doc: dict):
    try:
        entries = doc["support"]
    except KeyError:
        raise ValidationError(f"buyer {i}: missing 'support'") from None
    pairs = []
    for entry in entries:
        try:
            p, val = entry["prob"], entry["value"]
        except (KeyError, TypeError):
            raise ValidationError(f"buyer {i}: support entry needs prob and value") from None
        pairs.append((float(p), val))
    try:
        if kind in ("single_item", "matroid"):
            return DiscreteDistribution([(float(v), p) for p, v in pairs])
        if kind == "matching":
            return VectorDistribution(pairs)
        return BuyerValuationDistribution(
            [(p, XosValuation(v["clauses"])) for p, v in pairs]
        )
    except (ValidationError, TypeError, KeyError) as exc:
        raise ValidationError(f"buyer {i}: {exc}") from None


def instance_from_json(doc: dict) -> Instance:
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ValidationError(f"unknown or missing instance kind {kind!r}")
    buyers_doc = doc.get("buyers")
    if not buyers_doc:
        raise ValidationError("instance needs a nonempty 'buyers' list")
    buyers = [_parse_buyer(kind, i, b) for i, b in enumerate(buyers_doc)]
    matroid = None
    if kind == "matroid":
        matroid = _parse_matroid(doc.get("matroid") or {}, len(buyers))
    return Instance(
        kind=kind,
        buyers=buyers,
        items=doc.get("items"),
        matroid=matroid,
        name=doc.get("name", "unnamed"),
    )


def load_instance(path: str) -> Instance:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")
    return instance_from_json(doc)


# Random generators for the test families --------------------------------------


def _random_dist(rng: np.random.Generator, support: int, vmax: float) -> DiscreteDistribution:
    size = int(rng.integers(1, support + 1))
    values = sorted(set(round(float(x), 6) for x in rng.uniform(0, vmax, size)))
    probs = rng.dirichlet(np.ones(len(values)))
    return DiscreteDistribution(list(zip(values, (float(p) for p in probs))))


def gen_single_item(rng, n: int, support: int = 5, vmax: float = 10.0, name="gen") -> Instance:
    return Instance(
        "single_item", [_random_dist(rng, support, vmax) for _ in range(n)], name=name
    )


def gen_matching(rng, n: int, m: int, support: int = 3, vmax: float = 10.0, name="gen") -> Instance:
    buyers = []
    for _ in range(n):
        size = int(rng.integers(1, support + 1))
        probs = rng.dirichlet(np.ones(size))
        vecs = [
            tuple(round(float(x), 6) for x in rng.uniform(0, vmax, m)) for _ in range(size)
        ]
        buyers.append(VectorDistribution(list(zip(map(float, probs), vecs))))
    return Instance("matching", buyers, items=m, name=name)


def gen_xos(
    rng, n: int, m: int, support: int = 3, clauses: int = 2, vmax: float = 10.0, name="gen"
) -> Instance:
    buyers = []
    for _ in range(n):
        size = int(rng.integers(1, support + 1))
        probs = rng.dirichlet(np.ones(size))
        vals = []
        for _ in range(size):
            ncl = int(rng.integers(1, clauses + 1))
            vals.append(
                XosValuation(
                    [[round(float(x), 6) for x in rng.uniform(0, vmax, m)] for _ in range(ncl)]
                )
            )
        buyers.append(BuyerValuationDistribution(list(zip(map(float, probs), vals))))
    return Instance("xos", buyers, items=m, name=name)


def gen_matroid(
    rng, matroid: Matroid, support: int = 3, vmax: float = 10.0, name="gen"
) -> Instance:
    dists = [_random_dist(rng, support, vmax) for _ in range(matroid.ground_size)]
    return Instance("matroid", dists, matroid=matroid, name=name)
