"""Fusion rings, paired instances, and the evaluation pairing.

The instance data for every analysis in this package is a pair of fusion
rings (the irreducible characters of an algebra and of its dual) together
with the complex matrix of evaluations between them.  This module defines
those types, parses and validates instance documents against the full axiom
list, and provides the arithmetic everything else is built from: fusion
products, the multiplicity form, and the evaluation pairing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import ValidationError, Violation

SIDE_H = "H"
SIDE_HSTAR = "H*"
SIDES = (SIDE_H, SIDE_HSTAR)

# Listing cap per invariant; beyond this only the count is reported.
_MAX_LISTED = 8


class FusionRing:
    """A based ring with nonnegative integer structure constants.

    Index 0 is the unit basis element, ``dual`` the duality involution and
    ``degrees[i]`` the augmentation of basis element ``i``.  Structure
    constants are kept as sparse ``(i, j, k, n)`` quadruples.  Rings whose
    tensor is a permutation (exactly one output per product, group-algebra
    style) get an ``(n, n)`` product table; all others a dense tensor, so
    products never rescan the quadruple list.
    """

    def __init__(self, labels, degrees, dual, entries, name="ring"):
        self.name = name
        self.labels = tuple(str(x) for x in labels)
        self.size = len(self.labels)
        self.degrees = np.asarray(degrees, dtype=np.int64)
        self.dual = np.asarray(dual, dtype=np.int64)
        self._check_structure()
        self.entries = self._normalize_entries(entries)
        self._table = None
        self._tensor = None
        self._tensor_f = None
        self._build_storage()

    # -- construction ------------------------------------------------------

    def _check_structure(self):
        n = self.size
        problems = []
        if n == 0:
            problems.append("empty basis")
        if len(set(self.labels)) != n:
            problems.append("duplicate labels")
        if self.degrees.shape != (n,) or np.any(self.degrees <= 0):
            problems.append("degrees must be positive integers, one per basis element")
        if self.dual.shape != (n,) or sorted(self.dual.tolist()) != list(range(n)):
            problems.append("dual is not a permutation of the index range")
        elif np.any(self.dual[self.dual] != np.arange(n)):
            problems.append("dual is not an involution")
        if problems:
            raise ValidationError(
                [Violation("structure", f"{self.name}: {p}", float("nan")) for p in problems]
            )

    def _normalize_entries(self, entries):
        n = self.size
        seen = {}
        problems = []
        for q, quad in enumerate(entries):
            if len(quad) != 4:
                problems.append(f"entry #{q} is not a quadruple")
                continue
            i, j, k, c = (int(v) for v in quad)
            if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
                problems.append(f"entry #{q} index out of range: {(i, j, k)}")
                continue
            if c < 0:
                problems.append(f"entry #{q} has negative coefficient {c}")
                continue
            if (i, j, k) in seen:
                problems.append(f"duplicate fusion entry for {(i, j, k)}")
                continue
            if c > 0:
                seen[(i, j, k)] = c
        if problems:
            raise ValidationError(
                [Violation("structure", f"{self.name}: {p}", float("nan")) for p in problems]
            )
        return tuple(sorted((i, j, k, c) for (i, j, k), c in seen.items()))

    def _build_storage(self):
        n = self.size
        by_pair = {}
        for i, j, k, c in self.entries:
            by_pair.setdefault((i, j), {})[k] = c
        is_perm = len(by_pair) == n * n and all(
            len(outs) == 1 and next(iter(outs.values())) == 1 for outs in by_pair.values()
        )
        if is_perm:
            table = np.empty((n, n), dtype=np.int64)
            for (i, j), outs in by_pair.items():
                table[i, j] = next(iter(outs))
            self._table = table
        else:
            if n > 128:
                raise ValidationError(
                    [Violation("structure", f"{self.name}: non-permutation ring of size {n} "
                               "exceeds the dense-tensor limit (128)", float("nan"))]
                )
            tensor = np.zeros((n, n, n), dtype=np.int64)
            for i, j, k, c in self.entries:
                tensor[i, j, k] = c
            self._tensor = tensor

    # -- queries -----------------------------------------------------------

    @property
    def is_permutation(self) -> bool:
        return self._table is not None

    @property
    def table(self) -> np.ndarray:
        if self._table is None:
            raise AttributeError("ring is not a permutation ring")
        return self._table

    def tensor(self) -> np.ndarray:
        """Dense (n, n, n) structure-constant tensor (materialized lazily)."""
        if self._tensor is None:
            n = self.size
            tensor = np.zeros((n, n, n), dtype=np.int64)
            rows = np.repeat(np.arange(n), n)
            cols = np.tile(np.arange(n), n)
            tensor[rows, cols, self._table.ravel()] = 1
            self._tensor = tensor
        return self._tensor

    def _tensor_float(self) -> np.ndarray:
        if self._tensor_f is None:
            self._tensor_f = self.tensor().astype(np.float64)
        return self._tensor_f

    def fuse_coeffs(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Coefficients of the product of two coefficient vectors."""
        if self._table is not None:
            out = np.zeros(self.size, dtype=np.complex128)
            np.add.at(out, self._table, np.outer(x, y))
            return out
        return np.einsum("i,j,ijk->k", x, y, self._tensor_float())

    def support_product(self, ids_a, ids_b) -> frozenset:
        """Union of supports of all pair products, computed in exact integers."""
        ids_a = sorted(ids_a)
        ids_b = sorted(ids_b)
        if not ids_a or not ids_b:
            return frozenset()
        if self._table is not None:
            return frozenset(self._table[np.ix_(ids_a, ids_b)].ravel().tolist())
        hits = self._tensor[np.ix_(ids_a, ids_b)].sum(axis=(0, 1))
        return frozenset(np.nonzero(hits)[0].tolist())

    def product_support(self, i: int, j: int) -> frozenset:
        return self.support_product((i,), (j,))

    def __eq__(self, other):
        return (
            isinstance(other, FusionRing)
            and self.labels == other.labels
            and np.array_equal(self.degrees, other.degrees)
            and np.array_equal(self.dual, other.dual)
            and self.entries == other.entries
        )

    def __repr__(self):
        kind = "permutation" if self.is_permutation else "general"
        return f"FusionRing({self.name}, size={self.size}, {kind})"


class HopfPair:
    """A validated instance: two fusion rings plus the evaluation matrix.

    Immutable after validation; all operations on it are pure functions.
    Construct through :func:`validate_pair`, not directly.
    """

    def __init__(self, name, dim, ring_h, ring_hstar, eval_matrix, partition_hint=None):
        self.name = str(name)
        self.dim = int(dim)
        self.ring_h = ring_h
        self.ring_hstar = ring_hstar
        self.eval_matrix = np.asarray(eval_matrix, dtype=np.complex128)
        self.eval_matrix.setflags(write=False)
        self.partition_hint = (
            None if partition_hint is None
            else tuple(tuple(int(i) for i in block) for block in partition_hint)
        )

    def ring(self, side: str) -> FusionRing:
        if side == SIDE_H:
            return self.ring_h
        if side == SIDE_HSTAR:
            return self.ring_hstar
        raise ValueError(f"unknown side {side!r}")

    def char(self, side: str, coeffs) -> "CharVector":
        return CharVector(self, side, coeffs)

    def basis_char(self, side: str, index: int) -> "CharVector":
        coeffs = np.zeros(self.ring(side).size, dtype=np.complex128)
        coeffs[index] = 1.0
        return CharVector(self, side, coeffs)

    def unit_char(self, side: str) -> "CharVector":
        return self.basis_char(side, 0)

    def dualized(self) -> "HopfPair":
        """Swap the two rings and transpose the pairing."""
        if self.name.startswith("dual(") and self.name.endswith(")"):
            name = self.name[len("dual("):-1]
        else:
            name = f"dual({self.name})"
        return HopfPair(name, self.dim, self.ring_hstar, self.ring_h,
                        self.eval_matrix.T.copy())

    def __repr__(self):
        return (f"HopfPair({self.name}, dim={self.dim}, "
                f"|Irr(H)|={self.ring_h.size}, |Irr(H*)|={self.ring_hstar.size})")


class CharVector:
    """A coefficient vector over the irreducible basis of one side."""

    def __init__(self, pair: HopfPair, side: str, coeffs):
        self.pair = pair
        self.side = side
        self.coeffs = np.asarray(coeffs, dtype=np.complex128).copy()
        if self.coeffs.shape != (pair.ring(side).size,):
            raise ValueError(
                f"coefficient vector of length {self.coeffs.shape} does not match "
                f"ring size {pair.ring(side).size}"
            )
        self.coeffs.setflags(write=False)

    @property
    def ring(self) -> FusionRing:
        return self.pair.ring(self.side)

    def degree(self) -> complex:
        """Total degree: the coefficient-weighted sum of basis degrees."""
        return complex(self.coeffs @ self.ring.degrees)

    def support(self) -> tuple:
        return tuple(np.nonzero(np.abs(self.coeffs) > numerics.EPS)[0].tolist())

    def dual(self) -> "CharVector":
        return CharVector(self.pair, self.side, np.conj(self.coeffs[self.ring.dual]))

    def is_genuine(self) -> bool:
        """Nonnegative integer coefficients (within INT_TOL), not all zero."""
        ints = [numerics.near_int(c) for c in self.coeffs]
        if any(v is None or v < 0 for v in ints):
            return False
        return any(v > 0 for v in ints)

    def int_coeffs(self) -> np.ndarray:
        return numerics.snap_int_array(self.coeffs, what="coefficient", nonnegative=True)

    def __add__(self, other):
        self._check_compatible(other)
        return CharVector(self.pair, self.side, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_compatible(other)
        return CharVector(self.pair, self.side, self.coeffs - other.coeffs)

    def __mul__(self, other):
        if isinstance(other, CharVector):
            return fuse(self, other)
        return CharVector(self.pair, self.side, self.coeffs * other)

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if self.pair is not other.pair or self.side != other.side:
            raise ValueError("operands live on different sides or pairs")

    def __repr__(self):
        terms = []
        for i in self.support():
            c = self.coeffs[i]
            c = c.real if abs(c.imag) < numerics.EPS else c
            terms.append(f"{c:g}*{self.ring.labels[i]}")
        return f"CharVector({self.side}: {' + '.join(terms) or '0'})"


# -- arithmetic -------------------------------------------------------------


def fuse(x: CharVector, y: CharVector) -> CharVector:
    """Product of two same-side vectors through the fusion tensor."""
    x._check_compatible(y)
    return CharVector(x.pair, x.side, x.ring.fuse_coeffs(x.coeffs, y.coeffs))


def mult_form(x: CharVector, y: CharVector) -> complex:
    """Multiplicity form: sum of x_a * conj(y_a) over the irreducible basis.

    For genuine characters this is the dimension of the Hom space, so the
    output is a nonnegative integer.
    """
    x._check_compatible(y)
    return complex(np.sum(x.coeffs * np.conj(y.coeffs)))


def evaluate(x: CharVector, y: CharVector) -> complex:
    """Evaluation pairing of an H-side vector against an H*-side vector."""
    if x.pair is not y.pair:
        raise ValueError("operands belong to different pairs")
    if x.side != SIDE_H or y.side != SIDE_HSTAR:
        raise ValueError("evaluate expects (H-side, H*-side) arguments")
    return complex(x.coeffs @ x.pair.eval_matrix @ y.coeffs)


def character_values(x: CharVector) -> np.ndarray:
    """Values of x against every basis element on the opposite side."""
    if x.side == SIDE_H:
        return x.coeffs @ x.pair.eval_matrix
    return x.pair.eval_matrix @ x.coeffs


# -- validation -------------------------------------------------------------


@dataclass
class ValidationReport:
    """Outcome of a full axiom check: all violations plus residual stats."""

    violations: list = field(default_factory=list)
    max_residual: float = 0.0
    checks: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def record(self, invariant, residuals, locations, tolerances=None):
        """Track residuals for one invariant; list entries beyond tolerance."""
        residuals = np.atleast_1d(np.asarray(residuals, dtype=np.float64))
        self.checks += residuals.size
        if residuals.size == 0:
            return
        self.max_residual = max(self.max_residual, float(residuals.max()))
        if tolerances is None:
            tolerances = np.full_like(residuals, numerics.EPS)
        bad = np.nonzero(residuals > tolerances)[0]
        for count, flat in enumerate(bad):
            if count >= _MAX_LISTED:
                self.violations.append(Violation(
                    invariant, f"... {bad.size - _MAX_LISTED} further locations", 0.0))
                break
            self.violations.append(
                Violation(invariant, locations(int(flat)), float(residuals[flat])))


def _ring_checks(ring: FusionRing, report: ValidationReport):
    n = ring.size
    lab = ring.labels
    deg = ring.degrees.astype(np.float64)
    dual = ring.dual

    if ring.dual[0] != 0:
        report.record("duality_frobenius", [1.0], lambda f: f"{ring.name}: dual(unit) != unit")

    if ring.is_permutation:
        t = ring.table
        idx = np.arange(n)
        # unit law
        res = np.concatenate([np.abs(t[0] - idx), np.abs(t[:, 0] - idx)]).astype(float)
        report.record("unit_law", res,
                      lambda f: f"{ring.name}: unit row/column at {lab[f % n]}")
        # associativity through the product table
        left = t[t, :]
        right = t[:, t]
        res = np.abs(left - right).astype(float).ravel()
        report.record(
            "associativity", res,
            lambda f: f"{ring.name}: ({lab[f // (n * n)]},{lab[(f // n) % n]},{lab[f % n]})")
        # duality / Frobenius: product hits the unit exactly on dual pairs
        expected = np.zeros((n, n))
        expected[np.arange(n), dual] = 1.0
        frob = np.abs((t == 0).astype(float) - expected)
        report.record("duality_frobenius", frob.ravel(),
                      lambda f: f"{ring.name}: ({lab[f // n]},{lab[f % n]})")
        # degree homomorphism
        res = np.abs(np.outer(deg, deg) - deg[t]).ravel()
        report.record("degree_homomorphism", res,
                      lambda f: f"{ring.name}: ({lab[f // n]},{lab[f % n]})")
        # dual compatibility
        res = np.abs(t[np.ix_(dual, dual)].T - dual[t]).astype(float).ravel()
        report.record("dual_compatibility", res,
                      lambda f: f"{ring.name}: ({lab[f // n]},{lab[f % n]})")
        return

    tensor = ring.tensor().astype(np.float64)
    eye = np.eye(n)
    res = np.abs(tensor[0] - eye).ravel()
    report.record("unit_law", res, lambda f: f"{ring.name}: unit*{lab[f // n]}")
    res = np.abs(tensor[:, 0, :] - eye).ravel()
    report.record("unit_law", res, lambda f: f"{ring.name}: {lab[f // n]}*unit")

    # associativity, chunked over the first index to bound memory
    worst = np.zeros((n, n, n))
    for i in range(n):
        left_i = np.einsum("jm,mkl->jkl", tensor[i], tensor)
        right_i = np.einsum("jkm,ml->jkl", tensor, tensor[i])
        np.maximum(worst, np.abs(left_i - right_i), out=worst)
    report.record(
        "associativity", worst.ravel(),
        lambda f: f"{ring.name}: (*,{lab[f // (n * n)]},{lab[(f // n) % n]},{lab[f % n]})")

    expected = np.zeros((n, n))
    expected[np.arange(n), dual] = 1.0
    report.record("duality_frobenius", np.abs(tensor[:, :, 0] - expected).ravel(),
                  lambda f: f"{ring.name}: ({lab[f // n]},{lab[f % n]})")

    res = np.abs(np.einsum("ijk,k->ij", tensor, deg) - np.outer(deg, deg)).ravel()
    report.record("degree_homomorphism", res,
                  lambda f: f"{ring.name}: ({lab[f // n]},{lab[f % n]})")

    flipped = tensor[np.ix_(dual, dual, dual)].transpose(1, 0, 2)
    report.record(
        "dual_compatibility", np.abs(tensor - flipped).ravel(),
        lambda f: f"{ring.name}: ({lab[f // (n * n)]},{lab[(f // n) % n]},{lab[f % n]})")


def _pair_checks(name, dim, ring_h, ring_hstar, ev, report: ValidationReport):
    s, n = ring_h.size, ring_hstar.size
    deg_h = ring_h.degrees.astype(np.float64)
    deg_n = ring_hstar.degrees.astype(np.float64)
    lab_h, lab_n = ring_h.labels, ring_hstar.labels

    report.record("dimension_sum",
                  [abs(dim - float(np.sum(deg_h ** 2))), abs(dim - float(np.sum(deg_n ** 2)))],
                  lambda f: f"{name}: sum of squared degrees on {'H' if f == 0 else 'H*'} side")

    report.record("unit_column", np.abs(ev[:, 0] - deg_h),
                  lambda f: f"{name}: E[{lab_h[f]}][unit]")
    report.record("unit_row", np.abs(ev[0, :] - deg_n),
                  lambda f: f"{name}: E[unit][{lab_n[f]}]")

    bound = np.outer(deg_h, deg_n)
    excess = np.clip(np.abs(ev) - bound, 0.0, None)
    report.record("evaluation_bound", excess.ravel(),
                  lambda f: f"{name}: |E[{lab_h[f // n]}][{lab_n[f % n]}]|",
                  tolerances=(numerics.EPS * np.maximum(1.0, bound)).ravel())

    reg = deg_h @ ev
    target = np.zeros(n)
    target[0] = dim
    report.record("regular_character_row", np.abs(reg - target),
                  lambda f: f"{name}: degree-weighted column sum at {lab_n[f]}",
                  tolerances=np.full(n, numerics.EPS * max(1.0, dim)))

    col = ev @ deg_n
    target = np.zeros(s)
    target[0] = dim
    report.record("integral_column", np.abs(col - target),
                  lambda f: f"{name}: degree-weighted row sum at {lab_h[f]}",
                  tolerances=np.full(s, numerics.EPS * max(1.0, dim)))

    res = np.abs(ev[:, ring_hstar.dual] - np.conj(ev)).ravel()
    report.record("conjugation_symmetry", res,
                  lambda f: f"{name}: E[{lab_h[f // n]}][{lab_n[f % n]}]")

    # grouplike columns multiply through the H-side fusion
    grouplikes = np.nonzero(ring_hstar.degrees == 1)[0]
    for d in grouplikes:
        colv = ev[:, d]
        if ring_h.is_permutation:
            prod = colv[ring_h.table]
        else:
            prod = np.einsum("ijk,k->ij", ring_h.tensor().astype(np.float64), colv)
        res = np.abs(prod - np.outer(colv, colv)).ravel()
        report.record(
            "grouplike_multiplicativity", res,
            lambda f, d=d: f"{name}: d={lab_n[d]} at ({lab_h[f // s]},{lab_h[f % s]})")


def _parse_instance(doc):
    if not isinstance(doc, dict):
        raise ValidationError([Violation("structure", "document is not an object", float("nan"))])
    required = ["name", "dim", "irr_h", "irr_hstar", "dual_h", "dual_hstar",
                "fusion_h", "fusion_hstar", "eval"]
    missing = [f for f in required if f not in doc]
    if missing:
        raise ValidationError(
            [Violation("structure", f"missing field {f!r}", float("nan")) for f in missing])

    def ring_from(which):
        info = doc[f"irr_{which}"]
        labels = [entry["label"] for entry in info]
        degrees = [entry["degree"] for entry in info]
        return FusionRing(labels, degrees, doc[f"dual_{which}"], doc[f"fusion_{which}"],
                          name=f"irr_{which}")

    ring_h = ring_from("h")
    ring_hstar = ring_from("hstar")

    raw = doc["eval"]
    s, n = ring_h.size, ring_hstar.size
    if len(raw) != s or any(len(row) != n for row in raw):
        raise ValidationError(
            [Violation("structure", f"eval matrix is not {s} x {n}", float("nan"))])
    ev = np.empty((s, n), dtype=np.complex128)
    for a, row in enumerate(raw):
        for b, entry in enumerate(row):
            if isinstance(entry, (list, tuple)):
                if len(entry) != 2:
                    raise ValidationError([Violation(
                        "structure", f"eval[{a}][{b}] is not a [re, im] pair", float("nan"))])
                ev[a, b] = complex(entry[0], entry[1])
            else:
                ev[a, b] = complex(entry)

    hint = doc.get("partition_hint")
    if hint is not None:
        flat = [i for block in hint for i in block]
        if sorted(flat) != list(range(n)):
            raise ValidationError([Violation(
                "structure", "partition_hint is not a partition of the H* index range",
                float("nan"))])

    dim = doc["dim"]
    if not isinstance(dim, int) or dim <= 0:
        raise ValidationError(
            [Violation("structure", "dim must be a positive integer", float("nan"))])
    return doc["name"], dim, ring_h, ring_hstar, ev, hint


def check_pair(doc):
    """Run every validation check.  Returns ``(pair_or_None, report)``."""
    report = ValidationReport()
    try:
        name, dim, ring_h, ring_hstar, ev, hint = _parse_instance(doc)
    except ValidationError as err:
        report.violations.extend(err.violations)
        return None, report
    _ring_checks(ring_h, report)
    _ring_checks(ring_hstar, report)
    _pair_checks(name, dim, ring_h, ring_hstar, ev, report)
    if not report.ok:
        return None, report
    return HopfPair(name, dim, ring_h, ring_hstar, ev, hint), report


def validate_pair(doc) -> HopfPair:
    """Validate a raw instance document; raise with the full violation list."""
    pair, report = check_pair(doc)
    if pair is None:
        raise ValidationError(report.violations)
    return pair


def load_pair(path) -> HopfPair:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_pair(json.load(fh))


def pair_document(pair: HopfPair) -> dict:
    """Serialize a pair back into the instance-document format."""
    def ring_doc(ring):
        return [{"label": l, "degree": int(d)} for l, d in zip(ring.labels, ring.degrees)]

    return {
        "name": pair.name,
        "dim": pair.dim,
        "irr_h": ring_doc(pair.ring_h),
        "irr_hstar": ring_doc(pair.ring_hstar),
        "dual_h": pair.ring_h.dual.tolist(),
        "dual_hstar": pair.ring_hstar.dual.tolist(),
        "fusion_h": [list(q) for q in pair.ring_h.entries],
        "fusion_hstar": [list(q) for q in pair.ring_hstar.entries],
        "eval": [[[float(z.real), float(z.imag)] for z in row] for row in pair.eval_matrix],
        **({"partition_hint": [list(b) for b in pair.partition_hint]}
           if pair.partition_hint else {}),
    }
