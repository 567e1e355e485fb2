"""Finite signal model and Alice's posterior over Bob's signal."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .errors import UndefinedPosteriorError, ValidationError

NORMALIZATION_TOL = 1e-9
RELEVANCE_TOL = 1e-6


@dataclass(frozen=True)
class SignalModel:
    """Common-knowledge prior over types and per-type joint signal tables.

    ``conditional_joint[t][a][b]`` is Pr(s_A = a, s_B = b | type t).
    """

    types: tuple
    prior: tuple
    conditional_joint: tuple

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(str(t) for t in self.types))
        object.__setattr__(self, "prior", tuple(float(x) for x in self.prior))
        object.__setattr__(
            self, "conditional_joint",
            tuple(tuple(tuple(float(x) for x in row) for row in table)
                  for table in self.conditional_joint))
        self._validate()

    def _validate(self) -> None:
        n = len(self.types)
        if n == 0:
            raise ValidationError("types", "at least one type is required")
        if len(self.prior) != n:
            raise ValidationError("prior", f"expected {n} entries, got {len(self.prior)}")
        if len(self.conditional_joint) != n:
            raise ValidationError(
                "conditional_joint", f"expected {n} tables, got {len(self.conditional_joint)}")
        for i, x in enumerate(self.prior):
            if not math.isfinite(x) or x < 0:
                raise ValidationError(f"prior[{i}]", f"must be a nonnegative number, got {x!r}")
        if abs(sum(self.prior) - 1.0) > NORMALIZATION_TOL:
            raise ValidationError("prior", f"entries sum to {sum(self.prior)!r}, not 1")
        for t, table in enumerate(self.conditional_joint):
            field = f"conditional_joint[{t}]"
            if len(table) != 2 or any(len(row) != 2 for row in table):
                raise ValidationError(field, "must be a 2x2 table")
            total = 0.0
            for a in range(2):
                for b in range(2):
                    x = table[a][b]
                    if not math.isfinite(x) or x < 0:
                        raise ValidationError(f"{field}[{a}][{b}]",
                                              f"must be a nonnegative number, got {x!r}")
                    total += x
            if abs(total - 1.0) > NORMALIZATION_TOL:
                raise ValidationError(field, f"entries sum to {total!r}, not 1")

    def joint(self, a: int, b: int) -> float:
        """Unconditional Pr(s_A = a, s_B = b)."""
        return sum(w * table[a][b] for w, table in zip(self.prior, self.conditional_joint))

    def marginal_alice(self, a: int) -> float:
        return self.joint(a, 0) + self.joint(a, 1)

    def marginal_bob(self, b: int) -> float:
        return self.joint(0, b) + self.joint(1, b)

    @classmethod
    def from_dict(cls, data: dict) -> "SignalModel":
        if not isinstance(data, dict):
            raise ValidationError("<root>", "expected a JSON object")
        for key in ("types", "prior", "conditional_joint"):
            if key not in data:
                raise ValidationError(key, "missing")
            if not isinstance(data[key], list):
                raise ValidationError(key, "must be a list")
        try:
            return cls(data["types"], data["prior"], data["conditional_joint"])
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError("conditional_joint", f"malformed entries ({exc})") from None

    @classmethod
    def load(cls, path) -> "SignalModel":
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError("<root>", f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "types": list(self.types),
            "prior": list(self.prior),
            "conditional_joint": [[list(row) for row in table] for table in self.conditional_joint],
        }

    @classmethod
    def conditionally_independent(cls, accuracy: float, prior: Sequence[float] = (0.5, 0.5),
                                  accuracy_bob: Optional[float] = None) -> "SignalModel":
        """Two types {0, 1}; each signal equals the type with the given accuracy."""
        acc_b = accuracy if accuracy_bob is None else accuracy_bob
        tables = []
        for t in (0, 1):
            pa = [accuracy if a == t else 1 - accuracy for a in (0, 1)]
            pb = [acc_b if b == t else 1 - acc_b for b in (0, 1)]
            tables.append([[pa[a] * pb[b] for b in (0, 1)] for a in (0, 1)])
        return cls(("0", "1"), tuple(prior), tables)


@dataclass(frozen=True)
class Posterior:
    """q0 for each of Alice's signals; ``None`` where the signal has probability zero."""

    q0_given_sA0: Optional[float]
    q0_given_sA1: Optional[float]

    def __getitem__(self, s_a: int) -> float:
        q = self.q0_given_sA0 if s_a == 0 else self.q0_given_sA1
        if q is None:
            raise UndefinedPosteriorError(f"Pr(s_A = {s_a}) = 0")
        return q


def posterior_q0(model: SignalModel, s_a: int) -> float:
    """Pr(s_B = 0 | s_A = s_a)."""
    if s_a not in (0, 1):
        raise ValueError(f"s_A must be 0 or 1, got {s_a!r}")
    denom = model.marginal_alice(s_a)
    if denom <= 0.0:
        raise UndefinedPosteriorError(f"Pr(s_A = {s_a}) = 0; q0 is undefined")
    return min(1.0, max(0.0, model.joint(s_a, 0) / denom))


def posterior(model: SignalModel) -> Posterior:
    out = []
    for s in (0, 1):
        try:
            out.append(posterior_q0(model, s))
        except UndefinedPosteriorError:
            out.append(None)
    return Posterior(*out)


def stochastically_relevant(model: SignalModel, tolerance: float = RELEVANCE_TOL) -> bool:
    return abs(posterior_q0(model, 0) - posterior_q0(model, 1)) > tolerance
