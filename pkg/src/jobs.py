"""
TOML job files for tqftkit
Schema validation with pydantic, dispatch to the library modules and deterministic JSON results
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import tomllib
from fractions import Fraction
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import __version__
from .dw import (
    Cocycle2,
    FiniteGroup,
    TwistedGroupAlgebra,
    algebra_center_dim,
    brute_force_surface,
    builtin_group,
    character_values,
    center_simples_abelian,
    dim1_partition,
    dw3_invariant,
    frobenius_partition,
    twisted_surface_sum,
    validate_cocycle,
)
from .errors import ParseError, SchemaError, TqftkitError, VerificationFailure
from .exactnum import CycloValue, format_fraction, parse_fraction
from .groupoid import (
    ActionGroupoid,
    LocalSystem,
    PiTower,
    bun_groupoid,
    circle_correspondence,
    groupoid_cardinality,
    scalar,
    sum1_limit,
    sum1_push,
)
from .lattice import (
    EvenLattice,
    approximation_tower,
    center_form,
    discriminant_form,
    duality_check,
    inertia,
    signature,
)
from .metric import (
    MetricGroup,
    gauss_closed_form,
    gauss_sum,
    heisenberg_summary,
    is_nondegenerate,
    milgram_signature,
)
from .tqft3 import (
    SurgeryPresentation,
    closed_form,
    group_fusion_holds,
    modular_data,
    rt_invariant,
    stabilize,
    verlinde_dim,
)
from .tqft4 import FourManifoldSpec, catalog, partition_closed, partition_sum

logger = logging.getLogger(__name__)

Command = Literal[
    "lattice-info",
    "gauss",
    "milgram",
    "tower",
    "center-check",
    "mtc",
    "verlinde",
    "rt3",
    "anomaly4",
    "dw-surface",
    "dw3",
    "dim1",
    "groupoid-card",
    "sum1",
    "heisenberg",
    "dw-center",
]

HEISENBERG_VERIFY_LIMIT = 10_000


def _reduced(values: List[str]) -> List[str]:
    for v in values:
        parse_fraction(v, require_reduced=True)
    return values


def _square(matrix: List[List[int]], what: str) -> List[List[int]]:
    if any(len(row) != len(matrix) for row in matrix):
        raise ValueError(f"{what} must be square")
    return matrix


def _symmetric(matrix: List[List[int]], what: str) -> List[List[int]]:
    _square(matrix, what)
    n = len(matrix)
    if any(matrix[i][j] != matrix[j][i] for i in range(n) for j in range(n)):
        raise ValueError(f"{what} must be symmetric")
    return matrix


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

class Table(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


class MetricGroupTable(Table):
    factors: List[int] = Field(default_factory=list)
    q_diag: List[str] = Field(default_factory=list)
    b_off: List[List[str]] = Field(default_factory=list)
    lattice: Optional[str] = None

    @field_validator("q_diag")
    @classmethod
    def _q_reduced(cls, v: List[str]) -> List[str]:
        return _reduced(v)

    @field_validator("b_off")
    @classmethod
    def _b_reduced(cls, v: List[List[str]]) -> List[List[str]]:
        for row in v:
            _reduced(row)
        return v

    @model_validator(mode="after")
    def _one_source(self) -> "MetricGroupTable":
        if self.lattice is not None and (self.factors or self.q_diag or self.b_off):
            raise ValueError("give either lattice or factors/q_diag/b_off, not both")
        if self.lattice is None and len(self.q_diag) != len(self.factors):
            raise ValueError("q_diag needs one entry per invariant factor")
        return self

    def build(self) -> MetricGroup:
        if self.lattice is not None:
            return discriminant_form(EvenLattice.builtin(self.lattice))
        return MetricGroup.from_strings(self.factors, self.q_diag, self.b_off)


class LatticeTable(Table):
    gram: Optional[List[List[int]]] = None
    name: Optional[str] = None

    @field_validator("gram")
    @classmethod
    def _gram_symmetric(cls, v: Optional[List[List[int]]]) -> Optional[List[List[int]]]:
        return None if v is None else _symmetric(v, "gram")

    @model_validator(mode="after")
    def _one_source(self) -> "LatticeTable":
        if (self.gram is None) == (self.name is None):
            raise ValueError("give exactly one of gram or name")
        return self

    def build(self) -> EvenLattice:
        if self.name is not None:
            return EvenLattice.builtin(self.name)
        return EvenLattice(self.gram, name="gram")


class TowerTable(Table):
    n: int = Field(ge=1)


class SurgeryTable(Table):
    linking: List[List[int]] = Field(default_factory=list)

    @field_validator("linking")
    @classmethod
    def _linking_symmetric(cls, v: List[List[int]]) -> List[List[int]]:
        return _symmetric(v, "linking")


class FourManifoldTable(Table):
    name: Optional[str] = None
    b1: int = Field(default=0, ge=0)
    intersection: Optional[List[List[int]]] = None

    @field_validator("intersection")
    @classmethod
    def _intersection_symmetric(cls, v: Optional[List[List[int]]]) -> Optional[List[List[int]]]:
        return None if v is None else _symmetric(v, "intersection")

    @model_validator(mode="after")
    def _one_source(self) -> "FourManifoldTable":
        if self.name is not None and self.intersection is not None:
            raise ValueError("give either name or intersection, not both")
        if self.name is None and self.intersection is None:
            raise ValueError("give a catalog name or an intersection form")
        return self

    def build(self) -> FourManifoldSpec:
        if self.name is not None:
            return catalog(self.name)
        return FourManifoldSpec(tuple(tuple(r) for r in self.intersection), self.b1, "custom")


class GroupTable(Table):
    name: Optional[str] = None
    cayley: Optional[List[List[int]]] = None

    @field_validator("cayley")
    @classmethod
    def _cayley_square(cls, v: Optional[List[List[int]]]) -> Optional[List[List[int]]]:
        return None if v is None else _square(v, "cayley")

    @model_validator(mode="after")
    def _one_source(self) -> "GroupTable":
        if (self.name is None) == (self.cayley is None):
            raise ValueError("give exactly one of name or cayley")
        return self

    def build(self) -> FiniteGroup:
        if self.name is not None:
            return builtin_group(self.name)
        return FiniteGroup(self.cayley, name="cayley")


class CocycleTable(Table):
    table: List[List[str]]

    @field_validator("table")
    @classmethod
    def _table_reduced(cls, v: List[List[str]]) -> List[List[str]]:
        _square(v, "cocycle table")
        for row in v:
            _reduced(row)
        return v

    def build(self, G: FiniteGroup) -> Cocycle2:
        return Cocycle2(G, [[parse_fraction(x) for x in row] for row in self.table])


class SurfaceTable(Table):
    genus: int = Field(ge=0)


class PresentationTable(Table):
    """Relators are words written flat, [gen, exp, gen, exp, ...], or as [[gen, exp], ...] pairs."""

    generators: int = Field(ge=0)
    relators: List[List[Tuple[int, int]]] = Field(default_factory=list)

    @field_validator("relators", mode="before")
    @classmethod
    def _pair_flat_words(cls, v: Any) -> Any:
        if not isinstance(v, list):
            return v
        words = []
        for word in v:
            if isinstance(word, list) and word and all(isinstance(x, int) for x in word):
                if len(word) % 2:
                    raise ValueError("flat relator needs an even number of entries: gen, exp, gen, exp, ...")
                word = [word[i:i + 2] for i in range(0, len(word), 2)]
            words.append(word)
        return words

    @model_validator(mode="after")
    def _generators_in_range(self) -> "PresentationTable":
        for word in self.relators:
            for gen, _ in word:
                if not 0 <= gen < self.generators:
                    raise ValueError(f"relator uses generator {gen} outside 0..{self.generators - 1}")
        return self


class CharacterTable(Table):
    values: List[str]

    @field_validator("values")
    @classmethod
    def _values_reduced(cls, v: List[str]) -> List[str]:
        return _reduced(v)


class GroupoidTable(Table):
    group: str
    set_kind: Literal["point", "self-conj"] = Field(alias="set")


class PiTowerTable(Table):
    components: List[List[int]]

    @field_validator("components")
    @classmethod
    def _positive(cls, v: List[List[int]]) -> List[List[int]]:
        if any(x < 1 for comp in v for x in comp):
            raise ValueError("homotopy group orders must be positive")
        return v


# ---------------------------------------------------------------------------
# Job specification
# ---------------------------------------------------------------------------

REQUIRED: Dict[str, Tuple[str, ...]] = {
    "lattice-info": ("lattice",),
    "gauss": ("metric_group",),
    "milgram": ("metric_group",),
    "tower": ("lattice", "tower"),
    "center-check": ("lattice", "tower"),
    "mtc": ("metric_group",),
    "verlinde": ("metric_group", "surface"),
    "rt3": ("metric_group", "surgery"),
    "anomaly4": ("metric_group", "fourmanifold"),
    "dw-surface": ("group", "surface"),
    "dw3": ("group", "presentation"),
    "dim1": ("group", "character"),
    "groupoid-card": (),
    "sum1": ("groupoid",),
    "heisenberg": ("metric_group", "surface"),
    "dw-center": ("group",),
}

OPTIONAL: Dict[str, Tuple[str, ...]] = {
    "dw-surface": ("cocycle",),
    "dw-center": ("cocycle",),
    "groupoid-card": ("pitower", "groupoid"),
    "sum1": ("character",),
}

TABLES = (
    "metric_group",
    "lattice",
    "tower",
    "surgery",
    "fourmanifold",
    "group",
    "cocycle",
    "surface",
    "presentation",
    "character",
    "groupoid",
    "pitower",
)


class JobSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command
    metric_group: Optional[MetricGroupTable] = None
    lattice: Optional[LatticeTable] = None
    tower: Optional[TowerTable] = None
    surgery: Optional[SurgeryTable] = None
    fourmanifold: Optional[FourManifoldTable] = None
    group: Optional[GroupTable] = None
    cocycle: Optional[CocycleTable] = None
    surface: Optional[SurfaceTable] = None
    presentation: Optional[PresentationTable] = None
    character: Optional[CharacterTable] = None
    groupoid: Optional[GroupoidTable] = None
    pitower: Optional[PiTowerTable] = None

    @model_validator(mode="after")
    def _tables_match_command(self) -> "JobSpec":
        required = REQUIRED[self.command]
        allowed = set(required) | set(OPTIONAL.get(self.command, ()))
        present = {name for name in TABLES if getattr(self, name) is not None}
        missing = [name for name in required if name not in present]
        if missing:
            raise ValueError(f"command {self.command!r} needs tables {missing}")
        unexpected = sorted(present - allowed)
        if unexpected:
            raise ValueError(f"command {self.command!r} does not use tables {unexpected}")
        if self.command == "groupoid-card" and (self.pitower is None) == (self.groupoid is None):
            raise ValueError("groupoid-card needs exactly one of [pitower] or [groupoid]")
        return self

    def canonical(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOML_POSITION = re.compile(r"at line (\d+)")


def _locate(text: str, loc: Tuple[Any, ...]) -> Optional[int]:
    """Line of the innermost key named in a validation location, if it can be found."""
    keys = [str(part) for part in loc if isinstance(part, str)]
    lines = text.splitlines()
    for key in reversed(keys):
        key_pattern = re.compile(rf"^\s*({re.escape(key)}\s*=|\[\s*{re.escape(key)}\s*\])")
        for number, line in enumerate(lines, start=1):
            if key_pattern.match(line):
                return number
    return None


def parse_job(text: str) -> JobSpec:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = _TOML_POSITION.search(str(e))
        raise ParseError(f"Invalid TOML: {e}", {"line": int(match.group(1)) if match else None}) from e
    try:
        return JobSpec.model_validate(data)
    except ValidationError as e:
        errors = [
            {
                "loc": ".".join(str(p) for p in err["loc"]),
                "msg": err["msg"],
                "line": _locate(text, tuple(err["loc"])),
            }
            for err in e.errors()
        ]
        first = errors[0]
        where = f" (line {first['line']})" if first["line"] else ""
        raise SchemaError(f"{first['loc'] or 'job'}: {first['msg']}{where}", {"errors": errors}) from e


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def input_sha256(job: JobSpec) -> str:
    return hashlib.sha256(canonical_json(job.canonical()).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def _value(x: CycloValue) -> Dict[str, Any]:
    form = closed_form(x)
    payload = {"cyclo": x.render()}
    if form is not None:
        payload["exact"] = form.render()
    if x.is_rational():
        payload["value"] = format_fraction(x.to_fraction())
    return payload


Handler = Callable[[JobSpec], Tuple[Dict[str, Any], Dict[str, bool]]]


class JobRunner:
    """Dispatch a JobSpec to its handler and wrap the result with hash, version and checks."""

    def __init__(self, verify: bool = False):
        self.verify = verify
        self.handlers: Dict[str, Handler] = {
            "lattice-info": self._lattice_info,
            "gauss": self._gauss,
            "milgram": self._milgram,
            "tower": self._tower,
            "center-check": self._center_check,
            "mtc": self._mtc,
            "verlinde": self._verlinde,
            "rt3": self._rt3,
            "anomaly4": self._anomaly4,
            "dw-surface": self._dw_surface,
            "dw3": self._dw3,
            "dim1": self._dim1,
            "groupoid-card": self._groupoid_card,
            "sum1": self._sum1,
            "heisenberg": self._heisenberg,
            "dw-center": self._dw_center,
        }

    def run_job(self, job: JobSpec) -> Dict[str, Any]:
        logger.info("running %s (verify=%s)", job.command, self.verify)
        result, checks = self.handlers[job.command](job)
        failed = sorted(name for name, ok in checks.items() if not ok)
        if self.verify and failed:
            raise VerificationFailure(f"checks failed: {failed}", {"checks": checks, "command": job.command})
        return {
            "command": job.command,
            "version": __version__,
            "input_sha256": input_sha256(job),
            "result": result,
            "checks": checks,
        }

    # -- lattices and metric groups -------------------------------------

    def _lattice_info(self, job: JobSpec):
        L = job.lattice.build()
        pos, neg, zero = inertia(L.gram)
        result: Dict[str, Any] = {
            "lattice": L.render(),
            "rank": L.rank,
            "det": L.det,
            "inertia": {"positive": pos, "negative": neg, "zero": zero},
        }
        checks: Dict[str, bool] = {}
        if not L.is_nondegenerate:
            result["degenerate"] = True
            return result, checks
        sigma = signature(L)
        disc = discriminant_form(L)
        result["signature"] = sigma
        result["discriminant"] = disc.render()
        result["discriminant_order"] = disc.order
        checks["discriminant_order_is_abs_det"] = disc.order == abs(L.det)
        checks["milgram_matches_signature"] = milgram_signature(disc) == sigma % 8
        return result, checks

    def _gauss(self, job: JobSpec):
        M = job.metric_group.build()
        total = gauss_sum(M)
        result = {"metric": M.render(), "order": M.order, "gauss_sum": _value(total)}
        checks: Dict[str, bool] = {}
        if is_nondegenerate(M):
            closed = gauss_closed_form(M)
            result["closed_form"] = closed.render()
            checks["closed_form_expands_to_sum"] = closed.to_cyclo() == total
        return result, checks

    def _milgram(self, job: JobSpec):
        M = job.metric_group.build()
        sigma = milgram_signature(M)
        checks = {}
        if self.verify:
            checks["closed_form_expands_to_sum"] = gauss_closed_form(M).to_cyclo() == gauss_sum(M)
        return {"metric": M.render(), "order": M.order, "signature": sigma}, checks

    def _tower(self, job: JobSpec):
        L = job.lattice.build()
        tower = approximation_tower(L, job.tower.n)
        report = duality_check(tower)
        result = tower.render()
        result["duality"] = report.render()
        checks = {
            "cardinalities": tower.cardinalities() == tower.expected_cardinalities(),
            "self_dual": report.ok,
        }
        return result, checks

    def _center_check(self, job: JobSpec):
        cf = center_form(job.lattice.build(), job.tower.n)
        return cf.render(), cf.checks()

    # -- three dimensions ---------------------------------------------

    def _mtc(self, job: JobSpec):
        mtc = modular_data(job.metric_group.build(), verify=False)
        checks = mtc.checks()
        if self.verify:
            checks["group_fusion"] = group_fusion_holds(mtc)
        return mtc.render(), checks

    def _verlinde(self, job: JobSpec):
        M = job.metric_group.build()
        genus = job.surface.genus
        dim = verlinde_dim(M, genus)
        checks = {"power_of_order": dim == M.order ** genus}
        if self.verify and M.order ** (2 * genus) <= HEISENBERG_VERIFY_LIMIT:
            checks["matches_heisenberg_irrep"] = heisenberg_summary(M, genus).irrep_dim == dim
        return {"genus": genus, "dimension": dim}, checks

    def _rt3(self, job: JobSpec):
        M = job.metric_group.build()
        L = SurgeryPresentation(tuple(tuple(r) for r in job.surgery.linking))
        Z = rt_invariant(M, L)
        result = {"surgery": L.render(), "Z": _value(Z)}
        checks: Dict[str, bool] = {}
        if self.verify:
            checks["stabilization_plus"] = rt_invariant(M, stabilize(L, 1)) == Z
            checks["stabilization_minus"] = rt_invariant(M, stabilize(L, -1)) == Z
        return result, checks

    def _heisenberg(self, job: JobSpec):
        M = job.metric_group.build()
        summary = heisenberg_summary(M, job.surface.genus)
        checks = {
            "center_is_scalars": summary.center_dim == 1,
            "irrep_dim_is_power": summary.irrep_dim == M.order ** job.surface.genus,
        }
        return summary.render(), checks

    # -- four dimensions ----------------------------------------------

    def _anomaly4(self, job: JobSpec):
        M = job.metric_group.build()
        X = job.fourmanifold.build()
        total = partition_sum(M, X)
        result: Dict[str, Any] = {"manifold": X.render(), "sum": total.render()}
        form = closed_form(total)
        if form is not None:
            result["exact"] = form.render()
        checks: Dict[str, bool] = {}
        if is_nondegenerate(M):
            closed = partition_closed(M, X)
            result["closed"] = closed.render()
            checks["sum_equals_closed_form"] = closed.to_cyclo() == total
        return result, checks

    # -- finite gauge theory ------------------------------------------

    def _algebra(self, job: JobSpec) -> Tuple[FiniteGroup, TwistedGroupAlgebra]:
        G = job.group.build()
        cocycle = job.cocycle.build(G) if job.cocycle is not None else None
        return G, TwistedGroupAlgebra(G, cocycle)

    def _dw_surface(self, job: JobSpec):
        G, A = self._algebra(job)
        genus = job.surface.genus
        value = frobenius_partition(A, genus)
        result = {"group": G.name, "genus": genus, "twisted": not A.cocycle.is_trivial(), "value": _value(value)}
        checks: Dict[str, bool] = {}
        if A.cocycle.is_trivial():
            oracle = CycloValue.rational(brute_force_surface(G, genus))
        else:
            oracle = twisted_surface_sum(A, genus)
        result["state_sum"] = _value(oracle)
        checks["frobenius_equals_state_sum"] = oracle == value
        return result, checks

    def _dw_center(self, job: JobSpec):
        G, A = self._algebra(job)
        report = validate_cocycle(A.cocycle)
        simples = center_simples_abelian(G, A.cocycle)
        result = {
            "group": G.name,
            "cocycle": report.render(),
            "algebra_center_dim": algebra_center_dim(A),
            "simples": [s.render() for s in simples],
            "count": len(simples),
        }
        checks = {"count_is_order_squared": len(simples) == G.order ** 2}
        return result, checks

    def _dw3(self, job: JobSpec):
        G = job.group.build()
        pres = job.presentation
        value = dw3_invariant(pres.generators, [list(r) for r in pres.relators], G)
        return {"group": G.name, "value": format_fraction(value)}, {}

    def _dim1(self, job: JobSpec):
        G = job.group.build()
        values = job.character.values
        value = dim1_partition(G, values)
        result = {"group": G.name, "value": format_fraction(value)}
        checks: Dict[str, bool] = {}
        if self.verify:
            pushed = scalar(sum1_push(circle_correspondence(G, values)))
            checks["circle_pushforward"] = pushed == CycloValue.rational(value)
        return result, checks

    # -- groupoids ----------------------------------------------------

    def _groupoid_from(self, table: GroupoidTable) -> ActionGroupoid:
        G = builtin_group(table.group)
        return bun_groupoid("pt" if table.set_kind == "point" else "circle", G)

    def _groupoid_card(self, job: JobSpec):
        if job.pitower is not None:
            tower = PiTower(tuple(tuple(c) for c in job.pitower.components))
            return {"pi_tower": tower.render(), "cardinality": format_fraction(groupoid_cardinality(tower))}, {}
        X = self._groupoid_from(job.groupoid)
        value = X.cardinality()
        checks = {"objects_over_group_order": value == Fraction(X.size, X.group.order)}
        return {"groupoid": X.render(), "cardinality": format_fraction(value)}, checks

    def _sum1(self, job: JobSpec):
        X = self._groupoid_from(job.groupoid)
        G = X.group
        if job.character is not None:
            values = character_values(G, job.character.values)
            system = LocalSystem.from_phases(X, lambda g, s: values[g], name=f"lambda[{G.name}]")
        else:
            values = None
            system = LocalSystem.trivial(X)
        result: Dict[str, Any] = {"groupoid": X.render(), "limit": sum1_limit(system)}
        checks: Dict[str, bool] = {}
        if values is not None:
            pushed = scalar(sum1_push(circle_correspondence(G, values)))
            result["circle"] = _value(pushed)
            if self.verify:
                checks["circle_matches_dim1"] = pushed == CycloValue.rational(dim1_partition(G, values))
        return result, checks


def run_job(job: JobSpec, verify: bool = False) -> Dict[str, Any]:
    return JobRunner(verify=verify).run_job(job)


def error_document(error: TqftkitError, command: Optional[str] = None) -> Dict[str, Any]:
    return {"command": command, "version": __version__, "error": error.to_dict()}
