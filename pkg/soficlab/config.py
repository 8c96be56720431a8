"""
JSON configuration schemas.

Every input file is validated with pydantic; validation failures surface as
SchemaError with a JSON pointer to the offending field.
"""

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Type, TypeVar, Union

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from soficlab.core_groups import (
    FiniteGroup,
    IntegerGroup,
    VertexGroup,
    cyclic_group,
    group_from_cayley_table,
    regular_action,
    symmetric_group,
)
from soficlab.bass_serre import Edge, GraphOfGroups, GroupNode, Presentation, parse_word
from soficlab.errors import SchemaError, SoficLabError
from soficlab.graph_products import GPContext, SimpleGraph
from soficlab.sofic_builder import VertexAction
from soficlab.quasi_actions import QuasiActionTable, degrade, shift_action, table_from_json
from soficlab.utils import DEFAULT_BUDGET, load_json, parse_rational

Model = TypeVar("Model", bound=BaseModel)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class GraphSpec(_Strict):
    n: int = Field(ge=1)
    edges: List[Tuple[int, int]] = Field(default_factory=list)

    @field_validator("edges")
    @classmethod
    def _no_loops(cls, edges):
        seen = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"edge [{u}, {v}] is a loop; simple graphs forbid loops")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"edge [{u}, {v}] is repeated")
            seen.add(key)
        return edges

    @model_validator(mode="after")
    def _edges_in_range(self):
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge [{u}, {v}] uses a vertex outside 0..{self.n - 1}")
        return self

    def build(self) -> SimpleGraph:
        return SimpleGraph(self.n, frozenset(self.edges))


class GroupSpec(_Strict):
    kind: Literal["cyclic", "symmetric", "table", "integers"]
    order: Optional[int] = Field(default=None, ge=1)
    degree: Optional[int] = Field(default=None, ge=1)
    table: Optional[List[List[int]]] = None
    name: Optional[str] = None

    @model_validator(mode="after")
    def _required_fields(self):
        needed = {"cyclic": "order", "symmetric": "degree", "table": "table"}.get(self.kind)
        if needed and getattr(self, needed) is None:
            raise ValueError(f"a {self.kind} group needs '{needed}'")
        return self

    def build(self, table_budget: Optional[int] = None) -> VertexGroup:
        if self.kind == "cyclic":
            return cyclic_group(self.order, table_budget)
        if self.kind == "symmetric":
            return symmetric_group(self.degree, table_budget)
        if self.kind == "table":
            return group_from_cayley_table(self.table, name=self.name or "G", table_budget=table_budget)
        return IntegerGroup()


class ActionSpec(_Strict):
    kind: Literal["regular", "shift", "degraded", "table"]
    carrier: Optional[int] = Field(default=None, ge=1)
    reach: Optional[int] = Field(default=None, ge=0, alias="range")
    base: Optional["ActionSpec"] = None
    delta: Optional[str] = None
    seed: Optional[int] = None
    elements: Optional[List[int]] = None
    entries: Optional[List[Dict[str, Any]]] = None

    @field_validator("delta")
    @classmethod
    def _rational(cls, value):
        if value is None:
            return value
        delta = parse_rational(value)
        if not 0 <= delta < 1:
            raise ValueError(f"delta must lie in [0, 1), got {value}")
        return value

    @model_validator(mode="after")
    def _required_fields(self):
        if self.kind == "shift" and (self.carrier is None or self.reach is None):
            raise ValueError("a shift action needs 'carrier' and 'range'")
        if self.kind == "degraded" and (self.base is None or self.delta is None or self.seed is None):
            raise ValueError("a degraded action needs 'base', 'delta' and 'seed'")
        if self.kind == "table" and (self.carrier is None or self.entries is None):
            raise ValueError("a table action needs 'carrier' and 'entries'")
        return self

    def build(self, group: VertexGroup) -> Tuple[QuasiActionTable, List[int]]:
        """The table and the finite set F_i it is measured on."""
        if self.kind == "regular":
            if not isinstance(group, FiniteGroup):
                raise SchemaError("a regular action needs a finite vertex group")
            table = QuasiActionTable(group.order, regular_action(group))
            F = list(group.elements())
        elif self.kind == "shift":
            if not isinstance(group, IntegerGroup):
                raise SchemaError("a shift action needs the integers as vertex group")
            table, _ = shift_action(self.carrier, 2 * self.reach)
            F = list(range(-self.reach, self.reach + 1))
        elif self.kind == "table":
            table = table_from_json({"carrier": self.carrier, "entries": self.entries})
            F = table.keys()
        else:
            base, F = self.base.build(group)
            table = degrade(base, self.delta, self.seed, group)
        if self.elements is not None:
            F = list(self.elements)
        return table, F


ActionSpec.model_rebuild()


class BudgetSpec(_Strict):
    effective_points: Optional[int] = Field(default=None, ge=1)
    samples: Optional[int] = Field(default=None, ge=1)
    f_size: Optional[int] = Field(default=None, ge=1)
    carrier: Optional[int] = Field(default=None, ge=1)
    table_cells: Optional[int] = Field(default=None, ge=1)
    bfs_moves: Optional[int] = Field(default=None, ge=1)

    def overrides(self) -> Dict[str, Optional[int]]:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class ExperimentConfig(_Strict):
    """The `build` and `bench` configuration."""

    graph: GraphSpec
    vertex_groups: List[GroupSpec]
    actions: List[ActionSpec]
    N: int = Field(ge=0)
    radius_override: Optional[int] = Field(default=None, ge=1)
    mode: Literal["exact", "general"] = "exact"
    budget: BudgetSpec = Field(default_factory=BudgetSpec)
    seed: int = 0
    threads: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _one_per_vertex(self):
        if len(self.vertex_groups) != self.graph.n:
            raise ValueError(f"{len(self.vertex_groups)} vertex groups for n={self.graph.n}")
        if len(self.actions) != self.graph.n:
            raise ValueError(f"{len(self.actions)} actions for n={self.graph.n}")
        return self


class VerifyConfig(_Strict):
    """A single quasi-action to check against the special (F, ε) conditions."""

    group: GroupSpec
    action: ActionSpec
    F: Optional[List[int]] = None
    epsilon: str = "0/1"
    seed: int = 0

    @field_validator("epsilon")
    @classmethod
    def _rational(cls, value):
        parse_rational(value)
        return value


class NormalFormConfig(_Strict):
    """
    Graph-product words to normalize, split relative to k and multiply.

    The short form `{graph, groups, word}` normalizes one word against k = 0.
    """

    graph: GraphSpec
    vertex_groups: List[GroupSpec] = Field(validation_alias=AliasChoices("vertex_groups", "groups"))
    k: int = Field(default=0, ge=0)
    g1: List[Tuple[int, int]] = Field(validation_alias=AliasChoices("g1", "word"))
    g2: List[Tuple[int, int]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _k_in_range(self):
        if len(self.vertex_groups) != self.graph.n:
            raise ValueError(f"{len(self.vertex_groups)} vertex groups for n={self.graph.n}")
        if self.k >= self.graph.n:
            raise ValueError(f"k={self.k} is not a vertex of a graph with n={self.graph.n}")
        return self


class PresentationSpec(_Strict):
    kind: Literal["presentation"] = "presentation"
    generators: List[str]
    relators: List[str] = Field(default_factory=list)


class GOGVertexSpec(_Strict):
    name: str
    group: Union[PresentationSpec, GroupSpec]


class GOGEdgeSpec(_Strict):
    ends: Tuple[int, int]
    group: Union[PresentationSpec, GroupSpec]
    theta1: Dict[str, str]
    theta2: Dict[str, str]
    amenable: bool = False
    name: Optional[str] = None


class ChainSpec(_Strict):
    H: str = "H"
    K: str = "K"
    L: str = "L"
    lo: int
    hi: int


class GraphOfGroupsConfig(_Strict):
    vertices: List[GOGVertexSpec]
    edges: List[GOGEdgeSpec] = Field(default_factory=list)
    tree: Optional[List[int]] = None
    chain: Optional[ChainSpec] = None


def _pointer(loc: Tuple[Any, ...]) -> str:
    parts = [str(p) for p in loc if not (isinstance(p, str) and p.startswith("function-"))]
    return "/" + "/".join(p.replace("~", "~0").replace("/", "~1") for p in parts)


def validate_config(model: Type[Model], data: Any) -> Model:
    """Validate raw JSON data, translating the first pydantic error into SchemaError."""
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        message = str(error["msg"]).removeprefix("Value error, ")
        raise SchemaError(message, _pointer(error["loc"])) from exc


def load_config(model: Type[Model], path: Union[str, Path]) -> Model:
    try:
        data = load_json(path)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    return validate_config(model, data)


def dump_config(config: BaseModel) -> Dict[str, Any]:
    """JSON-ready form; validate_config(type(c), dump_config(c)) == c."""
    return config.model_dump(mode="json", by_alias=True, exclude_none=True)


def build_context(graph: GraphSpec, groups: List[GroupSpec], budget: Optional[Dict[str, Optional[int]]] = None) -> GPContext:
    cells = (budget or DEFAULT_BUDGET).get("table_cells")
    return GPContext(graph.build(), tuple(g.build(cells) for g in groups))


def build_actions(config: ExperimentConfig) -> Tuple[GPContext, List[VertexAction]]:
    """The graph product and one VertexAction per vertex."""
    budget = {**DEFAULT_BUDGET, **config.budget.overrides()}
    context = build_context(config.graph, config.vertex_groups, budget)
    actions = []
    for i, (group, spec) in enumerate(zip(context.groups, config.actions)):
        try:
            table, F = spec.build(group)
        except SchemaError as exc:
            raise SchemaError(exc.message, f"/actions/{i}") from exc
        actions.append(VertexAction(group, table, tuple(F)))
    return context, actions


def _group_node(name: str, spec: Union[PresentationSpec, GroupSpec], pointer: str) -> GroupNode:
    if isinstance(spec, PresentationSpec):
        return GroupNode(name, Presentation.parse(spec.generators, spec.relators))
    group = spec.build()
    if not isinstance(group, FiniteGroup):
        raise SchemaError("infinite vertex groups must be given as presentations", pointer)
    return GroupNode(name, group)


def build_graph_of_groups(config: GraphOfGroupsConfig) -> GraphOfGroups:
    vertices = [_group_node(v.name, v.group, f"/vertices/{i}/group") for i, v in enumerate(config.vertices)]
    edges = []
    for i, spec in enumerate(config.edges):
        u, v = spec.ends
        if not (0 <= u < len(vertices) and 0 <= v < len(vertices)):
            raise SchemaError(f"edge ends {list(spec.ends)} outside 0..{len(vertices) - 1}", f"/edges/{i}/ends")
        group = _group_node(spec.name or f"E{i}", spec.group, f"/edges/{i}/group")
        try:
            theta1 = {x: parse_word(w, vertices[u].presentation.generators) for x, w in spec.theta1.items()}
            theta2 = {x: parse_word(w, vertices[v].presentation.generators) for x, w in spec.theta2.items()}
        except SoficLabError as exc:
            raise SchemaError(str(exc), f"/edges/{i}") from exc
        edges.append(Edge((u, v), group, theta1, theta2, spec.amenable))
    return GraphOfGroups(vertices, edges)
