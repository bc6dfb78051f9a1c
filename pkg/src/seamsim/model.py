"""Deployment models: components, connections, data stores, and scenario deltas.

A deployment model describes which use cases, service candidates, and entity
types live in which component, how components are connected (local or remote),
and which data store holds which entity types.  Scenarios are expressed as
deltas against a base model and merged with :func:`apply_delta`.

Models are immutable after construction and safe to share across workers.
Collections are normalized (sorted by name) at construction time so that
every downstream computation is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Optional


class TransactionBehavior(Enum):
    """Per-candidate transaction attribute (the Jakarta EE set)."""

    REQUIRED = "REQUIRED"
    REQUIRES_NEW = "REQUIRES_NEW"
    SUPPORTS = "SUPPORTS"
    NOT_SUPPORTED = "NOT_SUPPORTED"
    MANDATORY = "MANDATORY"
    NEVER = "NEVER"


class ConnectionKind(Enum):
    LOCAL = "local"
    REMOTE = "remote"


class TransactionPropagation(Enum):
    """Whether a caller's transaction crosses a remote connection."""

    NONE = "none"
    SUBORDINATE = "subordinate"


class ConflictBehavior(Enum):
    """Data-store behavior when a read or write hits pending changes."""

    STALE_READ = "staleRead"
    BLOCK = "block"


@dataclass(frozen=True)
class ServiceCandidate:
    name: str
    transaction_behavior: TransactionBehavior = TransactionBehavior.REQUIRED


@dataclass(frozen=True)
class Component:
    name: str
    use_cases: frozenset[str] = frozenset()
    service_candidates: tuple[ServiceCandidate, ...] = ()
    entity_types: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "use_cases", frozenset(self.use_cases))
        object.__setattr__(
            self,
            "service_candidates",
            tuple(sorted(set(self.service_candidates), key=lambda c: c.name)),
        )
        object.__setattr__(self, "entity_types", frozenset(self.entity_types))

    def candidate(self, name: str) -> Optional[ServiceCandidate]:
        for cand in self.service_candidates:
            if cand.name == name:
                return cand
        return None


@dataclass(frozen=True)
class Connection:
    """A declared component connection, usable in both directions.

    The DSL writes connections with an arrow, but semantically the attributes
    apply to both directions.  ``overhead`` is expressed in the same abstract
    time unit as trace timestamps.  ``propagation`` is meaningful for REMOTE
    connections only; LOCAL connections implicitly share transactions.
    """

    source: str
    target: str
    kind: ConnectionKind
    overhead: int = 0
    propagation: Optional[TransactionPropagation] = None

    def __post_init__(self) -> None:
        if self.kind is ConnectionKind.REMOTE and self.propagation is None:
            object.__setattr__(self, "propagation", TransactionPropagation.NONE)

    @property
    def pair(self) -> frozenset[str]:
        return frozenset((self.source, self.target))


@dataclass(frozen=True)
class DataStore:
    name: str
    entity_types: frozenset[str] = frozenset()
    conflict_behavior: ConflictBehavior = ConflictBehavior.STALE_READ

    def __post_init__(self) -> None:
        object.__setattr__(self, "entity_types", frozenset(self.entity_types))


@dataclass(frozen=True)
class ConnectionView:
    """Effective connection between two components, direction-independent.

    ``shares_transactions`` is true for local (and intrinsic same-component)
    connections, where invocations behave like internal calls.
    """

    kind: ConnectionKind
    overhead: int
    propagation: Optional[TransactionPropagation]

    @property
    def shares_transactions(self) -> bool:
        return self.kind is ConnectionKind.LOCAL


INTERNAL_CONNECTION = ConnectionView(ConnectionKind.LOCAL, 0, None)


@dataclass(frozen=True)
class DeploymentModel:
    components: tuple[Component, ...] = ()
    connections: tuple[Connection, ...] = ()
    data_stores: tuple[DataStore, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "components", tuple(sorted(self.components, key=lambda c: c.name))
        )
        object.__setattr__(
            self,
            "connections",
            tuple(sorted(self.connections, key=lambda c: (min(c.source, c.target), max(c.source, c.target)))),
        )
        object.__setattr__(
            self, "data_stores", tuple(sorted(self.data_stores, key=lambda s: s.name))
        )

    @cached_property
    def component_names(self) -> frozenset[str]:
        return frozenset(c.name for c in self.components)

    @cached_property
    def _by_name(self) -> dict[str, Component]:
        return {c.name: c for c in self.components}

    def component(self, name: str) -> Component:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownComponentError(name) from None

    @cached_property
    def candidate_owner(self) -> dict[str, str]:
        """Candidate name -> owning component name (first owner on duplicates)."""
        owner: dict[str, str] = {}
        for comp in self.components:
            for cand in comp.service_candidates:
                owner.setdefault(cand.name, comp.name)
        return owner

    @cached_property
    def use_case_owner(self) -> dict[str, str]:
        owner: dict[str, str] = {}
        for comp in self.components:
            for uc in sorted(comp.use_cases):
                owner.setdefault(uc, comp.name)
        return owner

    @cached_property
    def entity_type_owner(self) -> dict[str, str]:
        owner: dict[str, str] = {}
        for comp in self.components:
            for et in sorted(comp.entity_types):
                owner.setdefault(et, comp.name)
        return owner

    @cached_property
    def candidates(self) -> dict[str, ServiceCandidate]:
        out: dict[str, ServiceCandidate] = {}
        for comp in self.components:
            for cand in comp.service_candidates:
                out.setdefault(cand.name, cand)
        return out

    @cached_property
    def store_of_entity_type(self) -> dict[str, DataStore]:
        out: dict[str, DataStore] = {}
        for store in self.data_stores:
            for et in sorted(store.entity_types):
                out.setdefault(et, store)
        return out

    @cached_property
    def _connection_by_pair(self) -> dict[frozenset[str], Connection]:
        out: dict[frozenset[str], Connection] = {}
        for conn in self.connections:
            out.setdefault(conn.pair, conn)
        return out


@dataclass(frozen=True)
class Violation:
    """A broken model invariant.  Violations are data, not exceptions."""

    code: str
    message: str
    subject: str = ""

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class UnknownComponentError(KeyError):
    pass


class MergeError(Exception):
    """A scenario delta could not be applied to the base model."""

    def __init__(self, message: str, violations: tuple[Violation, ...] = ()):
        super().__init__(message)
        self.violations = violations


# ---------------------------------------------------------------------------
# Validation


def validate_model(model: DeploymentModel) -> list[Violation]:
    """Check every model invariant; an empty result means the model is valid."""
    out: list[Violation] = []

    seen_components: set[str] = set()
    cand_owner: dict[str, str] = {}
    uc_owner: dict[str, str] = {}
    et_owner: dict[str, str] = {}
    for comp in model.components:
        if not comp.name:
            out.append(Violation("EMPTY_NAME", "component with empty name"))
        if comp.name in seen_components:
            out.append(
                Violation("DUPLICATE_COMPONENT", f'component "{comp.name}" declared twice', comp.name)
            )
        seen_components.add(comp.name)
        local_names: set[str] = set()
        for cand in comp.service_candidates:
            if not cand.name:
                out.append(Violation("EMPTY_NAME", f'candidate with empty name in "{comp.name}"', comp.name))
            if cand.name in cand_owner:
                out.append(
                    Violation(
                        "DUPLICATE_ASSIGNMENT",
                        f'service candidate "{cand.name}" assigned to both '
                        f'"{cand_owner[cand.name]}" and "{comp.name}"',
                        cand.name,
                    )
                )
            else:
                cand_owner[cand.name] = comp.name
            local_names.add(cand.name)
        for uc in sorted(comp.use_cases):
            if uc in uc_owner:
                out.append(
                    Violation(
                        "DUPLICATE_ASSIGNMENT",
                        f'use case "{uc}" assigned to both "{uc_owner[uc]}" and "{comp.name}"',
                        uc,
                    )
                )
            else:
                uc_owner[uc] = comp.name
        for et in sorted(comp.entity_types):
            if et in et_owner:
                out.append(
                    Violation(
                        "DUPLICATE_ASSIGNMENT",
                        f'entity type "{et}" assigned to both "{et_owner[et]}" and "{comp.name}"',
                        et,
                    )
                )
            else:
                et_owner[et] = comp.name

    seen_pairs: set[frozenset[str]] = set()
    for conn in model.connections:
        for endpoint in (conn.source, conn.target):
            if endpoint not in seen_components:
                out.append(
                    Violation("UNKNOWN_COMPONENT", f'connection references unknown component "{endpoint}"', endpoint)
                )
        if conn.source == conn.target:
            out.append(
                Violation("SELF_CONNECTION", f'connection from "{conn.source}" to itself', conn.source)
            )
        elif conn.pair in seen_pairs:
            out.append(
                Violation(
                    "DUPLICATE_CONNECTION",
                    f'more than one connection between "{conn.source}" and "{conn.target}"',
                    conn.source,
                )
            )
        seen_pairs.add(conn.pair)
        if conn.overhead < 0:
            out.append(
                Violation("NEGATIVE_OVERHEAD", f'connection "{conn.source}" -> "{conn.target}" has negative overhead', conn.source)
            )
        if conn.kind is ConnectionKind.LOCAL:
            if conn.overhead != 0:
                out.append(
                    Violation(
                        "LOCAL_CONNECTION_WITH_OVERHEAD",
                        f'local connection "{conn.source}" -> "{conn.target}" must have overhead 0',
                        conn.source,
                    )
                )
            if conn.propagation is not None:
                out.append(
                    Violation(
                        "LOCAL_CONNECTION_WITH_PROPAGATION",
                        f'local connection "{conn.source}" -> "{conn.target}" cannot declare transaction propagation',
                        conn.source,
                    )
                )

    seen_stores: set[str] = set()
    et_store: dict[str, str] = {}
    for store in model.data_stores:
        if not store.name:
            out.append(Violation("EMPTY_NAME", "data store with empty name"))
        if store.name in seen_stores:
            out.append(Violation("DUPLICATE_DATA_STORE", f'data store "{store.name}" declared twice', store.name))
        seen_stores.add(store.name)
        for et in sorted(store.entity_types):
            if et not in et_owner:
                out.append(
                    Violation(
                        "UNKNOWN_ENTITY_TYPE",
                        f'data store "{store.name}" references unknown entity type "{et}"',
                        et,
                    )
                )
            if et in et_store:
                out.append(
                    Violation(
                        "DUPLICATE_STORE_ASSIGNMENT",
                        f'entity type "{et}" assigned to both data store "{et_store[et]}" and "{store.name}"',
                        et,
                    )
                )
            else:
                et_store[et] = store.name

    return out


# ---------------------------------------------------------------------------
# Scenario deltas


@dataclass(frozen=True)
class DeltaCandidate:
    name: str
    transaction_behavior: Optional[TransactionBehavior] = None


@dataclass(frozen=True)
class DeltaComponent:
    """Elements to (re)assign to a component, with optional attribute overrides."""

    name: str
    use_cases: tuple[str, ...] = ()
    service_candidates: tuple[DeltaCandidate, ...] = ()
    entity_types: tuple[str, ...] = ()


@dataclass(frozen=True)
class DeltaDataStore:
    name: str
    entity_types: tuple[str, ...] = ()
    conflict_behavior: Optional[ConflictBehavior] = None


@dataclass(frozen=True)
class ScenarioDelta:
    """A partial model expressing changes relative to a base model.

    Component blocks move the listed elements into that component and
    override the listed attributes; connections replace the base connection
    for the same component pair; data-store blocks move entity types between
    stores.  Deletion of model elements is not supported.
    """

    components: tuple[DeltaComponent, ...] = ()
    connections: tuple[Connection, ...] = ()
    data_stores: tuple[DeltaDataStore, ...] = ()

    @property
    def empty(self) -> bool:
        return not (self.components or self.connections or self.data_stores)


def apply_delta(base: DeploymentModel, delta: ScenarioDelta) -> DeploymentModel:
    """Merge a scenario delta into a base model; pure, the base is unmodified.

    Raises MergeError if the delta references elements missing from the base,
    assigns one element twice, or the merged model fails validation.
    """
    # Delta-internal duplicate assignments.
    assigned: dict[tuple[str, str], str] = {}
    for dcomp in delta.components:
        members = (
            [("useCase", uc) for uc in dcomp.use_cases]
            + [("serviceCandidate", c.name) for c in dcomp.service_candidates]
            + [("entityType", et) for et in dcomp.entity_types]
        )
        for kind, name in members:
            key = (kind, name)
            if key in assigned and assigned[key] != dcomp.name:
                raise MergeError(
                    f'{kind} "{name}" assigned to both "{assigned[key]}" and "{dcomp.name}" in the same delta'
                )
            assigned[key] = dcomp.name
    store_assigned: dict[str, str] = {}
    for dstore in delta.data_stores:
        for et in dstore.entity_types:
            if et in store_assigned and store_assigned[et] != dstore.name:
                raise MergeError(
                    f'entity type "{et}" assigned to both data store "{store_assigned[et]}" and "{dstore.name}" in the same delta'
                )
            store_assigned[et] = dstore.name

    # Mutable working copies of the base components.
    comp_use_cases = {c.name: set(c.use_cases) for c in base.components}
    comp_candidates = {c.name: {sc.name: sc for sc in c.service_candidates} for c in base.components}
    comp_entity_types = {c.name: set(c.entity_types) for c in base.components}

    base_cand_owner = dict(base.candidate_owner)
    base_uc_owner = dict(base.use_case_owner)
    base_et_owner = dict(base.entity_type_owner)

    for dcomp in delta.components:
        if dcomp.name not in comp_use_cases:
            comp_use_cases[dcomp.name] = set()
            comp_candidates[dcomp.name] = {}
            comp_entity_types[dcomp.name] = set()
        for uc in dcomp.use_cases:
            old = base_uc_owner.get(uc)
            if old is None:
                raise MergeError(f'delta references unknown use case "{uc}"')
            comp_use_cases[old].discard(uc)
            comp_use_cases[dcomp.name].add(uc)
            base_uc_owner[uc] = dcomp.name
        for dcand in dcomp.service_candidates:
            old = base_cand_owner.get(dcand.name)
            if old is None:
                raise MergeError(f'delta references unknown service candidate "{dcand.name}"')
            current = comp_candidates[old].pop(dcand.name)
            if dcand.transaction_behavior is not None:
                current = replace(current, transaction_behavior=dcand.transaction_behavior)
            comp_candidates[dcomp.name][dcand.name] = current
            base_cand_owner[dcand.name] = dcomp.name
        for et in dcomp.entity_types:
            old = base_et_owner.get(et)
            if old is None:
                raise MergeError(f'delta references unknown entity type "{et}"')
            comp_entity_types[old].discard(et)
            comp_entity_types[dcomp.name].add(et)
            base_et_owner[et] = dcomp.name

    # Connections: a delta connection replaces the base connection for its pair.
    conns = {c.pair: c for c in base.connections}
    for conn in delta.connections:
        conns[conn.pair] = conn

    # Data stores.
    store_entity_types = {s.name: set(s.entity_types) for s in base.data_stores}
    store_behavior = {s.name: s.conflict_behavior for s in base.data_stores}
    base_store_owner = {et: s.name for s in base.data_stores for et in s.entity_types}
    for dstore in delta.data_stores:
        if dstore.name not in store_entity_types:
            store_entity_types[dstore.name] = set()
            store_behavior[dstore.name] = ConflictBehavior.STALE_READ
        if dstore.conflict_behavior is not None:
            store_behavior[dstore.name] = dstore.conflict_behavior
        for et in dstore.entity_types:
            old = base_store_owner.get(et)
            if old is not None:
                store_entity_types[old].discard(et)
            store_entity_types[dstore.name].add(et)
            base_store_owner[et] = dstore.name

    merged = DeploymentModel(
        components=tuple(
            Component(
                name=name,
                use_cases=frozenset(comp_use_cases[name]),
                service_candidates=tuple(comp_candidates[name].values()),
                entity_types=frozenset(comp_entity_types[name]),
            )
            for name in comp_use_cases
        ),
        connections=tuple(conns.values()),
        data_stores=tuple(
            DataStore(name=name, entity_types=frozenset(ets), conflict_behavior=store_behavior[name])
            for name, ets in store_entity_types.items()
        ),
    )
    violations = validate_model(merged)
    if violations:
        raise MergeError(
            "merged model is invalid: " + "; ".join(str(v) for v in violations),
            tuple(violations),
        )
    return merged


# ---------------------------------------------------------------------------
# Queries


def connection_for(model: DeploymentModel, from_component: str, to_component: str) -> Optional[ConnectionView]:
    """Effective connection between two components.

    The intrinsic self-connection of a component is local with zero overhead.
    Returns None when the components are not connected.  Declared connections
    are usable in both directions with identical attributes.
    """
    if from_component not in model.component_names:
        raise UnknownComponentError(from_component)
    if to_component not in model.component_names:
        raise UnknownComponentError(to_component)
    if from_component == to_component:
        return INTERNAL_CONNECTION
    conn = model._connection_by_pair.get(frozenset((from_component, to_component)))
    if conn is None:
        return None
    return ConnectionView(conn.kind, conn.overhead, conn.propagation)


def microservice_groups(model: DeploymentModel) -> list[tuple[frozenset[str], bool]]:
    """Partition components into locally-connected groups and classify each.

    A group is a potential microservice iff every remote connection incident
    to it (including one between two members reachable via local connections)
    has propagation NONE.  Groups are returned sorted by their smallest
    member name; the partition covers every component exactly once.
    """
    parent: dict[str, str] = {c.name: c.name for c in model.components}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for conn in model.connections:
        if conn.kind is ConnectionKind.LOCAL:
            ra, rb = find(conn.source), find(conn.target)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    groups: dict[str, set[str]] = {}
    for name in parent:
        groups.setdefault(find(name), set()).add(name)

    flags: dict[str, bool] = {root: True for root in groups}
    for conn in model.connections:
        if conn.kind is ConnectionKind.REMOTE and conn.propagation is not TransactionPropagation.NONE:
            flags[find(conn.source)] = False
            flags[find(conn.target)] = False

    return sorted(
        ((frozenset(members), flags[root]) for root, members in groups.items()),
        key=lambda item: min(item[0]),
    )
