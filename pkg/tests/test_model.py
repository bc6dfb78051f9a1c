import pytest

from seamsim import (
    Component,
    Connection,
    ConnectionKind,
    DataStore,
    DeploymentModel,
    MergeError,
    ScenarioDelta,
    ServiceCandidate,
    TransactionBehavior,
    TransactionPropagation,
    UnknownComponentError,
    apply_delta,
    connection_for,
    microservice_groups,
    validate_model,
)
from seamsim.model import DeltaCandidate, DeltaComponent


def comp(name, candidates=(), use_cases=(), entity_types=()):
    return Component(
        name=name,
        use_cases=frozenset(use_cases),
        service_candidates=tuple(ServiceCandidate(c) for c in candidates),
        entity_types=frozenset(entity_types),
    )


class TestValidate:
    def test_example_model_is_valid(self, car_model):
        assert validate_model(car_model) == []

    def test_local_connection_with_overhead(self):
        m = DeploymentModel(
            components=(comp("A"), comp("B")),
            connections=(Connection("A", "B", ConnectionKind.LOCAL, overhead=5),),
        )
        codes = [v.code for v in validate_model(m)]
        assert codes == ["LOCAL_CONNECTION_WITH_OVERHEAD"]

    def test_candidate_in_two_components(self):
        m = DeploymentModel(components=(comp("A", ["x"]), comp("B", ["x"])))
        codes = [v.code for v in validate_model(m)]
        assert codes == ["DUPLICATE_ASSIGNMENT"]

    def test_unknown_component_in_connection(self):
        m = DeploymentModel(
            components=(comp("A"),),
            connections=(Connection("A", "B", ConnectionKind.REMOTE),),
        )
        assert "UNKNOWN_COMPONENT" in [v.code for v in validate_model(m)]

    def test_self_connection(self):
        m = DeploymentModel(
            components=(comp("A"),),
            connections=(Connection("A", "A", ConnectionKind.LOCAL),),
        )
        assert "SELF_CONNECTION" in [v.code for v in validate_model(m)]

    def test_duplicate_connection_per_pair(self):
        m = DeploymentModel(
            components=(comp("A"), comp("B")),
            connections=(
                Connection("A", "B", ConnectionKind.LOCAL),
                Connection("B", "A", ConnectionKind.REMOTE, overhead=1),
            ),
        )
        assert "DUPLICATE_CONNECTION" in [v.code for v in validate_model(m)]

    def test_entity_type_in_two_stores(self):
        m = DeploymentModel(
            components=(comp("A", entity_types=["E"]),),
            data_stores=(
                DataStore("S1", frozenset(["E"])),
                DataStore("S2", frozenset(["E"])),
            ),
        )
        assert "DUPLICATE_STORE_ASSIGNMENT" in [v.code for v in validate_model(m)]

    def test_store_with_unknown_entity_type(self):
        m = DeploymentModel(components=(comp("A"),), data_stores=(DataStore("S", frozenset(["E"])),))
        assert "UNKNOWN_ENTITY_TYPE" in [v.code for v in validate_model(m)]


class TestApplyDelta:
    def test_split_scenario(self, car_model, split_delta):
        merged = apply_delta(car_model, split_delta)
        view = connection_for(merged, "Car Insurance", "Contracts")
        assert view.kind is ConnectionKind.REMOTE
        assert view.overhead == 10
        assert view.propagation is TransactionPropagation.NONE
        cand = merged.candidates["createContract"]
        assert cand.transaction_behavior is TransactionBehavior.REQUIRED

    def test_empty_delta_is_identity(self, car_model):
        assert apply_delta(car_model, ScenarioDelta()) == car_model

    def test_move_candidate(self, car_model):
        delta = ScenarioDelta(
            components=(DeltaComponent("Contracts", service_candidates=(DeltaCandidate("createCarContract"),)),)
        )
        merged = apply_delta(car_model, delta)
        assert merged.candidate_owner["createCarContract"] == "Contracts"
        assert merged.component("Car Insurance").candidate("createCarContract") is None
        assert merged.component("Contracts").candidate("createCarContract") is not None

    def test_move_into_new_component(self, car_model):
        delta = ScenarioDelta(
            components=(DeltaComponent("Contracts v2", service_candidates=(DeltaCandidate("createContract"),)),),
            connections=(Connection("Car Insurance", "Contracts v2", ConnectionKind.REMOTE, overhead=3),),
        )
        merged = apply_delta(car_model, delta)
        assert merged.candidate_owner["createContract"] == "Contracts v2"

    def test_unknown_element(self, car_model):
        delta = ScenarioDelta(
            components=(DeltaComponent("Contracts", service_candidates=(DeltaCandidate("nope"),)),)
        )
        with pytest.raises(MergeError):
            apply_delta(car_model, delta)

    def test_base_not_modified(self, car_model, split_delta):
        before = car_model
        apply_delta(car_model, split_delta)
        assert car_model == before
        assert connection_for(car_model, "Car Insurance", "Contracts").kind is ConnectionKind.LOCAL

    def test_idempotent_on_restated_delta(self, car_model, split_delta):
        once = apply_delta(car_model, split_delta)
        twice = apply_delta(once, split_delta)
        assert once == twice

    def test_attribute_override_keeps_unlisted(self, car_model):
        delta = ScenarioDelta(
            components=(
                DeltaComponent(
                    "Car Insurance",
                    service_candidates=(DeltaCandidate("createCarContract", TransactionBehavior.REQUIRES_NEW),),
                ),
            )
        )
        merged = apply_delta(car_model, delta)
        assert merged.candidates["createCarContract"].transaction_behavior is TransactionBehavior.REQUIRES_NEW
        # Everything else untouched.
        assert merged.component("Car Insurance").use_cases == frozenset(["Create Car Contract"])

    def test_store_move_and_override(self, car_model):
        from seamsim.model import ConflictBehavior, DeltaDataStore

        delta = ScenarioDelta(
            data_stores=(
                DeltaDataStore("Contracts DB", entity_types=("CarContract",), conflict_behavior=ConflictBehavior.BLOCK),
            )
        )
        merged = apply_delta(car_model, delta)
        store = merged.store_of_entity_type["CarContract"]
        assert store.name == "Contracts DB"
        assert store.conflict_behavior is ConflictBehavior.BLOCK
        old = [s for s in merged.data_stores if s.name == "Shared Database"]
        assert old and old[0].entity_types == frozenset()


class TestConnectionFor:
    def test_merged_example(self, merged_model):
        view = connection_for(merged_model, "Car Insurance", "Contracts")
        assert (view.kind, view.overhead, view.propagation) == (
            ConnectionKind.REMOTE,
            10,
            TransactionPropagation.NONE,
        )

    def test_self_connection_is_local(self, car_model):
        view = connection_for(car_model, "Contracts", "Contracts")
        assert view.kind is ConnectionKind.LOCAL
        assert view.overhead == 0
        assert view.shares_transactions

    def test_usable_in_both_directions(self, car_model):
        fwd = connection_for(car_model, "Car Insurance", "Contracts")
        rev = connection_for(car_model, "Contracts", "Car Insurance")
        assert fwd == rev
        assert fwd.kind is ConnectionKind.LOCAL

    def test_not_connected(self):
        m = DeploymentModel(components=(comp("A"), comp("B")))
        assert connection_for(m, "A", "B") is None

    def test_unknown_component(self, car_model):
        with pytest.raises(UnknownComponentError):
            connection_for(car_model, "Car Insurance", "Nope")


class TestMicroserviceGroups:
    def test_merged_example_two_groups_flagged(self, merged_model):
        groups = microservice_groups(merged_model)
        assert groups == [
            (frozenset(["Car Insurance"]), True),
            (frozenset(["Contracts"]), True),
        ]

    def test_base_model_single_group(self, car_model):
        groups = microservice_groups(car_model)
        assert groups == [(frozenset(["Car Insurance", "Contracts"]), True)]

    def test_subordinate_propagation_flips_flags(self, car_model, split_delta):
        from dataclasses import replace

        delta = replace(
            split_delta,
            connections=(
                Connection(
                    "Car Insurance", "Contracts", ConnectionKind.REMOTE, 10, TransactionPropagation.SUBORDINATE
                ),
            ),
        )
        merged = apply_delta(car_model, delta)
        groups = microservice_groups(merged)
        assert groups == [
            (frozenset(["Car Insurance"]), False),
            (frozenset(["Contracts"]), False),
        ]

    def test_partition_covers_every_component(self, merged_model, car_model):
        for model in (merged_model, car_model):
            groups = microservice_groups(model)
            seen = [name for members, _ in groups for name in members]
            assert sorted(seen) == sorted(c.name for c in model.components)
