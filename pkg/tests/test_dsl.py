import string

from hypothesis import given, settings
from hypothesis import strategies as st

from seamsim import (
    ConnectionKind,
    TransactionBehavior,
    TransactionPropagation,
    parse_delta,
    parse_model,
    serialize_model,
)
from seamsim.dsl import Severity
from tests.conftest import CAR_INSURANCE_MODEL, SPLIT_CONTRACTS_SCENARIO


class TestParseModel:
    def test_example_listing(self):
        result = parse_model(CAR_INSURANCE_MODEL)
        assert result.ok
        model = result.value
        assert len(model.components) == 2
        assert len(model.connections) == 1
        assert model.connections[0].kind is ConnectionKind.LOCAL
        assert len(model.data_stores) == 1
        assert model.store_of_entity_type["CarContract"].name == "Shared Database"
        ci = model.component("Car Insurance")
        assert ci.use_cases == frozenset(["Create Car Contract"])
        assert ci.candidate("createCarContract").transaction_behavior is TransactionBehavior.REQUIRED

    def test_empty_input_is_empty_model(self):
        result = parse_model("")
        assert result.ok
        assert result.value.components == ()

    def test_unknown_component_reference(self):
        result = parse_model('local "A" -> "B"\n')
        assert not result.ok
        messages = [d.message for d in result.errors]
        assert any('unknown component "A"' in m for m in messages)
        err = result.errors[0]
        assert err.span.line == 1
        assert err.span.column == 7

    def test_duplicate_candidate_has_position(self):
        text = 'component "A" { serviceCandidate x }\ncomponent "B" { serviceCandidate x }\n'
        result = parse_model(text)
        assert not result.ok
        err = result.errors[0]
        assert "x" in err.message
        assert err.span.line == 1

    def test_unterminated_string(self):
        result = parse_model('component "A { }')
        assert not result.ok
        assert any("unterminated string" in d.message for d in result.errors)

    def test_unknown_attribute_is_warning(self):
        result = parse_model('component "A" { serviceCandidate x [ color = red ] }')
        assert result.ok
        assert [d.severity for d in result.diagnostics] == [Severity.WARNING]

    def test_comments_and_whitespace(self):
        text = '// a comment\ncomponent "A" {\n  // inner\n  serviceCandidate x\n}\n'
        result = parse_model(text)
        assert result.ok
        assert result.value.candidate_owner["x"] == "A"

    def test_bad_behavior_value(self):
        result = parse_model('component "A" { serviceCandidate x [ transactionBehavior = SOMETIMES ] }')
        assert not result.ok

    def test_propagation_on_local_is_error(self):
        result = parse_model(
            'component "A" { serviceCandidate x }\ncomponent "B" { serviceCandidate y }\n'
            'local "A" -> "B" [ transactionPropagation = subordinate ]\n'
        )
        assert not result.ok

    def test_recovery_reports_multiple_errors(self):
        result = parse_model('component { }\ncomponent "B" { serviceCandidate x }\nlocal "B" -> "C"')
        assert not result.ok
        assert len(result.errors) >= 2


class TestParseDelta:
    def test_example_scenario(self):
        result = parse_delta(SPLIT_CONTRACTS_SCENARIO)
        assert result.ok
        delta = result.value
        assert len(delta.components) == 1
        assert delta.components[0].service_candidates[0].transaction_behavior is TransactionBehavior.REQUIRED
        assert len(delta.connections) == 1
        conn = delta.connections[0]
        assert conn.kind is ConnectionKind.REMOTE
        assert conn.overhead == 10
        assert conn.propagation is TransactionPropagation.NONE

    def test_negative_overhead(self):
        result = parse_delta('remote "A" -> "B" [ overhead = -1 ]')
        assert not result.ok
        assert any("negative overhead" in d.message for d in result.errors)

    def test_reassign_with_behavior(self):
        result = parse_delta('component "X" { serviceCandidate y [ transactionBehavior = REQUIRES_NEW ] }')
        assert result.ok
        dcomp = result.value.components[0]
        assert dcomp.name == "X"
        assert dcomp.service_candidates[0].name == "y"
        assert dcomp.service_candidates[0].transaction_behavior is TransactionBehavior.REQUIRES_NEW

    def test_unresolved_references_allowed(self):
        result = parse_delta('component "X" { serviceCandidate ghost }')
        assert result.ok

    def test_duplicate_assignment_in_delta(self):
        result = parse_delta('component "X" { serviceCandidate y }\ncomponent "Z" { serviceCandidate y }')
        assert not result.ok

    def test_multi_attribute_list(self):
        result = parse_delta('remote "A" -> "B" [ overhead = 5, transactionPropagation = subordinate ]')
        assert result.ok
        conn = result.value.connections[0]
        assert conn.overhead == 5
        assert conn.propagation is TransactionPropagation.SUBORDINATE


class TestSerialize:
    def test_round_trip_example(self, car_model):
        text = serialize_model(car_model)
        again = parse_model(text)
        assert again.ok
        assert again.value == car_model

    def test_empty_model(self):
        from seamsim import DeploymentModel

        assert serialize_model(DeploymentModel()) == ""

    def test_merged_model_text(self, merged_model):
        text = serialize_model(merged_model)
        assert 'remote "Car Insurance" -> "Contracts"' in text
        assert "overhead = 10" in text
        again = parse_model(text)
        assert again.ok and again.value == merged_model


# -- property tests

_name = st.text(alphabet=string.ascii_letters + " _0123456789", min_size=1, max_size=12).map(str.strip).filter(bool)
_ident = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,10}", fullmatch=True).filter(lambda s: s not in
    {"component", "useCase", "serviceCandidate", "entityType", "dataStore", "local", "remote"})


@st.composite
def models(draw):
    from seamsim import Component, Connection, DataStore, DeploymentModel, ServiceCandidate

    comp_names = draw(st.lists(_name, min_size=0, max_size=4, unique=True))
    idents = draw(st.lists(_ident, min_size=0, max_size=8, unique=True))
    use_cases = draw(st.lists(_name.filter(lambda n: n not in comp_names), min_size=0, max_size=3, unique=True))
    components = []
    remaining_idents = list(idents)
    remaining_ucs = list(use_cases)
    for name in comp_names:
        n_cand = draw(st.integers(0, min(2, len(remaining_idents))))
        cands = [remaining_idents.pop() for _ in range(n_cand)]
        n_et = draw(st.integers(0, min(2, len(remaining_idents))))
        ets = [remaining_idents.pop() for _ in range(n_et)]
        n_uc = draw(st.integers(0, min(2, len(remaining_ucs))))
        ucs = [remaining_ucs.pop() for _ in range(n_uc)]
        components.append(
            Component(
                name=name,
                use_cases=frozenset(ucs),
                service_candidates=tuple(
                    ServiceCandidate(c, draw(st.sampled_from(list(TransactionBehavior)))) for c in cands
                ),
                entity_types=frozenset(ets),
            )
        )
    connections = []
    pairs = [(a, b) for i, a in enumerate(comp_names) for b in comp_names[i + 1 :]]
    for a, b in pairs:
        choice = draw(st.integers(0, 2))
        if choice == 1:
            connections.append(Connection(a, b, ConnectionKind.LOCAL))
        elif choice == 2:
            connections.append(
                Connection(
                    a, b, ConnectionKind.REMOTE,
                    overhead=draw(st.integers(0, 100)),
                    propagation=draw(st.sampled_from(list(TransactionPropagation))),
                )
            )
    stores = []
    all_ets = [et for c in components for et in sorted(c.entity_types)]
    if all_ets and draw(st.booleans()):
        from seamsim.model import ConflictBehavior

        stores.append(
            DataStore("store", frozenset(all_ets[:2]), draw(st.sampled_from(list(ConflictBehavior))))
        )
    return DeploymentModel(tuple(components), tuple(connections), tuple(stores))


@given(models())
@settings(max_examples=60, deadline=None)
def test_round_trip_property(model):
    from seamsim import validate_model

    assert validate_model(model) == []
    text = serialize_model(model)
    result = parse_model(text)
    assert result.ok, [str(d) for d in result.diagnostics]
    assert result.value == model


@given(st.text(max_size=200))
@settings(max_examples=120, deadline=None)
def test_parser_never_raises(text):
    result = parse_model(text)
    n_lines = text.count("\n") + 1
    for d in result.diagnostics:
        assert 1 <= d.span.line <= n_lines
        assert d.span.column >= 1
    parse_delta(text)


@given(st.binary(max_size=120))
@settings(max_examples=60, deadline=None)
def test_parser_survives_arbitrary_bytes(data):
    parse_model(data.decode("utf-8", errors="replace"))
