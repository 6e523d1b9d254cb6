import random

import pytest

from conftest import FIG8_SELECTED, complete_config
from generators import random_model, random_partial_config
from oracle import dp_count_products, free_features, naive_completions
from xrforge import (
    Configuration,
    Dependency,
    DependencyKind,
    Feature,
    FeatureKind,
    GroupCardinality,
    ModelMismatch,
    ModelTooLarge,
    Optionality,
    RequiresAny,
    Rule,
    State,
    StructureError,
    ValidationMode,
    build_model,
    builtin_webxr_model,
    config_digest,
    count_products,
    enumerate_completions,
    iter_completions,
    parse_config,
    propagate,
    serialize_config,
    validate,
)

M, O = Optionality.MANDATORY, Optionality.OPTIONAL
VP, V, I = FeatureKind.VARIATION_POINT, FeatureKind.VARIANT, FeatureKind.INVARIABLE
PARTIAL, COMPLETE = ValidationMode.PARTIAL, ValidationMode.COMPLETE


def feat(fid, kind=I, opt=M, parent=None, group=None):
    return Feature(fid, fid.upper(), opt, kind, group=group, parent=parent)


def rules_of(diags):
    return [d.rule for d in diags]


@pytest.fixture()
def alt_model():
    # root > alternative {a, b}, optional c
    return build_model([
        feat("root", kind=VP, group=GroupCardinality(1, 1)),
        feat("a", kind=V, opt=O, parent="root"),
        feat("b", kind=V, opt=O, parent="root"),
        feat("c", opt=O, parent="root"),
    ])


class TestConfiguration:
    def test_undecided_by_default(self, model):
        config = Configuration(model)
        assert config.state("avatar") is State.UNDECIDED
        assert not config.is_complete
        assert config.decisions() == {}

    def test_decide_is_functional(self, model):
        base = Configuration(model)
        changed = base.decide("avatar", State.SELECTED)
        assert base.state("avatar") is State.UNDECIDED
        assert changed.state("avatar") is State.SELECTED

    def test_decide_back_to_undecided(self, model):
        config = Configuration(model, {"avatar": "selected"})
        assert config.decide("avatar", "undecided").decisions() == {}

    def test_decisions_follow_declaration_order(self, model):
        config = Configuration(model, {"avatar": "selected", "platform": "deselected"})
        assert list(config.decisions()) == ["platform", "avatar"]

    def test_unknown_feature_rejected(self, model):
        with pytest.raises(StructureError, match="undeclared feature"):
            Configuration(model, {"flux-capacitor": "selected"})
        with pytest.raises(StructureError, match="unknown feature"):
            Configuration(model).state("flux-capacitor")

    def test_equality(self, model):
        a = Configuration(model, {"avatar": "selected"})
        b = Configuration(model).decide("avatar", "selected")
        assert a == b
        assert a != b.decide("platform", "selected")

    def test_complete_config_reports_complete(self, fig8_config):
        assert fig8_config.is_complete
        assert "tactile" in fig8_config.selected()


class TestValidateRules:
    def test_all_undecided_partial_is_clean(self, model):
        assert validate(model, Configuration(model), PARTIAL) == ()

    def test_fig8_complete_is_clean(self, model, fig8_config):
        assert validate(model, fig8_config, COMPLETE) == ()

    def test_root_deselected(self, model):
        config = Configuration(model, {"web-xr-app": "deselected"})
        for mode in (PARTIAL, COMPLETE):
            diags = validate(model, config, mode)
            assert Rule.ROOT_DESELECTED in rules_of(diags)

    def test_root_undecided_flagged_only_when_complete(self, model):
        config = Configuration(model)
        assert Rule.ROOT_DESELECTED in rules_of(validate(model, config, COMPLETE))
        assert Rule.ROOT_DESELECTED not in rules_of(validate(model, config, PARTIAL))

    def test_mandatory_child_missing(self):
        m = build_model([feat("root"), feat("kid", parent="root")])
        undecided = Configuration(m, {"root": "selected"})
        assert rules_of(validate(m, undecided, COMPLETE)) == [Rule.MANDATORY_CHILD_MISSING]
        assert validate(m, undecided, PARTIAL) == ()
        refused = undecided.decide("kid", "deselected")
        diags = validate(m, refused, PARTIAL)
        assert rules_of(diags) == [Rule.MANDATORY_CHILD_MISSING]
        assert diags[0].features == ("kid", "root")

    def test_selected_feature_under_deselected_ancestor(self):
        m = build_model([
            feat("root"),
            feat("mid", opt=O, parent="root"),
            feat("leaf", opt=O, parent="mid"),
        ])
        config = Configuration(m, {"root": "selected", "mid": "deselected",
                                   "leaf": "selected"})
        for mode in (PARTIAL, COMPLETE):
            diags = validate(m, config, mode)
            assert (Rule.VARIANT_WITHOUT_PARENT, ("leaf", "mid")) in [
                (d.rule, d.features) for d in diags
            ]

    def test_partial_walks_past_undecided_ancestors(self):
        m = build_model([
            feat("root"),
            feat("a", opt=O, parent="root"),
            feat("b", opt=O, parent="a"),
            feat("leaf", opt=O, parent="b"),
        ])
        config = Configuration(m, {"leaf": "selected", "a": "deselected"})
        diags = validate(m, config, PARTIAL)
        assert [(d.rule, d.features) for d in diags] == [
            (Rule.VARIANT_WITHOUT_PARENT, ("leaf", "a"))
        ]

    def test_group_maximum(self, alt_model):
        config = Configuration(alt_model, {"root": "selected", "a": "selected",
                                           "b": "selected"})
        for mode in (PARTIAL, COMPLETE):
            assert Rule.GROUP_CARDINALITY_VIOLATED in rules_of(validate(alt_model, config, mode))

    def test_group_minimum_complete_only_until_unreachable(self, alt_model):
        config = Configuration(alt_model, {"root": "selected"})
        assert Rule.GROUP_CARDINALITY_VIOLATED in rules_of(validate(alt_model, config, COMPLETE))
        assert validate(alt_model, config, PARTIAL) == ()
        dead = config.decide("a", "deselected").decide("b", "deselected")
        assert Rule.GROUP_CARDINALITY_VIOLATED in rules_of(validate(alt_model, dead, PARTIAL))

    def test_requires(self):
        m = build_model(
            [feat("root"), feat("x", opt=O, parent="root"), feat("y", opt=O, parent="root")],
            [Dependency("x", DependencyKind.REQUIRES, "y")],
        )
        broken = Configuration(m, {"root": "selected", "x": "selected", "y": "deselected"})
        for mode in (PARTIAL, COMPLETE):
            diags = validate(m, broken, mode)
            assert [(d.rule, d.features) for d in diags] == [
                (Rule.REQUIRES_VIOLATED, ("x", "y"))
            ]
        open_target = Configuration(m, {"root": "selected", "x": "selected"})
        assert Rule.REQUIRES_VIOLATED in rules_of(validate(m, open_target, COMPLETE))
        assert validate(m, open_target, PARTIAL) == ()

    def test_excludes(self):
        m = build_model(
            [feat("root"), feat("x", opt=O, parent="root"), feat("y", opt=O, parent="root")],
            [Dependency("x", DependencyKind.EXCLUDES, "y")],
        )
        both = Configuration(m, {"root": "selected", "x": "selected", "y": "selected"})
        for mode in (PARTIAL, COMPLETE):
            assert Rule.EXCLUDES_VIOLATED in rules_of(validate(m, both, mode))
        one = both.decide("y", "undecided")
        assert validate(m, one, PARTIAL) == ()

    def test_requires_any(self):
        m = build_model(
            [feat("root"), feat("s", opt=O, parent="root"),
             feat("t1", opt=O, parent="root"), feat("t2", opt=O, parent="root")],
            constraints=[RequiresAny("s", ("t1", "t2"))],
        )
        none_left = Configuration(m, {"root": "selected", "s": "selected",
                                      "t1": "deselected", "t2": "deselected"})
        for mode in (PARTIAL, COMPLETE):
            diags = validate(m, none_left, mode)
            assert [(d.rule, d.features) for d in diags] == [
                (Rule.REQUIRES_ANY_VIOLATED, ("s", "t1", "t2"))
            ]
        open_target = Configuration(m, {"root": "selected", "s": "selected",
                                        "t1": "deselected"})
        assert Rule.REQUIRES_ANY_VIOLATED in rules_of(validate(m, open_target, COMPLETE))
        assert validate(m, open_target, PARTIAL) == ()

    def test_builtin_requires_example(self, model):
        config = complete_config(
            builtin_webxr_model(),
            (FIG8_SELECTED - {"wearable"}),
        )
        diags = validate(model, config, COMPLETE)
        assert [(d.rule, d.features) for d in diags] == [
            (Rule.REQUIRES_VIOLATED, ("tactile", "wearable"))
        ]

    def test_mode_accepts_plain_strings(self, model, fig8_config):
        assert validate(model, fig8_config, "complete") == ()

    def test_foreign_model_rejected(self, fig8_config):
        other = build_model([feat("root")])
        with pytest.raises(ModelMismatch):
            validate(other, fig8_config)

    def test_equal_model_copy_accepted(self, fig8_config):
        clone = builtin_webxr_model.__wrapped__() if hasattr(builtin_webxr_model, "__wrapped__") \
            else builtin_webxr_model()
        assert validate(clone, fig8_config, COMPLETE) == ()


class TestPropagate:
    def test_empty_configuration_forces_root_and_mandatory_spine(self, model):
        result = propagate(model, Configuration(model))
        assert result.conflict is None
        forced = {fd.feature: fd.state for fd in result.forced}
        assert forced["web-xr-app"] is State.SELECTED
        for fid in ("platform", "multimodal-interfaces", "xr-modality",
                    "devices", "browser", "avatar", "virtual-world"):
            assert forced[fid] is State.SELECTED
        assert result.configuration.state("interaction-events") is State.UNDECIDED
        assert result.configuration.state("wearable") is State.UNDECIDED

    def test_alternative_choice_excludes_sibling(self, model):
        result = propagate(model, Configuration(model, {"virtual-reality": "selected"}))
        assert result.conflict is None
        assert result.configuration.state("mixed-reality") is State.DESELECTED
        by_feature = {fd.feature: fd for fd in result.forced}
        assert by_feature["mixed-reality"].rule is Rule.GROUP_CARDINALITY_VIOLATED

    def test_requires_chain_forces_target(self, model):
        result = propagate(model, Configuration(model, {"tactile": "selected"}))
        assert result.conflict is None
        assert result.configuration.state("wearable") is State.SELECTED
        by_feature = {fd.feature: fd for fd in result.forced}
        assert by_feature["wearable"].rule is Rule.REQUIRES_VIOLATED

    def test_forced_decisions_carry_rules_and_reach_fixpoint(self, model):
        result = propagate(model, Configuration(model, {"hololens": "selected"}))
        assert result.conflict is None
        state = result.configuration.state
        assert state("devices") is State.SELECTED
        assert state("mixed-reality") is State.SELECTED
        assert state("virtual-reality") is State.DESELECTED

    def test_direct_contradiction_is_conflict(self, model):
        config = Configuration(model, {"tactile": "selected", "wearable": "deselected"})
        result = propagate(model, config)
        assert result.conflict is not None
        assert result.conflict.rule is Rule.REQUIRES_VIOLATED

    def test_group_overflow_is_conflict(self, model):
        config = Configuration(model, {"virtual-reality": "selected",
                                       "mixed-reality": "selected"})
        result = propagate(model, config)
        assert result.conflict is not None
        assert result.conflict.rule is Rule.GROUP_CARDINALITY_VIOLATED

    def test_unit_clean_dead_end_found_by_search(self):
        m = build_model(
            [feat("root"), feat("s", opt=O, parent="root"),
             feat("x", opt=O, parent="root"), feat("y", opt=O, parent="root"),
             feat("t", opt=O, parent="root")],
            [Dependency("x", DependencyKind.REQUIRES, "t"),
             Dependency("y", DependencyKind.REQUIRES, "t")],
            [RequiresAny("s", ("x", "y"))],
        )
        result = propagate(m, Configuration(m, {"s": "selected", "t": "deselected"}))
        assert result.conflict is not None
        assert result.conflict.message.startswith("no valid completion exists")
        # the fixpoint itself stayed unit-clean
        assert result.configuration.state("x") is State.UNDECIDED

    def test_propagate_is_deterministic(self, model):
        config = Configuration(model, {"hololens": "selected"})
        first = propagate(model, config)
        second = propagate(model, config)
        assert first.forced == second.forced
        assert first.configuration == second.configuration

    def test_input_decisions_are_not_reported_as_forced(self, model):
        result = propagate(model, Configuration(model, {"tactile": "selected"}))
        assert "tactile" not in {fd.feature for fd in result.forced}

    def test_soundness_against_exhaustive_oracle(self):
        for seed in range(25):
            m = random_model(random.Random(seed))
            if len(free_features(m)) > 12:
                continue
            for cseed in range(4):
                config = random_partial_config(random.Random(seed * 100 + cseed), m)
                result = propagate(m, config)
                completions = naive_completions(m, config)
                assert (result.conflict is not None) == (not completions)
                for fd in result.forced:
                    want = fd.state is State.SELECTED
                    assert all(c[fd.feature] == want for c in completions)


class TestEnumerate:
    def test_alternative_with_option_has_four_products(self, alt_model):
        result = enumerate_completions(alt_model)
        assert result.total == 4
        assert not result.truncated
        assert [c.selected() for c in result.configurations] == [
            ("root", "b"), ("root", "b", "c"), ("root", "a"), ("root", "a", "c"),
        ]

    def test_or_group_has_three_products(self):
        m = build_model([
            feat("root", kind=VP, group=GroupCardinality(1, 2)),
            feat("a", kind=V, opt=O, parent="root"),
            feat("b", kind=V, opt=O, parent="root"),
        ])
        assert count_products(m) == 3

    def test_single_feature_model_has_one_product(self):
        assert count_products(build_model([feat("root")])) == 1

    def test_decisions_filter_completions(self, alt_model):
        pinned = Configuration(alt_model, {"a": "selected"})
        result = enumerate_completions(alt_model, pinned)
        assert result.total == 2
        assert all(c.state("a") is State.SELECTED for c in result.configurations)

    def test_conflicting_decisions_enumerate_to_zero(self, alt_model):
        dead = Configuration(alt_model, {"a": "selected", "b": "selected"})
        result = enumerate_completions(alt_model, dead)
        assert result.total == 0
        assert result.configurations == ()

    def test_limit_and_truncation(self, alt_model):
        result = enumerate_completions(alt_model, limit=3)
        assert result.total == 4
        assert result.truncated
        assert len(result.configurations) == 3
        assert result.configurations == enumerate_completions(alt_model).configurations[:3]

    def test_limit_zero_counts_only(self, alt_model):
        result = enumerate_completions(alt_model, limit=0)
        assert (result.total, result.configurations, result.truncated) == (4, (), True)

    def test_completions_are_complete_and_valid(self, alt_model):
        for config in enumerate_completions(alt_model).configurations:
            assert config.is_complete
            assert validate(alt_model, config, COMPLETE) == ()

    def test_iter_matches_enumerate(self, alt_model):
        assert tuple(iter_completions(alt_model)) == enumerate_completions(alt_model).configurations

    def test_agreement_with_naive_and_dp_oracles(self):
        for seed in range(20):
            m = random_model(random.Random(seed))
            if len(free_features(m)) > 12:
                continue
            naive = naive_completions(m)
            result = enumerate_completions(m)
            assert result.total == len(naive) == dp_count_products(m)
            for config, full in zip(result.configurations, naive):
                assert set(config.selected()) == {f for f, v in full.items() if v}

    def test_deciding_never_adds_products(self):
        for seed in range(10):
            m = random_model(random.Random(seed))
            base = enumerate_completions(m, limit=0).total
            config = random_partial_config(random.Random(seed + 999), m)
            narrowed = enumerate_completions(m, config, limit=0).total
            assert narrowed <= base

    def test_child_declared_before_parent_keeps_lexicographic_order(self):
        m = build_model([
            feat("root"),
            feat("early", parent="late"),
            feat("v", opt=O, parent="root"),
            feat("late", opt=O, parent="root"),
        ])
        got = [c.selected() for c in enumerate_completions(m).configurations]
        assert got == [
            ("root",), ("root", "v"),
            ("root", "early", "late"), ("root", "early", "v", "late"),
        ]

    def test_too_many_features_guarded(self):
        wide = build_model(
            [feat("root")] + [feat(f"f{i}", parent="root") for i in range(70)]
        )
        with pytest.raises(ModelTooLarge, match="caps at 64"):
            enumerate_completions(wide)

    def test_too_many_undecided_guarded(self):
        deep = build_model(
            [feat("root")] + [feat(f"f{i}", opt=O, parent="root") for i in range(30)]
        )
        with pytest.raises(ModelTooLarge, match="undecided free"):
            count_products(deep)
        # unit propagation still runs; only the dead-end search is skipped
        assert propagate(deep, Configuration(deep)).conflict is None

    def test_builtin_count_matches_golden(self, model):
        from conftest import GOLDEN_DIR
        golden = int((GOLDEN_DIR / "builtin_product_count.txt").read_text())
        assert count_products(model) == golden


class TestConfigDocuments:
    def test_round_trip(self, model, fig8_config):
        text = serialize_config(fig8_config)
        assert parse_config(text, model) == fig8_config

    def test_round_trip_random(self):
        for seed in range(20):
            m = random_model(random.Random(seed))
            config = random_partial_config(random.Random(seed + 1), m)
            assert parse_config(serialize_config(config), m) == config

    def test_serialization_is_canonical(self, model):
        a = Configuration(model, {"avatar": "selected", "platform": "deselected"})
        b = Configuration(model, {"platform": "deselected", "avatar": "selected"})
        assert serialize_config(a) == serialize_config(b)

    def test_builtin_reference_accepted(self, model):
        doc = '{"model": "builtin", "decisions": [{"feature": "tactile", "state": "selected"}]}'
        config = parse_config(doc, model)
        assert config.state("tactile") is State.SELECTED

    def test_builtin_reference_rejected_for_other_models(self, alt_model):
        doc = '{"model": "builtin", "decisions": []}'
        with pytest.raises(ModelMismatch):
            parse_config(doc, alt_model)

    def test_digest_reference_must_match(self, model, alt_model):
        doc = serialize_config(Configuration(alt_model, {"c": "selected"}))
        with pytest.raises(ModelMismatch):
            parse_config(doc, model)

    def test_undecided_state_rejected_in_documents(self, model):
        doc = '{"model": "builtin", "decisions": [{"feature": "avatar", "state": "undecided"}]}'
        with pytest.raises(StructureError, match="selected or deselected"):
            parse_config(doc, model)

    def test_duplicate_decision_rejected(self, model):
        doc = ('{"model": "builtin", "decisions": ['
               '{"feature": "avatar", "state": "selected"},'
               '{"feature": "avatar", "state": "deselected"}]}')
        with pytest.raises(StructureError, match="duplicate decision"):
            parse_config(doc, model)

    def test_unknown_key_rejected(self, model):
        doc = '{"model": "builtin", "decisions": [], "notes": "hi"}'
        with pytest.raises(StructureError, match="unknown top-level key"):
            parse_config(doc, model)

    def test_config_digest_tracks_decisions(self, model):
        a = Configuration(model, {"avatar": "selected"})
        b = Configuration(model, {"avatar": "deselected"})
        assert config_digest(a) != config_digest(b)
        assert config_digest(a) == config_digest(Configuration(model, {"avatar": "selected"}))
        assert len(config_digest(a)) == 16
