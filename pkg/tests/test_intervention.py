import itertools

import numpy as np
import pytest

from causalbn.bayesnet import Cpt, DiscreteBayesNet, Variable, joint, query
from causalbn.errors import PositivityViolation, SizeCapExceeded
from causalbn.graph import Dag, backdoor_admissible
from causalbn.intervention import (
    InterventionQuery,
    ace,
    adjusted_estimate,
    conditioning_bias,
    effect_report,
    interventional_distribution,
    select_sufficient_confounders,
    unadjusted_estimate,
)
from causalbn.latent import DEFAULT_PARAMS, TEMPLATES, ScenarioParams, build_scenario
from causalbn.modelfile import load_model

from oracles import brute_do, random_cpts


def random_scenario(template, rng, lo=0.05, hi=0.95):
    keys = TEMPLATES[template].param_keys()
    params = {k: float(rng.uniform(lo, hi)) for k in keys}
    return build_scenario(ScenarioParams(template, params))


class TestInterventionalDistribution:
    def test_fig1_left(self):
        net = load_model("fig1_left")
        d = interventional_distribution(InterventionQuery("Y", {"Z": "1"}, net))
        assert d.prob({"Y": "1"}) == pytest.approx(0.75, abs=1e-12)

    def test_fig1_right_equals_conditional(self):
        net = load_model("fig1_right")
        for level in ("0", "1"):
            d = interventional_distribution(InterventionQuery("Y", {"Z": level}, net))
            c = query(net, ["Y"], {"Z": level})
            assert np.max(np.abs(d.values - c.values)) < 1e-12

    def test_model_b_do_equals_conditional(self):
        net = load_model("modelB")
        for level in ("0", "1"):
            d = interventional_distribution(InterventionQuery("Y", {"Z": level}, net))
            c = query(net, ["Y"], {"Z": level})
            assert np.max(np.abs(d.values - c.values)) < 1e-12

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(31)
        for template in ("modelB", "modelC", "modelD", "model1_fig2"):
            for _ in range(20):
                net = random_scenario(template, rng)
                for level in ("0", "1"):
                    got = interventional_distribution(
                        InterventionQuery("Y", {"Z": level}, net)
                    )
                    want = brute_do(net, "Y", {"Z": level})
                    for state, p in want.items():
                        assert abs(got.prob({"Y": state}) - p) < 1e-12

    def test_parentless_do_equals_conditioning(self):
        # intervening on a root node is the same as observing it
        rng = np.random.default_rng(37)
        dag = Dag.from_edges(("A", "B", "C"), [("A", "B"), ("A", "C"), ("B", "C")])
        for _ in range(50):
            net = random_cpts(dag, rng)
            d = interventional_distribution(InterventionQuery("C", {"A": "1"}, net))
            c = query(net, ["C"], {"A": "1"})
            assert np.max(np.abs(d.values - c.values)) < 1e-12


class TestAce:
    def test_fig1_left(self):
        assert ace(load_model("fig1_left"), "Z", "Y") == pytest.approx(0.45, abs=1e-12)

    def test_model_b_example(self):
        assert ace(load_model("modelB"), "Z", "Y") == pytest.approx(0.32, abs=1e-12)

    def test_no_effect(self):
        dag = Dag.from_edges(("Z", "Y"), [("Z", "Y")])
        net = DiscreteBayesNet(
            dag,
            {n: Variable(n, ("0", "1")) for n in "ZY"},
            {
                "Z": Cpt("Z", (), [[0.3, 0.7]]),
                "Y": Cpt("Y", ("Z",), [[0.4, 0.6], [0.4, 0.6]]),
            },
        )
        assert ace(net, "Z", "Y") == pytest.approx(0.0, abs=1e-15)


class TestAdjustedEstimate:
    def test_fig1_left_backdoor_set(self):
        net = load_model("fig1_left")
        adj = adjusted_estimate(net, "Z", "Y", {"X"})
        assert adj["1"].prob({"Y": "1"}) == pytest.approx(0.75, abs=1e-12)

    def test_empty_set_is_unadjusted(self):
        net = load_model("fig1_left")
        adj = adjusted_estimate(net, "Z", "Y", set())
        unadj = unadjusted_estimate(net, "Z", "Y")
        for level in ("0", "1"):
            assert np.max(np.abs(adj[level].values - unadj[level].values)) < 1e-12

    def test_model_b_biased(self):
        net = load_model("modelB")
        adj = adjusted_estimate(net, "Z", "Y", {"X"})
        assert abs(adj["1"].prob({"Y": "1"}) - 0.70) > 1e-6

    def test_positivity_violation(self):
        dag = Dag.from_edges(("X", "Z", "Y"), [("X", "Z"), ("Z", "Y"), ("X", "Y")])
        net = DiscreteBayesNet(
            dag,
            {n: Variable(n, ("0", "1")) for n in "XZY"},
            {
                "X": Cpt("X", (), [[0.5, 0.5]]),
                "Z": Cpt("Z", ("X",), [[1.0, 0.0], [0.5, 0.5]]),  # z=1 impossible at x=0
                "Y": Cpt("Y", ("Z", "X"), [[0.9, 0.1]] * 4),
            },
        )
        with pytest.raises(PositivityViolation):
            adjusted_estimate(net, "Z", "Y", {"X"})

    def test_admissible_implies_truth(self):
        # cross-module: back-door admissible set => adjustment is exact
        rng = np.random.default_rng(41)
        for template in ("model1_fig1", "modelB", "model1_fig2"):
            tpl = TEMPLATES[template]
            dag = Dag(tpl.nodes, tpl.parents)
            pool = [n for n in tpl.nodes if n not in ("Z", "Y")]
            admissible = [
                set(s)
                for r in range(len(pool) + 1)
                for s in itertools.combinations(pool, r)
                if backdoor_admissible(dag, "Z", "Y", set(s))
            ]
            assert admissible
            for _ in range(100):
                net = random_scenario(template, rng)
                for s in admissible:
                    adj = adjusted_estimate(net, "Z", "Y", s)
                    for level in ("0", "1"):
                        truth = interventional_distribution(
                            InterventionQuery("Y", {"Z": level}, net)
                        )
                        assert np.max(np.abs(adj[level].values - truth.values)) < 1e-10


class TestUnadjusted:
    def test_model_b_truth(self):
        unadj = unadjusted_estimate(load_model("modelB"), "Z", "Y")
        assert unadj["1"].prob({"Y": "1"}) == pytest.approx(0.70, abs=1e-12)

    def test_fig1_left_confounded(self):
        unadj = unadjusted_estimate(load_model("fig1_left"), "Z", "Y")
        assert unadj["1"].prob({"Y": "1"}) == pytest.approx(0.84, abs=1e-12)

    def test_isolated_treatment(self):
        dag = Dag(("Z", "Y"), {"Z": (), "Y": ()})
        net = DiscreteBayesNet(
            dag,
            {n: Variable(n, ("0", "1")) for n in "ZY"},
            {"Z": Cpt("Z", (), [[0.4, 0.6]]), "Y": Cpt("Y", (), [[0.3, 0.7]])},
        )
        unadj = unadjusted_estimate(net, "Z", "Y")
        marg = joint(net).marginal({"Y"})
        for level in ("0", "1"):
            assert np.max(np.abs(unadj[level].values - marg.values)) < 1e-12


class TestConditioningBias:
    def test_two_route_identity_model_b(self):
        net = load_model("modelB")
        rep = effect_report(net, "Z", "Y", [("X",)])
        direct = conditioning_bias(net, "Z", "Y", "X")
        assert direct != 0.0
        assert abs(direct - (rep.ace_adjusted[("X",)] - rep.ace_unadjusted)) < 1e-12

    def test_two_route_identity_random(self):
        rng = np.random.default_rng(43)
        for template in ("modelB", "modelC", "modelD"):
            for _ in range(100):
                net = random_scenario(template, rng)
                rep = effect_report(net, "Z", "Y", [("X",)])
                direct = conditioning_bias(net, "Z", "Y", "X")
                assert abs(direct - (rep.ace_adjusted[("X",)] - rep.ace_unadjusted)) < 1e-12

    def test_independent_covariate_zero(self):
        dag = Dag(("X", "Z", "Y"), {"X": (), "Z": (), "Y": ("Z",)})
        net = DiscreteBayesNet(
            dag,
            {n: Variable(n, ("0", "1")) for n in "XZY"},
            {
                "X": Cpt("X", (), [[0.35, 0.65]]),
                "Z": Cpt("Z", (), [[0.5, 0.5]]),
                "Y": Cpt("Y", ("Z",), [[0.8, 0.2], [0.3, 0.7]]),
            },
        )
        assert conditioning_bias(net, "Z", "Y", "X") == pytest.approx(0.0, abs=1e-15)


class TestSelection:
    def test_fig1_left(self):
        assert select_sufficient_confounders(load_model("fig1_left"), "Z", "Y").chosen == ("X",)

    def test_fig1_right(self):
        assert select_sufficient_confounders(load_model("fig1_right"), "Z", "Y").chosen == ()

    def test_fig2_model1(self):
        result = select_sufficient_confounders(load_model("fig2_model1"), "Z", "Y")
        assert set(result.chosen) == {"X", "W"}

    def test_audit_trail_nonempty_and_deterministic(self):
        net = load_model("fig2_model1")
        r1 = select_sufficient_confounders(net, "Z", "Y")
        r2 = select_sufficient_confounders(net, "Z", "Y")
        assert r1.audit == r2.audit
        assert any(rec.stage == 1 for rec in r1.audit)
        assert any(rec.stage == 2 for rec in r1.audit)

    def test_distributional_mode_agrees(self):
        rng = np.random.default_rng(47)
        for name in ("fig1_left", "fig1_right", "modelB"):
            net = load_model(name)
            g = select_sufficient_confounders(net, "Z", "Y", mode="graphical")
            d = select_sufficient_confounders(net, "Z", "Y", mode="distributional")
            assert g.chosen == d.chosen

    def test_selected_set_recovers_truth(self):
        rng = np.random.default_rng(53)
        for template in ("model1_fig1", "model2_fig1", "model1_fig2"):
            tpl_net = build_scenario(ScenarioParams(template, DEFAULT_PARAMS[template]))
            chosen = select_sufficient_confounders(tpl_net, "Z", "Y").chosen
            for _ in range(50):
                net = random_scenario(template, rng)
                adj = adjusted_estimate(net, "Z", "Y", chosen)
                for level in ("0", "1"):
                    truth = interventional_distribution(
                        InterventionQuery("Y", {"Z": level}, net)
                    )
                    assert np.max(np.abs(adj[level].values - truth.values)) < 1e-10

    def test_pool_cap(self):
        names = tuple(f"C{i}" for i in range(13)) + ("Z", "Y")
        dag = Dag(names, {n: () for n in names})
        net = DiscreteBayesNet(
            dag,
            {n: Variable(n, ("0", "1")) for n in names},
            {n: Cpt(n, (), [[0.5, 0.5]]) for n in names},
        )
        with pytest.raises(SizeCapExceeded):
            select_sufficient_confounders(net, "Z", "Y")


class TestEffectReport:
    def test_model_b_pattern(self):
        rep = effect_report(load_model("modelB"), "Z", "Y", [(), ("X",)])
        assert rep.true_dist["1"].prob({"Y": "1"}) == pytest.approx(0.70, abs=1e-12)
        assert rep.unadjusted_dist["1"].prob({"Y": "1"}) == pytest.approx(0.70, abs=1e-12)
        assert abs(rep.adjusted_dist[("X",)]["1"].prob({"Y": "1"}) - 0.70) > 1e-6

    def test_internal_consistency(self):
        rng = np.random.default_rng(59)
        for template in ("modelB", "modelC", "modelD"):
            net = random_scenario(template, rng)
            rep = effect_report(net, "Z", "Y", [("X",)])
            z1, z0 = rep.levels
            for label, errs in rep.per_level_errors.items():
                assert abs(rep.ace_errors[label] - (errs[z1] - errs[z0])) < 1e-12
            assert abs(
                rep.ace_errors["unadjusted"] - (rep.ace_unadjusted - rep.ace_true)
            ) < 1e-12

    def test_model_c_and_d_double_failure(self):
        for name in ("modelC", "modelD"):
            rep = effect_report(load_model(name), "Z", "Y", [("X",)])
            assert max(abs(e) for e in rep.per_level_errors["adjusted:X"].values()) > 1e-6
            assert max(abs(e) for e in rep.per_level_errors["unadjusted"].values()) > 1e-6
