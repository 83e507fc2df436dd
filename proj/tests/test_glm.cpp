#include "nct/glm.hpp"

#include "nct/error.hpp"
#include "nct/rng.hpp"
#include "sim_util.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>

using namespace nct;

namespace {

FeatureRow make_row(double dur, int beat, IntervalClass di, IntervalClass ai, NoteLabel label) {
    FeatureRow r;
    r.duration_q = Rational(static_cast<std::int64_t>(dur * 4), 4);
    r.on_beat = beat;
    r.departing = di;
    r.arriving = ai;
    r.label = label;
    return r;
}

std::vector<FeatureRow> bernoulli_rows(int n_ct, int n_nct) {
    std::vector<FeatureRow> rows;
    for (int i = 0; i < n_ct; ++i)
        rows.push_back(make_row(1.0, 1, IntervalClass::step, IntervalClass::step, NoteLabel::CT));
    for (int i = 0; i < n_nct; ++i)
        rows.push_back(make_row(1.0, 1, IntervalClass::step, IntervalClass::step, NoteLabel::NCT));
    return rows;
}

} // namespace

TEST_CASE("term names are canonical") {
    CHECK(TermSpec::of({Factor::Beat, Factor::DI}).name() == "DI:Beat");
    CHECK(TermSpec::of({Factor::Beat, Factor::AI, Factor::DI}).name() == "DI:AI:Beat");
    CHECK(TermSpec::of({Factor::Dur}).name() == "Dur");
    CHECK(term_from_name("Beat:DI") == TermSpec::of({Factor::DI, Factor::Beat}));
    CHECK(TermSpec::of({Factor::DI, Factor::DI}).order() == 1);
}

TEST_CASE("hierarchy bookkeeping") {
    ModelSpec spec;
    TermSpec di_beat = TermSpec::of({Factor::DI, Factor::Beat});
    CHECK_FALSE(spec.hierarchy_complete_with(di_beat));
    spec.add_term(TermSpec::of({Factor::DI}));
    CHECK_FALSE(spec.hierarchy_complete_with(di_beat));
    spec.add_term(TermSpec::of({Factor::Beat}));
    CHECK(spec.hierarchy_complete_with(di_beat));

    ModelSpec full;
    full.add_with_hierarchy(TermSpec::of({Factor::DI, Factor::AI, Factor::Beat}));
    CHECK(full.terms.size() == 7); // 3 mains + 3 two-ways + the three-way
}

TEST_CASE("design matrix layout") {
    // spec {Dur}: intercept plus the linear duration column
    std::vector<FeatureRow> rows = {
        make_row(1.0, 1, IntervalClass::step, IntervalClass::step, NoteLabel::CT),
        make_row(0.5, 0, IntervalClass::leap, IntervalClass::none, NoteLabel::NCT),
    };
    ModelSpec dur_only;
    dur_only.add_term(TermSpec::of({Factor::Dur}));
    DesignMatrix dm = build_design(rows, dur_only);
    REQUIRE(dm.columns.size() == 2);
    CHECK(dm.columns[0].name == "(Intercept)");
    CHECK(dm.columns[1].name == "Dur");
    CHECK(dm.X(0, 0) == 1.0);
    CHECK(dm.X(0, 1) == 1.0);
    CHECK(dm.X(1, 0) == 1.0);
    CHECK(dm.X(1, 1) == 0.5);
    CHECK(dm.y(0) == 1.0);
    CHECK(dm.y(1) == 0.0);

    // 3-level AI expands to two indicators against step
    std::vector<FeatureRow> rows3 = {
        make_row(1.0, 1, IntervalClass::step, IntervalClass::step, NoteLabel::CT),
        make_row(1.0, 0, IntervalClass::step, IntervalClass::leap, NoteLabel::NCT),
        make_row(1.0, 0, IntervalClass::step, IntervalClass::none, NoteLabel::CT),
    };
    ModelSpec ai_only;
    ai_only.add_term(TermSpec::of({Factor::AI}));
    DesignMatrix ai_dm = build_design(rows3, ai_only);
    REQUIRE(ai_dm.columns.size() == 3);
    CHECK(ai_dm.columns[1].name == "AI=leap");
    CHECK(ai_dm.columns[2].name == "AI=none");
    CHECK(ai_dm.X(0, 1) == 0.0);
    CHECK(ai_dm.X(1, 1) == 1.0);
    CHECK(ai_dm.X(2, 2) == 1.0);

    // interaction columns are products
    std::vector<FeatureRow> rows4 = {
        make_row(1.0, 1, IntervalClass::step, IntervalClass::step, NoteLabel::CT),
        make_row(1.0, 0, IntervalClass::leap, IntervalClass::step, NoteLabel::NCT),
        make_row(1.0, 1, IntervalClass::none, IntervalClass::step, NoteLabel::CT),
        make_row(1.0, 0, IntervalClass::step, IntervalClass::step, NoteLabel::NCT),
    };
    ModelSpec inter;
    inter.add_with_hierarchy(TermSpec::of({Factor::DI, Factor::Beat}));
    DesignMatrix idm = build_design(rows4, inter);
    std::vector<std::string> names;
    for (const auto& c : idm.columns) names.push_back(c.name);
    CHECK(names == std::vector<std::string>{"(Intercept)", "DI=leap", "DI=none", "Beat=on",
                                            "DI=leap:Beat=on", "DI=none:Beat=on"});
    CHECK(idm.X(2, 5) == 1.0); // none on beat
    CHECK(idm.X(1, 4) == 0.0); // leap off beat
}

TEST_CASE("unison folds into step in the design") {
    std::vector<FeatureRow> rows = {
        make_row(1.0, 1, IntervalClass::unison, IntervalClass::step, NoteLabel::CT),
        make_row(1.0, 0, IntervalClass::leap, IntervalClass::step, NoteLabel::NCT),
    };
    ModelSpec spec;
    spec.add_term(TermSpec::of({Factor::DI}));
    DesignMatrix dm = build_design(rows, spec);
    REQUIRE(dm.columns.size() == 2); // intercept + DI=leap; unison is reference
    CHECK(dm.X(0, 1) == 0.0);
}

TEST_CASE("intercept-only fit recovers the sample logit") {
    auto rows = bernoulli_rows(72, 28);
    FittedModel fit = fit_model(rows, ModelSpec{});
    REQUIRE(fit.converged);
    CHECK(fit.beta.size() == 1);
    CHECK(fit.beta(0) == doctest::Approx(0.9444616088408514).epsilon(1e-9));
    Eigen::VectorXd p = predict_proba(fit, rows);
    CHECK(p.mean() == doctest::Approx(0.72).epsilon(1e-10));
    for (int i = 0; i < p.size(); ++i) CHECK(p(i) == doctest::Approx(0.72).epsilon(1e-8));
}

TEST_CASE("AIC hand case: 4 observations, 3 positive, intercept-only") {
    auto rows = bernoulli_rows(3, 1);
    FittedModel fit = fit_model(rows, ModelSpec{});
    REQUIRE(fit.converged);
    // lnL = 3 ln 0.75 + ln 0.25 = -2.2493405784752333; AIC = 2 - 2 lnL
    CHECK(fit.log_likelihood == doctest::Approx(-2.2493405784752333).epsilon(1e-10));
    CHECK(fit.aic == doctest::Approx(6.4986811569504666).epsilon(1e-10));
    CHECK(aic(fit) == fit.aic);
}

TEST_CASE("analytic gradient matches central finite differences") {
    DeterministicRng rng(12345);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 200, p = 6;
        Eigen::MatrixXd X(n, p);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            for (int j = 1; j < p; ++j) X(i, j) = 2.0 * rng.next_unit() - 1.0;
            y(i) = rng.next_unit() < 0.5 ? 0.0 : 1.0;
        }
        Eigen::VectorXd beta(p);
        for (int j = 0; j < p; ++j) beta(j) = rng.next_unit() - 0.5;

        Eigen::VectorXd grad = score_vector(X, y, beta);
        const double h = 1e-6;
        for (int j = 0; j < p; ++j) {
            Eigen::VectorXd up = beta, dn = beta;
            up(j) += h;
            dn(j) -= h;
            double fd = (log_likelihood(X, y, up) - log_likelihood(X, y, dn)) / (2.0 * h);
            CHECK(std::abs(grad(j) - fd) / std::max(1.0, std::abs(fd)) < 1e-5);
        }
    }
}

TEST_CASE("score vanishes at the optimum and mean p matches the positive rate") {
    auto rows = planted_rows(77, 500);
    FittedModel fit = fit_model(rows, ModelSpec::main_effects());
    REQUIRE(fit.converged);
    DesignMatrix dm = build_design(rows, ModelSpec::main_effects());
    CHECK(score_vector(dm.X, dm.y, fit.beta).cwiseAbs().maxCoeff() < 1e-6);

    Eigen::VectorXd p = predict_proba(fit, rows);
    CHECK(p.mean() == doctest::Approx(dm.y.mean()).epsilon(1e-8));
}

TEST_CASE("complete separation is reported as non-convergence") {
    std::vector<FeatureRow> rows;
    for (int i = 0; i < 20; ++i)
        rows.push_back(make_row(1.0, i < 10 ? 1 : 0, IntervalClass::step, IntervalClass::step,
                                i < 10 ? NoteLabel::CT : NoteLabel::NCT));
    ModelSpec spec;
    spec.add_term(TermSpec::of({Factor::Beat}));
    FittedModel fit = fit_model(rows, spec);
    CHECK_FALSE(fit.converged);
}

TEST_CASE("fit error cases") {
    CHECK_THROWS_AS(build_design({}, ModelSpec{}), Error);
    CHECK_THROWS_AS(fit_model(bernoulli_rows(5, 0), ModelSpec{}), Error);

    // Boundary and FromRest identical in every row: duplicated columns
    std::vector<FeatureRow> rows;
    for (int i = 0; i < 10; ++i) {
        FeatureRow r = make_row(1.0, i % 2, IntervalClass::step, IntervalClass::step,
                                i % 3 ? NoteLabel::CT : NoteLabel::NCT);
        r.boundary = i % 2;
        r.from_rest = i % 2;
        rows.push_back(r);
    }
    ModelSpec spec;
    spec.add_term(TermSpec::of({Factor::Boundary}));
    spec.add_term(TermSpec::of({Factor::FromRest}));
    try {
        fit_model(rows, spec);
        FAIL("expected RankDeficient");
    } catch (const Error& e) {
        CHECK(e.code() == errc::rank_deficient);
        CHECK(std::string(e.what()).find("Boundary=1") != std::string::npos);
    }
}

TEST_CASE("constant column warning") {
    std::vector<FeatureRow> rows = bernoulli_rows(6, 4); // Beat constant 1
    for (auto& r : rows) r.on_beat = 0;                  // now constant 0: no Beat column
    ModelSpec spec;
    spec.add_term(TermSpec::of({Factor::Dur}));
    for (auto& r : rows) r.duration_q = Rational(2);
    DesignMatrix dm = build_design(rows, spec);
    REQUIRE(dm.warnings.size() == 1);
    CHECK(dm.warnings[0].find("Dur") != std::string::npos);
}

TEST_CASE("adding columns never decreases the maximized log-likelihood") {
    auto rows = planted_rows(3, 400);
    ModelSpec small;
    small.add_term(TermSpec::of({Factor::Beat}));
    ModelSpec big = small;
    big.add_term(TermSpec::of({Factor::DI}));
    big.add_term(TermSpec::of({Factor::Dur}));
    FittedModel f1 = fit_model(rows, small);
    FittedModel f2 = fit_model(rows, big);
    CHECK(f2.log_likelihood >= f1.log_likelihood - 1e-8);
}

TEST_CASE("prediction basics") {
    auto rows = planted_rows(9, 300);
    FittedModel fit = fit_model(rows, ModelSpec::main_effects());
    fit.beta.setZero();
    Eigen::VectorXd p = predict_proba(fit, rows);
    for (int i = 0; i < p.size(); ++i) CHECK(p(i) == 0.5);

    // positive Dur coefficient: probability strictly increases with duration
    FittedModel mono = fit_model(rows, ModelSpec::main_effects());
    for (std::size_t j = 0; j < mono.columns.size(); ++j)
        if (mono.columns[j].name == "Dur") mono.beta(static_cast<Eigen::Index>(j)) = 0.8;
    std::vector<FeatureRow> probe;
    for (double d : {0.25, 0.5, 1.0, 2.0, 4.0})
        probe.push_back(make_row(d, 1, IntervalClass::step, IntervalClass::step, NoteLabel::CT));
    Eigen::VectorXd q = predict_proba(mono, probe);
    for (int i = 1; i < q.size(); ++i) CHECK(q(i) > q(i - 1));
}

TEST_CASE("unseen level maps to the reference with a warning") {
    auto rows = planted_rows(4, 200); // no none levels present
    FittedModel fit = fit_model(rows, ModelSpec::main_effects());
    std::vector<FeatureRow> probe = {
        make_row(1.0, 1, IntervalClass::none, IntervalClass::step, NoteLabel::CT),
        make_row(1.0, 1, IntervalClass::step, IntervalClass::step, NoteLabel::CT),
    };
    std::vector<std::string> warnings;
    Eigen::VectorXd p = predict_proba(fit, probe, &warnings);
    CHECK(p(0) == p(1)); // none treated as the reference step
    REQUIRE_FALSE(warnings.empty());
    CHECK(warnings[0].find("DI=none") != std::string::npos);
}

TEST_CASE("stepwise stops immediately when labels are balanced per pattern") {
    std::vector<FeatureRow> rows;
    for (int beat : {0, 1})
        for (auto di : {IntervalClass::step, IntervalClass::leap})
            for (auto ai : {IntervalClass::step, IntervalClass::leap})
                for (double dur : {1.0, 2.0})
                    for (auto label : {NoteLabel::CT, NoteLabel::NCT})
                        rows.push_back(make_row(dur, beat, di, ai, label));
    StepwiseResult res = forward_stepwise(rows, default_pool());
    CHECK(res.trace.empty());
    CHECK(res.model.spec.terms.empty());
    CHECK(res.model.beta.size() == 1);
}

TEST_CASE("stepwise recovers a planted interaction") {
    int hits = 0;
    for (std::uint64_t seed : {11ULL, 22ULL, 33ULL}) {
        auto rows = planted_rows(seed, 2000);
        StepwiseResult res = forward_stepwise(rows, default_pool());
        bool has_di = res.model.spec.has_term(TermSpec::of({Factor::DI}));
        bool has_beat = res.model.spec.has_term(TermSpec::of({Factor::Beat}));
        bool has_int = res.model.spec.has_term(TermSpec::of({Factor::DI, Factor::Beat}));
        if (has_di && has_beat && has_int) ++hits;
        double prev = res.trace.empty() ? 0.0 : res.trace.front().aic_before;
        for (const auto& r : res.trace) {
            CHECK(r.aic_after < r.aic_before);
            CHECK(r.aic_before == doctest::Approx(prev).epsilon(1e-12));
            prev = r.aic_after;
        }
    }
    CHECK(hits >= 2);
}

TEST_CASE("stepwise is deterministic") {
    auto rows = planted_rows(5, 800);
    StepwiseResult a = forward_stepwise(rows, default_pool());
    StepwiseResult b = forward_stepwise(rows, default_pool());
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].term == b.trace[i].term);
        CHECK(a.trace[i].aic_after == b.trace[i].aic_after);
    }
    CHECK((a.model.beta - b.model.beta).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("model file round trip") {
    auto rows = planted_rows(21, 400);
    ModelSpec spec = ModelSpec::main_effects();
    spec.add_term(TermSpec::of({Factor::DI, Factor::Beat}));
    FittedModel fit = fit_model(rows, spec);
    REQUIRE(fit.converged);

    std::string text = write_model(fit);
    CHECK(text.rfind("model-version\t1\n", 0) == 0);
    FittedModel loaded = read_model(text);
    REQUIRE(loaded.columns.size() == fit.columns.size());
    for (std::size_t j = 0; j < fit.columns.size(); ++j)
        CHECK(loaded.columns[j].name == fit.columns[j].name);
    CHECK(loaded.spec.terms.size() == fit.spec.terms.size());

    Eigen::VectorXd p0 = predict_proba(fit, rows);
    Eigen::VectorXd p1 = predict_proba(loaded, rows);
    CHECK((p0 - p1).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(read_model("nonsense\n"), Error);
}

TEST_CASE("pool construction") {
    auto pool = default_pool();
    CHECK(pool.size() == 14); // 4 mains + 6 two-way + 4 three-way
    auto extended = extended_pool();
    CHECK(extended.size() == 32); // + 3 mains + 15 two-way
    for (const auto& t : pool)
        CHECK(std::count(extended.begin(), extended.end(), t) == 1);
}

TEST_CASE("trace csv schema") {
    std::vector<StepwiseRound> trace = {{1, "DI", 100.0, 90.0}, {2, "DI:Beat", 90.0, 85.5}};
    std::string csv = write_trace_csv(trace);
    CHECK(csv.rfind("round,term,aic_before,aic_after\n", 0) == 0);
    CHECK(csv.find("1,DI,100,90\n") != std::string::npos);
    CHECK(csv.find("2,DI:Beat,90,85.5\n") != std::string::npos);
}
