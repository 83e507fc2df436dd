#pragma once

#include "nct/features.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace nct {

enum class Factor { DI, AI, Dur, Beat, Boundary, FromRest, ToRest };

const char* to_string(Factor f);
Factor factor_from_string(std::string_view s);

/// A model term identified by its factor set; rendered colon-joined in the
/// fixed factor order (DI < AI < Dur < Beat < Boundary < FromRest < ToRest).
struct TermSpec {
    std::vector<Factor> factors; // sorted canonical, no duplicates

    static TermSpec of(std::initializer_list<Factor> fs);
    int order() const { return static_cast<int>(factors.size()); }
    std::string name() const;
    bool contains(Factor f) const;

    bool operator==(const TermSpec&) const = default;
};

TermSpec term_from_name(std::string_view name);

/// Ordered term list with an implicit intercept. Hierarchy invariant: every
/// proper subset of a term's factors is also present.
struct ModelSpec {
    std::vector<TermSpec> terms;

    static ModelSpec main_effects(); // DI, AI, Dur, Beat
    bool has_term(const TermSpec& t) const;
    bool hierarchy_complete_with(const TermSpec& t) const; // eligible to add
    void add_term(const TermSpec& t);                      // keeps uniqueness
    /// Adds t plus any missing sub-terms, lowest order first.
    void add_with_hierarchy(const TermSpec& t);
};

/// One design column: a product of factor parts. A part is either the
/// numeric Dur value or an indicator for a categorical level.
struct DesignColumn {
    std::string term_name;  // "(Intercept)", "DI", "DI:Beat", ...
    std::string name;       // "(Intercept)", "DI=leap", "DI=leap:Beat=on", ...
    struct Part {
        Factor factor;
        std::string level;  // empty for Dur
    };
    std::vector<Part> parts; // empty for the intercept
};

struct DesignMatrix {
    Eigen::MatrixXd X;
    Eigen::VectorXd y; // CT = 1, NCT = 0
    std::vector<DesignColumn> columns;
    std::vector<std::string> warnings; // constant columns, retained
};

/// Dummy coding against fixed references: step for AI/DI (unison folds into
/// step), off-beat for Beat, 0 for the binary factors. Categorical levels come
/// from the rows, in the order leap before none. Rows must all be labeled.
DesignMatrix build_design(const std::vector<FeatureRow>& rows, const ModelSpec& spec);

struct FitControls {
    double tolerance = 1e-8;       // max-norm of the score vector
    int max_iterations = 50;
    double ridge = 1e-10;          // fixed Hessian diagonal guard
    double separation_bound = 30.0; // coefficient max-norm treated as divergence
};

struct FittedModel {
    ModelSpec spec;
    std::vector<DesignColumn> columns;
    Eigen::VectorXd beta;
    double log_likelihood = 0.0;
    double aic = 0.0;
    int n_obs = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

/// Bernoulli log-likelihood of beta on the design.
double log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta);

/// Analytic score vector X^T (y - p).
Eigen::VectorXd score_vector(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta);

/// Maximum-likelihood logistic fit by Newton/IRLS with step halving.
/// Throws AllSameLabel and RankDeficient (exactly duplicated columns);
/// non-convergence and separation return converged = false.
FittedModel fit_logistic(const DesignMatrix& design, const FitControls& controls = {});

FittedModel fit_model(const std::vector<FeatureRow>& rows, const ModelSpec& spec,
                      const FitControls& controls = {});

double aic(const FittedModel& fit);

/// Probabilities under the fitted model. Levels unseen at training map to the
/// reference level; a note per unseen level is appended to `warnings` if given.
Eigen::VectorXd predict_proba(const FittedModel& fit, const std::vector<FeatureRow>& rows,
                              std::vector<std::string>* warnings = nullptr);

struct StepwiseRound {
    int round = 0;
    std::string term;
    double aic_before = 0.0;
    double aic_after = 0.0;
};

struct StepwiseResult {
    FittedModel model;
    std::vector<StepwiseRound> trace;
};

/// Main effects of DI, AI, Dur, Beat plus all their 2- and 3-way interactions.
std::vector<TermSpec> default_pool();
/// default_pool plus Boundary/FromRest/ToRest mains and every 2-way
/// interaction involving one of them.
std::vector<TermSpec> extended_pool();

/// Forward stepwise from intercept-only: each round adds the
/// hierarchy-eligible term with the largest AIC decrease; stops when no
/// candidate decreases AIC. Ties break on lower order, then canonical name.
StepwiseResult forward_stepwise(const std::vector<FeatureRow>& rows,
                                const std::vector<TermSpec>& pool,
                                const FitControls& controls = {});

/// Line-oriented plain-text model: model-version, coding lines, then one
/// term<TAB>column<TAB>coefficient per design column.
std::string write_model(const FittedModel& fit);
FittedModel read_model(std::string_view text);

/// Selection trace CSV: round,term,aic_before,aic_after.
std::string write_trace_csv(const std::vector<StepwiseRound>& trace);

} // namespace nct
