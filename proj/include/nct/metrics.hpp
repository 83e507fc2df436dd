#pragma once

#include "nct/glm.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nct {

struct SplitConfig {
    double test_fraction = 0.2;
    enum class Granularity { row, piece } granularity = Granularity::row;
    std::uint64_t seed = 0;
};

struct SplitResult {
    std::vector<FeatureRow> train;
    std::vector<FeatureRow> test;
};

/// Disjoint, exhaustive, reproducible from seed. Reshuffles up to 10 times
/// until the training side carries both labels; then DegenerateSplit.
SplitResult split(const std::vector<FeatureRow>& rows, const SplitConfig& config);

struct EvalReport {
    int n_test = 0;
    double baseline_accuracy = 0.0; // all-CT predictor
    double accuracy = 0.0;
    double precision = 0.0; // CT positive
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> auc; // absent on single-class test sets
    double threshold = 0.5;
};

/// labels CT=1/NCT=0; prediction is p >= threshold. AUC by the Mann-Whitney
/// rank statistic with average ranks on ties.
EvalReport metrics(const std::vector<int>& labels, const std::vector<double>& probs,
                   double threshold = 0.5);

double auc_rank(const std::vector<int>& labels, const std::vector<double>& probs);

struct FoldReport {
    int fold = 0;
    EvalReport report;
    double train_ct_share = 0.0;
};

struct CvResult {
    EvalReport mean;            // unweighted mean of fold metrics; n_test summed
    double mean_train_ct_share = 0.0;
    std::vector<FoldReport> folds;
};

/// Plain k-fold over rows: shuffle once by seed, near-equal folds, refit the
/// spec on each k-1 and evaluate on the held-out fold.
CvResult kfold_cv(const std::vector<FeatureRow>& rows, int k, const ModelSpec& spec,
                  std::uint64_t seed, const FitControls& controls = {});

struct TrialsResult {
    EvalReport mean;
    std::vector<EvalReport> trials;
};

/// Evaluates a pre-trained model on `trials` random subsamples (without
/// replacement) of the rows; no refit per trial.
TrialsResult subsample_trials(const std::vector<FeatureRow>& rows, int sample_size,
                              int trials, const FittedModel& model, std::uint64_t seed,
                              double threshold = 0.5);

} // namespace nct
