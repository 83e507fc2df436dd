#include "nct/metrics.hpp"

#include "nct/error.hpp"
#include "nct/rng.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace nct {

namespace {

int label_binary(const FeatureRow& r) {
    if (r.label == NoteLabel::Unlabeled)
        throw Error(errc::empty_data, "unlabeled row in evaluation set");
    return r.label == NoteLabel::CT ? 1 : 0;
}

bool both_classes(const std::vector<FeatureRow>& rows) {
    bool ct = false, nct = false;
    for (const auto& r : rows) {
        if (r.label == NoteLabel::CT) ct = true;
        else if (r.label == NoteLabel::NCT) nct = true;
        if (ct && nct) return true;
    }
    return false;
}

double ct_share(const std::vector<FeatureRow>& rows) {
    if (rows.empty()) return 0.0;
    std::size_t ct = 0;
    for (const auto& r : rows) ct += r.label == NoteLabel::CT;
    return static_cast<double>(ct) / static_cast<double>(rows.size());
}

} // namespace

SplitResult split(const std::vector<FeatureRow>& rows, const SplitConfig& config) {
    if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0))
        throw Error(errc::degenerate_split,
                    "test fraction must lie in (0,1), got " + std::to_string(config.test_fraction));
    if (rows.size() < 2) throw Error(errc::degenerate_split, "need at least 2 rows");

    DeterministicRng rng(config.seed);
    const std::size_t n = rows.size();
    std::size_t n_test = static_cast<std::size_t>(
        std::llround(config.test_fraction * static_cast<double>(n)));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

    for (int attempt = 0; attempt < 10; ++attempt) {
        SplitResult result;
        if (config.granularity == SplitConfig::Granularity::row) {
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            rng.shuffle(idx);
            for (std::size_t i = 0; i < n; ++i)
                (i < n_test ? result.test : result.train).push_back(rows[idx[i]]);
        } else {
            std::vector<std::string> pieces;
            for (const auto& r : rows)
                if (std::find(pieces.begin(), pieces.end(), r.piece_id) == pieces.end())
                    pieces.push_back(r.piece_id);
            if (pieces.size() < 2)
                throw Error(errc::degenerate_split, "piece granularity needs at least 2 pieces");
            rng.shuffle(pieces);
            std::set<std::string> test_pieces;
            std::size_t covered = 0;
            for (const auto& piece : pieces) {
                if (covered >= n_test || test_pieces.size() + 1 == pieces.size()) break;
                test_pieces.insert(piece);
                for (const auto& r : rows) covered += r.piece_id == piece;
            }
            for (const auto& r : rows)
                (test_pieces.count(r.piece_id) ? result.test : result.train).push_back(r);
        }
        if (both_classes(result.train)) return result;
    }
    throw Error(errc::degenerate_split, "training side single-class after 10 resamples");
}

double auc_rank(const std::vector<int>& labels, const std::vector<double>& probs) {
    const std::size_t n = labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

    // average ranks over tie groups
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && probs[order[j + 1]] == probs[order[i]]) ++j;
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }

    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (labels[k] == 1) {
            pos_rank_sum += rank[k];
            ++n_pos;
        }
    std::size_t n_neg = n - n_pos;
    double u = pos_rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

EvalReport metrics(const std::vector<int>& labels, const std::vector<double>& probs,
                   double threshold) {
    if (labels.empty() || labels.size() != probs.size())
        throw Error(errc::empty_data, "labels and probabilities must align and be non-empty");

    EvalReport rep;
    rep.threshold = threshold;
    rep.n_test = static_cast<int>(labels.size());

    std::size_t tp = 0, fp = 0, tn = 0, fn = 0, pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        bool predicted_ct = probs[i] >= threshold;
        bool is_ct = labels[i] == 1;
        pos += is_ct;
        if (predicted_ct && is_ct) ++tp;
        else if (predicted_ct) ++fp;
        else if (is_ct) ++fn;
        else ++tn;
    }
    double n = static_cast<double>(labels.size());
    rep.baseline_accuracy = static_cast<double>(pos) / n;
    rep.accuracy = static_cast<double>(tp + tn) / n;
    rep.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    rep.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    rep.f1 = rep.precision + rep.recall == 0.0
                 ? 0.0
                 : 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall);
    if (pos == 0 || pos == labels.size())
        rep.auc.reset(); // single-class test: AUC undefined
    else
        rep.auc = auc_rank(labels, probs);
    return rep;
}

namespace {

EvalReport evaluate_rows(const FittedModel& model, const std::vector<FeatureRow>& rows,
                         double threshold) {
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (const auto& r : rows) labels.push_back(label_binary(r));
    Eigen::VectorXd p = predict_proba(model, rows);
    std::vector<double> probs(p.data(), p.data() + p.size());
    return metrics(labels, probs, threshold);
}

EvalReport mean_reports(const std::vector<EvalReport>& reports) {
    EvalReport mean;
    if (reports.empty()) return mean;
    int n_total = 0;
    double auc_sum = 0.0;
    int auc_count = 0;
    for (const auto& r : reports) {
        n_total += r.n_test;
        mean.baseline_accuracy += r.baseline_accuracy;
        mean.accuracy += r.accuracy;
        mean.precision += r.precision;
        mean.recall += r.recall;
        mean.f1 += r.f1;
        if (r.auc) {
            auc_sum += *r.auc;
            ++auc_count;
        }
    }
    double k = static_cast<double>(reports.size());
    mean.n_test = n_total;
    mean.baseline_accuracy /= k;
    mean.accuracy /= k;
    mean.precision /= k;
    mean.recall /= k;
    mean.f1 /= k;
    mean.threshold = reports.front().threshold;
    if (auc_count > 0) mean.auc = auc_sum / static_cast<double>(auc_count);
    return mean;
}

} // namespace

CvResult kfold_cv(const std::vector<FeatureRow>& rows, int k, const ModelSpec& spec,
                  std::uint64_t seed, const FitControls& controls) {
    if (k < 2) throw Error(errc::degenerate_fold, "k must be at least 2");
    if (static_cast<std::size_t>(k) > rows.size())
        throw Error(errc::degenerate_fold, "more folds than rows");

    const std::size_t n = rows.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    DeterministicRng rng(seed);
    rng.shuffle(idx);

    CvResult result;
    std::vector<EvalReport> reports;
    double share_sum = 0.0;
    for (int f = 0; f < k; ++f) {
        std::size_t lo = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(k);
        std::size_t hi = n * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(k);
        std::vector<FeatureRow> train, test;
        train.reserve(n - (hi - lo));
        test.reserve(hi - lo);
        for (std::size_t i = 0; i < n; ++i)
            ((i >= lo && i < hi) ? test : train).push_back(rows[idx[i]]);
        if (test.empty() || !both_classes(train))
            throw Error(errc::degenerate_fold, "fold " + std::to_string(f + 1) +
                                                   " leaves a single-class training set");
        FittedModel fit = fit_model(train, spec, controls);
        if (!fit.converged)
            throw Error(errc::numerical, "fold " + std::to_string(f + 1) + " fit did not converge");
        FoldReport fold;
        fold.fold = f + 1;
        fold.report = evaluate_rows(fit, test, 0.5);
        fold.train_ct_share = ct_share(train);
        share_sum += fold.train_ct_share;
        reports.push_back(fold.report);
        result.folds.push_back(std::move(fold));
    }
    result.mean = mean_reports(reports);
    result.mean_train_ct_share = share_sum / static_cast<double>(k);
    return result;
}

TrialsResult subsample_trials(const std::vector<FeatureRow>& rows, int sample_size, int trials,
                              const FittedModel& model, std::uint64_t seed, double threshold) {
    if (sample_size <= 0 || trials <= 0)
        throw Error(errc::sample_too_large, "sample size and trial count must be positive");
    if (static_cast<std::size_t>(sample_size) > rows.size())
        throw Error(errc::sample_too_large,
                    "sample " + std::to_string(sample_size) + " exceeds " +
                        std::to_string(rows.size()) + " rows");

    DeterministicRng rng(seed);
    TrialsResult result;
    for (int t = 0; t < trials; ++t) {
        auto idx = rng.sample_indices(rows.size(), static_cast<std::size_t>(sample_size));
        std::vector<FeatureRow> sample;
        sample.reserve(idx.size());
        for (auto i : idx) sample.push_back(rows[i]);
        result.trials.push_back(evaluate_rows(model, sample, threshold));
    }
    result.mean = mean_reports(result.trials);
    return result;
}

} // namespace nct
