#include "nct/csv.hpp"
#include "nct/error.hpp"
#include "nct/features.hpp"
#include "nct/glm.hpp"
#include "nct/manifest.hpp"
#include "nct/metrics.hpp"
#include "nct/reduce.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace nct;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::io, "cannot write " + path.string());
    out << content;
}

// glob with * and ? only
bool glob_match(std::string_view pattern, std::string_view text) {
    std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

MelodyPolicy melody_policy_from(const std::string& arg) {
    MelodyPolicy policy;
    if (arg == "last") return policy;
    try {
        policy.kern_index = std::stoi(arg);
    } catch (const std::exception&) {
        throw Error(errc::usage, "--melody-spine expects 'last' or a kern spine index");
    }
    if (policy.kern_index < 0) throw Error(errc::usage, "--melody-spine index must be >= 0");
    return policy;
}

std::string eval_report_row(const std::string& unit, const EvalReport& r, double train_share,
                            bool have_share) {
    return csv_join({unit, std::to_string(r.n_test), format_double(r.baseline_accuracy, 10),
                     format_double(r.accuracy, 10), format_double(r.precision, 10),
                     format_double(r.recall, 10), format_double(r.f1, 10),
                     r.auc ? format_double(*r.auc, 10) : "",
                     format_double(r.threshold, 10),
                     have_share ? format_double(train_share, 10) : ""});
}

constexpr const char* kEvalHeader =
    "unit,n_test,baseline_accuracy,accuracy,precision,recall,f1,auc,threshold,train_ct_share";

void print_report(std::ostream& os, const std::string& title, const EvalReport& r) {
    os << title << "\n";
    os << "  n:         " << r.n_test << "\n";
    os << "  baseline:  " << format_double(r.baseline_accuracy * 100.0, 6) << "%\n";
    os << "  accuracy:  " << format_double(r.accuracy * 100.0, 6) << "%\n";
    os << "  precision: " << format_double(r.precision, 6) << "\n";
    os << "  recall:    " << format_double(r.recall, 6) << "\n";
    os << "  f1:        " << format_double(r.f1, 6) << "\n";
    if (r.auc) os << "  auc:       " << format_double(*r.auc, 6) << "\n";
    else os << "  auc:       undefined (single-class test)\n";
}

std::vector<FeatureRow> labeled_only(std::vector<FeatureRow> rows, std::size_t* dropped) {
    std::size_t before = rows.size();
    std::erase_if(rows, [](const FeatureRow& r) { return r.label == NoteLabel::Unlabeled; });
    if (dropped) *dropped = before - rows.size();
    return rows;
}

double ct_share_of(const std::vector<FeatureRow>& rows) {
    if (rows.empty()) return 0.0;
    std::size_t ct = 0;
    for (const auto& r : rows) ct += r.label == NoteLabel::CT;
    return static_cast<double>(ct) / static_cast<double>(rows.size());
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
    std::string corpus_dir;
    std::string out_path;
    std::string melody_spine = "last";
    std::string coding = "ternary";
    std::string rn_policy = "skip";
    unsigned jobs = 0;
    std::uint64_t seed = 0;
};

int run_extract(const ExtractArgs& args) {
    std::vector<fs::path> files;
    if (!fs::is_directory(args.corpus_dir))
        throw Error(errc::io, "corpus directory not found: " + args.corpus_dir);
    for (const auto& entry : fs::recursive_directory_iterator(args.corpus_dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        if (ext == ".krn" || ext == ".krm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw Error(errc::empty_data, "no .krn or .krm files under " + args.corpus_dir);

    MelodyPolicy policy = melody_policy_from(args.melody_spine);
    ExtractOptions options;
    options.rn_policy =
        args.rn_policy == "strict" ? UnlabeledPolicy::strict : UnlabeledPolicy::skip;

    struct FileResult {
        std::string piece_id;
        std::string digest;
        std::vector<FeatureRow> rows;
        std::string skip_reason; // non-empty when skipped
    };
    std::vector<FileResult> results(files.size());

    auto piece_id_of = [&](const fs::path& p) {
        fs::path rel = fs::relative(p, args.corpus_dir);
        rel.replace_extension();
        return rel.generic_string();
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= files.size()) break;
            FileResult& res = results[i];
            res.piece_id = piece_id_of(files[i]);
            try {
                std::string text = read_file(files[i]);
                res.digest = fnv1a64_hex(text);
                auto doc = parse_kern(text, res.piece_id);
                auto melody = select_melody(doc, policy);
                auto harm = harm_timeline(doc);
                res.rows = extract_features(melody, harm, doc.meter_map, doc.key_map,
                                            res.piece_id, options);
            } catch (const Error& e) {
                res.rows.clear();
                res.skip_reason = e.what();
            }
        }
    };
    unsigned n_threads = args.jobs > 0 ? args.jobs : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(files.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::stable_sort(results.begin(), results.end(),
                     [](const FileResult& a, const FileResult& b) { return a.piece_id < b.piece_id; });

    std::vector<FeatureRow> rows;
    RunManifest manifest;
    std::size_t parsed = 0;
    for (const auto& res : results) {
        if (!res.digest.empty()) manifest.input_digests.emplace_back(res.piece_id, res.digest);
        if (!res.skip_reason.empty()) {
            manifest.skipped.emplace_back(res.piece_id, res.skip_reason);
            std::cerr << "skip " << res.piece_id << ": " << res.skip_reason << "\n";
            continue;
        }
        ++parsed;
        rows.insert(rows.end(), res.rows.begin(), res.rows.end());
    }
    if (parsed == 0) throw Error(errc::empty_data, "no parseable files in " + args.corpus_dir);

    std::size_t extracted = rows.size();
    rows = apply_coding(std::move(rows),
                        args.coding == "binary" ? IntervalCoding::binary : IntervalCoding::ternary);

    std::size_t labeled = 0, ct = 0;
    for (const auto& r : rows) {
        if (r.label == NoteLabel::Unlabeled) continue;
        ++labeled;
        ct += r.label == NoteLabel::CT;
    }

    write_file(args.out_path, write_feature_csv(rows));

    manifest.command = "extract";
    manifest.seed = args.seed;
    manifest.config = {{"corpus", args.corpus_dir},
                       {"out", args.out_path},
                       {"melody_spine", args.melody_spine},
                       {"coding", args.coding},
                       {"on_unparseable_rn", args.rn_policy}};
    manifest.stats = {
        {"files_found", std::to_string(files.size())},
        {"files_parsed", std::to_string(parsed)},
        {"files_skipped", std::to_string(files.size() - parsed)},
        {"rows_extracted", std::to_string(extracted)},
        {"rows_written", std::to_string(rows.size())},
        {"rows_labeled", std::to_string(labeled)},
        {"rows_unlabeled", std::to_string(rows.size() - labeled)},
        {"rows_ct", std::to_string(ct)},
        {"rows_nct", std::to_string(labeled - ct)},
        {"ct_share_labeled",
         labeled ? format_double(static_cast<double>(ct) / static_cast<double>(labeled), 6) : "0"},
    };
    write_file(args.out_path + ".manifest.json", manifest.to_json());

    std::cout << "extracted " << rows.size() << " rows (" << labeled << " labeled, "
              << (labeled ? format_double(100.0 * static_cast<double>(ct) / static_cast<double>(labeled), 4)
                          : "0")
              << "% CT) from " << parsed << "/" << files.size() << " files -> " << args.out_path
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string features_path;
    std::string out_path;
    std::string subset;
    std::string select = "stepwise";
    std::string terms;
    std::string pool = "default";
    std::string trace_out;
    std::uint64_t seed = 0;
};

int run_train(const TrainArgs& args) {
    std::string text = read_file(args.features_path);
    auto rows = read_feature_csv(text);
    if (!args.subset.empty())
        std::erase_if(rows,
                      [&](const FeatureRow& r) { return !glob_match(args.subset, r.piece_id); });
    std::size_t unlabeled = 0;
    rows = labeled_only(std::move(rows), &unlabeled);
    if (rows.empty()) throw Error(errc::empty_data, "no labeled rows to train on");

    FittedModel fit;
    std::vector<StepwiseRound> trace;
    if (args.select == "fixed") {
        ModelSpec spec;
        if (args.terms.empty()) {
            spec = ModelSpec::main_effects();
        } else {
            std::stringstream ss(args.terms);
            std::string name;
            while (std::getline(ss, name, ','))
                if (!name.empty()) spec.add_with_hierarchy(term_from_name(name));
        }
        fit = fit_model(rows, spec);
    } else if (args.select == "stepwise") {
        auto pool = args.pool == "extended" ? extended_pool() : default_pool();
        StepwiseResult res = forward_stepwise(rows, pool);
        fit = std::move(res.model);
        trace = std::move(res.trace);
    } else {
        throw Error(errc::usage, "--select expects stepwise or fixed");
    }
    if (!fit.converged)
        throw Error(errc::numerical, "final fit did not converge (separated or ill-conditioned)");

    write_file(args.out_path, write_model(fit));
    std::string trace_path = args.trace_out.empty() ? args.out_path + ".trace.csv" : args.trace_out;
    if (args.select == "stepwise") write_file(trace_path, write_trace_csv(trace));

    RunManifest manifest;
    manifest.command = "train";
    manifest.seed = args.seed;
    manifest.config = {{"features", args.features_path}, {"out", args.out_path},
                       {"subset", args.subset},          {"select", args.select},
                       {"terms", args.terms},            {"pool", args.pool}};
    manifest.input_digests.emplace_back(args.features_path, fnv1a64_hex(text));
    std::vector<std::string> term_names;
    for (const auto& t : fit.spec.terms) term_names.push_back(t.name());
    std::string joined;
    for (const auto& n : term_names) joined += (joined.empty() ? "" : " ") + n;
    manifest.stats = {{"n_rows", std::to_string(rows.size())},
                      {"n_unlabeled_dropped", std::to_string(unlabeled)},
                      {"n_columns", std::to_string(fit.columns.size())},
                      {"terms", joined},
                      {"log_likelihood", format_double(fit.log_likelihood, 12)},
                      {"aic", format_double(fit.aic, 12)},
                      {"iterations", std::to_string(fit.iterations)}};
    write_file(args.out_path + ".manifest.json", manifest.to_json());

    std::cout << "trained on " << rows.size() << " rows; terms: "
              << (joined.empty() ? "(intercept only)" : joined) << "\n";
    std::cout << "log-likelihood " << format_double(fit.log_likelihood, 10) << ", AIC "
              << format_double(fit.aic, 10) << ", " << fit.iterations << " iterations\n";
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "model -> " << args.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string features_path;
    std::string model_path;
    std::string report_path;
    double split_fraction = -1.0;
    int kfold = 0;
    int trials = 0;
    int sample = 2400;
    double threshold = 0.5;
    std::string granularity = "row";
    std::uint64_t seed = 0;
};

int run_evaluate(const EvaluateArgs& args) {
    std::string ftext = read_file(args.features_path);
    std::string mtext = read_file(args.model_path);
    auto all_rows = read_feature_csv(ftext);
    std::size_t unlabeled = 0;
    auto rows = labeled_only(std::move(all_rows), &unlabeled);
    if (rows.empty()) throw Error(errc::empty_data, "no labeled rows to evaluate");
    FittedModel model = read_model(mtext);

    int modes = (args.split_fraction >= 0.0) + (args.kfold > 0) + (args.trials > 0);
    if (modes > 1) throw Error(errc::usage, "choose one of --split, --kfold, --trials");

    std::string csv = std::string(kEvalHeader) + "\n";
    auto eval_with_model = [&](const FittedModel& m, const std::vector<FeatureRow>& subset) {
        std::vector<int> labels;
        labels.reserve(subset.size());
        for (const auto& r : subset) labels.push_back(r.label == NoteLabel::CT ? 1 : 0);
        Eigen::VectorXd p = predict_proba(m, subset);
        return metrics(labels, {p.data(), p.data() + p.size()}, args.threshold);
    };

    if (args.kfold > 0) {
        CvResult cv = kfold_cv(rows, args.kfold, model.spec, args.seed);
        std::cout << "k-fold cross-validation: plain " << args.kfold
                  << "-fold over rows, refitting the model's terms per fold\n";
        std::cout << "chord tones in training folds: "
                  << format_double(cv.mean_train_ct_share * 100.0, 6) << "%\n";
        print_report(std::cout, "cross-validation mean of " + std::to_string(args.kfold) + " folds",
                     cv.mean);
        for (const auto& f : cv.folds)
            csv += eval_report_row("fold" + std::to_string(f.fold), f.report, f.train_ct_share,
                                   true) +
                   "\n";
        csv += eval_report_row("mean", cv.mean, cv.mean_train_ct_share, true) + "\n";
    } else if (args.trials > 0) {
        TrialsResult res =
            subsample_trials(rows, args.sample, args.trials, model, args.seed, args.threshold);
        print_report(std::cout,
                     std::to_string(args.trials) + " trials of " + std::to_string(args.sample) +
                         " rows (no refit)",
                     res.mean);
        for (std::size_t t = 0; t < res.trials.size(); ++t)
            csv += eval_report_row("trial" + std::to_string(t + 1), res.trials[t], 0.0, false) +
                   "\n";
        csv += eval_report_row("mean", res.mean, 0.0, false) + "\n";
    } else if (args.split_fraction >= 0.0) {
        SplitConfig cfg;
        cfg.test_fraction = args.split_fraction;
        cfg.seed = args.seed;
        cfg.granularity = args.granularity == "piece" ? SplitConfig::Granularity::piece
                                                      : SplitConfig::Granularity::row;
        SplitResult sp = split(rows, cfg);
        FittedModel refit = fit_model(sp.train, model.spec);
        if (!refit.converged) throw Error(errc::numerical, "train-side refit did not converge");
        EvalReport rep = eval_with_model(refit, sp.test);
        print_report(std::cout,
                     "holdout: refit on " + std::to_string(sp.train.size()) + " rows, tested on " +
                         std::to_string(sp.test.size()),
                     rep);
        csv += eval_report_row("holdout", rep, ct_share_of(sp.train), true) + "\n";
    } else {
        EvalReport rep = eval_with_model(model, rows);
        print_report(std::cout, "full set (model as trained)", rep);
        csv += eval_report_row("all", rep, 0.0, false) + "\n";
    }

    write_file(args.report_path, csv);

    RunManifest manifest;
    manifest.command = "evaluate";
    manifest.seed = args.seed;
    manifest.config = {{"features", args.features_path},
                       {"model", args.model_path},
                       {"report", args.report_path},
                       {"split", args.split_fraction >= 0 ? format_double(args.split_fraction, 6) : ""},
                       {"kfold", args.kfold > 0 ? std::to_string(args.kfold) : ""},
                       {"trials", args.trials > 0 ? std::to_string(args.trials) : ""},
                       {"sample", args.trials > 0 ? std::to_string(args.sample) : ""},
                       {"threshold", format_double(args.threshold, 6)},
                       {"granularity", args.granularity}};
    manifest.input_digests.emplace_back(args.features_path, fnv1a64_hex(ftext));
    manifest.input_digests.emplace_back(args.model_path, fnv1a64_hex(mtext));
    manifest.stats = {{"n_rows", std::to_string(rows.size())},
                      {"n_unlabeled_dropped", std::to_string(unlabeled)}};
    write_file(args.report_path + ".manifest.json", manifest.to_json());
    std::cout << "report -> " << args.report_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// reduce

struct ReduceArgs {
    std::string score_path;
    std::string model_path;
    std::string out_path;
    std::string probs_out;
    std::string melody_spine = "last";
    ReduceConfig config;
    std::uint64_t seed = 0;
};

int run_reduce(const ReduceArgs& args) {
    std::string score_text = read_file(args.score_path);
    std::string mtext = read_file(args.model_path);
    FittedModel model = read_model(mtext);

    std::string piece_id = fs::path(args.score_path).stem().string();
    MelodyPolicy policy = melody_policy_from(args.melody_spine);
    auto doc = parse_kern(score_text, piece_id);
    auto melody = select_melody(doc, policy);
    auto harm = harm_timeline(doc); // may be empty; prediction is harmony-free
    auto rows = extract_features(melody, harm, doc.meter_map, doc.key_map, piece_id);

    std::vector<std::string> warnings;
    Eigen::VectorXd probs = predict_proba(model, rows, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    std::vector<double> pvec(probs.data(), probs.data() + probs.size());
    write_file(args.out_path, colorize(doc, melody, pvec, args.config, policy));

    if (!args.probs_out.empty()) {
        std::string csv = "piece_id,note_index,midi_pitch,onset_q,probability,predicted\n";
        std::size_t note = 0;
        for (const auto& ev : melody) {
            if (ev.is_rest || ev.is_grace) continue;
            csv += csv_join({piece_id, std::to_string(note), std::to_string(ev.midi_pitch),
                             to_string(ev.onset_q), format_double(pvec[note], 10),
                             pvec[note] >= args.config.threshold ? "CT" : "NCT"});
            csv += '\n';
            ++note;
        }
        write_file(args.probs_out, csv);
    }

    std::size_t nct = 0;
    for (double p : pvec) nct += p < args.config.threshold;

    RunManifest manifest;
    manifest.command = "reduce";
    manifest.seed = args.seed;
    manifest.config = {{"score", args.score_path},
                       {"model", args.model_path},
                       {"out", args.out_path},
                       {"threshold", format_double(args.config.threshold, 6)},
                       {"ct_color", args.config.ct_color},
                       {"nct_color", args.config.nct_color},
                       {"melody_spine", args.melody_spine}};
    manifest.input_digests.emplace_back(args.score_path, fnv1a64_hex(score_text));
    manifest.input_digests.emplace_back(args.model_path, fnv1a64_hex(mtext));
    manifest.stats = {{"n_notes", std::to_string(pvec.size())},
                      {"n_predicted_nct", std::to_string(nct)}};
    write_file(args.out_path + ".manifest.json", manifest.to_json());

    std::cout << "colored " << pvec.size() << " notes (" << nct << " predicted NCT) -> "
              << args.out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chord-tone / non-chord-tone labeling and melody reduction for kern scores"};
    app.require_subcommand(1);

    ExtractArgs ex;
    auto* extract_cmd =
        app.add_subcommand("extract", "parse a corpus directory into a feature CSV");
    extract_cmd->add_option("--corpus", ex.corpus_dir, "directory with .krn/.krm files")
        ->required();
    extract_cmd->add_option("--out", ex.out_path, "output feature CSV")->required();
    extract_cmd->add_option("--melody-spine", ex.melody_spine, "last or kern spine index");
    extract_cmd->add_option("--coding", ex.coding, "interval coding")
        ->check(CLI::IsMember({"ternary", "binary"}));
    extract_cmd->add_option("--on-unparseable-rn", ex.rn_policy, "harmony parse-failure policy")
        ->check(CLI::IsMember({"skip", "strict"}));
    extract_cmd->add_option("--jobs", ex.jobs, "parallel workers (default: hardware)");
    extract_cmd->add_option("--seed", ex.seed, "recorded in the manifest");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "fit a logistic model from a feature CSV");
    train_cmd->add_option("--features", tr.features_path, "feature CSV")->required();
    train_cmd->add_option("--out", tr.out_path, "output model file")->required();
    train_cmd->add_option("--subset", tr.subset, "piece-id glob filter (e.g. '*_00_*')");
    train_cmd->add_option("--select", tr.select, "stepwise or fixed")
        ->check(CLI::IsMember({"stepwise", "fixed"}));
    train_cmd->add_option("--terms", tr.terms, "comma-separated terms for --select fixed");
    train_cmd->add_option("--pool", tr.pool, "stepwise candidate pool")
        ->check(CLI::IsMember({"default", "extended"}));
    train_cmd->add_option("--trace-out", tr.trace_out, "selection trace CSV path");
    train_cmd->add_option("--seed", tr.seed, "recorded in the manifest");

    EvaluateArgs ev;
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a model on a feature CSV");
    eval_cmd->add_option("--features", ev.features_path, "feature CSV")->required();
    eval_cmd->add_option("--model", ev.model_path, "model file")->required();
    eval_cmd->add_option("--report", ev.report_path, "output report CSV")->required();
    eval_cmd->add_option("--split", ev.split_fraction,
                         "holdout fraction; refits the model's terms on the train side")
        ->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("--kfold", ev.kfold, "k-fold cross-validation")->check(CLI::Range(2, 1000));
    eval_cmd->add_option("--trials", ev.trials, "subsample trial count (no refit)");
    eval_cmd->add_option("--sample", ev.sample, "subsample size per trial");
    eval_cmd->add_option("--threshold", ev.threshold, "CT probability threshold")
        ->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("--granularity", ev.granularity, "row or piece splits")
        ->check(CLI::IsMember({"row", "piece"}));
    eval_cmd->add_option("--seed", ev.seed, "split/fold/trial seed");

    ReduceArgs re;
    auto* reduce_cmd =
        app.add_subcommand("reduce", "color a score's melody by predicted chord-tone status");
    reduce_cmd->add_option("--score", re.score_path, "input kern score")->required();
    reduce_cmd->add_option("--model", re.model_path, "model file")->required();
    reduce_cmd->add_option("--out", re.out_path, "output colorized kern")->required();
    reduce_cmd->add_option("--threshold", re.config.threshold, "CT probability threshold")
        ->check(CLI::Range(0.0, 1.0));
    reduce_cmd->add_option("--ct-color", re.config.ct_color, "chord-tone color");
    reduce_cmd->add_option("--nct-color", re.config.nct_color, "non-chord-tone color");
    reduce_cmd->add_option("--unscored-color", re.config.unscored_color,
                           "color for unscored notes (graces)");
    reduce_cmd->add_option("--probs-out", re.probs_out, "per-note probability CSV");
    reduce_cmd->add_option("--melody-spine", re.melody_spine, "last or kern spine index");
    reduce_cmd->add_option("--seed", re.seed, "recorded in the manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*extract_cmd) return run_extract(ex);
        if (*train_cmd) return run_train(tr);
        if (*eval_cmd) return run_evaluate(ev);
        if (*reduce_cmd) return run_reduce(re);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
