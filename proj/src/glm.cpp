#include "nct/glm.hpp"

#include "nct/csv.hpp"
#include "nct/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace nct {

const char* to_string(Factor f) {
    switch (f) {
        case Factor::DI: return "DI";
        case Factor::AI: return "AI";
        case Factor::Dur: return "Dur";
        case Factor::Beat: return "Beat";
        case Factor::Boundary: return "Boundary";
        case Factor::FromRest: return "FromRest";
        case Factor::ToRest: return "ToRest";
    }
    return "?";
}

Factor factor_from_string(std::string_view s) {
    if (s == "DI") return Factor::DI;
    if (s == "AI") return Factor::AI;
    if (s == "Dur") return Factor::Dur;
    if (s == "Beat") return Factor::Beat;
    if (s == "Boundary") return Factor::Boundary;
    if (s == "FromRest") return Factor::FromRest;
    if (s == "ToRest") return Factor::ToRest;
    throw Error(errc::schema_mismatch, "unknown factor '" + std::string(s) + "'");
}

TermSpec TermSpec::of(std::initializer_list<Factor> fs) {
    TermSpec t;
    t.factors.assign(fs.begin(), fs.end());
    std::sort(t.factors.begin(), t.factors.end());
    t.factors.erase(std::unique(t.factors.begin(), t.factors.end()), t.factors.end());
    return t;
}

std::string TermSpec::name() const {
    std::string out;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) out += ':';
        out += to_string(factors[i]);
    }
    return out;
}

bool TermSpec::contains(Factor f) const {
    return std::find(factors.begin(), factors.end(), f) != factors.end();
}

TermSpec term_from_name(std::string_view name) {
    TermSpec t;
    std::size_t start = 0;
    while (start <= name.size()) {
        std::size_t pos = name.find(':', start);
        std::string_view part =
            pos == std::string_view::npos ? name.substr(start) : name.substr(start, pos - start);
        t.factors.push_back(factor_from_string(part));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    std::sort(t.factors.begin(), t.factors.end());
    t.factors.erase(std::unique(t.factors.begin(), t.factors.end()), t.factors.end());
    if (t.factors.empty()) throw Error(errc::schema_mismatch, "empty term");
    return t;
}

ModelSpec ModelSpec::main_effects() {
    ModelSpec spec;
    spec.terms = {TermSpec::of({Factor::DI}), TermSpec::of({Factor::AI}),
                  TermSpec::of({Factor::Dur}), TermSpec::of({Factor::Beat})};
    return spec;
}

bool ModelSpec::has_term(const TermSpec& t) const {
    return std::find(terms.begin(), terms.end(), t) != terms.end();
}

bool ModelSpec::hierarchy_complete_with(const TermSpec& t) const {
    // every proper non-empty subset of t.factors must already be present
    int n = static_cast<int>(t.factors.size());
    for (int mask = 1; mask < (1 << n) - 1; ++mask) {
        TermSpec sub;
        for (int b = 0; b < n; ++b)
            if (mask & (1 << b)) sub.factors.push_back(t.factors[b]);
        if (!has_term(sub)) return false;
    }
    return true;
}

void ModelSpec::add_term(const TermSpec& t) {
    if (!has_term(t)) terms.push_back(t);
}

void ModelSpec::add_with_hierarchy(const TermSpec& t) {
    int n = static_cast<int>(t.factors.size());
    for (int size = 1; size < n; ++size) {
        for (int mask = 1; mask < (1 << n); ++mask) {
            if (__builtin_popcount(static_cast<unsigned>(mask)) != size) continue;
            TermSpec sub;
            for (int b = 0; b < n; ++b)
                if (mask & (1 << b)) sub.factors.push_back(t.factors[b]);
            add_term(sub);
        }
    }
    add_term(t);
}

namespace {

// Compact per-row factor values; unison folds into step here.
struct RowValues {
    double dur;
    int di; // 0 step, 1 leap, 2 none
    int ai;
    int beat, boundary, from_rest, to_rest;
};

int interval_code(IntervalClass c) {
    switch (c) {
        case IntervalClass::step:
        case IntervalClass::unison: return 0;
        case IntervalClass::leap: return 1;
        case IntervalClass::none: return 2;
    }
    return 0;
}

RowValues row_values(const FeatureRow& r) {
    return {to_double(r.duration_q), interval_code(r.departing), interval_code(r.arriving),
            r.on_beat, r.boundary, r.from_rest, r.to_rest};
}

double part_value(const DesignColumn::Part& part, const RowValues& v) {
    switch (part.factor) {
        case Factor::Dur: return v.dur;
        case Factor::DI: return (part.level == "leap" ? v.di == 1 : v.di == 2) ? 1.0 : 0.0;
        case Factor::AI: return (part.level == "leap" ? v.ai == 1 : v.ai == 2) ? 1.0 : 0.0;
        case Factor::Beat: return v.beat ? 1.0 : 0.0;
        case Factor::Boundary: return v.boundary ? 1.0 : 0.0;
        case Factor::FromRest: return v.from_rest ? 1.0 : 0.0;
        case Factor::ToRest: return v.to_rest ? 1.0 : 0.0;
    }
    return 0.0;
}

// Non-reference parts a factor contributes, given the levels observed.
std::vector<DesignColumn::Part> factor_parts(Factor f, bool leap_seen, bool none_seen,
                                             bool on_seen, bool one_seen) {
    std::vector<DesignColumn::Part> parts;
    switch (f) {
        case Factor::Dur:
            parts.push_back({f, ""});
            break;
        case Factor::DI:
        case Factor::AI:
            if (leap_seen) parts.push_back({f, "leap"});
            if (none_seen) parts.push_back({f, "none"});
            break;
        case Factor::Beat:
            if (on_seen) parts.push_back({f, "on"});
            break;
        case Factor::Boundary:
        case Factor::FromRest:
        case Factor::ToRest:
            if (one_seen) parts.push_back({f, "1"});
            break;
    }
    return parts;
}

std::string part_name(const DesignColumn::Part& p) {
    if (p.factor == Factor::Dur) return "Dur";
    return std::string(to_string(p.factor)) + "=" + p.level;
}

std::vector<DesignColumn> columns_for_spec(const ModelSpec& spec,
                                           const std::vector<RowValues>& values) {
    bool di_leap = false, di_none = false, ai_leap = false, ai_none = false;
    bool beat_on = false, boundary1 = false, from1 = false, to1 = false;
    for (const auto& v : values) {
        di_leap |= v.di == 1;
        di_none |= v.di == 2;
        ai_leap |= v.ai == 1;
        ai_none |= v.ai == 2;
        beat_on |= v.beat != 0;
        boundary1 |= v.boundary != 0;
        from1 |= v.from_rest != 0;
        to1 |= v.to_rest != 0;
    }
    auto parts_of = [&](Factor f) {
        bool leap = f == Factor::DI ? di_leap : ai_leap;
        bool none = f == Factor::DI ? di_none : ai_none;
        bool one = f == Factor::Boundary ? boundary1 : (f == Factor::FromRest ? from1 : to1);
        return factor_parts(f, leap, none, beat_on, one);
    };

    std::vector<DesignColumn> columns;
    DesignColumn intercept;
    intercept.term_name = "(Intercept)";
    intercept.name = "(Intercept)";
    columns.push_back(intercept);

    for (const auto& term : spec.terms) {
        // cross product of the factors' parts, row-major in canonical order
        std::vector<std::vector<DesignColumn::Part>> lists;
        for (Factor f : term.factors) lists.push_back(parts_of(f));
        std::vector<std::size_t> idx(lists.size(), 0);
        bool any_empty = std::any_of(lists.begin(), lists.end(),
                                     [](const auto& l) { return l.empty(); });
        if (any_empty) continue;
        while (true) {
            DesignColumn col;
            col.term_name = term.name();
            for (std::size_t k = 0; k < lists.size(); ++k) {
                if (k) col.name += ':';
                col.parts.push_back(lists[k][idx[k]]);
                col.name += part_name(lists[k][idx[k]]);
            }
            columns.push_back(std::move(col));
            std::size_t k = lists.size();
            while (k > 0) {
                --k;
                if (++idx[k] < lists[k].size()) break;
                idx[k] = 0;
                if (k == 0) {
                    k = SIZE_MAX;
                    break;
                }
            }
            if (k == SIZE_MAX) break;
        }
    }
    return columns;
}

Eigen::MatrixXd evaluate_columns(const std::vector<DesignColumn>& columns,
                                 const std::vector<RowValues>& values) {
    Eigen::MatrixXd X(values.size(), columns.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            double v = 1.0;
            for (const auto& part : columns[j].parts) v *= part_value(part, values[i]);
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return X;
}

} // namespace

DesignMatrix build_design(const std::vector<FeatureRow>& rows, const ModelSpec& spec) {
    if (rows.empty()) throw Error(errc::empty_data, "no rows to fit");
    std::vector<RowValues> values;
    values.reserve(rows.size());
    Eigen::VectorXd y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.label == NoteLabel::Unlabeled)
            throw Error(errc::empty_data,
                        "unlabeled row " + std::to_string(i) + " (exclude Unlabeled before fitting)");
        y(static_cast<Eigen::Index>(i)) = r.label == NoteLabel::CT ? 1.0 : 0.0;
        values.push_back(row_values(r));
    }

    DesignMatrix dm;
    dm.columns = columns_for_spec(spec, values);
    dm.X = evaluate_columns(dm.columns, values);
    dm.y = std::move(y);

    for (std::size_t j = 1; j < dm.columns.size(); ++j) {
        Eigen::Index jj = static_cast<Eigen::Index>(j);
        double v0 = dm.X(0, jj);
        if ((dm.X.col(jj).array() == v0).all())
            dm.warnings.push_back("constant column " + dm.columns[j].name);
    }
    return dm;
}

double log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = X * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        double e = eta(i);
        // y*eta - log(1 + exp(eta)), computed stably
        double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        ll += y(i) * e - softplus;
    }
    return ll;
}

Eigen::VectorXd score_vector(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd p(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) p(i) = 1.0 / (1.0 + std::exp(-eta(i)));
    return X.transpose() * (y - p);
}

FittedModel fit_logistic(const DesignMatrix& design, const FitControls& controls) {
    const Eigen::MatrixXd& X = design.X;
    const Eigen::VectorXd& y = design.y;
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();

    if (n == 0) throw Error(errc::empty_data, "no observations");
    if (n < p)
        throw Error(errc::insufficient_data,
                    std::to_string(n) + " observations for " + std::to_string(p) + " columns");
    double ybar = y.mean();
    if (ybar == 0.0 || ybar == 1.0)
        throw Error(errc::all_same_label, "labels are all " + std::string(ybar == 1.0 ? "CT" : "NCT"));

    // exactly duplicated columns cannot be separated by the ridge
    for (Eigen::Index a = 0; a < p; ++a)
        for (Eigen::Index b = a + 1; b < p; ++b)
            if ((X.col(a) - X.col(b)).cwiseAbs().maxCoeff() <= 1e-7)
                throw Error(errc::rank_deficient, "columns '" + design.columns[a].name + "' and '" +
                                                      design.columns[b].name + "' are identical");

    FittedModel fit;
    fit.columns = design.columns;
    fit.warnings = design.warnings;
    fit.n_obs = static_cast<int>(n);
    fit.beta = Eigen::VectorXd::Zero(p);

    double ll = log_likelihood(X, y, fit.beta);
    bool converged = false;
    int iter = 0;
    while (iter < controls.max_iterations) {
        Eigen::VectorXd eta = X * fit.beta;
        Eigen::VectorXd prob(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double pi = 1.0 / (1.0 + std::exp(-eta(i)));
            prob(i) = pi;
            w(i) = pi * (1.0 - pi);
        }
        if (fit.beta.cwiseAbs().maxCoeff() > controls.separation_bound) break; // diverging
        Eigen::VectorXd grad = X.transpose() * (y - prob);
        if (grad.cwiseAbs().maxCoeff() < controls.tolerance) {
            converged = true;
            break;
        }

        Eigen::MatrixXd hess = X.transpose() * w.asDiagonal() * X;
        hess.diagonal().array() += controls.ridge;
        Eigen::VectorXd delta = hess.ldlt().solve(grad);

        // step halving guards against overshoot; the slack keeps rounding
        // noise near the optimum from shrinking the step to nothing
        const double slack = 1e-10 * (1.0 + std::abs(ll));
        double step = 1.0;
        double new_ll = log_likelihood(X, y, fit.beta + delta);
        int halvings = 0;
        while (new_ll < ll - slack && halvings < 30) {
            step *= 0.5;
            new_ll = log_likelihood(X, y, fit.beta + step * delta);
            ++halvings;
        }
        fit.beta += step * delta;
        ll = new_ll;
        ++iter;
    }

    fit.iterations = iter;
    fit.converged = converged;
    fit.log_likelihood = log_likelihood(X, y, fit.beta);
    fit.aic = 2.0 * static_cast<double>(p) - 2.0 * fit.log_likelihood;
    return fit;
}

FittedModel fit_model(const std::vector<FeatureRow>& rows, const ModelSpec& spec,
                      const FitControls& controls) {
    DesignMatrix dm = build_design(rows, spec);
    FittedModel fit = fit_logistic(dm, controls);
    fit.spec = spec;
    return fit;
}

double aic(const FittedModel& fit) { return fit.aic; }

Eigen::VectorXd predict_proba(const FittedModel& fit, const std::vector<FeatureRow>& rows,
                              std::vector<std::string>* warnings) {
    std::vector<RowValues> values;
    values.reserve(rows.size());
    for (const auto& r : rows) values.push_back(row_values(r));

    if (warnings) {
        // levels in the rows that no model column carries map to the reference
        bool model_di_none = false, model_ai_none = false, model_di_leap = false,
             model_ai_leap = false, uses_di = false, uses_ai = false;
        for (const auto& col : fit.columns)
            for (const auto& part : col.parts) {
                if (part.factor == Factor::DI) {
                    uses_di = true;
                    model_di_none |= part.level == "none";
                    model_di_leap |= part.level == "leap";
                }
                if (part.factor == Factor::AI) {
                    uses_ai = true;
                    model_ai_none |= part.level == "none";
                    model_ai_leap |= part.level == "leap";
                }
            }
        auto warn_if = [&](bool used, bool in_model, bool seen, const char* what) {
            if (used && !in_model && seen)
                warnings->push_back(std::string(what) + " unseen at training; mapped to reference");
        };
        bool di_none_seen = false, ai_none_seen = false, di_leap_seen = false, ai_leap_seen = false;
        for (const auto& v : values) {
            di_none_seen |= v.di == 2;
            ai_none_seen |= v.ai == 2;
            di_leap_seen |= v.di == 1;
            ai_leap_seen |= v.ai == 1;
        }
        warn_if(uses_di, model_di_none, di_none_seen, "DI=none");
        warn_if(uses_ai, model_ai_none, ai_none_seen, "AI=none");
        warn_if(uses_di, model_di_leap, di_leap_seen, "DI=leap");
        warn_if(uses_ai, model_ai_leap, ai_leap_seen, "AI=leap");
    }

    Eigen::MatrixXd X = evaluate_columns(fit.columns, values);
    Eigen::VectorXd eta = X * fit.beta;
    Eigen::VectorXd prob(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        double e = std::clamp(eta(i), -36.0, 36.0); // keep p strictly inside (0,1)
        prob(i) = 1.0 / (1.0 + std::exp(-e));
    }
    return prob;
}

std::vector<TermSpec> default_pool() {
    const std::vector<Factor> core = {Factor::DI, Factor::AI, Factor::Dur, Factor::Beat};
    std::vector<TermSpec> pool;
    for (Factor f : core) pool.push_back(TermSpec::of({f}));
    for (std::size_t a = 0; a < core.size(); ++a)
        for (std::size_t b = a + 1; b < core.size(); ++b)
            pool.push_back(TermSpec::of({core[a], core[b]}));
    for (std::size_t a = 0; a < core.size(); ++a)
        for (std::size_t b = a + 1; b < core.size(); ++b)
            for (std::size_t c = b + 1; c < core.size(); ++c)
                pool.push_back(TermSpec::of({core[a], core[b], core[c]}));
    return pool;
}

std::vector<TermSpec> extended_pool() {
    std::vector<TermSpec> pool = default_pool();
    const std::vector<Factor> extra = {Factor::Boundary, Factor::FromRest, Factor::ToRest};
    const std::vector<Factor> all = {Factor::DI,       Factor::AI,       Factor::Dur,
                                     Factor::Beat,     Factor::Boundary, Factor::FromRest,
                                     Factor::ToRest};
    for (Factor f : extra) pool.push_back(TermSpec::of({f}));
    for (Factor e : extra)
        for (Factor other : all) {
            if (other == e) continue;
            TermSpec t = TermSpec::of({e, other});
            if (std::find(pool.begin(), pool.end(), t) == pool.end()) pool.push_back(t);
        }
    return pool;
}

StepwiseResult forward_stepwise(const std::vector<FeatureRow>& rows,
                                const std::vector<TermSpec>& pool,
                                const FitControls& controls) {
    StepwiseResult result;
    ModelSpec current;
    FittedModel current_fit;
    try {
        current_fit = fit_model(rows, current, controls);
    } catch (const Error& e) {
        throw Error(e.code(), std::string(e.what()) + " (stepwise baseline fit)");
    }

    int round = 0;
    while (true) {
        ++round;
        const FittedModel* best = nullptr;
        FittedModel best_fit;
        TermSpec best_term;

        std::vector<TermSpec> candidates;
        for (const auto& t : pool)
            if (!current.has_term(t) && current.hierarchy_complete_with(t)) candidates.push_back(t);
        // deterministic evaluation and tie-break order
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const TermSpec& a, const TermSpec& b) {
                             if (a.order() != b.order()) return a.order() < b.order();
                             return a.name() < b.name();
                         });

        for (const auto& cand : candidates) {
            ModelSpec trial = current;
            trial.add_term(cand);
            FittedModel fit;
            try {
                fit = fit_model(rows, trial, controls);
            } catch (const Error& e) {
                throw Error(e.code(), std::string(e.what()) + " (stepwise round " +
                                          std::to_string(round) + ", candidate " + cand.name() +
                                          ", " + std::to_string(result.trace.size()) +
                                          " rounds accepted)");
            }
            if (!fit.converged) continue; // unreliable AIC; not eligible
            if (fit.aic < current_fit.aic && (!best || fit.aic < best_fit.aic)) {
                best_fit = fit;
                best_term = cand;
                best = &best_fit;
            }
        }
        if (!best) break;

        StepwiseRound tr;
        tr.round = round;
        tr.term = best_term.name();
        tr.aic_before = current_fit.aic;
        tr.aic_after = best_fit.aic;
        result.trace.push_back(tr);

        current.add_term(best_term);
        current_fit = best_fit;
        current_fit.spec = current;
    }

    result.model = current_fit;
    result.model.spec = current;
    return result;
}

std::string write_model(const FittedModel& fit) {
    std::string out = "model-version\t1\n";
    std::set<Factor> cats;
    for (const auto& term : fit.spec.terms)
        for (Factor f : term.factors)
            if (f != Factor::Dur) cats.insert(f);
    for (Factor f : cats) {
        out += "coding\t";
        out += to_string(f);
        out += "\treference=";
        switch (f) {
            case Factor::DI:
            case Factor::AI: out += "step"; break;
            case Factor::Beat: out += "off"; break;
            default: out += "0"; break;
        }
        out += '\n';
    }
    for (std::size_t j = 0; j < fit.columns.size(); ++j) {
        out += fit.columns[j].term_name;
        out += '\t';
        out += fit.columns[j].name;
        out += '\t';
        out += format_double(fit.beta(static_cast<Eigen::Index>(j)));
        out += '\n';
    }
    return out;
}

namespace {

DesignColumn column_from_name(const std::string& term_name, const std::string& col_name) {
    DesignColumn col;
    col.term_name = term_name;
    col.name = col_name;
    if (col_name == "(Intercept)") return col;
    std::size_t start = 0;
    while (start <= col_name.size()) {
        std::size_t pos = col_name.find(':', start);
        std::string part = pos == std::string::npos ? col_name.substr(start)
                                                    : col_name.substr(start, pos - start);
        if (part == "Dur") {
            col.parts.push_back({Factor::Dur, ""});
        } else {
            auto eq = part.find('=');
            if (eq == std::string::npos)
                throw Error(errc::schema_mismatch, "bad model column '" + col_name + "'");
            col.parts.push_back({factor_from_string(part.substr(0, eq)), part.substr(eq + 1)});
        }
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return col;
}

} // namespace

FittedModel read_model(std::string_view text) {
    FittedModel fit;
    std::vector<double> betas;
    bool version_seen = false;

    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t pos = text.find('\n', start);
        std::string_view line =
            pos == std::string_view::npos ? text.substr(start) : text.substr(start, pos - start);
        start = pos == std::string_view::npos ? text.size() : pos + 1;
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::size_t fstart = 0;
        while (fstart <= line.size()) {
            std::size_t fpos = line.find('\t', fstart);
            fields.emplace_back(fpos == std::string_view::npos
                                    ? line.substr(fstart)
                                    : line.substr(fstart, fpos - fstart));
            if (fpos == std::string_view::npos) break;
            fstart = fpos + 1;
        }

        if (fields[0] == "model-version") {
            if (fields.size() != 2 || fields[1] != "1")
                throw Error(errc::schema_mismatch, "unsupported model version");
            version_seen = true;
            continue;
        }
        if (fields[0] == "coding") continue; // references are fixed in this version
        if (fields.size() != 3)
            throw Error(errc::schema_mismatch, "bad model line '" + std::string(line) + "'");
        fit.columns.push_back(column_from_name(fields[0], fields[1]));
        try {
            betas.push_back(std::stod(fields[2]));
        } catch (const std::exception&) {
            throw Error(errc::schema_mismatch, "bad coefficient '" + fields[2] + "'");
        }
        if (fields[0] != "(Intercept)") {
            TermSpec t = term_from_name(fields[0]);
            if (!fit.spec.has_term(t)) fit.spec.terms.push_back(t);
        }
    }
    if (!version_seen) throw Error(errc::schema_mismatch, "missing model-version line");
    if (fit.columns.empty()) throw Error(errc::schema_mismatch, "model has no columns");
    fit.beta = Eigen::Map<Eigen::VectorXd>(betas.data(), static_cast<Eigen::Index>(betas.size()));
    fit.converged = true;
    fit.log_likelihood = std::numeric_limits<double>::quiet_NaN();
    fit.aic = std::numeric_limits<double>::quiet_NaN();
    return fit;
}

std::string write_trace_csv(const std::vector<StepwiseRound>& trace) {
    std::string out = "round,term,aic_before,aic_after\n";
    for (const auto& r : trace) {
        out += csv_join({std::to_string(r.round), r.term, format_double(r.aic_before, 10),
                         format_double(r.aic_after, 10)});
        out += '\n';
    }
    return out;
}

} // namespace nct
