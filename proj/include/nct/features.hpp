#pragma once

#include "nct/harm.hpp"
#include "nct/kern.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace nct {

enum class IntervalClass { step, leap, unison, none };

const char* to_string(IntervalClass c);
IntervalClass interval_class_from_string(std::string_view s);

/// Scale degree with chromatic alteration, audit-only. Rendered "4+1" for
/// a raised fourth, "6-1" for a lowered sixth, "1" when diatonic.
struct ScaleDegree {
    int degree = 1;    // 1-7
    int alteration = 0; // -2..+2

    bool operator==(const ScaleDegree&) const = default;
};

std::string to_string(const ScaleDegree& sd);
ScaleDegree scale_degree_of(int pc, const Key& key);

struct FeatureRow {
    std::string piece_id;
    int note_index = 0;
    Rational duration_q{1};
    int on_beat = 0;
    IntervalClass arriving = IntervalClass::none;
    IntervalClass departing = IntervalClass::none;
    int boundary = 0;
    int from_rest = 0;
    int to_rest = 0;
    ScaleDegree scale_degree;
    NoteLabel label = NoteLabel::Unlabeled;

    bool operator==(const FeatureRow&) const = default;
};

/// none when no adjacent sounding note exists; unison at 0 semitones;
/// step at 1-2; leap at 3 or more.
IntervalClass classify_interval(int semitones, bool adjacent_exists);

/// 1 iff the bar position is an integer multiple of the meter's beat.
int is_on_beat(const Rational& onset_in_bar_q, const MeterSig& meter);

struct ExtractOptions {
    UnlabeledPolicy rn_policy = UnlabeledPolicy::skip;
};

/// One row per non-rest, non-grace melody event. Rests break interval
/// adjacency and set the rest flags; the first/last sounding notes are
/// boundary notes. Labels come from the harmony token governing each onset
/// (Unlabeled when the timeline is empty or does not cover the note).
std::vector<FeatureRow> extract_features(const std::vector<NoteEvent>& melody,
                                         const std::vector<HarmEntry>& harm,
                                         const std::vector<std::pair<Rational, MeterSig>>& meters,
                                         const std::vector<std::pair<Rational, Key>>& keys,
                                         const std::string& piece_id,
                                         const ExtractOptions& options = {});

enum class IntervalCoding { ternary, binary };

/// ternary: unison folds into step, none rows kept as a third level.
/// binary: unison folds into step, rows with arriving or departing none dropped.
std::vector<FeatureRow> apply_coding(std::vector<FeatureRow> rows, IntervalCoding mode);

/// Header-first CSV with the fixed column set. read(write(rows)) == rows.
std::string write_feature_csv(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_feature_csv(std::string_view text);

} // namespace nct
