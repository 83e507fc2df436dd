#include "nct/features.hpp"

#include "nct/csv.hpp"
#include "nct/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>

namespace nct {

const char* to_string(IntervalClass c) {
    switch (c) {
        case IntervalClass::step: return "step";
        case IntervalClass::leap: return "leap";
        case IntervalClass::unison: return "unison";
        case IntervalClass::none: return "none";
    }
    return "none";
}

IntervalClass interval_class_from_string(std::string_view s) {
    if (s == "step") return IntervalClass::step;
    if (s == "leap") return IntervalClass::leap;
    if (s == "unison") return IntervalClass::unison;
    if (s == "none") return IntervalClass::none;
    throw Error(errc::schema_mismatch, "unknown interval class '" + std::string(s) + "'");
}

std::string to_string(const ScaleDegree& sd) {
    std::string out = std::to_string(sd.degree);
    if (sd.alteration > 0) out += "+" + std::to_string(sd.alteration);
    if (sd.alteration < 0) out += std::to_string(sd.alteration);
    return out;
}

ScaleDegree scale_degree_of(int pc, const Key& key) {
    // chromatic spelling tables relative to the tonic; audit-only convention
    static const std::array<ScaleDegree, 12> major = {{
        {1, 0}, {2, -1}, {2, 0}, {3, -1}, {3, 0}, {4, 0},
        {4, 1}, {5, 0}, {6, -1}, {6, 0}, {7, -1}, {7, 0},
    }};
    static const std::array<ScaleDegree, 12> minor = {{
        {1, 0}, {2, -1}, {2, 0}, {3, 0}, {3, 1}, {4, 0},
        {4, 1}, {5, 0}, {6, 0}, {6, 1}, {7, 0}, {7, 1},
    }};
    int off = (((pc - key.tonic_pc) % 12) + 12) % 12;
    return key.mode == Mode::major ? major[off] : minor[off];
}

IntervalClass classify_interval(int semitones, bool adjacent_exists) {
    if (!adjacent_exists) return IntervalClass::none;
    int mag = std::abs(semitones);
    if (mag == 0) return IntervalClass::unison;
    if (mag <= 2) return IntervalClass::step;
    return IntervalClass::leap;
}

int is_on_beat(const Rational& onset_in_bar_q, const MeterSig& meter) {
    return is_multiple_of(onset_in_bar_q, meter.beat_q()) ? 1 : 0;
}

namespace {

const MeterSig& governing_meter(const std::vector<std::pair<Rational, MeterSig>>& meters,
                                const Rational& onset) {
    if (meters.empty()) throw Error(errc::missing_interpretation, "empty meter map");
    const MeterSig* best = &meters.front().second;
    for (const auto& [t, m] : meters)
        if (t <= onset) best = &m;
        else break;
    return *best;
}

const Key& governing_key(const std::vector<std::pair<Rational, Key>>& keys, const Rational& onset) {
    if (keys.empty()) throw Error(errc::missing_interpretation, "empty key map");
    const Key* best = &keys.front().second;
    for (const auto& [t, k] : keys)
        if (t <= onset) best = &k;
        else break;
    return *best;
}

const HarmEntry* governing_harm(const std::vector<HarmEntry>& harm, const Rational& onset) {
    const HarmEntry* best = nullptr;
    for (const auto& entry : harm)
        if (entry.onset_q <= onset) best = &entry;
        else break;
    return best;
}

} // namespace

std::vector<FeatureRow> extract_features(const std::vector<NoteEvent>& melody,
                                         const std::vector<HarmEntry>& harm,
                                         const std::vector<std::pair<Rational, MeterSig>>& meters,
                                         const std::vector<std::pair<Rational, Key>>& keys,
                                         const std::string& piece_id,
                                         const ExtractOptions& options) {
    if (melody.empty()) throw Error(errc::empty_data, "empty melody for " + piece_id);

    struct Sounding {
        const NoteEvent* ev;
        bool rest_before = false;
        bool rest_after = false;
    };
    std::vector<Sounding> notes;
    bool pending_rest = false;
    for (const auto& ev : melody) {
        if (ev.is_grace) continue;
        if (ev.is_rest) {
            pending_rest = true;
            if (!notes.empty()) notes.back().rest_after = true;
            continue;
        }
        notes.push_back({&ev, pending_rest, false});
        pending_rest = false;
    }

    std::vector<FeatureRow> rows;
    rows.reserve(notes.size());
    for (std::size_t i = 0; i < notes.size(); ++i) {
        const NoteEvent& ev = *notes[i].ev;
        FeatureRow row;
        row.piece_id = piece_id;
        row.note_index = static_cast<int>(i);
        row.duration_q = ev.duration_q;
        row.on_beat = is_on_beat(ev.onset_in_bar_q, governing_meter(meters, ev.onset_q));

        bool first = i == 0;
        bool last = i + 1 == notes.size();
        row.boundary = (first || last) ? 1 : 0;
        row.from_rest = notes[i].rest_before ? 1 : 0;
        row.to_rest = notes[i].rest_after ? 1 : 0;

        bool arr_adjacent = !first && !notes[i].rest_before;
        bool dep_adjacent = !last && !notes[i].rest_after;
        row.arriving = classify_interval(
            arr_adjacent ? ev.midi_pitch - notes[i - 1].ev->midi_pitch : 0, arr_adjacent);
        row.departing = classify_interval(
            dep_adjacent ? notes[i + 1].ev->midi_pitch - ev.midi_pitch : 0, dep_adjacent);

        const Key& key = governing_key(keys, ev.onset_q);
        row.scale_degree = scale_degree_of(ev.pitch_class, key);

        const HarmEntry* h = governing_harm(harm, ev.onset_q);
        row.label = h ? label_note(ev.pitch_class, h->token, h->key, options.rn_policy)
                      : NoteLabel::Unlabeled;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<FeatureRow> apply_coding(std::vector<FeatureRow> rows, IntervalCoding mode) {
    for (auto& row : rows) {
        if (row.arriving == IntervalClass::unison) row.arriving = IntervalClass::step;
        if (row.departing == IntervalClass::unison) row.departing = IntervalClass::step;
    }
    if (mode == IntervalCoding::binary) {
        std::erase_if(rows, [](const FeatureRow& r) {
            return r.arriving == IntervalClass::none || r.departing == IntervalClass::none;
        });
    }
    return rows;
}

namespace {

constexpr const char* kFeatureHeader =
    "piece_id,note_index,duration_q,on_beat,arriving,departing,boundary,from_rest,to_rest,"
    "scale_degree,label";

NoteLabel label_from_string(std::string_view s) {
    if (s == "CT") return NoteLabel::CT;
    if (s == "NCT") return NoteLabel::NCT;
    if (s == "Unlabeled") return NoteLabel::Unlabeled;
    throw Error(errc::schema_mismatch, "unknown label '" + std::string(s) + "'");
}

ScaleDegree scale_degree_from_string(std::string_view s) {
    if (s.empty()) throw Error(errc::schema_mismatch, "empty scale_degree");
    ScaleDegree sd;
    sd.degree = s[0] - '0';
    if (sd.degree < 1 || sd.degree > 7)
        throw Error(errc::schema_mismatch, "bad scale_degree '" + std::string(s) + "'");
    if (s.size() > 1) {
        int alt = 0;
        auto body = s.substr(1);
        bool plus = body[0] == '+';
        if (plus) body = body.substr(1);
        auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), alt);
        if (ec != std::errc() || p != body.data() + body.size())
            throw Error(errc::schema_mismatch, "bad scale_degree '" + std::string(s) + "'");
        sd.alteration = alt;
    }
    return sd;
}

int binary_from_string(std::string_view s, const char* what) {
    if (s == "0") return 0;
    if (s == "1") return 1;
    throw Error(errc::schema_mismatch, std::string("bad ") + what + " '" + std::string(s) + "'");
}

} // namespace

std::string write_feature_csv(const std::vector<FeatureRow>& rows) {
    std::string out = kFeatureHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += csv_join({r.piece_id, std::to_string(r.note_index), to_string(r.duration_q),
                         std::to_string(r.on_beat), to_string(r.arriving), to_string(r.departing),
                         std::to_string(r.boundary), std::to_string(r.from_rest),
                         std::to_string(r.to_rest), to_string(r.scale_degree), to_string(r.label)});
        out += '\n';
    }
    return out;
}

std::vector<FeatureRow> read_feature_csv(std::string_view text) {
    auto cells = csv_parse(text);
    if (cells.empty()) throw Error(errc::schema_mismatch, "empty feature CSV");
    if (csv_join(cells.front()) != kFeatureHeader)
        throw Error(errc::schema_mismatch,
                    "feature CSV header mismatch: got '" + csv_join(cells.front()) + "'");
    std::vector<FeatureRow> rows;
    rows.reserve(cells.size() - 1);
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const auto& c = cells[i];
        if (c.size() != 11)
            throw Error(errc::schema_mismatch,
                        "row " + std::to_string(i) + " has " + std::to_string(c.size()) + " fields");
        FeatureRow r;
        r.piece_id = c[0];
        r.note_index = static_cast<int>(std::stol(c[1]));
        r.duration_q = rational_from_string(c[2]);
        r.on_beat = binary_from_string(c[3], "on_beat");
        r.arriving = interval_class_from_string(c[4]);
        r.departing = interval_class_from_string(c[5]);
        r.boundary = binary_from_string(c[6], "boundary");
        r.from_rest = binary_from_string(c[7], "from_rest");
        r.to_rest = binary_from_string(c[8], "to_rest");
        r.scale_degree = scale_degree_from_string(c[9]);
        r.label = label_from_string(c[10]);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace nct
