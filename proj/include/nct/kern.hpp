#pragma once

#include "nct/rational.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nct {

struct MeterSig {
    int numerator = 4;
    int denominator = 4;

    /// Bar length in quarter notes: numerator * (4/denominator).
    Rational bar_q() const { return Rational(numerator * 4, denominator); }

    /// Beat length in quarter notes. Simple meters beat on 4/denominator;
    /// compound meters (numerator divisible by 3 and > 3) on 3*(4/denominator).
    Rational beat_q() const {
        if (numerator > 3 && numerator % 3 == 0) return Rational(12, denominator);
        return Rational(4, denominator);
    }
};

enum class Mode { major, minor };

struct Key {
    int tonic_pc = 0; // 0-11
    Mode mode = Mode::major;

    bool operator==(const Key&) const = default;
};

/// One melodic sounding event, rest, or (pre-filter) grace note.
struct NoteEvent {
    int midi_pitch = -1; // -1 for rests
    int pitch_class = -1;
    Rational onset_q{0};
    Rational onset_in_bar_q{0};
    Rational duration_q{0};
    bool is_rest = false;
    bool is_grace = false;
    bool tie_merged = false;
    int bar_index = 0;
    std::vector<int> record_indices; // source records, one per tie-chain token
};

enum class RecordKind {
    global_comment, // "!!..." (not spined)
    local_comment,  // "!..." per spine
    exclusive,      // "**kern ..."
    interpretation, // tandem "*..." records
    terminator,     // all "*-"
    barline,        // "=..."
    data,
    blank
};

struct Record {
    RecordKind kind = RecordKind::blank;
    std::vector<std::string> tokens; // empty for unspined records
};

struct Spine {
    std::string exclusive_interp;      // "**kern", "**harm", ...
    std::vector<int> record_indices;   // spined records, in order
    std::vector<std::string> tokens;   // token per spined record

    bool is_kern() const { return exclusive_interp == "**kern"; }
    bool is_harm() const { return exclusive_interp == "**harm"; }
};

/// A parsed Humdrum document. Immutable after construction; raw lines are
/// kept verbatim so serialize() reproduces the input.
struct ScoreDocument {
    std::string source_id;
    std::vector<std::string> raw_lines;
    bool trailing_newline = true;
    std::vector<Record> records;
    std::vector<Spine> spines;
    std::vector<Rational> record_onsets; // onset per record, quarters from start
    std::vector<int> record_bar_index;   // governing bar per record
    std::vector<std::pair<Rational, MeterSig>> meter_map; // sorted by onset
    std::vector<std::pair<Rational, Key>> key_map;        // sorted by onset
    std::vector<std::string> warnings;   // duration-conservation and similar

    int spine_count() const { return static_cast<int>(spines.size()); }

    const MeterSig& meter_at(const Rational& onset) const;
    const Key& key_at(const Rational& onset) const;

    /// Bar segment [start, end) covering `onset`, with anacrusis flag.
    struct BarSegment {
        Rational start;
        Rational end;
        int bar_index = 0;
        bool anacrusis = false;
    };
    BarSegment bar_segment_at(const Rational& onset) const;

    std::vector<BarSegment> bar_segments; // filled by parse
};

/// Parsed single kern note/rest subtoken.
struct KernNote {
    Rational duration_q{0};
    int midi_pitch = -1; // -1 for rests
    bool is_rest = false;
    bool is_grace = false;
    bool tie_open = false;
    bool tie_mid = false;
    bool tie_close = false;
};

/// Reciprocal duration with dots: "8." -> 3/4 of a quarter. "0" is a breve,
/// "00" a longa.
Rational parse_recip(std::string_view text);

/// Parses one note/rest subtoken (no chord spaces). Throws Error(malformed_token).
KernNote parse_kern_note(std::string_view subtoken);

ScoreDocument parse_kern(std::string_view text, std::string source_id = "");

/// Verbatim re-serialization of the unmodified document.
std::string serialize(const ScoreDocument& doc);

struct MelodyPolicy {
    int kern_index = -1; // ordinal among kern spines, left to right; -1 = right-most
};

/// Absolute spine column of the melody spine under the policy. Throws NoKernSpine.
int resolve_melody_spine(const ScoreDocument& doc, const MelodyPolicy& policy = {});

/// Note/rest stream of the melody spine: ties merged, grace notes removed,
/// chords reduced to their highest pitch. Strictly increasing onsets.
std::vector<NoteEvent> select_melody(const ScoreDocument& doc, const MelodyPolicy& policy = {});

struct HarmEntry {
    Rational onset_q{0};
    std::string token;
    Key key;
    int record_index = 0;
};

/// Harmony tokens with their governing key, forward-filled in time.
/// Empty when the document has no **harm spine; throws MultipleHarmSpines.
std::vector<HarmEntry> harm_timeline(const ScoreDocument& doc);

} // namespace nct
