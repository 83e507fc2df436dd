#include "nct/kern.hpp"

#include "nct/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <string>

namespace nct {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool is_spine_path_token(const std::string& tok) {
    return tok == "*^" || tok == "*v" || tok == "*+" || tok == "*x";
}

// *M3/4 but not *MM120
bool parse_meter_token(const std::string& tok, MeterSig& out) {
    if (tok.size() < 5 || tok.compare(0, 2, "*M") != 0) return false;
    std::string_view rest(tok.c_str() + 2, tok.size() - 2);
    if (rest.empty() || !std::isdigit(static_cast<unsigned char>(rest[0]))) return false;
    auto slash = rest.find('/');
    if (slash == std::string_view::npos) return false;
    int num = 0, den = 0;
    auto r1 = std::from_chars(rest.data(), rest.data() + slash, num);
    auto r2 = std::from_chars(rest.data() + slash + 1, rest.data() + rest.size(), den);
    if (r1.ec != std::errc() || r2.ec != std::errc() || r2.ptr != rest.data() + rest.size())
        return false;
    if (num < 1 || den < 1 || (den & (den - 1)) != 0) return false;
    out.numerator = num;
    out.denominator = den;
    return true;
}

// *C: / *a: / *f#: / *B-: with an optional mode suffix after the colon.
bool parse_key_token(const std::string& tok, Key& out) {
    if (tok.size() < 3 || tok[0] != '*') return false;
    char letter = tok[1];
    if (!std::isalpha(static_cast<unsigned char>(letter))) return false;
    char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
    if (upper < 'A' || upper > 'G') return false;
    static const int letter_pc[7] = {9, 11, 0, 2, 4, 5, 7}; // A..G
    int pc = letter_pc[upper - 'A'];
    std::size_t i = 2;
    while (i < tok.size() && (tok[i] == '#' || tok[i] == '-')) {
        pc += tok[i] == '#' ? 1 : -1;
        ++i;
    }
    if (i >= tok.size() || tok[i] != ':') return false;
    out.tonic_pc = ((pc % 12) + 12) % 12;
    out.mode = std::isupper(static_cast<unsigned char>(letter)) ? Mode::major : Mode::minor;
    return true;
}

} // namespace

Rational parse_recip(std::string_view text) {
    if (text.empty()) throw Error(errc::malformed_token, "empty duration");
    std::size_t i = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view digits = text.substr(0, i);
    if (digits.empty()) throw Error(errc::malformed_token, "missing duration digits");
    int dots = 0;
    while (i < text.size() && text[i] == '.') {
        ++dots;
        ++i;
    }
    if (i != text.size())
        throw Error(errc::malformed_token, "trailing characters in duration '" + std::string(text) + "'");

    Rational base;
    if (digits.find_first_not_of('0') == std::string_view::npos) {
        // 0 = breve, 00 = longa: each extra zero doubles.
        base = Rational(8);
        for (std::size_t z = 1; z < digits.size(); ++z) base *= 2;
    } else {
        std::int64_t recip = 0;
        std::from_chars(digits.data(), digits.data() + digits.size(), recip);
        base = Rational(4, recip);
    }
    // dots: base * (2 - 2^-dots)
    Rational dotted = base;
    Rational add = base;
    for (int d = 0; d < dots; ++d) {
        add /= 2;
        dotted += add;
    }
    return dotted;
}

KernNote parse_kern_note(std::string_view subtoken) {
    KernNote note;
    std::string_view tok = subtoken;

    std::string digits;
    int dots = 0;
    char pitch_letter = 0;
    int letter_count = 0;
    int accid = 0;
    bool pitch_done = false;

    for (std::size_t i = 0; i < tok.size(); ++i) {
        char c = tok[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            if (digits.empty() || (i > 0 && std::isdigit(static_cast<unsigned char>(tok[i - 1]))))
                digits += c;
            continue;
        }
        if (c == '.' && !digits.empty() && pitch_letter == 0) {
            ++dots;
            continue;
        }
        if ((c >= 'a' && c <= 'g') || (c >= 'A' && c <= 'G')) {
            if (pitch_letter == 0) {
                pitch_letter = c;
                letter_count = 1;
            } else if (c == pitch_letter && !pitch_done) {
                ++letter_count;
            } else {
                throw Error(errc::malformed_token,
                            "conflicting pitch letters in '" + std::string(subtoken) + "'");
            }
            continue;
        }
        if (pitch_letter != 0 && letter_count > 0) pitch_done = true;
        switch (c) {
            case '#': ++accid; continue;
            case '-': --accid; continue;
            case 'n': continue; // explicit natural
            case 'r': note.is_rest = true; continue;
            case 'q':
            case 'Q': note.is_grace = true; continue;
            case '[': note.tie_open = true; continue;
            case ']': note.tie_close = true; continue;
            case '_': note.tie_mid = true; continue;
            default: continue; // articulations, beams, slurs, stems, editorial
        }
    }

    if (!digits.empty()) {
        std::string recip = digits;
        recip.append(static_cast<std::size_t>(dots), '.');
        note.duration_q = parse_recip(recip);
    } else if (!note.is_grace) {
        throw Error(errc::malformed_token, "missing duration in '" + std::string(subtoken) + "'");
    }

    if (note.is_rest) {
        note.midi_pitch = -1;
        return note;
    }
    if (pitch_letter == 0)
        throw Error(errc::malformed_token, "no pitch or rest in '" + std::string(subtoken) + "'");

    static const int letter_semitone[7] = {9, 11, 0, 2, 4, 5, 7}; // A..G
    char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(pitch_letter)));
    int base = letter_semitone[upper - 'A'];
    int midi;
    if (std::islower(static_cast<unsigned char>(pitch_letter)))
        midi = 60 + 12 * (letter_count - 1) + base;
    else
        midi = 48 - 12 * (letter_count - 1) + base;
    midi += accid;
    if (midi < 0 || midi > 127)
        throw Error(errc::malformed_token, "pitch out of range in '" + std::string(subtoken) + "'");
    note.midi_pitch = midi;
    return note;
}

namespace {

// Duration a token occupies in its spine. Chords take the duration of their
// first timed subtoken; grace tokens take none.
Rational token_advance(const std::string& token) {
    Rational dur(0);
    bool any_non_grace = false;
    for (const auto& sub : split(token, ' ')) {
        if (sub.empty()) continue;
        KernNote n = parse_kern_note(sub);
        if (n.is_grace) continue;
        any_non_grace = true;
        dur = n.duration_q;
        break;
    }
    return any_non_grace ? dur : Rational(0);
}

} // namespace

const MeterSig& ScoreDocument::meter_at(const Rational& onset) const {
    if (meter_map.empty()) throw Error(errc::missing_interpretation, "no meter in " + source_id);
    const MeterSig* best = &meter_map.front().second;
    for (const auto& [t, m] : meter_map) {
        if (t <= onset) best = &m;
        else break;
    }
    return *best;
}

const Key& ScoreDocument::key_at(const Rational& onset) const {
    if (key_map.empty()) throw Error(errc::missing_interpretation, "no key in " + source_id);
    const Key* best = &key_map.front().second;
    for (const auto& [t, k] : key_map) {
        if (t <= onset) best = &k;
        else break;
    }
    return *best;
}

ScoreDocument::BarSegment ScoreDocument::bar_segment_at(const Rational& onset) const {
    if (bar_segments.empty()) {
        // no barlines: bars implied by the meter
        const MeterSig& m = meter_at(onset);
        Rational bar = m.bar_q();
        Rational q = onset / bar;
        std::int64_t idx = q.numerator() / q.denominator();
        BarSegment seg;
        seg.start = bar * idx;
        seg.end = seg.start + bar;
        seg.bar_index = static_cast<int>(idx);
        return seg;
    }
    const BarSegment* best = &bar_segments.front();
    for (const auto& seg : bar_segments) {
        if (seg.start <= onset) best = &seg;
        else break;
    }
    return *best;
}

ScoreDocument parse_kern(std::string_view text, std::string source_id) {
    ScoreDocument doc;
    doc.source_id = std::move(source_id);

    // Split lines, remembering the trailing newline for serialize().
    {
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t pos = text.find('\n', start);
            if (pos == std::string_view::npos) {
                doc.raw_lines.emplace_back(text.substr(start));
                doc.trailing_newline = false;
                break;
            }
            doc.raw_lines.emplace_back(text.substr(start, pos - start));
            start = pos + 1;
            if (start == text.size()) {
                doc.trailing_newline = true;
                break;
            }
        }
        if (text.empty()) {
            doc.raw_lines.clear();
            doc.trailing_newline = true;
        }
    }

    auto at = [&](int record, int spine) {
        return " at record " + std::to_string(record + 1) + ", spine " + std::to_string(spine + 1) +
               (doc.source_id.empty() ? "" : " of " + doc.source_id);
    };

    // Pass 1: records and spines.
    int spine_count = -1;
    bool saw_terminator = false;
    doc.records.reserve(doc.raw_lines.size());
    for (int r = 0; r < static_cast<int>(doc.raw_lines.size()); ++r) {
        std::string_view line = strip_cr(doc.raw_lines[r]);
        Record rec;
        if (line.empty()) {
            rec.kind = RecordKind::blank;
            doc.records.push_back(std::move(rec));
            continue;
        }
        if (line.size() >= 2 && line[0] == '!' && line[1] == '!') {
            rec.kind = RecordKind::global_comment;
            doc.records.push_back(std::move(rec));
            continue;
        }
        auto tokens = split(line, '\t');
        if (spine_count < 0) {
            // first spined record opens the spines
            for (const auto& t : tokens) {
                if (t.rfind("**", 0) != 0)
                    throw Error(errc::malformed_token,
                                "expected exclusive interpretation record" + at(r, 0));
                Spine spine;
                spine.exclusive_interp = t;
                doc.spines.push_back(std::move(spine));
            }
            spine_count = static_cast<int>(tokens.size());
            rec.kind = RecordKind::exclusive;
        } else {
            if (static_cast<int>(tokens.size()) != spine_count)
                throw Error(errc::malformed_token,
                            "record has " + std::to_string(tokens.size()) + " tokens, expected " +
                                std::to_string(spine_count) + at(r, 0));
            const std::string& first = tokens[0];
            if (first[0] == '!') {
                rec.kind = RecordKind::local_comment;
            } else if (first.rfind("**", 0) == 0) {
                throw Error(errc::unsupported_spine_path, "spine addition" + at(r, 0));
            } else if (first[0] == '*') {
                bool all_term = true;
                for (int s = 0; s < spine_count; ++s) {
                    if (is_spine_path_token(tokens[s]))
                        throw Error(errc::unsupported_spine_path,
                                    "'" + tokens[s] + "'" + at(r, s));
                    if (tokens[s] != "*-") all_term = false;
                }
                rec.kind = all_term ? RecordKind::terminator : RecordKind::interpretation;
                if (all_term) saw_terminator = true;
            } else if (first[0] == '=') {
                rec.kind = RecordKind::barline;
            } else {
                rec.kind = RecordKind::data;
            }
        }
        for (int s = 0; s < spine_count && rec.kind != RecordKind::global_comment; ++s) {
            doc.spines[s].record_indices.push_back(r);
            doc.spines[s].tokens.push_back(tokens[s]);
        }
        rec.tokens = std::move(tokens);
        doc.records.push_back(std::move(rec));
    }
    (void)saw_terminator;

    // Pass 2: rhythm. Onsets accumulate per kern spine.
    std::vector<int> kern_cols;
    for (int s = 0; s < doc.spine_count(); ++s)
        if (doc.spines[s].is_kern()) kern_cols.push_back(s);

    std::vector<Rational> cur(doc.spine_count(), Rational(0));
    doc.record_onsets.assign(doc.records.size(), Rational(0));
    std::vector<std::pair<int, Rational>> barline_onsets; // record, onset
    int first_data_record = -1;

    for (int r = 0; r < static_cast<int>(doc.records.size()); ++r) {
        const Record& rec = doc.records[r];
        Rational now(0);
        if (!kern_cols.empty()) {
            now = cur[kern_cols.front()];
            for (int s : kern_cols) now = std::min(now, cur[s]);
        }
        switch (rec.kind) {
            case RecordKind::data: {
                if (first_data_record < 0) first_data_record = r;
                bool any = false;
                Rational onset(0);
                for (int s : kern_cols) {
                    const std::string& tok = rec.tokens[s];
                    if (tok == ".") continue;
                    if (!any || cur[s] < onset) onset = cur[s];
                    any = true;
                }
                doc.record_onsets[r] = any ? onset : now;
                for (int s : kern_cols) {
                    const std::string& tok = rec.tokens[s];
                    if (tok == ".") continue;
                    try {
                        cur[s] += token_advance(tok);
                    } catch (const Error& e) {
                        throw Error(e.code(), std::string(e.what()) + at(r, s));
                    }
                }
                break;
            }
            case RecordKind::barline: {
                Rational end(0);
                for (int s : kern_cols) end = std::max(end, cur[s]);
                doc.record_onsets[r] = end;
                barline_onsets.emplace_back(r, end);
                break;
            }
            default:
                doc.record_onsets[r] = now;
                break;
        }
    }

    Rational total_end(0);
    for (int s : kern_cols) total_end = std::max(total_end, cur[s]);

    // Pass 3: meter and key maps.
    for (int r = 0; r < static_cast<int>(doc.records.size()); ++r) {
        const Record& rec = doc.records[r];
        if (rec.kind != RecordKind::interpretation && rec.kind != RecordKind::exclusive) continue;
        MeterSig meter;
        Key key;
        for (const auto& tok : rec.tokens) {
            if (parse_meter_token(tok, meter)) {
                doc.meter_map.emplace_back(doc.record_onsets[r], meter);
                break;
            }
        }
        for (const auto& tok : rec.tokens) {
            if (parse_key_token(tok, key)) {
                doc.key_map.emplace_back(doc.record_onsets[r], key);
                break;
            }
        }
    }
    if (first_data_record >= 0 && !kern_cols.empty()) {
        if (doc.meter_map.empty() || doc.meter_map.front().first > doc.record_onsets[first_data_record])
            throw Error(errc::missing_interpretation,
                        "no meter before the first data record" +
                            (doc.source_id.empty() ? "" : " in " + doc.source_id));
        if (doc.key_map.empty() || doc.key_map.front().first > doc.record_onsets[first_data_record])
            throw Error(errc::missing_interpretation,
                        "no key before the first data record" +
                            (doc.source_id.empty() ? "" : " in " + doc.source_id));
    }

    // Pass 4: bar segments.
    if (!kern_cols.empty() && first_data_record >= 0) {
        std::vector<Rational> bounds;
        bounds.emplace_back(0);
        for (const auto& [r, onset] : barline_onsets)
            if (bounds.empty() || onset != bounds.back()) bounds.push_back(onset);
        if (bounds.back() < total_end) bounds.push_back(total_end);
        for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
            ScoreDocument::BarSegment seg;
            seg.start = bounds[i];
            seg.end = bounds[i + 1];
            seg.bar_index = static_cast<int>(i);
            doc.bar_segments.push_back(seg);
        }
        if (!doc.bar_segments.empty()) {
            auto& first = doc.bar_segments.front();
            Rational notated = doc.meter_at(first.start).bar_q();
            // a short opening bar closed by a real barline is a pickup
            bool closed_by_barline = false;
            for (const auto& [r, onset] : barline_onsets)
                if (onset == first.end) {
                    closed_by_barline = true;
                    break;
                }
            if (first.end - first.start < notated && closed_by_barline) first.anacrusis = true;
        }

        doc.record_bar_index.assign(doc.records.size(), 0);
        for (int r = 0; r < static_cast<int>(doc.records.size()); ++r)
            doc.record_bar_index[r] = doc.bar_segment_at(doc.record_onsets[r]).bar_index;

        // Duration conservation per kern spine and bar (warning only).
        for (int s : kern_cols) {
            std::vector<Rational> sums(doc.bar_segments.size(), Rational(0));
            std::vector<int> counts(doc.bar_segments.size(), 0);
            Rational pos(0);
            const Spine& spine = doc.spines[s];
            for (std::size_t i = 0; i < spine.tokens.size(); ++i) {
                int r = spine.record_indices[i];
                if (doc.records[r].kind != RecordKind::data) continue;
                const std::string& tok = spine.tokens[i];
                if (tok == ".") continue;
                Rational dur = token_advance(tok);
                auto seg = doc.bar_segment_at(pos);
                if (seg.bar_index < static_cast<int>(sums.size())) {
                    sums[seg.bar_index] += dur;
                    counts[seg.bar_index] += 1;
                }
                pos += dur;
            }
            for (std::size_t b = 0; b < doc.bar_segments.size(); ++b) {
                const auto& seg = doc.bar_segments[b];
                if (seg.anacrusis || counts[b] == 0) continue;
                Rational notated = doc.meter_at(seg.start).bar_q();
                if (sums[b] != notated)
                    doc.warnings.push_back("bar " + std::to_string(seg.bar_index) + " of spine " +
                                           std::to_string(s + 1) + " sums to " + to_string(sums[b]) +
                                           "q, meter implies " + to_string(notated) + "q" +
                                           (doc.source_id.empty() ? "" : " in " + doc.source_id));
            }
        }
    }

    return doc;
}

std::string serialize(const ScoreDocument& doc) {
    std::string out;
    for (std::size_t i = 0; i < doc.raw_lines.size(); ++i) {
        out += doc.raw_lines[i];
        if (i + 1 < doc.raw_lines.size() || doc.trailing_newline) out += '\n';
    }
    return out;
}

int resolve_melody_spine(const ScoreDocument& doc, const MelodyPolicy& policy) {
    std::vector<int> kern_cols;
    for (int s = 0; s < doc.spine_count(); ++s)
        if (doc.spines[s].is_kern()) kern_cols.push_back(s);
    if (kern_cols.empty())
        throw Error(errc::no_kern_spine, doc.source_id.empty() ? "no **kern spine" : doc.source_id);
    if (policy.kern_index < 0) return kern_cols.back();
    if (policy.kern_index >= static_cast<int>(kern_cols.size()))
        throw Error(errc::no_kern_spine,
                    "kern spine index " + std::to_string(policy.kern_index) + " out of range (" +
                        std::to_string(kern_cols.size()) + " kern spines)");
    return kern_cols[static_cast<std::size_t>(policy.kern_index)];
}

std::vector<NoteEvent> select_melody(const ScoreDocument& doc, const MelodyPolicy& policy) {
    int col = resolve_melody_spine(doc, policy);
    const Spine& spine = doc.spines[col];

    std::vector<NoteEvent> events;
    Rational pos(0);

    bool chain_active = false;
    NoteEvent chain;

    auto finish_bar_fields = [&](NoteEvent& ev) {
        auto seg = doc.bar_segment_at(ev.onset_q);
        ev.bar_index = seg.bar_index;
        const MeterSig& meter = doc.meter_at(ev.onset_q);
        if (seg.anacrusis)
            ev.onset_in_bar_q = meter.bar_q() - (seg.end - ev.onset_q);
        else
            ev.onset_in_bar_q = ev.onset_q - seg.start;
    };

    auto flush_chain = [&] {
        if (!chain_active) return;
        finish_bar_fields(chain);
        events.push_back(chain);
        chain_active = false;
    };

    for (std::size_t i = 0; i < spine.tokens.size(); ++i) {
        int r = spine.record_indices[i];
        if (doc.records[r].kind != RecordKind::data) continue;
        const std::string& tok = spine.tokens[i];
        if (tok == ".") continue;

        // chord tokens reduce to their highest pitch
        KernNote chosen;
        bool have = false;
        bool all_rest = true;
        KernNote first_note;
        bool have_first = false;
        for (const auto& sub : split(tok, ' ')) {
            if (sub.empty()) continue;
            KernNote n;
            try {
                n = parse_kern_note(sub);
            } catch (const Error& e) {
                throw Error(e.code(), std::string(e.what()) + " at record " + std::to_string(r + 1) +
                                          (doc.source_id.empty() ? "" : " of " + doc.source_id));
            }
            if (!have_first) {
                first_note = n;
                have_first = true;
            }
            if (n.is_rest) continue;
            all_rest = false;
            if (!have || n.midi_pitch > chosen.midi_pitch) {
                chosen = n;
                have = true;
            }
        }
        if (!have_first) continue;

        Rational advance = token_advance(tok);

        if (all_rest) {
            flush_chain();
            NoteEvent ev;
            ev.is_rest = true;
            ev.onset_q = pos;
            ev.duration_q = first_note.duration_q;
            ev.record_indices.push_back(r);
            finish_bar_fields(ev);
            events.push_back(ev);
            pos += advance;
            continue;
        }
        if (chosen.is_grace) {
            pos += advance; // zero
            continue;
        }

        if (chain_active && (chosen.tie_mid || chosen.tie_close) &&
            chosen.midi_pitch == chain.midi_pitch) {
            chain.duration_q += chosen.duration_q;
            chain.record_indices.push_back(r);
            chain.tie_merged = true;
            if (chosen.tie_close) flush_chain();
            pos += advance;
            continue;
        }
        flush_chain();

        NoteEvent ev;
        ev.midi_pitch = chosen.midi_pitch;
        ev.pitch_class = ((chosen.midi_pitch % 12) + 12) % 12;
        ev.onset_q = pos;
        ev.duration_q = chosen.duration_q;
        ev.record_indices.push_back(r);
        if (chosen.tie_open) {
            chain = ev;
            chain_active = true;
        } else {
            finish_bar_fields(ev);
            events.push_back(ev);
        }
        pos += advance;
    }
    flush_chain();
    return events;
}

std::vector<HarmEntry> harm_timeline(const ScoreDocument& doc) {
    std::vector<int> harm_cols;
    for (int s = 0; s < doc.spine_count(); ++s)
        if (doc.spines[s].is_harm()) harm_cols.push_back(s);
    if (harm_cols.empty()) return {};
    if (harm_cols.size() > 1)
        throw Error(errc::multiple_harm_spines,
                    std::to_string(harm_cols.size()) + " **harm spines" +
                        (doc.source_id.empty() ? "" : " in " + doc.source_id));

    const Spine& spine = doc.spines[harm_cols.front()];
    std::vector<HarmEntry> timeline;
    for (std::size_t i = 0; i < spine.tokens.size(); ++i) {
        int r = spine.record_indices[i];
        if (doc.records[r].kind != RecordKind::data) continue;
        const std::string& tok = spine.tokens[i];
        if (tok == ".") continue;
        HarmEntry entry;
        entry.onset_q = doc.record_onsets[r];
        entry.token = tok;
        entry.key = doc.key_at(entry.onset_q);
        entry.record_index = r;
        timeline.push_back(std::move(entry));
    }
    return timeline;
}

} // namespace nct
