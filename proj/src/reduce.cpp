#include "nct/reduce.hpp"

#include "nct/error.hpp"

#include <map>

namespace nct {

namespace {

std::vector<std::string> split_token(const std::string& tok, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = tok.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(tok.substr(start));
            break;
        }
        out.push_back(tok.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace

std::string colorize(const ScoreDocument& doc, const std::vector<NoteEvent>& melody,
                     const std::vector<double>& probs, const ReduceConfig& config,
                     const MelodyPolicy& policy) {
    int col = resolve_melody_spine(doc, policy);

    // one probability per sounding melody note, in order
    std::map<int, std::size_t> record_to_note; // source record -> note ordinal
    std::size_t n_notes = 0;
    for (const auto& ev : melody) {
        if (ev.is_rest || ev.is_grace) continue;
        for (int r : ev.record_indices) record_to_note[r] = n_notes;
        ++n_notes;
    }
    if (probs.size() != n_notes)
        throw Error(errc::alignment_mismatch,
                    std::to_string(probs.size()) + " probabilities for " + std::to_string(n_notes) +
                        " melody notes");

    std::string out;
    for (std::size_t r = 0; r < doc.raw_lines.size(); ++r) {
        const Record& rec = doc.records[r];
        const std::string& raw = doc.raw_lines[r];
        switch (rec.kind) {
            case RecordKind::blank:
            case RecordKind::global_comment:
                out += raw;
                break;
            case RecordKind::local_comment:
                out += raw;
                out += "\t!";
                break;
            case RecordKind::exclusive:
                out += raw;
                out += "\t**color";
                break;
            case RecordKind::terminator:
                out += raw;
                out += "\t*-";
                break;
            case RecordKind::interpretation:
                out += raw;
                out += "\t*";
                break;
            case RecordKind::barline:
                out += raw;
                out += '\t';
                out += rec.tokens[col];
                break;
            case RecordKind::data: {
                out += raw;
                out += '\t';
                auto note_it = record_to_note.find(static_cast<int>(r));
                if (note_it != record_to_note.end()) {
                    bool ct = probs[note_it->second] >= config.threshold;
                    out += ct ? config.ct_color : config.nct_color;
                } else {
                    const std::string& tok = rec.tokens[col];
                    bool grace = false;
                    if (tok != ".") {
                        for (const auto& sub : split_token(tok, ' ')) {
                            if (sub.empty()) continue;
                            KernNote n = parse_kern_note(sub);
                            if (n.is_grace && !n.is_rest) grace = true;
                        }
                    }
                    out += grace ? config.unscored_color : ".";
                }
                break;
            }
        }
        if (r + 1 < doc.raw_lines.size() || doc.trailing_newline) out += '\n';
    }
    return out;
}

std::string strip_color(std::string_view kern_text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    bool trailing_newline = false;
    while (start <= kern_text.size()) {
        std::size_t pos = kern_text.find('\n', start);
        if (pos == std::string_view::npos) {
            if (start < kern_text.size()) lines.push_back(kern_text.substr(start));
            break;
        }
        lines.push_back(kern_text.substr(start, pos - start));
        start = pos + 1;
        if (start == kern_text.size()) {
            trailing_newline = true;
            break;
        }
    }

    // last spine must be **color
    bool found = false;
    for (auto line : lines) {
        if (line.rfind("**", 0) == 0) {
            auto tab = line.rfind('\t');
            if (tab == std::string_view::npos || line.substr(tab + 1) != "**color")
                throw Error(errc::schema_mismatch, "last spine is not **color");
            found = true;
            break;
        }
    }
    if (!found) throw Error(errc::schema_mismatch, "no exclusive interpretation record");

    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        if (line.empty() || line.rfind("!!", 0) == 0) {
            out += line;
        } else {
            auto tab = line.rfind('\t');
            if (tab == std::string_view::npos)
                throw Error(errc::schema_mismatch, "spined record without tabs");
            out += line.substr(0, tab);
        }
        if (i + 1 < lines.size() || trailing_newline) out += '\n';
    }
    return out;
}

} // namespace nct
