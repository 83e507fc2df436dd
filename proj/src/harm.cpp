#include "nct/harm.hpp"

#include "nct/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace nct {

const char* to_string(NoteLabel label) {
    switch (label) {
        case NoteLabel::CT: return "CT";
        case NoteLabel::NCT: return "NCT";
        case NoteLabel::Unlabeled: return "Unlabeled";
    }
    return "Unlabeled";
}

std::string strip_harm_markup(std::string_view token) {
    // alternate readings after whitespace: keep the first
    auto ws = token.find_first_of(" \t");
    if (ws != std::string_view::npos) token = token.substr(0, ws);
    std::string out;
    out.reserve(token.size());
    for (char c : token) {
        switch (c) {
            case '(': case ')': case '[': case ']':
            case '{': case '}': case ';': case ',':
                break; // implied-harmony parens, phrase and fermata markup
            default:
                out += c;
        }
    }
    return out;
}

namespace {

struct SimpleRn {
    int degree = 0;
    ChordQuality quality = ChordQuality::major;
    bool seventh = false;
    Inversion inversion = Inversion::root;
    SpecialChord special = SpecialChord::none;
};

int roman_degree(std::string_view letters) {
    std::string up;
    for (char c : letters) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    static const std::array<std::pair<const char*, int>, 7> names = {{
        {"I", 1}, {"II", 2}, {"III", 3}, {"IV", 4}, {"V", 5}, {"VI", 6}, {"VII", 7},
    }};
    for (const auto& [name, deg] : names)
        if (up == name) return deg;
    return 0;
}

SimpleRn parse_simple(std::string_view part, std::string_view whole) {
    auto fail = [&]() -> Error {
        return Error(errc::unparseable_rn, "'" + std::string(whole) + "'");
    };
    if (part.empty()) throw fail();

    SimpleRn rn;

    // special chords: Neapolitan and augmented sixths; trailing figures and
    // inversion letters are membership-irrelevant
    auto eat_figures = [&](std::string_view rest) {
        for (char c : rest)
            if (!std::isdigit(static_cast<unsigned char>(c)) && !(c >= 'a' && c <= 'd'))
                throw fail();
    };
    if (part[0] == 'N') {
        rn.special = SpecialChord::neapolitan;
        eat_figures(part.substr(1));
        return rn;
    }
    if (part.size() >= 2) {
        std::string_view head = part.substr(0, 2);
        if (head == "It" || head == "Lt") rn.special = SpecialChord::italian6;
        else if (head == "Fr") rn.special = SpecialChord::french6;
        else if (head == "Gr" || head == "Gn" || head == "Ge") rn.special = SpecialChord::german6;
        if (rn.special != SpecialChord::none) {
            eat_figures(part.substr(part.size() >= 3 && std::isalpha(static_cast<unsigned char>(part[2])) ? 3 : 2));
            return rn;
        }
    }

    std::size_t i = 0;
    while (i < part.size() &&
           (std::toupper(static_cast<unsigned char>(part[i])) == 'I' ||
            std::toupper(static_cast<unsigned char>(part[i])) == 'V'))
        ++i;
    std::string_view letters = part.substr(0, i);
    if (letters.empty()) throw fail();
    bool lower = std::islower(static_cast<unsigned char>(letters[0]));
    for (char c : letters)
        if (static_cast<bool>(std::islower(static_cast<unsigned char>(c))) != lower) throw fail();
    rn.degree = roman_degree(letters);
    if (rn.degree == 0) throw fail();
    rn.quality = lower ? ChordQuality::minor : ChordQuality::major;

    if (i < part.size() && part[i] == 'o') {
        if (!lower) throw fail();
        rn.quality = ChordQuality::diminished;
        ++i;
    } else if (i < part.size() && part[i] == '+') {
        if (lower) throw fail();
        rn.quality = ChordQuality::augmented;
        ++i;
    }
    if (i < part.size() && part[i] == '7') {
        rn.seventh = true;
        ++i;
    }
    if (i < part.size()) {
        switch (part[i]) {
            case 'a': rn.inversion = Inversion::root; ++i; break;
            case 'b': rn.inversion = Inversion::first; ++i; break;
            case 'c': rn.inversion = Inversion::second; ++i; break;
            case 'd': rn.inversion = Inversion::third; ++i; break;
            default: break;
        }
    }
    if (i != part.size()) throw fail();
    return rn;
}

} // namespace

RomanNumeral parse_rn(std::string_view token) {
    if (token.empty()) throw Error(errc::unparseable_rn, "empty token");

    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = token.find('/', start);
        if (pos == std::string_view::npos) {
            parts.push_back(token.substr(start));
            break;
        }
        parts.push_back(token.substr(start, pos - start));
        start = pos + 1;
    }

    SimpleRn base = parse_simple(parts[0], token);
    RomanNumeral rn;
    rn.degree = base.degree;
    rn.quality = base.quality;
    rn.seventh = base.seventh;
    rn.inversion = base.inversion;
    rn.special = base.special;

    for (std::size_t p = 1; p < parts.size(); ++p) {
        SimpleRn target = parse_simple(parts[p], token);
        if (target.special != SpecialChord::none || rn.special != SpecialChord::none)
            throw Error(errc::unparseable_rn, "'" + std::string(token) + "'");
        RomanNumeral t;
        t.degree = target.degree;
        t.quality = target.quality;
        t.seventh = target.seventh;
        t.inversion = target.inversion;
        rn.applied_chain.push_back(std::move(t));
    }
    return rn;
}

namespace {

// Scale-degree roots. Minor uses the natural scale except that diminished
// sevenths (viio and viio7) root on the raised leading tone.
int degree_root_offset(int degree, Mode mode, ChordQuality quality) {
    static const int major_scale[7] = {0, 2, 4, 5, 7, 9, 11};
    static const int minor_scale[7] = {0, 2, 3, 5, 7, 8, 10};
    int off = mode == Mode::major ? major_scale[degree - 1] : minor_scale[degree - 1];
    if (mode == Mode::minor && degree == 7 && quality == ChordQuality::diminished) off = 11;
    return off;
}

Key tonicized_key(const RomanNumeral& target, const Key& key) {
    int off = degree_root_offset(target.degree, key.mode, target.quality);
    Key out;
    out.tonic_pc = (key.tonic_pc + off) % 12;
    out.mode = (target.quality == ChordQuality::minor || target.quality == ChordQuality::diminished)
                   ? Mode::minor
                   : Mode::major;
    return out;
}

} // namespace

ChordMembers chord_pitch_classes(const RomanNumeral& rn, const Key& key) {
    ChordMembers out;
    int t = key.tonic_pc;
    auto add = [&](int pc) { out.pcs.insert(((pc % 12) + 12) % 12); };

    if (rn.special != SpecialChord::none) {
        switch (rn.special) {
            case SpecialChord::neapolitan:
                out.root_pc = (t + 1) % 12;
                add(t + 1); add(t + 5); add(t + 8);
                break;
            case SpecialChord::italian6:
                out.root_pc = (t + 8) % 12;
                add(t + 8); add(t); add(t + 6);
                break;
            case SpecialChord::french6:
                out.root_pc = (t + 8) % 12;
                add(t + 8); add(t); add(t + 2); add(t + 6);
                break;
            case SpecialChord::german6:
                out.root_pc = (t + 8) % 12;
                add(t + 8); add(t); add(t + 3); add(t + 6);
                break;
            default: break;
        }
        return out;
    }

    Key local = key;
    for (auto it = rn.applied_chain.rbegin(); it != rn.applied_chain.rend(); ++it)
        local = tonicized_key(*it, local);

    int root = (local.tonic_pc + degree_root_offset(rn.degree, local.mode, rn.quality)) % 12;
    out.root_pc = root;
    switch (rn.quality) {
        case ChordQuality::major: add(root); add(root + 4); add(root + 7); break;
        case ChordQuality::minor: add(root); add(root + 3); add(root + 7); break;
        case ChordQuality::diminished: add(root); add(root + 3); add(root + 6); break;
        case ChordQuality::augmented: add(root); add(root + 4); add(root + 8); break;
    }
    if (rn.seventh)
        add(root + (rn.quality == ChordQuality::diminished ? 9 : 10));
    return out;
}

NoteLabel label_note(int pc, std::string_view rn_token, const Key& key, UnlabeledPolicy policy) {
    std::string cleaned = strip_harm_markup(rn_token);
    try {
        RomanNumeral rn = parse_rn(cleaned);
        ChordMembers members = chord_pitch_classes(rn, key);
        return members.pcs.count(((pc % 12) + 12) % 12) ? NoteLabel::CT : NoteLabel::NCT;
    } catch (const Error& e) {
        if (e.code() == errc::unparseable_rn && policy == UnlabeledPolicy::skip)
            return NoteLabel::Unlabeled;
        throw;
    }
}

} // namespace nct
