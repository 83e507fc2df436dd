#pragma once

#include "nct/kern.hpp"

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace nct {

enum class ChordQuality { major, minor, diminished, augmented };
enum class Inversion { root, first, second, third };
enum class SpecialChord { none, neapolitan, italian6, french6, german6 };

struct RomanNumeral {
    int degree = 0; // 1-7; 0 when special != none
    ChordQuality quality = ChordQuality::major;
    bool seventh = false;
    Inversion inversion = Inversion::root; // parsed, membership-irrelevant
    SpecialChord special = SpecialChord::none;
    std::vector<RomanNumeral> applied_chain; // targets of X/Y[/Z], as written
};

struct ChordMembers {
    std::set<int> pcs;
    int root_pc = 0;
};

enum class NoteLabel { CT, NCT, Unlabeled };

enum class UnlabeledPolicy { skip, strict };

/// Strips phrase/eval markup a **harm data token may carry: parentheses
/// (implied harmony), brackets, fermatas, and alternate readings after a space.
std::string strip_harm_markup(std::string_view token);

/// Parses a cleaned harm token. Throws Error(unparseable_rn).
RomanNumeral parse_rn(std::string_view token);

/// Pitch-class members of the chord in the key. Applied chains re-root
/// through the tonicized keys right to left.
ChordMembers chord_pitch_classes(const RomanNumeral& rn, const Key& key);

/// CT iff pc is a member of the parsed harmony. Parse failures map to
/// Unlabeled (skip policy) or rethrow (strict).
NoteLabel label_note(int pc, std::string_view rn_token, const Key& key,
                     UnlabeledPolicy policy = UnlabeledPolicy::skip);

const char* to_string(NoteLabel label);

} // namespace nct
