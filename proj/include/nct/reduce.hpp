#pragma once

#include "nct/kern.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace nct {

struct ReduceConfig {
    double threshold = 0.5; // p >= threshold -> CT
    std::string ct_color = "black";
    std::string nct_color = "hotpink";
    std::string unscored_color = "black"; // grace notes carry no probability
};

/// Appends a **color spine to the source: melody-note records carry the
/// thresholded CT/NCT color (every token of a tie chain gets its merged
/// note's color), grace records the unscored color, everything else null or
/// structural tokens. probs must align with the melody's sounding notes.
std::string colorize(const ScoreDocument& doc, const std::vector<NoteEvent>& melody,
                     const std::vector<double>& probs, const ReduceConfig& config = {},
                     const MelodyPolicy& policy = {});

/// Removes a trailing **color spine; inverse of colorize on its own output.
std::string strip_color(std::string_view kern_text);

} // namespace nct
