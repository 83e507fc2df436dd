#include "nct/error.hpp"

namespace nct {

const char* errc_name(errc code) {
    switch (code) {
        case errc::usage: return "Usage";
        case errc::malformed_token: return "MalformedToken";
        case errc::unsupported_spine_path: return "UnsupportedSpinePath";
        case errc::missing_interpretation: return "MissingInterpretation";
        case errc::no_kern_spine: return "NoKernSpine";
        case errc::multiple_harm_spines: return "MultipleHarmSpines";
        case errc::unparseable_rn: return "UnparseableRN";
        case errc::schema_mismatch: return "SchemaMismatch";
        case errc::empty_data: return "EmptyData";
        case errc::insufficient_data: return "InsufficientData";
        case errc::all_same_label: return "AllSameLabel";
        case errc::rank_deficient: return "RankDeficient";
        case errc::degenerate_split: return "DegenerateSplit";
        case errc::degenerate_fold: return "DegenerateFold";
        case errc::sample_too_large: return "SampleTooLarge";
        case errc::alignment_mismatch: return "AlignmentMismatch";
        case errc::numerical: return "NumericalFailure";
        case errc::io: return "IoError";
    }
    return "Error";
}

} // namespace nct
