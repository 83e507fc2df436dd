#pragma once

#include <stdexcept>
#include <string>

namespace nct {

enum class errc {
    usage,
    malformed_token,
    unsupported_spine_path,
    missing_interpretation,
    no_kern_spine,
    multiple_harm_spines,
    unparseable_rn,
    schema_mismatch,
    empty_data,
    insufficient_data,
    all_same_label,
    rank_deficient,
    degenerate_split,
    degenerate_fold,
    sample_too_large,
    alignment_mismatch,
    numerical,
    io
};

const char* errc_name(errc code);

/// Exception type carrying an error class. Process exit codes derive from
/// the class: 1 usage, 2 data, 3 numerical failure.
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

    int exit_code() const noexcept {
        switch (code_) {
            case errc::usage: return 1;
            case errc::all_same_label:
            case errc::rank_deficient:
            case errc::numerical: return 3;
            default: return 2;
        }
    }

private:
    errc code_;
};

} // namespace nct
