#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uldmc {

enum class Errc {
    InvalidInput,
    SingularMatrix,
    NotPositiveDefinite,
    MinimizerNotFound,
    TheoremInapplicable,
    NumericalBlowup,
    ConfigError,
    IoError,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::SingularMatrix: return "SingularMatrix";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::MinimizerNotFound: return "MinimizerNotFound";
    case Errc::TheoremInapplicable: return "TheoremInapplicable";
    case Errc::NumericalBlowup: return "NumericalBlowup";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

// Single exception type for the library; the category travels in code().
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(Errc::InvalidInput, what);
}

} // namespace uldmc
