#pragma once

#include <stdexcept>
#include <string>

namespace glht {

enum class ErrorKind {
    InvalidDimension,
    InvalidInput,
    RankDeficiency,
    SampleTooSmall,
    Config,
    Parse,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidDimension: return "invalid-dimension";
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::RankDeficiency: return "rank-deficiency";
        case ErrorKind::SampleTooSmall: return "sample-too-small";
        case ErrorKind::Config: return "config";
        case ErrorKind::Parse: return "parse";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace glht
