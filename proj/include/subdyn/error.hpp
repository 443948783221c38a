#ifndef SUBDYN_ERROR_HPP
#define SUBDYN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace subdyn {

enum class ErrorKind {
    InvalidInput,
    NonCommuting,
    DegenerateDecomposition,
    ZeroVector,
    SecondTypeSingular,
    DisconnectedWindow,
    NotHyperbolic,
    DefectTooLarge,
    WindowMismatch,
    WindowExhausted,
    MissingLatticePoint,
    Inconsistent,
    CannotAdvance,
    RangeExceeded,
    RatesFailed,
    JumpOffLine,
    MixedOrientation,
};

inline const char* to_string(ErrorKind k)
{
    switch (k) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NonCommuting: return "NonCommuting";
    case ErrorKind::DegenerateDecomposition: return "DegenerateDecomposition";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::SecondTypeSingular: return "SecondTypeSingular";
    case ErrorKind::DisconnectedWindow: return "DisconnectedWindow";
    case ErrorKind::NotHyperbolic: return "NotHyperbolic";
    case ErrorKind::DefectTooLarge: return "DefectTooLarge";
    case ErrorKind::WindowMismatch: return "WindowMismatch";
    case ErrorKind::WindowExhausted: return "WindowExhausted";
    case ErrorKind::MissingLatticePoint: return "MissingLatticePoint";
    case ErrorKind::Inconsistent: return "Inconsistent";
    case ErrorKind::CannotAdvance: return "CannotAdvance";
    case ErrorKind::RangeExceeded: return "RangeExceeded";
    case ErrorKind::RatesFailed: return "RatesFailed";
    case ErrorKind::JumpOffLine: return "JumpOffLine";
    case ErrorKind::MixedOrientation: return "MixedOrientation";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

    /// Input-validation failures map to CLI exit code 2, the rest to 3.
    bool is_input_error() const noexcept
    {
        return kind_ == ErrorKind::InvalidInput || kind_ == ErrorKind::NonCommuting ||
               kind_ == ErrorKind::ZeroVector || kind_ == ErrorKind::WindowMismatch ||
               kind_ == ErrorKind::JumpOffLine || kind_ == ErrorKind::MixedOrientation;
    }

private:
    ErrorKind kind_;
};

} // namespace subdyn

#endif
