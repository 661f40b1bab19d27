#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nc {

enum class ErrorKind {
    Domain,
    Coverage,
    Convergence,
    NoMode,
    Branch,
    Degenerate,
    Config,
    Geometry,
    Resolution,
    NumericalBlowup,
    NonConvergence,
    Io,
};

constexpr std::string_view to_string(ErrorKind k)
{
    switch (k) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::NoMode: return "no_mode";
    case ErrorKind::Branch: return "branch";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Config: return "config";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::NumericalBlowup: return "numerical_blowup";
    case ErrorKind::NonConvergence: return "nonconvergence";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

/// Single exception type for the library; `kind()` lets callers branch on
/// the failure class and `trace()` carries iterate or flux histories.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what, std::vector<double> trace = {})
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind),
          trace_(std::move(trace))
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    ErrorKind kind_;
    std::vector<double> trace_;
};

}  // namespace nc
