#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace isac {

enum class ErrorKind {
    invalid_dimension,
    domain,
    singular_matrix,
    not_psd,
    unsupported_constellation,
    invalid_parameter,
    degenerate_scenario,
    infeasible_separation,
    singular_fim,
    no_valid_draws,
    inapplicable_basis,
    config,
    io,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. `kind()` lets callers (the CLI in particular) map
/// failures onto exit codes without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised for singular matrices and singular FIM draws; carries the
/// reciprocal condition estimate that triggered it.
class SingularError : public Error {
public:
    SingularError(ErrorKind kind, const std::string& what, double rcond)
        : Error(kind, what), rcond_(rcond) {}

    double rcond() const noexcept { return rcond_; }

private:
    double rcond_ = std::numeric_limits<double>::quiet_NaN();
};

} // namespace isac
