#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace psg {

enum class ErrorCode {
    invalid_argument,
    domain_violation,
    unsupported_configuration,
    infeasible_set,
    invalid_strategy,
    not_applicable,
    parse_error,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library; the code tells callers which
/// contract was broken.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what,
          std::optional<std::size_t> index = std::nullopt);

    ErrorCode code() const noexcept { return code_; }

    /// Offending component (domain violations) when known.
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> index_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

} // namespace psg
