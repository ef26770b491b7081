#include "psg/error.hpp"

namespace psg {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::domain_violation: return "domain-violation";
    case ErrorCode::unsupported_configuration: return "unsupported-configuration";
    case ErrorCode::infeasible_set: return "infeasible-set";
    case ErrorCode::invalid_strategy: return "invalid-strategy";
    case ErrorCode::not_applicable: return "not-applicable";
    case ErrorCode::parse_error: return "parse-error";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), index_(index) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace psg
