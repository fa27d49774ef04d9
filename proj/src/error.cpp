#include "forge/error.hpp"

namespace forge {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::bounds: return "bounds";
        case ErrorKind::schema_mismatch: return "schema_mismatch";
        case ErrorKind::missing_role: return "missing_role";
        case ErrorKind::out_of_range: return "out_of_range";
        case ErrorKind::duplicate_role: return "duplicate_role";
        case ErrorKind::unparseable: return "unparseable";
        case ErrorKind::empty_mask: return "empty_mask";
        case ErrorKind::dimension_mismatch: return "dimension_mismatch";
        case ErrorKind::io: return "io";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::conflict: return "conflict";
        case ErrorKind::service_unavailable: return "service_unavailable";
        case ErrorKind::service_protocol: return "service_protocol";
        case ErrorKind::no_match: return "no_match";
        case ErrorKind::missing_depth: return "missing_depth";
        case ErrorKind::unreachable: return "unreachable";
        case ErrorKind::empty_set: return "empty_set";
    }
    return "unknown";
}

ErrorKind error_kind_from_string(const std::string& name) {
    for (int k = 0; k <= static_cast<int>(ErrorKind::empty_set); ++k)
        if (name == to_string(static_cast<ErrorKind>(k))) return static_cast<ErrorKind>(k);
    return ErrorKind::invalid_argument;
}

}  // namespace forge
