#include "core/errors.hpp"

namespace opf {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::invalid_argument:       return "invalid_argument";
    case Errc::decode:                 return "decode";
    case Errc::unsupported_format:     return "unsupported_format";
    case Errc::empty_audio:            return "empty_audio";
    case Errc::too_short:              return "too_short";
    case Errc::all_silent:             return "all_silent";
    case Errc::dimension_mismatch:     return "dimension_mismatch";
    case Errc::empty_foreground:       return "empty_foreground";
    case Errc::incompatible_histogram: return "incompatible_histogram";
    case Errc::conflict:               return "conflict";
    case Errc::not_found:              return "not_found";
    case Errc::empty_enrollment:       return "empty_enrollment";
    case Errc::factor_unavailable:     return "factor_unavailable";
    case Errc::heterogeneous_corpus:   return "heterogeneous_corpus";
    case Errc::io:                     return "io";
    case Errc::parse:                  return "parse";
    case Errc::bad_version:            return "bad_version";
    case Errc::network:                return "network";
    case Errc::internal:               return "internal";
    }
    return "unknown";
}

} // namespace opf
