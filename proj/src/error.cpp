#include "oodkit/error.hpp"

namespace oodkit {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::io: return "io";
    case Errc::bad_magic: return "bad_magic";
    case Errc::unsupported_version: return "unsupported_version";
    case Errc::unsupported_dtype: return "unsupported_dtype";
    case Errc::bad_rank: return "bad_rank";
    case Errc::truncated: return "truncated";
    case Errc::trailing_bytes: return "trailing_bytes";
    case Errc::non_finite: return "non_finite";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::oracle_cap_exceeded: return "oracle_cap_exceeded";
  }
  return "unknown";
}

}  // namespace oodkit
