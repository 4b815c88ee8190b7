#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oodkit {

enum class Errc {
  io,
  bad_magic,
  unsupported_version,
  unsupported_dtype,
  bad_rank,
  truncated,
  trailing_bytes,
  non_finite,
  shape_mismatch,
  invalid_argument,
  oracle_cap_exceeded,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above, so
/// callers (and the CLI's exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace oodkit
