#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sinit {

enum class Errc {
  invalid_parameter,
  domain,
  degenerate_spec,
  degenerate_batch,
  shape_mismatch,
  label_out_of_range,
  empty_input,
  io,
  config,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can report it in a structured form.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace sinit
