#include "sinit/error.hpp"

namespace sinit {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_parameter: return "invalid_parameter";
    case Errc::domain: return "domain";
    case Errc::degenerate_spec: return "degenerate_spec";
    case Errc::degenerate_batch: return "degenerate_batch";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::label_out_of_range: return "label_out_of_range";
    case Errc::empty_input: return "empty_input";
    case Errc::io: return "io";
    case Errc::config: return "config";
  }
  return "unknown";
}

}  // namespace sinit
