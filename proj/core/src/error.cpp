#include "dmmse/error.hpp"

namespace dmmse {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_size: return "invalid-size";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::invalid_scale: return "invalid-scale";
    case ErrorKind::invalid_window: return "invalid-window";
    case ErrorKind::generation_failure: return "generation-failure";
    case ErrorKind::not_a_tree: return "not-a-tree";
    case ErrorKind::not_a_cell_tree: return "not-a-cell-tree";
    case ErrorKind::unsupported_prior: return "unsupported-prior";
    case ErrorKind::build_failure: return "build-failure";
    case ErrorKind::invalid_comparison: return "invalid-comparison";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::io_failure: return "io-failure";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace dmmse
