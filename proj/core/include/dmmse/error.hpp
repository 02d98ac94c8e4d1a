#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dmmse {

enum class ErrorKind {
  invalid_size,
  invalid_input,
  invalid_scale,
  invalid_window,
  generation_failure,
  not_a_tree,
  not_a_cell_tree,
  unsupported_prior,
  build_failure,
  invalid_comparison,
  invalid_config,
  io_failure,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dmmse
