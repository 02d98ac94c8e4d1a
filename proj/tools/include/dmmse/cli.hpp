#pragma once

#include "dmmse/harness.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dmmse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Built-in experiment set-ups: fig6, fig7, fig10, fig11, fig12.
std::vector<std::string_view> preset_names();
std::optional<ExperimentConfig> preset(std::string_view name);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dmmse::cli
