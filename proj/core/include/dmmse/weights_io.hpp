#pragma once

#include "dmmse/model.hpp"
#include "dmmse/oedol.hpp"
#include "dmmse/oracle.hpp"
#include "dmmse/sdol.hpp"
#include "dmmse/topology.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

namespace dmmse {

/// Any precomputed, data-independent schedule.
using WeightSchedule = std::variant<OdolSchedule, OedolSchedule, SdolWeights>;

std::string_view schedule_algorithm(const WeightSchedule& schedule) noexcept;

/// FNV-1a over the model's dimensions and matrix entries.
std::uint64_t model_digest(const WorldModel& model);

/// Self-describing JSON container keyed by (agent, t, matrix name). Doubles
/// are written in shortest round-trip form, so loading reproduces the
/// in-memory schedule bit for bit.
void save_weights(const std::filesystem::path& path, const WeightSchedule& schedule, const NetworkTopology& topo,
                  const WorldModel& model);

/// Throws io-failure when the file is unreadable, corrupt, or was built for a
/// different topology, model, algorithm or horizon.
WeightSchedule load_weights(const std::filesystem::path& path, const NetworkTopology& topo, const WorldModel& model);

}  // namespace dmmse
