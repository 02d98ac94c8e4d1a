#pragma once

#include "dmmse/disclosure.hpp"
#include "dmmse/harness.hpp"
#include "dmmse/model.hpp"
#include "dmmse/oedol.hpp"
#include "dmmse/topology.hpp"
#include "dmmse/trajectory.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace dmmse {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Edge list, one "i j" pair per line, 1-based, ascending. Blank lines and
/// lines starting with '#' are ignored when reading. When `agents` is zero the
/// largest id decides the size.
std::string edge_list_text(const NetworkTopology& topo);
NetworkTopology parse_edge_list(std::string_view text, std::size_t agents = 0);

std::string model_json(const WorldModel& model);
WorldModel parse_model_json(std::string_view text);

std::string trace_json(const MeasurementTrace& trace);
MeasurementTrace parse_trace_json(std::string_view text);

/// Long-format CSV rows "trial,agent,t,component,value"; the header is
/// written only when `header` is set so several trials can share a file.
void write_trajectory_csv(std::ostream& out, const EstimateTrajectory& traj, std::size_t trial, bool header);
/// "trial,sender,t,component,value".
void write_message_csv(std::ostream& out, const MessageLog& log, std::size_t trial, bool header);

/// "metric,algorithm,topology,T,value,stderr" with metric J or P, one row
/// per (series, T'). Skipped series are omitted.
std::string report_csv(const CostReport& report);
/// "series,algorithm,topology,agent,t,mse,stderr".
std::string mse_csv(const CostReport& report);
/// Summary with configuration echo, per-series J/P tables, skip notes and the
/// asymptotic check threshold.
std::string report_json(const CostReport& report);

std::string span_report_json(const SpanReport& report);

/// Structured experiment description. Relative paths inside the file are
/// resolved against `base_dir`. Throws invalid-config on schema violations.
ExperimentConfig parse_config_json(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Creates parent directories as needed.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace dmmse
