// Copyright 2026 The RMPC Evasive Steering Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "rmpc/metrics.hpp"
#include "rmpc/scenario.hpp"
#include "rmpc/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rmpc::sim
{

/// Raised when an output file cannot be written or an input file is malformed.
class IoError : public Error
{
public:
  using Error::Error;
};

extern const std::vector<std::string> kRunColumns;

void write_run_csv(std::ostream & out, std::span<const LogRow> rows);
void write_run_csv(const std::filesystem::path & file, std::span<const LogRow> rows);
std::vector<LogRow> read_run_csv(const std::filesystem::path & file);

std::string metrics_json(const Metrics & m, const ScenarioConfig & config, const RunLog * run);

void write_envelope_csv(const std::filesystem::path & file, const ScenarioConfig & config);
void write_tube_csv(const std::filesystem::path & file, const RunLog & run);
void write_plot_script(const std::filesystem::path & file);

/// Writes run.csv, metrics.json, envelope.csv, tube.csv, scenario.cfg and
/// plot_run.py into `out_dir`, creating it if needed.
void emit_outputs(
  const RunLog & run, const Metrics & metrics, const ScenarioConfig & config,
  const std::string & scenario_text, const std::filesystem::path & out_dir);

}  // namespace rmpc::sim
