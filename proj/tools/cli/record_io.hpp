#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include <json.hpp>

#include <sticky/cluster_predictor.hpp>
#include <sticky/dynamics.hpp>
#include <sticky/ensemble.hpp>
#include <sticky/kernel.hpp>

namespace sticky::cli {

// CSV writers; headers included, 17 significant digits.
void write_snapshots_csv(std::ostream& os, const SimulationRecord& rec);
void write_events_csv(std::ostream& os, const SimulationRecord& rec);
void write_accumulators_csv(std::ostream& os, const SimulationRecord& rec);
void write_flux_csv(std::ostream& os, const FluxAnalysis& fa);
void write_regions_csv(std::ostream& os, const FluxAnalysis& fa);
void write_subgroups_csv(std::ostream& os, const std::vector<SubgroupForecast>& f);

nlohmann::json ensemble_to_json(const Ensemble& e);
/// Original-resolution data of the initial state.
nlohmann::json initial_to_json(const Ensemble& e);

struct LoadedRecord {
  SimulationRecord record;
  Kernel kernel = Kernel::zero();
  nlohmann::json metadata;
};

/// Reads metadata.json, snapshots.csv, events.csv and accumulators.csv.
/// Throws ConfigError when a file is missing or malformed.
LoadedRecord read_record(const std::filesystem::path& dir);

}  // namespace sticky::cli
