#include "cli/record_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cli/config.hpp"

namespace sticky::cli {

using nlohmann::json;

void write_snapshots_csv(std::ostream& os, const SimulationRecord& rec) {
  os << "t,cluster_id,mass,position,velocity,psi\n";
  for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
    const Ensemble& s = rec.snapshots[k];
    for (std::size_t c = 0; c < s.size(); ++c) {
      fmt::print(os, "{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", rec.times[k], c, s.masses()[c],
                 s.positions()[c], s.velocities()[c], s.natural_velocities()[c]);
    }
  }
}

void write_events_csv(std::ostream& os, const SimulationRecord& rec) {
  os << "t,first_index,last_index,post_velocity,post_psi\n";
  for (const MergeEvent& ev : rec.events) {
    fmt::print(os, "{:.17g},{},{},{:.17g},{:.17g}\n", ev.time, ev.originals.begin, ev.originals.end - 1,
               ev.post_velocity, ev.post_psi);
  }
}

void write_accumulators_csv(std::ostream& os, const SimulationRecord& rec) {
  os << "t,cell_id,phi_integral,v_norm2_integral\n";
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    for (std::size_t i = 0; i < rec.phi_integral[k].size(); ++i) {
      fmt::print(os, "{:.17g},{},{:.17g},{:.17g}\n", rec.times[k], i, rec.phi_integral[k][i],
                 rec.v_norm2_integral[k]);
    }
  }
}

void write_flux_csv(std::ostream& os, const FluxAnalysis& fa) {
  os << "m,A,A_star_star\n";
  for (std::size_t k = 0; k < fa.A.size(); ++k) {
    fmt::print(os, "{:.17g},{:.17g},{:.17g}\n", fa.A.nodes()[k], fa.A.values()[k], fa.A_star_star.values()[k]);
  }
}

void write_regions_csv(std::ostream& os, const FluxAnalysis& fa) {
  os << "m_lo,m_hi,label\n";
  for (const auto& r : fa.regions) {
    fmt::print(os, "{:.17g},{:.17g},{}\n", r.interval.lo, r.interval.hi, to_string(r.label));
  }
}

void write_subgroups_csv(std::ostream& os, const std::vector<SubgroupForecast>& f) {
  os << "m_lo,m_hi,psi,forecast\n";
  for (const auto& g : f) {
    fmt::print(os, "{:.17g},{:.17g},{:.17g},{}\n", g.subgroup.interval.lo, g.subgroup.interval.hi, g.subgroup.psi,
               to_string(g.forecast));
  }
}

json ensemble_to_json(const Ensemble& e) {
  auto vec = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
  return {{"masses", vec(e.masses())},
          {"positions", vec(e.positions())},
          {"velocities", vec(e.velocities())},
          {"natural_velocities", vec(e.natural_velocities())}};
}

json initial_to_json(const Ensemble& e) {
  auto vec = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
  return {{"masses", vec(e.original_masses())},
          {"positions", vec(e.original_positions())},
          {"velocities", vec(e.original_velocities())},
          {"natural_velocities", vec(e.original_natural_velocities())}};
}

namespace {

std::vector<std::vector<double>> read_csv(const std::filesystem::path& p, std::size_t columns) {
  std::ifstream in(p);
  if (!in) throw ConfigError(fmt::format("missing file '{}'", p.string()));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(fmt::format("'{}' has no header", p.string()));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ConfigError(fmt::format("'{}': bad number '{}'", p.string(), cell));
      }
      row.push_back(v);
    }
    if (row.size() != columns) throw ConfigError(fmt::format("'{}': expected {} columns", p.string(), columns));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> json_vector(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw ConfigError(fmt::format("metadata lacks '{}'", key));
  return j[key].get<std::vector<double>>();
}

}  // namespace

LoadedRecord read_record(const std::filesystem::path& dir) {
  LoadedRecord out;
  {
    std::ifstream in(dir / "metadata.json");
    if (!in) throw ConfigError(fmt::format("missing file '{}'", (dir / "metadata.json").string()));
    try {
      in >> out.metadata;
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("metadata.json: {}", e.what()));
    }
  }
  if (!out.metadata.contains("kernel") || !out.metadata.contains("initial")) {
    throw ConfigError("metadata.json lacks kernel or initial state");
  }
  out.kernel = parse_kernel(out.metadata["kernel"]);
  const json& ini = out.metadata["initial"];
  const auto m0 = json_vector(ini, "masses");
  const auto x0 = json_vector(ini, "positions");
  const auto v0 = json_vector(ini, "velocities");
  const auto psi0 = json_vector(ini, "natural_velocities");
  const std::size_t n = m0.size();
  if (n == 0 || x0.size() != n || v0.size() != n || psi0.size() != n) throw ConfigError("metadata: inconsistent initial state");
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + m0[i];

  const auto snaps = read_csv(dir / "snapshots.csv", 6);
  const auto events = read_csv(dir / "events.csv", 5);
  const auto accs = read_csv(dir / "accumulators.csv", 4);

  SimulationRecord& rec = out.record;
  std::size_t r = 0;
  while (r < snaps.size()) {
    const double t = snaps[r][0];
    std::vector<std::size_t> offsets{0};
    std::vector<double> x, v;
    double c = 0.0;
    std::size_t k = 0;
    for (; r < snaps.size() && snaps[r][0] == t; ++r) {
      c += snaps[r][2];
      x.push_back(snaps[r][3]);
      v.push_back(snaps[r][4]);
      while (k < n && cum[k + 1] < c - 1e-9) ++k;
      if (k >= n || std::abs(cum[k + 1] - c) > 1e-9) throw ConfigError(fmt::format("snapshots.csv: cluster masses at t={} do not match the originals", t));
      offsets.push_back(++k);
    }
    if (offsets.back() != n) throw ConfigError(fmt::format("snapshots.csv: cluster masses at t={} do not cover all particles", t));
    try {
      rec.snapshots.push_back(Ensemble::restore(m0, x0, v0, psi0, offsets, x, v));
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("snapshots.csv at t={}: {}", t, e.what()));
    }
    rec.times.push_back(t);
  }
  if (rec.snapshots.empty()) throw ConfigError("snapshots.csv is empty");

  for (const auto& row : events) {
    MergeEvent ev;
    ev.time = row[0];
    const auto first = static_cast<std::size_t>(row[1]);
    const auto last = static_cast<std::size_t>(row[2]);
    if (row[1] < 0 || last < first || last >= n) throw ConfigError("events.csv: index out of range");
    ev.originals = {first, last + 1};
    ev.post_velocity = row[3];
    ev.post_psi = row[4];
    rec.events.push_back(ev);
  }

  std::map<double, std::size_t> index;
  for (std::size_t k = 0; k < rec.times.size(); ++k) index[rec.times[k]] = k;
  rec.phi_integral.assign(rec.times.size(), std::vector<double>(n, std::nan("")));
  rec.v_norm2_integral.assign(rec.times.size(), std::nan(""));
  for (const auto& row : accs) {
    const auto it = index.find(row[0]);
    const auto cell = static_cast<std::size_t>(row[1]);
    if (it == index.end() || cell >= n) throw ConfigError("accumulators.csv: row does not match a snapshot");
    rec.phi_integral[it->second][cell] = row[2];
    rec.v_norm2_integral[it->second] = row[3];
  }
  for (const auto& a : rec.phi_integral) {
    for (double v : a) {
      if (std::isnan(v)) throw ConfigError("accumulators.csv: missing cells");
    }
  }
  return out;
}

}  // namespace sticky::cli
