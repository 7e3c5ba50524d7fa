#include "ecmws/report.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace ecmws {

namespace {

constexpr const char* kResultsHeader = "instance,workflows,tasks,rho,algorithm,z,runtime,misses";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class Key, class KeyFn>
std::vector<CellSummary> summarize(const std::vector<RpdRow>& rows, KeyFn key, bool per_cell) {
  std::map<Key, CellSummary> acc;
  for (const auto& r : rows) {
    auto& c = acc[key(r.result)];
    if (c.instances == 0) {
      c.algorithm = r.result.algorithm;
      if (per_cell) {
        c.workflows = r.result.workflows;
        c.tasks = r.result.tasks;
        c.rho = r.result.rho;
      }
    }
    ++c.instances;
    c.mean_rpd += r.rpd;
    c.mean_runtime += r.result.runtime;
    c.misses += r.result.misses;
  }
  std::vector<CellSummary> out;
  for (auto& [k, c] : acc) {
    c.mean_rpd /= c.instances;
    c.mean_runtime /= c.instances;
    out.push_back(c);
  }
  return out;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    if (r.instance.find(',') != std::string::npos) {
      throw std::invalid_argument("instance names may not contain commas");
    }
    out << r.instance << ',' << r.workflows << ',' << r.tasks << ',' << num(r.rho) << ','
        << r.algorithm << ',' << num(r.z) << ',' << num(r.runtime) << ',' << r.misses << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw std::runtime_error("results file must start with: " + std::string(kResultsHeader));
  }
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw std::runtime_error("line " + std::to_string(lineno) + ": expected 8 fields");
    try {
      rows.push_back({f[0], std::stoi(f[1]), std::stoi(f[2]), std::stod(f[3]), f[4], std::stod(f[5]),
                      std::stod(f[6]), std::stoi(f[7])});
    } catch (const std::logic_error&) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

std::vector<RpdRow> compute_rpd(const std::vector<ResultRow>& rows) {
  std::map<std::string, double> best;
  for (const auto& r : rows) {
    auto [it, fresh] = best.try_emplace(r.instance, r.z);
    if (!fresh) it->second = std::min(it->second, r.z);
  }
  std::vector<RpdRow> out;
  for (const auto& r : rows) {
    const double zs = best.at(r.instance);
    double dev = 0.0;
    if (zs > 0.0) {
      dev = (r.z - zs) / zs * 100.0;
    } else if (r.z > 0.0) {
      dev = std::numeric_limits<double>::infinity();
    }
    out.push_back({r, zs, dev});
  }
  return out;
}

std::vector<CellSummary> summarize_cells(const std::vector<RpdRow>& rows) {
  using Key = std::tuple<int, int, double, std::string>;
  return summarize<Key>(
      rows, [](const ResultRow& r) { return Key{r.workflows, r.tasks, r.rho, r.algorithm}; }, true);
}

std::vector<CellSummary> summarize_algorithms(const std::vector<RpdRow>& rows) {
  return summarize<std::string>(rows, [](const ResultRow& r) { return r.algorithm; }, false);
}

void write_rpd_csv(std::ostream& out, const std::vector<RpdRow>& rows) {
  out << "instance,algorithm,z,z_star,rpd\n";
  for (const auto& r : rows) {
    out << r.result.instance << ',' << r.result.algorithm << ',' << num(r.result.z) << ','
        << num(r.z_star) << ',' << num(r.rpd) << '\n';
  }
}

void write_cells_csv(std::ostream& out, const std::vector<CellSummary>& cells) {
  out << "workflows,tasks,rho,algorithm,instances,mean_rpd,mean_runtime,misses\n";
  for (const auto& c : cells) {
    out << c.workflows << ',' << c.tasks << ',' << num(c.rho) << ',' << c.algorithm << ','
        << c.instances << ',' << num(c.mean_rpd) << ',' << num(c.mean_runtime) << ','
        << c.misses << '\n';
  }
}

void write_report_text(std::ostream& out, const std::vector<CellSummary>& per_algorithm,
                       const std::vector<CellSummary>& cells) {
  out << std::fixed;
  out << std::left << std::setw(10) << "algorithm" << std::right << std::setw(10) << "instances"
      << std::setw(12) << "mean RPD%" << std::setw(14) << "runtime s" << std::setw(8)
      << "misses" << '\n';
  for (const auto& c : per_algorithm) {
    out << std::left << std::setw(10) << c.algorithm << std::right << std::setw(10)
        << c.instances << std::setw(12) << std::setprecision(2) << c.mean_rpd << std::setw(14)
        << std::setprecision(4) << c.mean_runtime << std::setw(8) << c.misses << '\n';
  }
  if (cells.empty()) return;
  out << '\n'
      << std::setw(6) << "N" << std::setw(6) << "n" << std::setw(6) << "rho" << "  "
      << std::left << std::setw(10) << "algorithm" << std::right << std::setw(12) << "mean RPD%"
      << std::setw(14) << "runtime s" << std::setw(8) << "misses" << '\n';
  for (const auto& c : cells) {
    out << std::setw(6) << c.workflows << std::setw(6) << c.tasks << std::setw(6)
        << std::setprecision(1) << c.rho << "  " << std::left << std::setw(10) << c.algorithm
        << std::right << std::setw(12) << std::setprecision(2) << c.mean_rpd << std::setw(14)
        << std::setprecision(4) << c.mean_runtime << std::setw(8) << c.misses << '\n';
  }
}

}  // namespace ecmws
