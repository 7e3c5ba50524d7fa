// Comparison results and relative-deviation tables.

#ifndef ECMWS_REPORT_HPP_
#define ECMWS_REPORT_HPP_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace ecmws {

struct ResultRow {
  std::string instance;
  int workflows = 0;
  int tasks = 0;
  double rho = 0.0;
  std::string algorithm;
  double z = 0.0;
  double runtime = 0.0;  // seconds
  int misses = 0;
};

// Columns: instance,workflows,tasks,rho,algorithm,z,runtime,misses
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

struct RpdRow {
  ResultRow result;
  double z_star = 0.0;  // best cost on the instance across algorithms
  double rpd = 0.0;     // percent
};

// A zero best cost gives RPD 0 to every algorithm that also reached zero.
std::vector<RpdRow> compute_rpd(const std::vector<ResultRow>& rows);

struct CellSummary {
  int workflows = 0;
  int tasks = 0;
  double rho = 0.0;
  std::string algorithm;
  int instances = 0;
  double mean_rpd = 0.0;
  double mean_runtime = 0.0;
  int misses = 0;
};

// One row per (workflows, tasks, rho, algorithm) cell, sorted by that key.
std::vector<CellSummary> summarize_cells(const std::vector<RpdRow>& rows);
// One row per algorithm; the cell fields stay zero.
std::vector<CellSummary> summarize_algorithms(const std::vector<RpdRow>& rows);

void write_rpd_csv(std::ostream& out, const std::vector<RpdRow>& rows);
void write_cells_csv(std::ostream& out, const std::vector<CellSummary>& cells);
// Space-aligned tables for a terminal.
void write_report_text(std::ostream& out, const std::vector<CellSummary>& per_algorithm,
                       const std::vector<CellSummary>& cells);

}  // namespace ecmws

#endif  // ECMWS_REPORT_HPP_
