// Benchmark instance generation: family-shaped DAGs, arrival times,
// deadlines, the experiment grid and a reference topology.

#ifndef ECMWS_WORKLOAD_HPP_
#define ECMWS_WORKLOAD_HPP_

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "ecmws/model.hpp"

namespace ecmws {

enum class Family { kEpigenomics, kGenome, kMontage, kLayered };

Family family_from_string(const std::string& s);
std::string to_string(Family f);

struct GenSpec {
  int workflows = 40;
  int tasks = 50;
  double rho = 0.2;
  Family family = Family::kLayered;
  std::uint64_t seed = 1;
  double t_term = kSecondsPerDay;
  double tau = 600.0;
  double min_workload = 1e3;  // MI
  double max_workload = 1e5;
  double min_gbits = 1.0;
  double max_gbits = 100.0;
  double edge_probability = 0.2;  // layered family only

  void validate() const;
};

// Edges of a weakly connected DAG on exactly n tasks; every edge runs from a
// lower to a higher task id. Data sizes are filled by the caller.
std::vector<std::pair<int, int>> family_structure(Family family, int n, double edge_probability,
                                                  std::mt19937_64& rng);

// Deadlines follow d_w = submit + (EFT_w - submit) * (1 + rho), i.e. the rule
// applied to the workflow's own estimated span.
std::vector<Workflow> generate(const GenSpec& spec, const Topology& topology);

struct GridCell {
  int workflows = 0;
  int tasks = 0;
  double rho = 0.0;
  int instance = 0;
  Family family = Family::kLayered;
  std::uint64_t seed = 0;
};

struct GridSpec {
  std::vector<int> workflow_counts{40, 60, 80, 100, 120};
  std::vector<int> task_counts{50, 100, 200, 500};
  std::vector<double> rhos{0.2, 0.4, 0.6, 0.8, 1.0};
  int instances_per_cell = 10;
  std::uint64_t seed = 1;
  // Empty: families rotate with the instance index.
  std::vector<Family> families;
};

std::vector<GridCell> grid(const GridSpec& spec);

// Columns: instance,file,workflows,tasks,rho,family,seed
void write_manifest_csv(std::ostream& out, const std::vector<GridCell>& cells,
                        const std::vector<std::string>& files);

// Four synthetic daily price profiles with peaks at different hours.
PriceSchedule reference_prices(int dc);

// M DCs with `clusters_per_dc` clusters cycling through the five cluster
// types; each cluster holds one single-core server per core, drawn from the
// server types its type admits.
Topology reference_topology(int dcs = 4, int clusters_per_dc = 5, std::uint64_t seed = 1,
                            double congestion_p = 0.3);

}  // namespace ecmws

#endif  // ECMWS_WORKLOAD_HPP_
