// Domain model for geo-distributed workflow scheduling.
//
// Units used everywhere in the library:
//   time       seconds since system start
//   workload   million instructions (MI)
//   speed      MIPS
//   data       gigabits (Gb)
//   bandwidth  Gbps
//   power      watts
//   price      currency per kWh

#ifndef ECMWS_MODEL_HPP_
#define ECMWS_MODEL_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace ecmws {

using Json = nlohmann::json;

constexpr double kSecondsPerHour = 3600.0;
constexpr double kSecondsPerDay = 86400.0;

struct ServerRef {
  int dc = 0;
  int cluster = 0;
  int server = 0;

  auto operator<=>(const ServerRef&) const = default;
};

struct TaskRef {
  int workflow = 0;
  int task = 0;

  auto operator<=>(const TaskRef&) const = default;
};

struct InEdge {
  int pred = 0;
  double gbits = 0.0;
};

struct Task {
  int id = 0;
  double workload = 0.0;  // MI
  std::vector<InEdge> in_edges;
  std::vector<int> preds;
  std::vector<int> succs;

  bool is_entry() const { return preds.empty(); }
  bool is_exit() const { return succs.empty(); }
  double data_from(int pred) const;
};

// A workflow application: a DAG of tasks with a submission time and an
// absolute deadline. Construction validates the graph.
class Workflow {
 public:
  struct EdgeSpec {
    int from = 0;
    int to = 0;
    double gbits = 0.0;
  };

  Workflow() = default;
  Workflow(int id, double submit, double deadline,
           const std::vector<double>& workloads,
           const std::vector<EdgeSpec>& edges);

  int id() const { return id_; }
  double submit() const { return submit_; }
  double deadline() const { return deadline_; }
  void set_deadline(double deadline);
  std::size_t size() const { return tasks_.size(); }
  const Task& task(int i) const { return tasks_.at(static_cast<std::size_t>(i)); }
  const std::vector<Task>& tasks() const { return tasks_; }
  const std::vector<int>& topological_order() const { return topo_order_; }
  double total_workload() const;
  std::vector<EdgeSpec> edges() const;

 private:
  int id_ = 0;
  double submit_ = 0.0;
  double deadline_ = 0.0;
  std::vector<Task> tasks_;
  std::vector<int> topo_order_;
};

// Daily-periodic hourly electricity price.
class PriceSchedule {
 public:
  PriceSchedule();
  explicit PriceSchedule(const std::array<double, 24>& hourly);

  static PriceSchedule flat(double price);
  // Hours [0, switch_hour) at `low`, the rest of the day at `high`.
  static PriceSchedule two_tier(double low, double high, int switch_hour = 8);

  double at(double t) const;
  double hour(int h) const { return hourly_[static_cast<std::size_t>(((h % 24) + 24) % 24)]; }
  const std::array<double, 24>& hourly() const { return hourly_; }
  double min() const;
  double max() const;

 private:
  std::array<double, 24> hourly_{};
};

struct Server {
  ServerRef ref;
  double mips = 0.0;
  double watts = 0.0;
};

struct Cluster {
  int type = 0;
  std::vector<Server> servers;
};

struct DataCenter {
  std::vector<Cluster> clusters;
  PriceSchedule price;
};

// Per-slot bandwidth sampling. A slot is congested with probability
// `congestion_p`; a congested slot scales the nominal bandwidth by a factor
// drawn uniformly from [0.3, 0.7]. Samples depend only on (seed, slot, class).
class BandwidthModel {
 public:
  static constexpr double kMinCongestion = 0.3;
  static constexpr double kMaxCongestion = 0.7;

  BandwidthModel() = default;
  BandwidthModel(double b_in, double b_out, double congestion_p,
                 std::uint64_t seed);

  double b_in() const { return b_in_; }
  double b_out() const { return b_out_; }
  double congestion_p() const { return congestion_p_; }
  std::uint64_t seed() const { return seed_; }
  double nominal(int transfer_class) const;
  double effective(int transfer_class, std::int64_t slot) const;

 private:
  double b_in_ = 80.0;
  double b_out_ = 100.0;
  double congestion_p_ = 0.3;
  std::uint64_t seed_ = 0;
};

class Topology {
 public:
  Topology() = default;
  Topology(std::vector<DataCenter> datacenters, BandwidthModel bandwidth);

  const std::vector<DataCenter>& datacenters() const { return dcs_; }
  const DataCenter& dc(int k) const { return dcs_.at(static_cast<std::size_t>(k)); }
  const BandwidthModel& bandwidth() const { return bandwidth_; }
  int num_dcs() const { return static_cast<int>(dcs_.size()); }
  int num_clusters() const;  // sum over DCs of clusters per DC
  int servers_in_dc(int k) const { return omega_dc_.at(static_cast<std::size_t>(k)); }
  int total_servers() const { return static_cast<int>(servers_.size()); }
  int max_servers_per_dc() const { return omega_max_; }

  const Server& server(const ServerRef& ref) const;
  bool valid(const ServerRef& ref) const;
  // Global index in (k, j, l) lexicographic order.
  int flat_index(const ServerRef& ref) const;
  const Server& server_at(int flat) const { return servers_.at(static_cast<std::size_t>(flat)); }
  const std::vector<Server>& servers() const { return servers_; }
  // Index of a server inside its DC, clusters then servers.
  int local_index(const ServerRef& ref) const;
  ServerRef from_local_index(int dc, int local) const;

 private:
  std::vector<DataCenter> dcs_;
  BandwidthModel bandwidth_;
  std::vector<Server> servers_;
  std::vector<int> omega_dc_;
  std::vector<int> dc_offset_;
  std::vector<std::vector<int>> cluster_offset_;
  int omega_max_ = 0;
};

struct Assignment {
  TaskRef task;
  ServerRef server;
  double start = 0.0;
  double finish = 0.0;
  double work_time = 0.0;
  double trans_time = 0.0;
  double cost = 0.0;
};

double price_at(const DataCenter& dc, double t);

// 0 same cluster, 1 same DC different cluster, 2 different DCs.
int transfer_class(const Topology& topology, const ServerRef& src,
                   const ServerRef& dst);

double effective_bandwidth(const BandwidthModel& model, int transfer_class,
                           std::int64_t slot);

// JSON schema
//   topology: {datacenters:[{clusters:[{type, servers:[{mips, watts}]}],
//              prices:[24]}], bandwidth:{b_in, b_out, congestion_p, seed}}
//   workflow: {id, submit, deadline, tasks:[{workload, preds:[{id, gbits}]}]}
Topology topology_from_json(const Json& j);
Json to_json(const Topology& topology);
Workflow workflow_from_json(const Json& j);
Json to_json(const Workflow& workflow);
// Accepts a single workflow object, an array, or {"workflows": [...]}.
std::vector<Workflow> workflows_from_json(const Json& j);
Json to_json(const std::vector<Workflow>& workflows);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

std::string to_string(const ServerRef& ref);

}  // namespace ecmws

#endif  // ECMWS_MODEL_HPP_
