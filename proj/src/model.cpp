#include "ecmws/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <stdexcept>

namespace ecmws {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace

double Task::data_from(int pred) const {
  for (const auto& e : in_edges) {
    if (e.pred == pred) return e.gbits;
  }
  throw std::out_of_range("task " + std::to_string(id) + " has no edge from " +
                          std::to_string(pred));
}

Workflow::Workflow(int id, double submit, double deadline,
                   const std::vector<double>& workloads,
                   const std::vector<EdgeSpec>& edges)
    : id_(id), submit_(submit), deadline_(deadline) {
  if (workloads.empty()) {
    throw std::invalid_argument("workflow " + std::to_string(id) + " has no tasks");
  }
  if (submit < 0.0) throw std::invalid_argument("negative submit time");
  if (!(deadline > submit)) {
    throw std::invalid_argument("workflow " + std::to_string(id) +
                                ": deadline must exceed submit time");
  }
  const int n = static_cast<int>(workloads.size());
  tasks_.resize(workloads.size());
  for (int i = 0; i < n; ++i) {
    if (!(workloads[static_cast<std::size_t>(i)] > 0.0)) {
      throw std::invalid_argument("task workload must be positive");
    }
    tasks_[static_cast<std::size_t>(i)].id = i;
    tasks_[static_cast<std::size_t>(i)].workload = workloads[static_cast<std::size_t>(i)];
  }
  for (const auto& e : edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (e.from == e.to) throw std::invalid_argument("self loop");
    if (e.gbits < 0.0) throw std::invalid_argument("negative edge data size");
    auto& dst = tasks_[static_cast<std::size_t>(e.to)];
    if (std::find(dst.preds.begin(), dst.preds.end(), e.from) != dst.preds.end()) {
      throw std::invalid_argument("duplicate edge");
    }
    dst.preds.push_back(e.from);
    dst.in_edges.push_back({e.from, e.gbits});
    tasks_[static_cast<std::size_t>(e.from)].succs.push_back(e.to);
  }
  for (auto& t : tasks_) {
    std::sort(t.preds.begin(), t.preds.end());
    std::sort(t.succs.begin(), t.succs.end());
    std::sort(t.in_edges.begin(), t.in_edges.end(),
              [](const InEdge& a, const InEdge& b) { return a.pred < b.pred; });
  }

  // Kahn's algorithm, smallest id first.
  std::vector<int> indegree(tasks_.size());
  for (const auto& t : tasks_) indegree[static_cast<std::size_t>(t.id)] = static_cast<int>(t.preds.size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < n; ++i) {
    if (indegree[static_cast<std::size_t>(i)] == 0) ready.push(i);
  }
  while (!ready.empty()) {
    const int i = ready.top();
    ready.pop();
    topo_order_.push_back(i);
    for (int s : tasks_[static_cast<std::size_t>(i)].succs) {
      if (--indegree[static_cast<std::size_t>(s)] == 0) ready.push(s);
    }
  }
  if (static_cast<int>(topo_order_.size()) != n) {
    throw std::invalid_argument("workflow " + std::to_string(id) + " contains a cycle");
  }
}

void Workflow::set_deadline(double deadline) {
  if (!(deadline > submit_)) {
    throw std::invalid_argument("deadline must exceed submit time");
  }
  deadline_ = deadline;
}

double Workflow::total_workload() const {
  double sum = 0.0;
  for (const auto& t : tasks_) sum += t.workload;
  return sum;
}

std::vector<Workflow::EdgeSpec> Workflow::edges() const {
  std::vector<EdgeSpec> out;
  for (const auto& t : tasks_) {
    for (const auto& e : t.in_edges) out.push_back({e.pred, t.id, e.gbits});
  }
  return out;
}

PriceSchedule::PriceSchedule() { hourly_.fill(0.16); }

PriceSchedule::PriceSchedule(const std::array<double, 24>& hourly)
    : hourly_(hourly) {
  for (double p : hourly_) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("electricity prices must be positive");
    }
  }
}

PriceSchedule PriceSchedule::flat(double price) {
  std::array<double, 24> h{};
  h.fill(price);
  return PriceSchedule(h);
}

PriceSchedule PriceSchedule::two_tier(double low, double high, int switch_hour) {
  std::array<double, 24> h{};
  for (int i = 0; i < 24; ++i) h[static_cast<std::size_t>(i)] = i < switch_hour ? low : high;
  return PriceSchedule(h);
}

double PriceSchedule::at(double t) const {
  if (t < 0.0) throw std::invalid_argument("negative time");
  const auto h = static_cast<std::int64_t>(std::floor(t / kSecondsPerHour));
  return hourly_[static_cast<std::size_t>(h % 24)];
}

double PriceSchedule::min() const { return *std::min_element(hourly_.begin(), hourly_.end()); }
double PriceSchedule::max() const { return *std::max_element(hourly_.begin(), hourly_.end()); }

BandwidthModel::BandwidthModel(double b_in, double b_out, double congestion_p,
                               std::uint64_t seed)
    : b_in_(b_in), b_out_(b_out), congestion_p_(congestion_p), seed_(seed) {
  if (!(b_in > 0.0) || !(b_out > 0.0)) {
    throw std::invalid_argument("bandwidths must be positive");
  }
  if (congestion_p < 0.0 || congestion_p > 1.0) {
    throw std::invalid_argument("congestion probability must be in [0, 1]");
  }
}

double BandwidthModel::nominal(int transfer_class) const {
  switch (transfer_class) {
    case 1: return b_in_;
    case 2: return b_out_;
    default:
      throw std::invalid_argument("bandwidth is only defined for transfer classes 1 and 2");
  }
}

double BandwidthModel::effective(int transfer_class, std::int64_t slot) const {
  const double base = nominal(transfer_class);
  std::uint64_t h = splitmix64(seed_);
  h = splitmix64(h ^ static_cast<std::uint64_t>(slot));
  h = splitmix64(h ^ static_cast<std::uint64_t>(transfer_class));
  const double congested = to_unit(h);
  if (congested >= congestion_p_) return base;
  const double u = to_unit(splitmix64(h));
  return base * (kMinCongestion + (kMaxCongestion - kMinCongestion) * u);
}

Topology::Topology(std::vector<DataCenter> datacenters, BandwidthModel bandwidth)
    : dcs_(std::move(datacenters)), bandwidth_(bandwidth) {
  if (dcs_.empty()) throw std::invalid_argument("topology has no data centers");
  int offset = 0;
  for (int k = 0; k < num_dcs(); ++k) {
    auto& dc = dcs_[static_cast<std::size_t>(k)];
    if (dc.clusters.empty()) {
      throw std::invalid_argument("data center " + std::to_string(k) + " has no clusters");
    }
    dc_offset_.push_back(offset);
    cluster_offset_.emplace_back();
    int in_dc = 0;
    for (int j = 0; j < static_cast<int>(dc.clusters.size()); ++j) {
      auto& cl = dc.clusters[static_cast<std::size_t>(j)];
      if (cl.servers.empty()) {
        throw std::invalid_argument("cluster has no servers");
      }
      cluster_offset_.back().push_back(in_dc);
      for (int l = 0; l < static_cast<int>(cl.servers.size()); ++l) {
        auto& s = cl.servers[static_cast<std::size_t>(l)];
        if (!(s.mips > 0.0) || !(s.watts > 0.0)) {
          throw std::invalid_argument("server frequency and power must be positive");
        }
        s.ref = {k, j, l};
        servers_.push_back(s);
        ++in_dc;
      }
    }
    omega_dc_.push_back(in_dc);
    omega_max_ = std::max(omega_max_, in_dc);
    offset += in_dc;
  }
}

int Topology::num_clusters() const {
  int n = 0;
  for (const auto& dc : dcs_) n += static_cast<int>(dc.clusters.size());
  return n;
}

bool Topology::valid(const ServerRef& ref) const {
  if (ref.dc < 0 || ref.dc >= num_dcs()) return false;
  const auto& dc = dcs_[static_cast<std::size_t>(ref.dc)];
  if (ref.cluster < 0 || ref.cluster >= static_cast<int>(dc.clusters.size())) return false;
  const auto& cl = dc.clusters[static_cast<std::size_t>(ref.cluster)];
  return ref.server >= 0 && ref.server < static_cast<int>(cl.servers.size());
}

const Server& Topology::server(const ServerRef& ref) const {
  return servers_[static_cast<std::size_t>(flat_index(ref))];
}

int Topology::flat_index(const ServerRef& ref) const {
  return dc_offset_.at(static_cast<std::size_t>(ref.dc)) + local_index(ref);
}

int Topology::local_index(const ServerRef& ref) const {
  if (!valid(ref)) throw std::out_of_range("invalid server " + to_string(ref));
  return cluster_offset_[static_cast<std::size_t>(ref.dc)][static_cast<std::size_t>(ref.cluster)] +
         ref.server;
}

ServerRef Topology::from_local_index(int dc, int local) const {
  if (dc < 0 || dc >= num_dcs() || local < 0 || local >= servers_in_dc(dc)) {
    throw std::out_of_range("server index out of range");
  }
  return servers_[static_cast<std::size_t>(dc_offset_[static_cast<std::size_t>(dc)] + local)].ref;
}

double price_at(const DataCenter& dc, double t) { return dc.price.at(t); }

int transfer_class(const Topology& topology, const ServerRef& src,
                   const ServerRef& dst) {
  if (!topology.valid(src) || !topology.valid(dst)) {
    throw std::out_of_range("invalid server reference");
  }
  if (src.dc != dst.dc) return 2;
  if (src.cluster != dst.cluster) return 1;
  return 0;
}

double effective_bandwidth(const BandwidthModel& model, int transfer_class,
                           std::int64_t slot) {
  return model.effective(transfer_class, slot);
}

Topology topology_from_json(const Json& j) {
  std::vector<DataCenter> dcs;
  for (const auto& jd : j.at("datacenters")) {
    DataCenter dc;
    const auto prices = jd.at("prices").get<std::vector<double>>();
    if (prices.size() != 24) throw std::invalid_argument("prices must hold 24 hourly values");
    std::array<double, 24> h{};
    std::copy(prices.begin(), prices.end(), h.begin());
    dc.price = PriceSchedule(h);
    for (const auto& jc : jd.at("clusters")) {
      Cluster cl;
      cl.type = jc.value("type", 0);
      for (const auto& js : jc.at("servers")) {
        Server s;
        s.mips = js.at("mips").get<double>();
        s.watts = js.at("watts").get<double>();
        cl.servers.push_back(s);
      }
      dc.clusters.push_back(std::move(cl));
    }
    dcs.push_back(std::move(dc));
  }
  BandwidthModel bw;
  if (j.contains("bandwidth")) {
    const auto& jb = j.at("bandwidth");
    bw = BandwidthModel(jb.value("b_in", 80.0), jb.value("b_out", 100.0),
                        jb.value("congestion_p", 0.3),
                        jb.value("seed", std::uint64_t{0}));
  }
  return Topology(std::move(dcs), bw);
}

Json to_json(const Topology& topology) {
  Json j;
  j["datacenters"] = Json::array();
  for (const auto& dc : topology.datacenters()) {
    Json jd;
    jd["prices"] = std::vector<double>(dc.price.hourly().begin(), dc.price.hourly().end());
    jd["clusters"] = Json::array();
    for (const auto& cl : dc.clusters) {
      Json jc;
      jc["type"] = cl.type;
      jc["servers"] = Json::array();
      for (const auto& s : cl.servers) jc["servers"].push_back({{"mips", s.mips}, {"watts", s.watts}});
      jd["clusters"].push_back(jc);
    }
    j["datacenters"].push_back(jd);
  }
  const auto& bw = topology.bandwidth();
  j["bandwidth"] = {{"b_in", bw.b_in()},
                    {"b_out", bw.b_out()},
                    {"congestion_p", bw.congestion_p()},
                    {"seed", bw.seed()}};
  return j;
}

Workflow workflow_from_json(const Json& j) {
  std::vector<double> workloads;
  std::vector<Workflow::EdgeSpec> edges;
  const auto& jt = j.at("tasks");
  for (int i = 0; i < static_cast<int>(jt.size()); ++i) {
    const auto& t = jt[static_cast<std::size_t>(i)];
    workloads.push_back(t.at("workload").get<double>());
    if (t.contains("preds")) {
      for (const auto& p : t.at("preds")) {
        edges.push_back({p.at("id").get<int>(), i, p.value("gbits", 0.0)});
      }
    }
  }
  return Workflow(j.at("id").get<int>(), j.at("submit").get<double>(),
                  j.at("deadline").get<double>(), workloads, edges);
}

Json to_json(const Workflow& workflow) {
  Json j;
  j["id"] = workflow.id();
  j["submit"] = workflow.submit();
  j["deadline"] = workflow.deadline();
  j["tasks"] = Json::array();
  for (const auto& t : workflow.tasks()) {
    Json jt;
    jt["workload"] = t.workload;
    jt["preds"] = Json::array();
    for (const auto& e : t.in_edges) jt["preds"].push_back({{"id", e.pred}, {"gbits", e.gbits}});
    j["tasks"].push_back(jt);
  }
  return j;
}

std::vector<Workflow> workflows_from_json(const Json& j) {
  std::vector<Workflow> out;
  if (j.is_array()) {
    for (const auto& w : j) out.push_back(workflow_from_json(w));
  } else if (j.contains("workflows")) {
    for (const auto& w : j.at("workflows")) out.push_back(workflow_from_json(w));
  } else {
    out.push_back(workflow_from_json(j));
  }
  return out;
}

Json to_json(const std::vector<Workflow>& workflows) {
  Json j;
  j["workflows"] = Json::array();
  for (const auto& w : workflows) j["workflows"].push_back(to_json(w));
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Json::parse(in);
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

std::string to_string(const ServerRef& ref) {
  return "(" + std::to_string(ref.dc) + "," + std::to_string(ref.cluster) + "," +
         std::to_string(ref.server) + ")";
}

}  // namespace ecmws
