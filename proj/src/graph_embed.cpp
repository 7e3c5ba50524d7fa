#include "ecmws/graph_embed.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ecmws {

void normalize_columns(Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (m.rows() == 0) return;
    const double lo = m.col(c).minCoeff();
    const double hi = m.col(c).maxCoeff();
    if (hi > lo) {
      m.col(c) = ((m.col(c).array() - lo) / (hi - lo)).matrix();
    } else {
      m.col(c).setZero();
    }
  }
}

Graph build_task_graph(const Workflow& workflow, const SubdeadlineTable& subdeadlines,
                       const ScheduleState& state, int focal) {
  const int n = static_cast<int>(workflow.size());
  if (focal < 0 || focal >= n) throw std::out_of_range("focal task out of range");
  Graph g;
  g.features = Matrix::Zero(n, kTaskFeatures);
  g.adjacency = Matrix::Zero(n, n);
  const auto& topo = state.topology();
  double max_gbits = 0.0;
  for (const auto& e : workflow.edges()) max_gbits = std::max(max_gbits, e.gbits);
  for (const auto& t : workflow.tasks()) {
    g.features(t.id, 0) = t.workload;
    g.features(t.id, 1) = subdeadlines.subdeadline[static_cast<std::size_t>(t.id)];
    if (const auto* a = state.find({workflow.id(), t.id})) {
      g.features(t.id, 2) = topo.flat_index(a->server) + 1.0;
    }
    g.features(t.id, 3) = t.id == focal ? 1.0 : 0.0;
  }
  for (const auto& e : workflow.edges()) {
    const double w = max_gbits > 0.0 ? 0.5 * (1.0 + e.gbits / max_gbits) : 1.0;
    g.adjacency(e.from, e.to) = w;
    g.adjacency(e.to, e.from) = w;
  }
  normalize_columns(g.features);
  return g;
}

int resource_graph_size(const Topology& topology) {
  return topology.total_servers() + topology.num_clusters() + topology.num_dcs();
}

Graph build_resource_graph(const ScheduleState& state) {
  const auto& topo = state.topology();
  const int servers = topo.total_servers();
  const int n = resource_graph_size(topo);
  Graph g;
  g.features = Matrix::Zero(n, kResourceFeatures);
  g.adjacency = Matrix::Zero(n, n);
  int cluster_node = servers;
  int dc_node = servers + topo.num_clusters();
  for (int k = 0; k < topo.num_dcs(); ++k, ++dc_node) {
    const auto& dc = topo.dc(k);
    for (const auto& cl : dc.clusters) {
      for (const auto& s : cl.servers) {
        const int f = topo.flat_index(s.ref);
        g.features(f, 0) = s.mips;
        g.features(f, 1) = s.watts;
        g.features(f, 2) = std::max(0.0, state.available_at(f) - state.now());
        g.features.row(cluster_node) += g.features.row(f) / static_cast<double>(cl.servers.size());
        g.adjacency(f, cluster_node) = g.adjacency(cluster_node, f) = 1.0;
      }
      g.features.row(dc_node) += g.features.row(cluster_node) / static_cast<double>(dc.clusters.size());
      g.adjacency(cluster_node, dc_node) = g.adjacency(dc_node, cluster_node) = 1.0;
      ++cluster_node;
    }
  }
  normalize_columns(g.features);
  return g;
}

EmbedSpec EmbedSpec::task_default() {
  return {{50, 25}, {Activation::kTanh, Activation::kSigmoid}, {50}, {Activation::kTanh}};
}

EmbedSpec EmbedSpec::resource_default() {
  return {{8, 8, 8},
          {Activation::kTanh, Activation::kTanh, Activation::kSigmoid},
          {8, 8},
          {Activation::kTanh, Activation::kTanh}};
}

void EmbedSpec::validate() const {
  if (encoder.empty()) throw std::invalid_argument("encoder needs at least one layer");
  if (encoder.size() != encoder_act.size() || decoder.size() != decoder_act.size()) {
    throw std::invalid_argument("one activation per layer is required");
  }
  for (int s : encoder) {
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  }
  for (int s : decoder) {
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  }
}

GraphAutoencoder::GraphAutoencoder(const std::string& name, int features, const EmbedSpec& spec,
                                   Rng& rng)
    : name_(name), features_(features), spec_(spec) {
  spec.validate();
  if (features <= 0) throw std::invalid_argument("feature width must be positive");
  int in = features;
  for (std::size_t i = 0; i < spec.encoder.size(); ++i) {
    encoder_.emplace_back(name + ".enc" + std::to_string(i), in, spec.encoder[i],
                          spec.encoder_act[i], rng);
    in = spec.encoder[i];
  }
  MlpSpec dec{spec.decoder, spec.decoder_act};
  dec.sizes.push_back(features);
  dec.activations.push_back(Activation::kIdentity);
  decoder_ = Mlp(name + ".dec", in, dec, rng);
}

Matrix GraphAutoencoder::encode(const Graph& g) const {
  const Matrix a_hat = normalized_adjacency(g.adjacency);
  Matrix h = g.features;
  for (const auto& l : encoder_) h = l.forward(a_hat, h);
  return h;
}

Matrix GraphAutoencoder::reconstruct(const Graph& g) const {
  const Matrix a_hat = normalized_adjacency(g.adjacency);
  Matrix h = g.features;
  for (const auto& l : encoder_) h = l.forward(a_hat, h);
  return decoder_.forward(h);
}

double GraphAutoencoder::loss(const Graph& g) const {
  return (reconstruct(g) - g.features).squaredNorm() / static_cast<double>(g.features.size());
}

double GraphAutoencoder::accumulate_gradient(const Graph& g, double scale) {
  const Matrix a_hat = normalized_adjacency(g.adjacency);
  std::vector<GcnLayer::Cache> enc(encoder_.size());
  Mlp::Cache dec;
  Matrix h = g.features;
  for (std::size_t i = 0; i < encoder_.size(); ++i) h = encoder_[i].forward(a_hat, h, enc[i]);
  h = decoder_.forward(h, dec);
  const Matrix diff = h - g.features;
  const double count = static_cast<double>(g.features.size());
  Matrix d = diff * (2.0 * scale / count);
  d = decoder_.backward(d, dec);
  for (std::size_t i = encoder_.size(); i-- > 0;) d = encoder_[i].backward(a_hat, d, enc[i]);
  return diff.squaredNorm() / count;
}

std::vector<Tensor*> GraphAutoencoder::params() {
  std::vector<Tensor*> out;
  for (auto& l : encoder_) out.push_back(&l.weight());
  for (auto* p : decoder_.params()) out.push_back(p);
  return out;
}

std::vector<const Tensor*> GraphAutoencoder::params() const {
  std::vector<const Tensor*> out;
  for (const auto& l : encoder_) {
    for (const auto* p : l.params()) out.push_back(p);
  }
  for (const auto* p : decoder_.params()) out.push_back(p);
  return out;
}

double mean_loss(const GraphAutoencoder& model, const std::vector<Graph>& graphs) {
  if (graphs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& g : graphs) sum += model.loss(g);
  return sum / static_cast<double>(graphs.size());
}

AutoencoderHistory train_autoencoder(GraphAutoencoder& model, const std::vector<Graph>& train,
                                     const std::vector<Graph>& validation,
                                     const AutoencoderOptions& options) {
  if (train.empty()) throw std::invalid_argument("empty training corpus");
  if (options.epochs < 0 || options.batch <= 0) throw std::invalid_argument("bad training options");
  Adam::Options adam_opts;
  adam_opts.lr = options.lr;
  Adam adam(model.params(), adam_opts);
  Rng rng(options.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  AutoencoderHistory history;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(options.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(options.batch));
      adam.zero_grad();
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        sum += model.accumulate_gradient(train[order[i]], scale);
      }
      adam.step();
    }
    history.train_loss.push_back(sum / static_cast<double>(train.size()));
    if (!validation.empty()) history.val_loss.push_back(mean_loss(model, validation));
  }
  return history;
}

CorpusSplit split_corpus(std::vector<Graph> graphs, std::uint64_t seed) {
  Rng rng(seed);
  std::shuffle(graphs.begin(), graphs.end(), rng);
  const std::size_t n = graphs.size();
  const std::size_t n_train = n * 7 / 10;
  const std::size_t n_val = n * 2 / 10;
  CorpusSplit s;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n_train ? s.train : (i < n_train + n_val ? s.validation : s.test);
    dst.push_back(std::move(graphs[i]));
  }
  return s;
}

Vector embed_task(const GraphAutoencoder& model, const Graph& task_graph) {
  return model.encode(task_graph).colwise().mean().transpose();
}

int resource_embedding_size(const GraphAutoencoder& model, const Topology& topology) {
  return model.embedding_dim() * (topology.num_clusters() + topology.num_dcs());
}

Vector embed_resources(const GraphAutoencoder& model, const Graph& resource_graph,
                       const Topology& topology) {
  if (resource_graph.nodes() != resource_graph_size(topology)) {
    throw std::invalid_argument("resource graph does not match the topology");
  }
  const Matrix z = model.encode(resource_graph);
  const int first = topology.total_servers();
  const int count = topology.num_clusters() + topology.num_dcs();
  const int dim = model.embedding_dim();
  Vector out(count * dim);
  for (int r = 0; r < count; ++r) out.segment(r * dim, dim) = z.row(first + r).transpose();
  return out;
}

namespace {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, Eigen::Index cols) {
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto row = j.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::invalid_argument("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

}  // namespace

Json graph_to_json(const Graph& g) {
  return {{"features", matrix_to_json(g.features)}, {"adjacency", matrix_to_json(g.adjacency)}};
}

Graph graph_from_json(const Json& j) {
  Graph g;
  const auto& f = j.at("features");
  const Eigen::Index cols = f.empty() ? 0 : static_cast<Eigen::Index>(f.at(0).size());
  g.features = matrix_from_json(f, cols);
  g.adjacency = matrix_from_json(j.at("adjacency"), g.features.rows());
  if (g.adjacency.rows() != g.features.rows()) throw std::invalid_argument("adjacency size mismatch");
  return g;
}

}  // namespace ecmws
