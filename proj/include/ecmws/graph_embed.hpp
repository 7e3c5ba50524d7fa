// Task and resource graphs, their feature normalization, and the GCN
// autoencoders that compress them into fixed-size state vectors.

#ifndef ECMWS_GRAPH_EMBED_HPP_
#define ECMWS_GRAPH_EMBED_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ecmws/engine.hpp"
#include "ecmws/model.hpp"
#include "ecmws/nn.hpp"
#include "ecmws/sequencer.hpp"

namespace ecmws {

// Undirected weighted graph with one feature row per node.
struct Graph {
  Matrix features;
  Matrix adjacency;

  int nodes() const { return static_cast<int>(features.rows()); }
};

// Min-max scales every column into [0, 1]; constant columns become 0.
void normalize_columns(Matrix& m);

// Task-graph feature columns.
inline constexpr int kTaskFeatures = 4;  // workload, sub-deadline, server+1 (0 = none), focal
// Resource-graph feature columns.
inline constexpr int kResourceFeatures = 3;  // mips, watts, busy seconds

// Edges are symmetrized with weight (1 + S / S_max) / 2 so data-free edges
// still connect their endpoints.
Graph build_task_graph(const Workflow& workflow, const SubdeadlineTable& subdeadlines,
                       const ScheduleState& state, int focal);

// Node order: servers in (k, j, l) order, then cluster nodes in (k, j) order,
// then one node per DC. Edges follow the containment hierarchy.
Graph build_resource_graph(const ScheduleState& state);
int resource_graph_size(const Topology& topology);

struct EmbedSpec {
  std::vector<int> encoder;
  std::vector<Activation> encoder_act;
  std::vector<int> decoder;  // hidden widths; a linear layer back to the feature width follows
  std::vector<Activation> decoder_act;

  static EmbedSpec task_default();      // encoder 50 -> 25, decoder 50
  static EmbedSpec resource_default();  // encoder 8 -> 8 -> 8, decoder 8 -> 8
  void validate() const;
};

// GCN encoder over the normalized adjacency; a per-node dense decoder maps
// each embedding back to that node's features.
class GraphAutoencoder {
 public:
  GraphAutoencoder() = default;
  GraphAutoencoder(const std::string& name, int features, const EmbedSpec& spec, Rng& rng);

  int features() const { return features_; }
  int embedding_dim() const { return encoder_.back().out(); }
  const EmbedSpec& spec() const { return spec_; }

  Matrix encode(const Graph& g) const;
  Matrix reconstruct(const Graph& g) const;
  // Mean squared error over all node features.
  double loss(const Graph& g) const;
  // Same loss; adds scale * d loss / d params into the gradient buffers.
  double accumulate_gradient(const Graph& g, double scale);

  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;

 private:
  std::string name_;
  int features_ = 0;
  EmbedSpec spec_;
  std::vector<GcnLayer> encoder_;
  Mlp decoder_;
};

struct AutoencoderOptions {
  int epochs = 50;
  int batch = 16;
  double lr = 1e-3;
  std::uint64_t seed = 1;
};

struct AutoencoderHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;  // empty when no validation graphs are given
};

double mean_loss(const GraphAutoencoder& model, const std::vector<Graph>& graphs);

AutoencoderHistory train_autoencoder(GraphAutoencoder& model, const std::vector<Graph>& train,
                                     const std::vector<Graph>& validation,
                                     const AutoencoderOptions& options);

struct CorpusSplit {
  std::vector<Graph> train;
  std::vector<Graph> validation;
  std::vector<Graph> test;
};

// Shuffled 7:2:1 split.
CorpusSplit split_corpus(std::vector<Graph> graphs, std::uint64_t seed);

// Mean of the node embeddings.
Vector embed_task(const GraphAutoencoder& model, const Graph& task_graph);
// Cluster-node embeddings in (k, j) order followed by DC-node embeddings.
Vector embed_resources(const GraphAutoencoder& model, const Graph& resource_graph,
                       const Topology& topology);
int resource_embedding_size(const GraphAutoencoder& model, const Topology& topology);

Json graph_to_json(const Graph& g);
Graph graph_from_json(const Json& j);

}  // namespace ecmws

#endif  // ECMWS_GRAPH_EMBED_HPP_
