// Feedforward and graph-convolution layers with hand-written reverse-mode
// gradients, masked softmax, an Adam optimizer and finite-difference checks.

#ifndef ECMWS_NN_HPP_
#define ECMWS_NN_HPP_

#include <functional>
#include <string>
#include <vector>

#include "ecmws/tensor.hpp"

namespace ecmws {

enum class Activation { kIdentity, kTanh, kSigmoid };

Matrix activate(const Matrix& z, Activation act);
// Derivative expressed through the activation output y.
Matrix activation_grad(const Matrix& y, Activation act);

// y = act(x W + b) over a batch of row vectors.
class Linear {
 public:
  struct Cache {
    Matrix input;
    Matrix output;
  };

  Linear() = default;
  Linear(const std::string& name, int in, int out, Activation act, Rng& rng);

  int in() const { return static_cast<int>(weight_.rows()); }
  int out() const { return static_cast<int>(weight_.cols()); }
  Activation activation() const { return act_; }
  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Cache& cache) const;
  // Accumulates parameter gradients and returns d loss / d input.
  Matrix backward(const Matrix& dy, const Cache& cache);
  std::vector<Tensor*> params() { return {&weight_, &bias_}; }
  std::vector<const Tensor*> params() const { return {&weight_, &bias_}; }

 private:
  Tensor weight_;
  Tensor bias_;
  Activation act_ = Activation::kIdentity;
};

struct MlpSpec {
  std::vector<int> sizes;  // output size of each layer
  std::vector<Activation> activations;

  void validate() const;
};

class Mlp {
 public:
  using Cache = std::vector<Linear::Cache>;

  Mlp() = default;
  Mlp(const std::string& name, int input, const MlpSpec& spec, Rng& rng);

  int in() const { return layers_.front().in(); }
  int out() const { return layers_.back().out(); }
  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Cache& cache) const;
  Matrix backward(const Matrix& dy, const Cache& cache);
  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;

 private:
  std::vector<Linear> layers_;
};

// D^-1/2 (A + I) D^-1/2 for a weighted adjacency matrix.
Matrix normalized_adjacency(const Matrix& adjacency);

// act(A_hat H W) with A_hat already normalized.
class GcnLayer {
 public:
  struct Cache {
    Matrix propagated;  // A_hat H
    Matrix output;
  };

  GcnLayer() = default;
  GcnLayer(const std::string& name, int in, int out, Activation act, Rng& rng);

  int in() const { return static_cast<int>(weight_.rows()); }
  int out() const { return static_cast<int>(weight_.cols()); }
  Matrix forward(const Matrix& a_hat, const Matrix& h) const;
  Matrix forward(const Matrix& a_hat, const Matrix& h, Cache& cache) const;
  Matrix backward(const Matrix& a_hat, const Matrix& dy, const Cache& cache);
  Tensor& weight() { return weight_; }
  std::vector<Tensor*> params() { return {&weight_}; }
  std::vector<const Tensor*> params() const { return {&weight_}; }

 private:
  Tensor weight_;
  Activation act_ = Activation::kIdentity;
};

// Normalizes `adjacency` and applies one layer.
Matrix gcn_forward(const Matrix& features, const Matrix& adjacency, const GcnLayer& layer);

// Softmax restricted to entries with mask = 1; masked entries are exactly 0.
Vector masked_softmax(const Vector& logits, const std::vector<int>& mask);
// Log-probabilities of the unmasked entries; masked entries are -inf.
Vector masked_log_softmax(const Vector& logits, const std::vector<int>& mask);

class Adam {
 public:
  struct Options {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam(std::vector<Tensor*> params, Options options);
  void zero_grad();
  void step();
  long steps() const { return t_; }

 private:
  std::vector<Tensor*> params_;
  Options options_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

struct GradCheckResult {
  std::string name;
  double rel_error = 0.0;
  int entries_checked = 0;
  bool pass = false;
};

// `loss` returns the scalar loss; when its argument is true it must also
// zero and fill the gradients of `params`. Central differences are taken on
// up to `max_entries` entries per block (all entries when <= 0).
std::vector<GradCheckResult> grad_check(const std::vector<Tensor*>& params,
                                        const std::function<double(bool)>& loss,
                                        double h, double tol, int max_entries = 0,
                                        unsigned seed = 7);

}  // namespace ecmws

#endif  // ECMWS_NN_HPP_
