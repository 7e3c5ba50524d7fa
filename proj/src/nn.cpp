#include "ecmws/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ecmws {

Matrix activate(const Matrix& z, Activation act) {
  switch (act) {
    case Activation::kIdentity: return z;
    case Activation::kTanh: return z.array().tanh().matrix();
    case Activation::kSigmoid: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }
  return z;
}

Matrix activation_grad(const Matrix& y, Activation act) {
  switch (act) {
    case Activation::kIdentity: return Matrix::Ones(y.rows(), y.cols());
    case Activation::kTanh: return (1.0 - y.array().square()).matrix();
    case Activation::kSigmoid: return (y.array() * (1.0 - y.array())).matrix();
  }
  return Matrix::Ones(y.rows(), y.cols());
}

Linear::Linear(const std::string& name, int in, int out, Activation act, Rng& rng)
    : weight_(name + ".weight", in, out), bias_(name + ".bias", 1, out), act_(act) {
  if (in <= 0 || out <= 0) throw std::invalid_argument("layer sizes must be positive");
  glorot_uniform(weight_, rng);
}

Matrix Linear::forward(const Matrix& x) const {
  Matrix z = x * weight_.value;
  z.rowwise() += bias_.value.row(0);
  return activate(z, act_);
}

Matrix Linear::forward(const Matrix& x, Cache& cache) const {
  cache.input = x;
  cache.output = forward(x);
  return cache.output;
}

Matrix Linear::backward(const Matrix& dy, const Cache& cache) {
  const Matrix dz = (dy.array() * activation_grad(cache.output, act_).array()).matrix();
  weight_.grad.noalias() += cache.input.transpose() * dz;
  bias_.grad.row(0) += dz.colwise().sum();
  return dz * weight_.value.transpose();
}

void MlpSpec::validate() const {
  if (sizes.empty()) throw std::invalid_argument("an MLP needs at least one layer");
  if (sizes.size() != activations.size()) {
    throw std::invalid_argument("one activation per layer is required");
  }
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  }
}

Mlp::Mlp(const std::string& name, int input, const MlpSpec& spec, Rng& rng) {
  spec.validate();
  int in = input;
  for (std::size_t i = 0; i < spec.sizes.size(); ++i) {
    layers_.emplace_back(name + "." + std::to_string(i), in, spec.sizes[i], spec.activations[i], rng);
    in = spec.sizes[i];
  }
}

Matrix Mlp::forward(const Matrix& x) const {
  Matrix h = x;
  for (const auto& l : layers_) h = l.forward(h);
  return h;
}

Matrix Mlp::forward(const Matrix& x, Cache& cache) const {
  cache.resize(layers_.size());
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) h = layers_[i].forward(h, cache[i]);
  return h;
}

Matrix Mlp::backward(const Matrix& dy, const Cache& cache) {
  Matrix d = dy;
  for (std::size_t i = layers_.size(); i-- > 0;) d = layers_[i].backward(d, cache[i]);
  return d;
}

std::vector<Tensor*> Mlp::params() {
  std::vector<Tensor*> out;
  for (auto& l : layers_) {
    for (auto* p : l.params()) out.push_back(p);
  }
  return out;
}

std::vector<const Tensor*> Mlp::params() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_) {
    for (const auto* p : l.params()) out.push_back(p);
  }
  return out;
}

Matrix normalized_adjacency(const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw std::invalid_argument("adjacency must be square");
  }
  Matrix a = adjacency;
  a.diagonal().array() += 1.0;
  const Vector deg = a.rowwise().sum();
  Vector inv_sqrt(deg.size());
  for (Eigen::Index i = 0; i < deg.size(); ++i) {
    inv_sqrt(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  }
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

GcnLayer::GcnLayer(const std::string& name, int in, int out, Activation act, Rng& rng)
    : weight_(name + ".weight", in, out), act_(act) {
  if (in <= 0 || out <= 0) throw std::invalid_argument("layer sizes must be positive");
  glorot_uniform(weight_, rng);
}

Matrix GcnLayer::forward(const Matrix& a_hat, const Matrix& h) const {
  Cache cache;
  return forward(a_hat, h, cache);
}

Matrix GcnLayer::forward(const Matrix& a_hat, const Matrix& h, Cache& cache) const {
  if (a_hat.rows() != a_hat.cols() || a_hat.cols() != h.rows()) {
    throw std::invalid_argument("adjacency and feature shapes do not match");
  }
  if (h.cols() != weight_.rows()) {
    throw std::invalid_argument("feature width does not match layer input");
  }
  cache.propagated = a_hat * h;
  cache.output = activate(cache.propagated * weight_.value, act_);
  return cache.output;
}

Matrix GcnLayer::backward(const Matrix& a_hat, const Matrix& dy, const Cache& cache) {
  const Matrix dz = (dy.array() * activation_grad(cache.output, act_).array()).matrix();
  weight_.grad.noalias() += cache.propagated.transpose() * dz;
  return a_hat.transpose() * (dz * weight_.value.transpose());
}

Matrix gcn_forward(const Matrix& features, const Matrix& adjacency, const GcnLayer& layer) {
  if (adjacency.rows() != features.rows()) {
    throw std::invalid_argument("adjacency and feature shapes do not match");
  }
  return layer.forward(normalized_adjacency(adjacency), features);
}

namespace {

void check_mask(const Vector& logits, const std::vector<int>& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != logits.size()) {
    throw std::invalid_argument("mask and logits differ in length");
  }
  if (std::none_of(mask.begin(), mask.end(), [](int m) { return m != 0; })) {
    throw std::invalid_argument("mask selects no entry");
  }
}

}  // namespace

Vector masked_log_softmax(const Vector& logits, const std::vector<int>& mask) {
  check_mask(logits, mask);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) max_logit = std::max(max_logit, logits(i));
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) sum += std::exp(logits(i) - max_logit);
  }
  const double log_z = max_logit + std::log(sum);
  Vector out(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    out(i) = mask[static_cast<std::size_t>(i)] ? logits(i) - log_z
                                               : -std::numeric_limits<double>::infinity();
  }
  return out;
}

Vector masked_softmax(const Vector& logits, const std::vector<int>& mask) {
  const Vector logp = masked_log_softmax(logits, mask);
  Vector p(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    p(i) = mask[static_cast<std::size_t>(i)] ? std::exp(logp(i)) : 0.0;
  }
  return p;
}

Adam::Adam(std::vector<Tensor*> params, Options options)
    : params_(std::move(params)), options_(options) {
  for (const auto* p : params_) {
    m_.push_back(Matrix::Zero(p->rows(), p->cols()));
    v_.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& g = params_[i]->grad;
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * g;
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * g.cwiseProduct(g);
    params_[i]->value.array() -=
        options_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + options_.eps);
  }
}

std::vector<GradCheckResult> grad_check(const std::vector<Tensor*>& params,
                                        const std::function<double(bool)>& loss,
                                        double h, double tol, int max_entries,
                                        unsigned seed) {
  if (h < 1e-6 || h > 1e-3) throw std::invalid_argument("step must lie in [1e-6, 1e-3]");
  const double base = loss(true);
  if (!std::isfinite(base)) throw std::runtime_error("loss is not finite");
  std::vector<Matrix> analytic;
  for (const auto* p : params) analytic.push_back(p->grad);

  Rng rng(seed);
  std::vector<GradCheckResult> results;
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto* p = params[b];
    std::vector<Eigen::Index> entries(static_cast<std::size_t>(p->size()));
    std::iota(entries.begin(), entries.end(), 0);
    if (max_entries > 0 && static_cast<int>(entries.size()) > max_entries) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(static_cast<std::size_t>(max_entries));
    }
    double diff = 0.0;
    double norm_a = 0.0;
    double norm_n = 0.0;
    for (auto idx : entries) {
      const Eigen::Index r = idx % p->rows();
      const Eigen::Index c = idx / p->rows();
      const double orig = p->value(r, c);
      p->value(r, c) = orig + h;
      const double up = loss(false);
      p->value(r, c) = orig - h;
      const double down = loss(false);
      p->value(r, c) = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw std::runtime_error("loss is not finite under perturbation");
      }
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[b](r, c);
      diff += (a - numeric) * (a - numeric);
      norm_a += a * a;
      norm_n += numeric * numeric;
    }
    GradCheckResult res;
    res.name = p->name;
    res.entries_checked = static_cast<int>(entries.size());
    res.rel_error = std::sqrt(diff) / std::max(std::sqrt(norm_a) + std::sqrt(norm_n), 1e-8);
    res.pass = res.rel_error < tol;
    results.push_back(res);
  }
  return results;
}

}  // namespace ecmws
