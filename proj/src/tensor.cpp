#include "ecmws/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace ecmws {

Tensor::Tensor(std::string n, Eigen::Index rows, Eigen::Index cols)
    : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

void glorot_uniform(Tensor& t, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) t.value(r, c) = dist(rng);
  }
}

nlohmann::json save_params(const std::vector<const Tensor*>& params) {
  nlohmann::json j;
  j["format"] = "ecmws-params";
  j["version"] = 1;
  j["tensors"] = nlohmann::json::array();
  for (const auto* t : params) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(t->size()));
    for (Eigen::Index r = 0; r < t->rows(); ++r) {
      for (Eigen::Index c = 0; c < t->cols(); ++c) data.push_back(t->value(r, c));
    }
    j["tensors"].push_back(
        {{"name", t->name}, {"rows", t->rows()}, {"cols", t->cols()}, {"data", data}});
  }
  return j;
}

void load_params(const nlohmann::json& j, const std::vector<Tensor*>& params) {
  if (j.value("format", "") != "ecmws-params" || j.value("version", 0) != 1) {
    throw std::invalid_argument("not an ecmws-params v1 checkpoint");
  }
  const auto& tensors = j.at("tensors");
  if (tensors.size() != params.size()) {
    throw std::invalid_argument("checkpoint holds " + std::to_string(tensors.size()) +
                                " tensors, expected " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& jt = tensors[i];
    auto* t = params[i];
    const auto rows = jt.at("rows").get<Eigen::Index>();
    const auto cols = jt.at("cols").get<Eigen::Index>();
    if (rows != t->rows() || cols != t->cols()) {
      throw std::invalid_argument("shape mismatch for tensor " + t->name);
    }
    const auto data = jt.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw std::invalid_argument("entry count mismatch for tensor " + t->name);
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) t->value(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    }
    t->zero_grad();
  }
}

}  // namespace ecmws
