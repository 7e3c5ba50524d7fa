#ifndef ECMWS_TENSOR_HPP_
#define ECMWS_TENSOR_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace ecmws {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Rng = std::mt19937_64;

// A named parameter block with its gradient accumulator.
struct Tensor {
  std::string name;
  Matrix value;
  Matrix grad;

  Tensor() = default;
  Tensor(std::string n, Eigen::Index rows, Eigen::Index cols);

  Eigen::Index rows() const { return value.rows(); }
  Eigen::Index cols() const { return value.cols(); }
  Eigen::Index size() const { return value.size(); }
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  bool finite() const { return value.allFinite(); }
};

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, Rng& rng);

// Checkpoint format: {"format": "ecmws-params", "version": 1,
//   "tensors": [{"name", "rows", "cols", "data": [row-major entries]}]}
nlohmann::json save_params(const std::vector<const Tensor*>& params);
void load_params(const nlohmann::json& j, const std::vector<Tensor*>& params);

}  // namespace ecmws

#endif  // ECMWS_TENSOR_HPP_
