#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsom/errors.hpp"
#include "hsom/rng.hpp"

namespace hsom {

inline constexpr double kDefaultActivitySigma = 1e6;

struct GridCoord {
  std::size_t row{0};
  std::size_t col{0};

  auto operator<=>(const GridCoord&) const = default;
};

// I x J lattice of weight vectors in R^n, stored row-major.
class SomGrid {
 public:
  SomGrid(std::size_t rows, std::size_t cols, std::size_t input_dim, double activity_sigma,
          std::uint64_t seed)
      : rows_(rows), cols_(cols), dim_(input_dim), activity_sigma_(activity_sigma), seed_(seed) {
    validate_shape();
    weights_.resize(rows_ * cols_ * dim_);
    Rng rng(seed);
    for (double& w : weights_) w = rng.uniform();
  }

  SomGrid(std::size_t rows, std::size_t cols, std::size_t input_dim, double activity_sigma,
          std::uint64_t seed, std::vector<double> weights)
      : rows_(rows),
        cols_(cols),
        dim_(input_dim),
        activity_sigma_(activity_sigma),
        seed_(seed),
        weights_(std::move(weights)) {
    validate_shape();
    if (weights_.size() != rows_ * cols_ * dim_) {
      throw Error(ErrorKind::DimensionMismatch, "weight buffer has " + std::to_string(weights_.size()) +
                                                    " values, expected " + std::to_string(rows_ * cols_ * dim_));
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t input_dim() const { return dim_; }
  std::size_t size() const { return rows_ * cols_; }
  double activity_sigma() const { return activity_sigma_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t flat(GridCoord c) const { return c.row * cols_ + c.col; }
  GridCoord coord(std::size_t flat_index) const { return {flat_index / cols_, flat_index % cols_}; }

  std::span<const double> weight(std::size_t flat_index) const {
    return {weights_.data() + flat_index * dim_, dim_};
  }
  std::span<double> weight(std::size_t flat_index) { return {weights_.data() + flat_index * dim_, dim_}; }
  std::span<const double> weight(GridCoord c) const { return weight(flat(c)); }

  const std::vector<double>& weights() const { return weights_; }

  bool operator==(const SomGrid&) const = default;

 private:
  void validate_shape() const {
    if (rows_ == 0 || cols_ == 0 || dim_ == 0) {
      throw Error(ErrorKind::DimensionMismatch, "SOM grid dimensions must be positive");
    }
    if (!(activity_sigma_ > 0.0)) throw Error(ErrorKind::InvalidConfig, "activity sigma must be positive");
  }

  std::size_t rows_;
  std::size_t cols_;
  std::size_t dim_;
  double activity_sigma_;
  std::uint64_t seed_;
  std::vector<double> weights_;
};

enum class NeighborhoodForm : std::uint8_t {
  Unsquared,  // exp(-|r_c - r_ij| / (2 sigma^2)), the printed form
  Squared,    // exp(-|r_c - r_ij|^2 / (2 sigma^2)), conventional Gaussian
};

struct TrainingSchedule {
  std::size_t epochs{0};
  double alpha0{0.1};
  double alpha_decay{1.0};   // tau_alpha, in presentations
  double nbhd_sigma0{1.0};   // grid-cell units
  double nbhd_decay{1.0};    // tau_sigma, in presentations
  NeighborhoodForm form{NeighborhoodForm::Unsquared};

  double alpha(double t) const { return alpha0 * std::exp(-t / alpha_decay); }
  double sigma(double t) const { return nbhd_sigma0 * std::exp(-t / nbhd_decay); }

  // Defaults: tau_alpha = total/2, sigma0 = max(I,J)/2 and tau_sigma chosen so
  // sigma reaches 1 after the last presentation. Grids with sigma0 <= 1 fall
  // back to tau_sigma = total.
  static TrainingSchedule defaults(std::size_t rows, std::size_t cols, std::size_t epochs,
                                   std::size_t inputs_per_epoch) {
    TrainingSchedule s;
    s.epochs = epochs;
    const double total = std::max<double>(1.0, static_cast<double>(epochs * inputs_per_epoch));
    s.alpha0 = 0.1;
    s.alpha_decay = 0.5 * total;
    s.nbhd_sigma0 = static_cast<double>(std::max(rows, cols)) / 2.0;
    s.nbhd_decay = s.nbhd_sigma0 > 1.0 ? total / std::log(s.nbhd_sigma0) : total;
    return s;
  }

  void validate() const {
    if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw Error(ErrorKind::InvalidConfig, "alpha0 must lie in (0,1]");
    if (!(alpha_decay > 0.0)) throw Error(ErrorKind::InvalidConfig, "alpha decay must be positive");
    if (!(nbhd_sigma0 > 0.0)) throw Error(ErrorKind::InvalidConfig, "neighbourhood sigma0 must be positive");
    if (!(nbhd_decay > 0.0)) throw Error(ErrorKind::InvalidConfig, "neighbourhood decay must be positive");
  }
};

inline void check_dim(const SomGrid& grid, std::span<const double> x) {
  if (x.size() != grid.input_dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "input has " + std::to_string(x.size()) + " values, grid expects " + std::to_string(grid.input_dim()));
  }
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

// s_ij = ||x - w_ij||, row-major.
inline std::vector<double> net_input(const SomGrid& grid, std::span<const double> x) {
  check_dim(grid, x);
  std::vector<double> s(grid.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(squared_distance(x, grid.weight(i)));
  return s;
}

// y_ij = exp(-s_ij / sigma_a).
inline std::vector<double> activity(std::span<const double> net, double sigma_a) {
  std::vector<double> y(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) y[i] = std::exp(-net[i] / sigma_a);
  return y;
}

// Flat index of the maximal activity; ties go to the smallest row-major index.
inline std::size_t argmax_index(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

inline GridCoord winner(std::span<const double> activity_map, std::size_t cols) {
  const std::size_t i = argmax_index(activity_map);
  return {i / cols, i % cols};
}

struct SomResponse {
  GridCoord winner;
  std::vector<double> activity;
  std::vector<double> net_input;
};

inline SomResponse respond(const SomGrid& grid, std::span<const double> x) {
  SomResponse r;
  r.net_input = net_input(grid, x);
  r.activity = activity(r.net_input, grid.activity_sigma());
  r.winner = winner(r.activity, grid.cols());
  return r;
}

inline double grid_distance(GridCoord a, GridCoord b) {
  const double dr = static_cast<double>(a.row) - static_cast<double>(b.row);
  const double dc = static_cast<double>(a.col) - static_cast<double>(b.col);
  return std::sqrt(dr * dr + dc * dc);
}

inline double neighborhood(GridCoord winner_cell, GridCoord cell, double sigma_t,
                           NeighborhoodForm form = NeighborhoodForm::Unsquared) {
  const double dr = static_cast<double>(winner_cell.row) - static_cast<double>(cell.row);
  const double dc = static_cast<double>(winner_cell.col) - static_cast<double>(cell.col);
  const double d2 = dr * dr + dc * dc;
  const double numerator = form == NeighborhoodForm::Squared ? d2 : std::sqrt(d2);
  return std::exp(-numerator / (2.0 * sigma_t * sigma_t));
}

// w_ij += alpha * G_ijc * (x - w_ij) for every neuron.
inline void adapt(SomGrid& grid, std::span<const double> x, GridCoord c, double alpha, double sigma_t,
                  NeighborhoodForm form = NeighborhoodForm::Unsquared) {
  check_dim(grid, x);
  if (alpha == 0.0) return;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double rate = alpha * neighborhood(c, grid.coord(i), sigma_t, form);
    auto w = grid.weight(i);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += rate * (x[k] - w[k]);
  }
}

// Neighbourhood gains for every cell around a winner, with one exp() per
// distinct grid distance. Gives exactly the values of neighborhood().
class NeighborhoodTable {
 public:
  NeighborhoodTable(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), slot_(rows * cols) {
    std::vector<std::size_t> seen;
    for (std::size_t dr = 0; dr < rows; ++dr) {
      for (std::size_t dc = 0; dc < cols; ++dc) {
        const std::size_t d2 = dr * dr + dc * dc;
        auto it = std::find(seen.begin(), seen.end(), d2);
        if (it == seen.end()) {
          seen.push_back(d2);
          it = seen.end() - 1;
        }
        slot_[dr * cols + dc] = static_cast<std::size_t>(it - seen.begin());
      }
    }
    squared_.reserve(seen.size());
    for (std::size_t d2 : seen) squared_.push_back(static_cast<double>(d2));
    gains_.resize(seen.size());
  }

  void update(double sigma_t, NeighborhoodForm form) {
    const double denom = 2.0 * sigma_t * sigma_t;
    for (std::size_t k = 0; k < squared_.size(); ++k) {
      const double numerator = form == NeighborhoodForm::Squared ? squared_[k] : std::sqrt(squared_[k]);
      gains_[k] = std::exp(-numerator / denom);
    }
  }

  double gain(GridCoord winner_cell, GridCoord cell) const {
    const std::size_t dr = winner_cell.row > cell.row ? winner_cell.row - cell.row : cell.row - winner_cell.row;
    const std::size_t dc = winner_cell.col > cell.col ? winner_cell.col - cell.col : cell.col - winner_cell.col;
    return gains_[slot_[dr * cols_ + dc]];
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::size_t> slot_;
  std::vector<double> squared_;
  std::vector<double> gains_;
};

struct SomTrainingResult {
  SomGrid grid;
  // Mean winner distance ||x - w_c|| over each epoch's presentations,
  // measured before the corresponding adaptation.
  std::vector<double> quantization_error;
};

// Unsupervised training. Each epoch presents every input once in a
// seed-derived shuffled order; the decay clock t advances per presentation.
inline SomTrainingResult train(SomGrid grid, std::span<const std::vector<double>> inputs,
                               const TrainingSchedule& schedule, std::uint64_t seed) {
  if (inputs.empty()) throw Error(ErrorKind::EmptyTrainingSet, "SOM training needs at least one input");
  for (const auto& x : inputs) check_dim(grid, x);
  schedule.validate();

  SomTrainingResult result{std::move(grid), {}};
  SomGrid& g = result.grid;
  result.quantization_error.reserve(schedule.epochs);

  Rng rng(seed);
  std::vector<std::size_t> order(inputs.size());
  NeighborhoodTable table(g.rows(), g.cols());
  const std::size_t dim = g.input_dim();
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < schedule.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    double qe_sum = 0.0;
    for (std::size_t idx : order) {
      const auto& x = inputs[idx];
      const double* xs = x.data();
      // argmin of the net input is the argmax of the exponential activity for any sigma_a > 0
      std::size_t best = 0;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double d2 = squared_distance(x, g.weight(i));
        if (d2 < best_d2) {
          best_d2 = d2;
          best = i;
        }
      }
      qe_sum += std::sqrt(best_d2);
      const double td = static_cast<double>(t);
      const double alpha = schedule.alpha(td);
      table.update(schedule.sigma(td), schedule.form);
      const GridCoord c = g.coord(best);
      for (std::size_t r = 0, i = 0; r < g.rows(); ++r) {
        for (std::size_t col = 0; col < g.cols(); ++col, ++i) {
          const double rate = alpha * table.gain(c, {r, col});
          double* w = g.weight(i).data();
          for (std::size_t k = 0; k < dim; ++k) w[k] += rate * (xs[k] - w[k]);
        }
      }
      ++t;
    }
    result.quantization_error.push_back(qe_sum / static_cast<double>(inputs.size()));
  }
  return result;
}

}  // namespace hsom
