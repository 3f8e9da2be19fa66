#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "finsim/errors.hpp"

namespace finsim {

/// Uniformly sampled named channels. Channel 0 is always time in seconds
/// ("t_s"); remaining channel names carry unit suffixes.
class TimeSeries {
 public:
  TimeSeries() = default;

  explicit TimeSeries(std::vector<std::string> channel_names)
      : names_(std::move(channel_names)) {
    if (names_.empty() || names_.front() != "t_s") {
      throw SimulationError("TimeSeries: first channel must be t_s");
    }
  }

  const std::vector<std::string>& channel_names() const { return names_; }
  Eigen::Index rows() const { return static_cast<Eigen::Index>(data_.size()); }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(names_.size()); }
  bool empty() const { return data_.empty(); }

  void reserve(std::size_t n) { data_.reserve(n); }

  void append(const Eigen::VectorXd& row) {
    if (row.size() != cols()) {
      throw SimulationError("TimeSeries: row arity mismatch");
    }
    if (!data_.empty() && row[0] <= data_.back()[0]) {
      throw SimulationError("TimeSeries: time must be strictly increasing");
    }
    data_.push_back(row);
  }

  const Eigen::VectorXd& row(Eigen::Index i) const { return data_[static_cast<std::size_t>(i)]; }

  double at(Eigen::Index i, const std::string& name) const {
    return data_[static_cast<std::size_t>(i)][index(name)];
  }

  Eigen::Index index(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
      throw SimulationError("TimeSeries: no channel named '" + name + "'");
    }
    return static_cast<Eigen::Index>(it - names_.begin());
  }

  Eigen::VectorXd column(const std::string& name) const {
    const Eigen::Index j = index(name);
    Eigen::VectorXd out(rows());
    for (Eigen::Index i = 0; i < rows(); ++i) out[i] = data_[static_cast<std::size_t>(i)][j];
    return out;
  }

  Eigen::VectorXd times() const { return column("t_s"); }

  /// Constant sampling step; requires at least two rows.
  double dt() const {
    if (rows() < 2) throw SimulationError("TimeSeries: need >= 2 rows for dt");
    return data_[1][0] - data_[0][0];
  }

 private:
  std::vector<std::string> names_;
  std::vector<Eigen::VectorXd> data_;
};

}  // namespace finsim
