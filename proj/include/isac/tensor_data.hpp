#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "isac/error.hpp"
#include "isac/types.hpp"

namespace isac {

/// Dense complex tensor stored in C order (first axis slowest).
template <std::size_t Order>
class CTensor {
 public:
  using Shape = std::array<Eigen::Index, Order>;

  CTensor() { shape_.fill(0); }

  explicit CTensor(const Shape& shape) : shape_(shape), data_(count(shape), cd{0.0, 0.0}) {
    for (auto d : shape) {
      if (d < 0) throw Error(ErrorCode::ShapeMismatch, "negative tensor dimension");
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  Eigen::Index dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  std::vector<cd>& data() noexcept { return data_; }
  const std::vector<cd>& data() const noexcept { return data_; }

  template <typename... Idx>
  cd& operator()(Idx... idx) {
    static_assert(sizeof...(Idx) == Order);
    return data_[offset({static_cast<Eigen::Index>(idx)...})];
  }

  template <typename... Idx>
  const cd& operator()(Idx... idx) const {
    static_assert(sizeof...(Idx) == Order);
    return data_[offset({static_cast<Eigen::Index>(idx)...})];
  }

  double frobenius_norm() const {
    double acc = 0.0;
    for (const auto& v : data_) acc += std::norm(v);
    return std::sqrt(acc);
  }

  bool all_finite() const {
    for (const auto& v : data_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
  }

 private:
  static std::size_t count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, Eigen::Index b) { return a * static_cast<std::size_t>(b); });
  }

  std::size_t offset(const std::array<Eigen::Index, Order>& idx) const {
    std::size_t off = 0;
    for (std::size_t a = 0; a < Order; ++a) off = off * static_cast<std::size_t>(shape_[a]) + static_cast<std::size_t>(idx[a]);
    return off;
  }

  Shape shape_;
  std::vector<cd> data_;
};

/// Echo tensor, axes: RF chain x OFDM symbol x subcarrier.
using Tensor3 = CTensor<3>;
/// Dual-polarized echo tensor, axes: RF chain x polarization x subcarrier x symbol.
using Tensor4 = CTensor<4>;

}  // namespace isac
