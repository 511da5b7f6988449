#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dynpriv {

// Classical fixed-step fourth-order Runge-Kutta. The right-hand side is any
// callable f(t, x, dxdt) writing into dxdt. Scratch buffers live in the
// stepper so a long integration does not allocate.
class Rk4 {
 public:
  explicit Rk4(std::size_t dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

  std::size_t dim() const noexcept { return k1_.size(); }

  template <class Rhs>
  void step(Rhs&& f, double t, std::span<double> x, double h) {
    const std::size_t n = x.size();
    const double half = 0.5 * h;
    f(t, std::span<const double>(x), std::span<double>(k1_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k1_[i];
    f(t + half, std::span<const double>(tmp_), std::span<double>(k2_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k2_[i];
    f(t + half, std::span<const double>(tmp_), std::span<double>(k3_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * k3_[i];
    f(t + h, std::span<const double>(tmp_), std::span<double>(k4_));
    const double sixth = h / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += sixth * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

 private:
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace dynpriv
