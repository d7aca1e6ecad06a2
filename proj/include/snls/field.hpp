#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "snls/fft.hpp"
#include "snls/grid.hpp"

namespace snls {

using cdouble = std::complex<double>;

enum class Representation : std::uint8_t { physical = 0, frequency = 1 };

// A complex field on a periodic box, stored either as point values u(x_m) or
// as coefficients c_k with respect to the orthonormal lattice exponentials
// e_k(x) = L^{-d/2} exp(2 pi i xi_k . x). With this normalization the change
// of representation is unitary between the weighted physical l2 norm and the
// plain coefficient l2 norm:
//
//   (L/N)^d sum_m |u(x_m)|^2 = sum_k |c_k|^2.
//
// Fields are treated as immutable by every operation in the library; all
// operations return new fields and are safe to run concurrently on shared
// inputs.
class SpectralField {
public:
  SpectralField() = default;

  SpectralField(GridSpec grid, Representation rep)
      : grid_(grid), rep_(rep), values_(grid.size()) {}

  SpectralField(GridSpec grid, Representation rep, std::vector<cdouble> values)
      : grid_(grid), rep_(rep), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw config_error("SpectralField: value count does not match grid");
  }

  const GridSpec& grid() const { return grid_; }
  Representation representation() const { return rep_; }

  std::span<const cdouble> values() const { return values_; }
  std::span<cdouble> values() { return values_; }
  const cdouble& operator[](std::size_t i) const { return values_[i]; }
  cdouble& operator[](std::size_t i) { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  SpectralField to(Representation target) const {
    if (target == rep_) return *this;
    SpectralField out(grid_, target);
    const int sign =
        (target == Representation::frequency) ? FFTW_FORWARD : FFTW_BACKWARD;
    detail::execute_dft(grid_.d, grid_.N, sign, values_.data(),
                        out.values_.data());
    // Forward: c_k = (sqrt(L)/N)^d sum_m u_m e^{-2 pi i m.k/N}.
    // Backward: u_m = (1/sqrt(L))^d sum_k c_k e^{+2 pi i m.k/N}.
    const double per_dim = (target == Representation::frequency)
                               ? std::sqrt(grid_.L) / grid_.N
                               : 1.0 / std::sqrt(grid_.L);
    double scale = 1.0;
    for (int i = 0; i < grid_.d; ++i) scale *= per_dim;
    for (auto& v : out.values_) v *= scale;
    return out;
  }

  SpectralField to_frequency() const { return to(Representation::frequency); }
  SpectralField to_physical() const { return to(Representation::physical); }

private:
  GridSpec grid_;
  Representation rep_ = Representation::physical;
  std::vector<cdouble> values_;
};

inline void require_compatible(const SpectralField& a, const SpectralField& b,
                               const char* op) {
  if (!(a.grid() == b.grid()))
    throw config_error(std::string(op) + ": grid mismatch");
  if (a.representation() != b.representation())
    throw config_error(std::string(op) + ": representation mismatch");
}

inline SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  require_compatible(a, b, "field add");
  SpectralField out = a;
  auto v = out.values();
  auto w = b.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
  return out;
}

inline SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  require_compatible(a, b, "field sub");
  SpectralField out = a;
  auto v = out.values();
  auto w = b.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= w[i];
  return out;
}

inline SpectralField operator*(cdouble c, const SpectralField& f) {
  SpectralField out = f;
  for (auto& v : out.values()) v *= c;
  return out;
}

// y += alpha * x, in place; the one mutating helper, used by the solver's
// accumulation loops on fields it owns.
inline void add_scaled(SpectralField& y, cdouble alpha, const SpectralField& x) {
  require_compatible(y, x, "add_scaled");
  auto v = y.values();
  auto w = x.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += alpha * w[i];
}

// Frequency-side multiplier application: out_k = fn(flat, k) * in_k.
// Accepts either representation; the result is in frequency representation.
template <class F>
inline SpectralField apply_multiplier(const SpectralField& f, F&& fn) {
  SpectralField out = f.to_frequency();
  auto v = out.values();
  for_each_mode(out.grid(), [&](std::size_t flat, const std::array<int, 3>& k) {
    v[flat] *= fn(flat, k);
  });
  return out;
}

// Discrete L^2 norm, representation-appropriate weights.
inline double l2_norm(const SpectralField& f) {
  double acc = 0.0;
  for (const auto& v : f.values()) acc += std::norm(v);
  if (f.representation() == Representation::physical)
    acc *= f.grid().cell_volume();
  return std::sqrt(acc);
}

inline double max_abs(const SpectralField& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace snls
