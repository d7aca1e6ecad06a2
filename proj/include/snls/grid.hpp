#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "snls/errors.hpp"

namespace snls {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Periodic box [0, L)^d sampled on N points per dimension.
// The frequency lattice is xi_k = k / L with integer modes k_i in [-N/2, N/2).
struct GridSpec {
  int d = 1;
  double L = 1.0;
  int N = 4;

  GridSpec() = default;
  GridSpec(int d_, double L_, int N_) : d(d_), L(L_), N(N_) { validate(); }

  void validate() const {
    if (d < 1 || d > 3) throw config_error("GridSpec: d must be 1, 2 or 3");
    if (!(L > 0.0)) throw config_error("GridSpec: L must be > 0");
    if (N < 4 || (N & (N - 1)) != 0)
      throw config_error("GridSpec: N must be a power of two >= 4");
  }

  std::size_t size() const {
    std::size_t n = 1;
    for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(N);
    return n;
  }

  double dx() const { return L / N; }

  // Quadrature weight per lattice point, (L/N)^d.
  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= dx();
    return v;
  }

  // Largest resolved |xi_i| per axis.
  double nyquist() const { return N / (2.0 * L); }

  GridSpec refined(int factor = 2) const { return GridSpec(d, L, N * factor); }

  bool operator==(const GridSpec&) const = default;
};

// FFT bin -> signed integer mode.
inline int signed_mode(int bin, int N) { return bin < N / 2 ? bin : bin - N; }

// Row-major decode of a flat index into per-dimension FFT bins. Unused
// trailing entries are zero.
inline std::array<int, 3> decode_bins(const GridSpec& g, std::size_t flat) {
  std::array<int, 3> b{0, 0, 0};
  for (int i = g.d - 1; i >= 0; --i) {
    b[i] = static_cast<int>(flat % g.N);
    flat /= g.N;
  }
  return b;
}

inline std::array<int, 3> mode_vector(const GridSpec& g, std::size_t flat) {
  auto b = decode_bins(g, flat);
  for (int i = 0; i < g.d; ++i) b[i] = signed_mode(b[i], g.N);
  return b;
}

// |2 pi xi_k|^2 for a signed mode vector.
inline double omega_sq(const GridSpec& g, const std::array<int, 3>& k) {
  double w = 0.0;
  for (int i = 0; i < g.d; ++i) {
    double t = two_pi * k[i] / g.L;
    w += t * t;
  }
  return w;
}

inline double omega_sq(const GridSpec& g, std::size_t flat) {
  return omega_sq(g, mode_vector(g, flat));
}

// |xi_k| (euclidean) for a signed mode vector.
inline double xi_abs(const GridSpec& g, const std::array<int, 3>& k) {
  double w = 0.0;
  for (int i = 0; i < g.d; ++i) {
    double t = static_cast<double>(k[i]) / g.L;
    w += t * t;
  }
  return std::sqrt(w);
}

// Physical coordinate of a flat index.
inline std::array<double, 3> coordinate(const GridSpec& g, std::size_t flat) {
  auto b = decode_bins(g, flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int i = 0; i < g.d; ++i) x[i] = b[i] * g.dx();
  return x;
}

// Visit every lattice point; fn(flat, k) receives the flat index and the
// signed mode vector. The explicit loops keep the decode out of hot paths.
template <class F>
inline void for_each_mode(const GridSpec& g, F&& fn) {
  const int N = g.N;
  std::size_t flat = 0;
  std::array<int, 3> k{0, 0, 0};
  switch (g.d) {
    case 1:
      for (int i0 = 0; i0 < N; ++i0) {
        k[0] = signed_mode(i0, N);
        fn(flat++, k);
      }
      break;
    case 2:
      for (int i0 = 0; i0 < N; ++i0) {
        k[0] = signed_mode(i0, N);
        for (int i1 = 0; i1 < N; ++i1) {
          k[1] = signed_mode(i1, N);
          fn(flat++, k);
        }
      }
      break;
    default:
      for (int i0 = 0; i0 < N; ++i0) {
        k[0] = signed_mode(i0, N);
        for (int i1 = 0; i1 < N; ++i1) {
          k[1] = signed_mode(i1, N);
          for (int i2 = 0; i2 < N; ++i2) {
            k[2] = signed_mode(i2, N);
            fn(flat++, k);
          }
        }
      }
      break;
  }
}

// Same visitation order, with the physical coordinate instead of the mode.
template <class F>
inline void for_each_point(const GridSpec& g, F&& fn) {
  const int N = g.N;
  const double h = g.dx();
  std::size_t flat = 0;
  std::array<double, 3> x{0.0, 0.0, 0.0};
  switch (g.d) {
    case 1:
      for (int i0 = 0; i0 < N; ++i0) {
        x[0] = i0 * h;
        fn(flat++, x);
      }
      break;
    case 2:
      for (int i0 = 0; i0 < N; ++i0) {
        x[0] = i0 * h;
        for (int i1 = 0; i1 < N; ++i1) {
          x[1] = i1 * h;
          fn(flat++, x);
        }
      }
      break;
    default:
      for (int i0 = 0; i0 < N; ++i0) {
        x[0] = i0 * h;
        for (int i1 = 0; i1 < N; ++i1) {
          x[1] = i1 * h;
          for (int i2 = 0; i2 < N; ++i2) {
            x[2] = i2 * h;
            fn(flat++, x);
          }
        }
      }
      break;
  }
}

}  // namespace snls
