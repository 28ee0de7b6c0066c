#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace lichnerowicz {

namespace detail {
struct GridData;
}

/// Flat periodic d-torus sampled on a uniform tensor grid (1 <= d <= 3).
///
/// Samples sit at x_i = j * L_i / n_i, j = 0..n_i-1, stored row-major with
/// axis 0 slowest. Copies share the immutable wavenumber tables and FFT plans.
class Grid {
 public:
  Grid(int d, std::vector<int> n, std::vector<double> L);

  int dim() const;
  std::span<const int> sizes() const;
  std::span<const double> periods() const;
  double spacing(int axis) const;
  std::size_t size() const;
  double volume() const;

  std::array<int, 3> multi_index(std::size_t flat) const;
  double coordinate(std::size_t flat, int axis) const;
  std::array<double, 3> point(std::size_t flat) const;

  /// Angular wavenumber 2*pi*k/L_axis of FFT-ordered index j (k in [-n/2, n/2]).
  double wavenumber(int axis, int j) const;

  /// Same shape and periods.
  bool operator==(const Grid& other) const;

  const detail::GridData& data() const { return *data_; }

 private:
  std::shared_ptr<const detail::GridData> data_;
};

Grid make_grid(int d, std::vector<int> n, std::vector<double> L);

/// First nonzero eigenvalue of -Laplacian on the torus: min_i (2*pi/L_i)^2.
double lambda1(const Grid& grid);

/// Periodic real samples on a Grid. Values are immutable and finite.
class ScalarField {
 public:
  ScalarField(Grid grid, std::vector<double> values);

  static ScalarField constant(const Grid& grid, double value);

  /// Samples f(x) where x is the coordinate triple of each grid point.
  template <class F>
  static ScalarField sample(const Grid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.point(i));
    return ScalarField(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// d components on one grid.
class VectorField {
 public:
  explicit VectorField(std::vector<ScalarField> components);
  static VectorField zero(const Grid& grid);

  const Grid& grid() const { return components_.front().grid(); }
  int dim() const { return static_cast<int>(components_.size()); }
  const ScalarField& operator[](int i) const { return components_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<ScalarField> components_;
};

/// Symmetric rank-2 tensor field; stores the d(d+1)/2 upper-triangular
/// components in row-major order (00, 01, 02, 11, 12, 22 for d = 3).
class SymTensorField {
 public:
  explicit SymTensorField(std::vector<ScalarField> components);
  static SymTensorField zero(const Grid& grid);

  static int component_count(int d) { return d * (d + 1) / 2; }
  static int index(int d, int i, int j);

  const Grid& grid() const { return components_.front().grid(); }
  int dim() const { return dim_; }
  const ScalarField& operator()(int i, int j) const;
  std::span<const ScalarField> components() const { return components_; }

 private:
  int dim_;
  std::vector<ScalarField> components_;
};

/// FFT-backed spectral operators on raw sample spans of one grid.
///
/// Owns its transform buffers; one instance per thread. Derivatives are exact
/// for the trigonometric interpolant; the Nyquist mode is dropped from first
/// derivatives and kept (with k = n/2) in the Laplacian and its inverses.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const Grid& grid);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  const Grid& grid() const { return grid_; }

  void laplacian(std::span<const double> in, std::span<double> out);
  void derivative(std::span<const double> in, int axis, std::span<double> out);
  /// Solves (-Laplacian + c) out = in.
  void inv_helmholtz(std::span<const double> in, double c, std::span<double> out);

  /// Squared moduli of the unnormalized r2c coefficients, with the
  /// half-spectrum multiplicity weights applied (sum = n * sum_j |f_j|^2).
  double parseval_sum(std::span<const double> in);

 private:
  template <class Multiply>
  void apply(std::span<const double> in, std::span<double> out, Multiply&& multiply);

  Grid grid_;
  double* real_ = nullptr;
  void* spectrum_ = nullptr;
};

ScalarField laplacian(const ScalarField& f);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
/// Row divergence (div T)_j = sum_i d_i T_ij.
VectorField divergence(const SymTensorField& t);
ScalarField inv_helmholtz(const ScalarField& f, double c);

double integrate(const ScalarField& f);
double norm_inf(const ScalarField& f);
double norm_L2(const ScalarField& f);
/// Discrete essinf / esssup surrogates.
double field_min(const ScalarField& f);
double field_max(const ScalarField& f);

/// Integral of the product of two fields by grid quadrature.
double inner_product(const ScalarField& f, const ScalarField& g);

}  // namespace lichnerowicz
