#include "lichnerowicz/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "lichnerowicz/errors.hpp"

namespace lichnerowicz {

namespace {

// fftw_plan_* and fftw_destroy_plan are not thread safe; fftw_execute_dft_* is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

namespace detail {

struct GridData {
  int d = 0;
  std::vector<int> n;
  std::vector<double> L;
  std::size_t size = 0;
  std::size_t spectral_size = 0;
  std::array<std::size_t, 3> stride{};
  // Per-axis angular wavenumbers in FFT order, full (Nyquist as +n/2).
  std::array<std::vector<double>, 3> k;
  // |k|^2 for each half-spectrum coefficient.
  std::vector<double> ksq;
  // First-derivative wavenumber per axis for each half-spectrum coefficient (Nyquist zeroed).
  std::array<std::vector<double>, 3> kderiv;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~GridData() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

}  // namespace detail

Grid::Grid(int d, std::vector<int> n, std::vector<double> L) {
  if (d < 1 || d > 3) throw ConfigError("grid dimension must be 1, 2 or 3, got " + std::to_string(d));
  if (static_cast<int>(n.size()) != d || static_cast<int>(L.size()) != d)
    throw ConfigError("grid: expected " + std::to_string(d) + " sizes and periods");
  for (int i = 0; i < d; ++i) {
    if (n[i] < 4 || n[i] % 2 != 0)
      throw ConfigError("grid axis " + std::to_string(i) + ": size must be even and >= 4, got " +
                        std::to_string(n[i]));
    if (!(L[i] > 0.0) || !std::isfinite(L[i]))
      throw ConfigError("grid axis " + std::to_string(i) + ": period must be positive");
  }

  auto data = std::make_shared<detail::GridData>();
  data->d = d;
  data->n = std::move(n);
  data->L = std::move(L);
  data->size = 1;
  for (int i = 0; i < d; ++i) data->size *= static_cast<std::size_t>(data->n[i]);
  std::size_t s = 1;
  for (int i = d - 1; i >= 0; --i) {
    data->stride[i] = s;
    s *= static_cast<std::size_t>(data->n[i]);
  }

  for (int i = 0; i < d; ++i) {
    const int ni = data->n[i];
    const double base = 2.0 * std::numbers::pi / data->L[i];
    data->k[i].resize(ni);
    for (int j = 0; j < ni; ++j) data->k[i][j] = base * (j <= ni / 2 ? j : j - ni);
  }

  // Half-spectrum layout: axes 0..d-2 full, last axis 0..n/2.
  std::array<int, 3> shape{1, 1, 1};
  for (int i = 0; i < d; ++i) shape[i] = data->n[i];
  shape[d - 1] = data->n[d - 1] / 2 + 1;
  data->spectral_size = static_cast<std::size_t>(shape[0]) * shape[1] * shape[2];
  data->ksq.resize(data->spectral_size);
  for (int i = 0; i < d; ++i) data->kderiv[i].resize(data->spectral_size);

  std::size_t idx = 0;
  for (int j0 = 0; j0 < shape[0]; ++j0)
    for (int j1 = 0; j1 < shape[1]; ++j1)
      for (int j2 = 0; j2 < shape[2]; ++j2, ++idx) {
        const std::array<int, 3> j{j0, j1, j2};
        double ksq = 0.0;
        for (int a = 0; a < d; ++a) {
          const double ka = data->k[a][j[a]];
          ksq += ka * ka;
          data->kderiv[a][idx] = (j[a] == data->n[a] / 2) ? 0.0 : ka;
        }
        data->ksq[idx] = ksq;
      }

  {
    std::lock_guard lock(planner_mutex());
    double* in = fftw_alloc_real(data->size);
    fftw_complex* out = fftw_alloc_complex(data->spectral_size);
    data->forward = fftw_plan_dft_r2c(d, data->n.data(), in, out, FFTW_ESTIMATE);
    data->backward = fftw_plan_dft_c2r(d, data->n.data(), out, in, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
  }
  if (!data->forward || !data->backward) throw ConfigError("grid: FFT planning failed");
  data_ = std::move(data);
}

Grid make_grid(int d, std::vector<int> n, std::vector<double> L) { return Grid(d, std::move(n), std::move(L)); }

int Grid::dim() const { return data_->d; }
std::span<const int> Grid::sizes() const { return data_->n; }
std::span<const double> Grid::periods() const { return data_->L; }
double Grid::spacing(int axis) const { return data_->L[axis] / data_->n[axis]; }
std::size_t Grid::size() const { return data_->size; }

double Grid::volume() const {
  double v = 1.0;
  for (double l : data_->L) v *= l;
  return v;
}

std::array<int, 3> Grid::multi_index(std::size_t flat) const {
  std::array<int, 3> j{0, 0, 0};
  for (int a = 0; a < data_->d; ++a) {
    j[a] = static_cast<int>(flat / data_->stride[a]);
    flat %= data_->stride[a];
  }
  return j;
}

double Grid::coordinate(std::size_t flat, int axis) const {
  return multi_index(flat)[axis] * spacing(axis);
}

std::array<double, 3> Grid::point(std::size_t flat) const {
  const auto j = multi_index(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < data_->d; ++a) x[a] = j[a] * spacing(a);
  return x;
}

double Grid::wavenumber(int axis, int j) const { return data_->k[axis][j]; }

bool Grid::operator==(const Grid& other) const {
  return data_ == other.data_ || (data_->n == other.data_->n && data_->L == other.data_->L);
}

double lambda1(const Grid& grid) {
  double best = INFINITY;
  for (double l : grid.periods()) {
    const double k = 2.0 * std::numbers::pi / l;
    best = std::min(best, k * k);
  }
  return best;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw ConfigError("field has " + std::to_string(values_.size()) + " values, grid has " +
                      std::to_string(grid_.size()) + " points");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i])) throw DomainError("non-finite field value at index " + std::to_string(i));
}

ScalarField ScalarField::constant(const Grid& grid, double value) {
  return ScalarField(grid, std::vector<double>(grid.size(), value));
}

VectorField::VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
  if (components_.empty()) throw ConfigError("vector field needs components");
  const Grid& g = components_.front().grid();
  if (static_cast<int>(components_.size()) != g.dim())
    throw ConfigError("vector field component count must equal grid dimension");
  for (const auto& c : components_)
    if (!(c.grid() == g)) throw ConfigError("vector field components live on different grids");
}

VectorField VectorField::zero(const Grid& grid) {
  return VectorField(std::vector<ScalarField>(grid.dim(), ScalarField::constant(grid, 0.0)));
}

int SymTensorField::index(int d, int i, int j) {
  if (i > j) std::swap(i, j);
  // Row i starts after rows 0..i-1 of lengths d, d-1, ...
  return i * d - i * (i - 1) / 2 + (j - i);
}

SymTensorField::SymTensorField(std::vector<ScalarField> components) : components_(std::move(components)) {
  if (components_.empty()) throw ConfigError("tensor field needs components");
  const Grid& g = components_.front().grid();
  dim_ = g.dim();
  if (static_cast<int>(components_.size()) != component_count(dim_))
    throw ConfigError("symmetric tensor field needs d(d+1)/2 components");
  for (const auto& c : components_)
    if (!(c.grid() == g)) throw ConfigError("tensor field components live on different grids");
}

SymTensorField SymTensorField::zero(const Grid& grid) {
  return SymTensorField(
      std::vector<ScalarField>(component_count(grid.dim()), ScalarField::constant(grid, 0.0)));
}

const ScalarField& SymTensorField::operator()(int i, int j) const {
  return components_[static_cast<std::size_t>(index(dim_, i, j))];
}

// ---------------------------------------------------------------------------

SpectralWorkspace::SpectralWorkspace(const Grid& grid) : grid_(grid) {
  real_ = fftw_alloc_real(grid.size());
  spectrum_ = fftw_alloc_complex(grid.data().spectral_size);
}

SpectralWorkspace::~SpectralWorkspace() {
  fftw_free(real_);
  fftw_free(spectrum_);
}

template <class Multiply>
void SpectralWorkspace::apply(std::span<const double> in, std::span<double> out, Multiply&& multiply) {
  const auto& data = grid_.data();
  std::copy(in.begin(), in.end(), real_);
  auto* spec = static_cast<fftw_complex*>(spectrum_);
  fftw_execute_dft_r2c(data.forward, real_, spec);
  const double scale = 1.0 / static_cast<double>(data.size);
  for (std::size_t i = 0; i < data.spectral_size; ++i) {
    std::complex<double> z(spec[i][0], spec[i][1]);
    z = multiply(i, z) * scale;
    spec[i][0] = z.real();
    spec[i][1] = z.imag();
  }
  fftw_execute_dft_c2r(data.backward, spec, real_);
  std::copy(real_, real_ + data.size, out.begin());
}

void SpectralWorkspace::laplacian(std::span<const double> in, std::span<double> out) {
  const auto& ksq = grid_.data().ksq;
  apply(in, out, [&](std::size_t i, std::complex<double> z) { return -ksq[i] * z; });
}

void SpectralWorkspace::derivative(std::span<const double> in, int axis, std::span<double> out) {
  const auto& k = grid_.data().kderiv[axis];
  apply(in, out, [&](std::size_t i, std::complex<double> z) { return std::complex<double>(0.0, k[i]) * z; });
}

void SpectralWorkspace::inv_helmholtz(std::span<const double> in, double c, std::span<double> out) {
  if (!(c > 0.0)) throw DomainError("inv_helmholtz: shift must be positive");
  const auto& ksq = grid_.data().ksq;
  apply(in, out, [&](std::size_t i, std::complex<double> z) { return z / (ksq[i] + c); });
}

double SpectralWorkspace::parseval_sum(std::span<const double> in) {
  const auto& data = grid_.data();
  std::copy(in.begin(), in.end(), real_);
  auto* spec = static_cast<fftw_complex*>(spectrum_);
  fftw_execute_dft_r2c(data.forward, real_, spec);
  const int nl = data.n[data.d - 1];
  const std::size_t last = static_cast<std::size_t>(nl / 2 + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.spectral_size; ++i) {
    const std::size_t j = i % last;
    const double w = (j == 0 || j == static_cast<std::size_t>(nl / 2)) ? 1.0 : 2.0;
    sum += w * (spec[i][0] * spec[i][0] + spec[i][1] * spec[i][1]);
  }
  return sum;
}

// ---------------------------------------------------------------------------

ScalarField laplacian(const ScalarField& f) {
  SpectralWorkspace ws(f.grid());
  std::vector<double> out(f.size());
  ws.laplacian(f.values(), out);
  return ScalarField(f.grid(), std::move(out));
}

VectorField gradient(const ScalarField& f) {
  SpectralWorkspace ws(f.grid());
  std::vector<ScalarField> comps;
  for (int a = 0; a < f.grid().dim(); ++a) {
    std::vector<double> out(f.size());
    ws.derivative(f.values(), a, out);
    comps.emplace_back(f.grid(), std::move(out));
  }
  return VectorField(std::move(comps));
}

ScalarField divergence(const VectorField& v) {
  SpectralWorkspace ws(v.grid());
  std::vector<double> acc(v.grid().size(), 0.0), tmp(v.grid().size());
  for (int a = 0; a < v.dim(); ++a) {
    ws.derivative(v[a].values(), a, tmp);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += tmp[i];
  }
  return ScalarField(v.grid(), std::move(acc));
}

VectorField divergence(const SymTensorField& t) {
  const Grid& g = t.grid();
  SpectralWorkspace ws(g);
  std::vector<ScalarField> comps;
  std::vector<double> tmp(g.size());
  for (int j = 0; j < t.dim(); ++j) {
    std::vector<double> acc(g.size(), 0.0);
    for (int i = 0; i < t.dim(); ++i) {
      ws.derivative(t(i, j).values(), i, tmp);
      for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += tmp[p];
    }
    comps.emplace_back(g, std::move(acc));
  }
  return VectorField(std::move(comps));
}

ScalarField inv_helmholtz(const ScalarField& f, double c) {
  if (!(c > 0.0)) throw DomainError("inv_helmholtz: shift must be positive");
  SpectralWorkspace ws(f.grid());
  std::vector<double> out(f.size());
  ws.inv_helmholtz(f.values(), c, out);
  return ScalarField(f.grid(), std::move(out));
}

double integrate(const ScalarField& f) {
  const auto v = f.values();
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  return sum / static_cast<double>(v.size()) * f.grid().volume();
}

double norm_inf(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

double norm_L2(const ScalarField& f) {
  double sum = 0.0;
  for (double x : f.values()) sum += x * x;
  return std::sqrt(sum / static_cast<double>(f.size()) * f.grid().volume());
}

double field_min(const ScalarField& f) { return *std::min_element(f.values().begin(), f.values().end()); }
double field_max(const ScalarField& f) { return *std::max_element(f.values().begin(), f.values().end()); }

double inner_product(const ScalarField& f, const ScalarField& g) {
  if (!(f.grid() == g.grid())) throw ConfigError("inner_product: fields on different grids");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * g[i];
  return sum / static_cast<double>(f.size()) * f.grid().volume();
}

}  // namespace lichnerowicz
