// grid.hpp -- Fourier representation on the periodic box [-L*pi/2, L*pi/2]^d:
// transforms (FFTW), spectral differentiation, 2/3 dealiasing, Leray
// projection and the Stokes-mode Galerkin truncation.
//
// Conventions: real fields are channel-major, row-major in space (last axis
// fastest). Spectral fields use the real-to-complex half-spectrum layout
// (last axis 0..n/2), normalized so coefficients are the Fourier coefficients
// of exp(i k.x) with k_j = 2 j / Lambda.
#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

namespace nmq {

class Grid {
 public:
  Grid(int dim, int n, double Lambda);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double lambda() const { return Lambda_; }

  std::size_t npoints() const { return npoints_; }
  std::size_t nspec() const { return nspec_; }
  double volume() const { return volume_; }
  double dx() const { return boxlen_ / n_; }
  double boxlen() const { return boxlen_; }  // Lambda * pi
  /// physical wavenumber of integer mode index j
  double kwave(int j) const { return 2.0 * j / Lambda_; }
  /// signed mode index of axis position i
  int jof(int i) const { return i <= n_ / 2 ? i : i - n_; }

  /// decode spectral linear index into signed mode indices j[0..dim)
  void decode(std::size_t idx, int j[3]) const;

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && Lambda_ == o.Lambda_;
  }

 private:
  int dim_, n_;
  double Lambda_, boxlen_, volume_;
  std::size_t npoints_, nspec_;
};

struct RealField {
  const Grid* grid = nullptr;
  int channels = 0;
  std::vector<double> v;

  RealField() = default;
  RealField(const Grid& g, int ch)
      : grid(&g), channels(ch), v(static_cast<std::size_t>(ch) * g.npoints(), 0.0) {}
  double* ch(int c) { return v.data() + static_cast<std::size_t>(c) * grid->npoints(); }
  const double* ch(int c) const {
    return v.data() + static_cast<std::size_t>(c) * grid->npoints();
  }
};

struct SpecField {
  const Grid* grid = nullptr;
  int channels = 0;
  std::vector<std::complex<double>> v;

  SpecField() = default;
  SpecField(const Grid& g, int ch)
      : grid(&g), channels(ch), v(static_cast<std::size_t>(ch) * g.nspec()) {}
  std::complex<double>* ch(int c) {
    return v.data() + static_cast<std::size_t>(c) * grid->nspec();
  }
  const std::complex<double>* ch(int c) const {
    return v.data() + static_cast<std::size_t>(c) * grid->nspec();
  }
};

/// FFTW plan pair for one grid; forward normalizes by n^-d. Not thread-safe
/// (single owner per thread intended).
class Transformer {
 public:
  explicit Transformer(const Grid& g);
  ~Transformer();
  Transformer(const Transformer&) = delete;
  Transformer& operator=(const Transformer&) = delete;

  const Grid& grid() const { return grid_; }
  void forward(const RealField& in, SpecField& out) const;
  void inverse(const SpecField& in, RealField& out) const;  // input preserved

 private:
  Grid grid_;
  void* fwd_ = nullptr;  // fftw_plan
  void* inv_ = nullptr;
  double* rbuf_ = nullptr;
  void* cbuf_ = nullptr;  // fftw_complex*
};

/// Coefficient-wise (i k_axis)^order; Nyquist modes zeroed for odd orders.
void derivative(const SpecField& f, int axis, int order, SpecField& out);
SpecField derivative(const SpecField& f, int axis, int order);

/// Per-mode I - k k^T/|k|^2 on a d-channel velocity; k = 0 untouched.
void leray_project(SpecField& u);

/// Zero every mode with any |j| > n/3 (2/3 rule).
void dealias(SpecField& f);

/// Keep the M lowest Stokes modes: +-wavevector orbits ordered by
/// (|j|^2, lex of canonical representative), all polarizations, k=0 kept.
/// M = 0 means no truncation.
std::vector<std::uint8_t> galerkin_mask(const Grid& g, int M);
void galerkin_truncate(SpecField& u, const std::vector<std::uint8_t>& mask);

/// Parseval L2 norms and inner products: integral over the box.
double l2norm2(const SpecField& f);                       // sum over channels
double l2inner(const SpecField& a, const SpecField& b);   // sum over channels
double l2norm2(const RealField& f);                       // grid quadrature
double integral(const RealField& f, int ch);
double mean(const RealField& f, int ch);

}  // namespace nmq
