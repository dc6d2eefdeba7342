#include "nmq/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "nmq/errors.hpp"
#include "nmq/kernels.hpp"

namespace nmq {

namespace {
constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid::Grid(int dim, int n, double Lambda) : dim_(dim), n_(n), Lambda_(Lambda) {
  if (dim != 2 && dim != 3) throw ValidationError("grid dim must be 2 or 3");
  if (!is_pow2(n) || n < 8) throw ValidationError("grid n must be a power of two >= 8");
  if (!(Lambda > 0)) throw ValidationError("Lambda must be positive");
  boxlen_ = Lambda * kPi;
  volume_ = std::pow(boxlen_, dim);
  npoints_ = 1;
  for (int d = 0; d < dim; ++d) npoints_ *= n;
  nspec_ = npoints_ / n * (n / 2 + 1);
}

void Grid::decode(std::size_t idx, int j[3]) const {
  const int nh = n_ / 2 + 1;
  if (dim_ == 2) {
    j[0] = jof(static_cast<int>(idx / nh));
    j[1] = static_cast<int>(idx % nh);
    j[2] = 0;
  } else {
    j[2] = static_cast<int>(idx % nh);
    const std::size_t r = idx / nh;
    j[1] = jof(static_cast<int>(r % n_));
    j[0] = jof(static_cast<int>(r / n_));
  }
}

Transformer::Transformer(const Grid& g) : grid_(g) {
  const int n = g.n();
  rbuf_ = fftw_alloc_real(g.npoints());
  auto* cb = fftw_alloc_complex(g.nspec());
  cbuf_ = cb;
  if (g.dim() == 2) {
    fwd_ = fftw_plan_dft_r2c_2d(n, n, rbuf_, cb, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_2d(n, n, cb, rbuf_, FFTW_ESTIMATE);
  } else {
    fwd_ = fftw_plan_dft_r2c_3d(n, n, n, rbuf_, cb, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_3d(n, n, n, cb, rbuf_, FFTW_ESTIMATE);
  }
}

Transformer::~Transformer() {
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

void Transformer::forward(const RealField& in, SpecField& out) const {
  if (!(*in.grid == grid_)) throw GridMismatch("forward: field grid differs");
  if (out.grid == nullptr || !(*out.grid == grid_) || out.channels != in.channels)
    out = SpecField(grid_, in.channels);
  const double scale = 1.0 / static_cast<double>(grid_.npoints());
  auto* cb = static_cast<fftw_complex*>(cbuf_);
  for (int c = 0; c < in.channels; ++c) {
    std::memcpy(rbuf_, in.ch(c), grid_.npoints() * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(fwd_));
    auto* dst = out.ch(c);
    for (std::size_t i = 0; i < grid_.nspec(); ++i)
      dst[i] = std::complex<double>(cb[i][0] * scale, cb[i][1] * scale);
  }
}

void Transformer::inverse(const SpecField& in, RealField& out) const {
  if (!(*in.grid == grid_)) throw GridMismatch("inverse: field grid differs");
  if (out.grid == nullptr || !(*out.grid == grid_) || out.channels != in.channels)
    out = RealField(grid_, in.channels);
  auto* cb = static_cast<fftw_complex*>(cbuf_);
  for (int c = 0; c < in.channels; ++c) {
    const auto* src = in.ch(c);
    for (std::size_t i = 0; i < grid_.nspec(); ++i) {
      cb[i][0] = src[i].real();
      cb[i][1] = src[i].imag();
    }
    fftw_execute(static_cast<fftw_plan>(inv_));
    std::memcpy(out.ch(c), rbuf_, grid_.npoints() * sizeof(double));
  }
}

void derivative(const SpecField& f, int axis, int order, SpecField& out) {
  const Grid& g = *f.grid;
  if (out.grid == nullptr || !(*out.grid == g) || out.channels != f.channels)
    out = SpecField(g, f.channels);
  const int nh = g.n() / 2;
  int j[3];
  for (int c = 0; c < f.channels; ++c) {
    const auto* src = f.ch(c);
    auto* dst = out.ch(c);
    for (std::size_t i = 0; i < g.nspec(); ++i) {
      g.decode(i, j);
      const int ja = j[axis];
      if ((order & 1) && (ja == nh || ja == -nh)) {
        dst[i] = 0.0;  // odd derivative has no consistent Nyquist mode
        continue;
      }
      const double k = g.kwave(ja);
      std::complex<double> m;
      switch (order & 3) {
        case 0: m = {std::pow(k, static_cast<double>(order)), 0}; break;
        case 1: m = {0, std::pow(k, static_cast<double>(order))}; break;
        case 2: m = {-std::pow(k, static_cast<double>(order)), 0}; break;
        default: m = {0, -std::pow(k, static_cast<double>(order))}; break;
      }
      dst[i] = m * src[i];
    }
  }
}

SpecField derivative(const SpecField& f, int axis, int order) {
  SpecField out;
  derivative(f, axis, order, out);
  return out;
}

void leray_project(SpecField& u) {
  const Grid& g = *u.grid;
  const int d = g.dim();
  if (u.channels != d) throw GridMismatch("leray_project expects d channels");
  int j[3];
  for (std::size_t i = 0; i < g.nspec(); ++i) {
    g.decode(i, j);
    double k[3] = {g.kwave(j[0]), g.kwave(j[1]), g.kwave(j[2])};
    double k2 = 0;
    for (int a = 0; a < d; ++a) k2 += k[a] * k[a];
    if (k2 == 0) continue;  // mean flow preserved
    std::complex<double> kdotu{0, 0};
    for (int a = 0; a < d; ++a) kdotu += k[a] * u.ch(a)[i];
    kdotu /= k2;
    for (int a = 0; a < d; ++a) u.ch(a)[i] -= k[a] * kdotu;
  }
}

void dealias(SpecField& f) {
  const Grid& g = *f.grid;
  const int cut = g.n() / 3;
  int j[3];
  for (std::size_t i = 0; i < g.nspec(); ++i) {
    g.decode(i, j);
    bool kill = false;
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(j[a]) > cut) kill = true;
    if (!kill) continue;
    for (int c = 0; c < f.channels; ++c) f.ch(c)[i] = 0.0;
  }
}

namespace {

// Canonical +-orbit representative on the discrete torus: Nyquist components
// are self-paired (-n/2 == n/2 mod n), the remaining sign ambiguity is fixed
// by making the first non-Nyquist nonzero component positive.
std::array<int, 3> orbit_canon(const int j[3], int dim, int nh) {
  std::array<int, 3> a{j[0], j[1], j[2]};
  for (int q = 0; q < dim; ++q)
    if (a[q] == -nh) a[q] = nh;
  for (int q = 0; q < dim; ++q) {
    if (a[q] == nh || a[q] == 0) continue;
    if (a[q] < 0)
      for (int r = 0; r < dim; ++r)
        if (a[r] != nh) a[r] = -a[r];
    break;
  }
  return a;
}

}  // namespace

std::vector<std::uint8_t> galerkin_mask(const Grid& g, int M) {
  std::vector<std::uint8_t> keep(g.nspec(), 1);
  if (M <= 0) return keep;
  const int nh = g.n() / 2;

  struct Key {
    int a, b, c;
    bool operator<(const Key& o) const {
      if (a != o.a) return a < o.a;
      if (b != o.b) return b < o.b;
      return c < o.c;
    }
    bool operator==(const Key& o) const { return a == o.a && b == o.b && c == o.c; }
  };
  std::vector<Key> orbits;
  orbits.reserve(g.nspec());
  int j[3];
  for (std::size_t i = 0; i < g.nspec(); ++i) {
    g.decode(i, j);
    if (j[0] == 0 && j[1] == 0 && j[2] == 0) continue;
    const auto c = orbit_canon(j, g.dim(), nh);
    orbits.push_back({c[0], c[1], c[2]});
  }
  std::sort(orbits.begin(), orbits.end());
  orbits.erase(std::unique(orbits.begin(), orbits.end()), orbits.end());
  std::sort(orbits.begin(), orbits.end(), [](const Key& x, const Key& y) {
    const long long kx = static_cast<long long>(x.a) * x.a +
                         static_cast<long long>(x.b) * x.b +
                         static_cast<long long>(x.c) * x.c;
    const long long ky = static_cast<long long>(y.a) * y.a +
                         static_cast<long long>(y.b) * y.b +
                         static_cast<long long>(y.c) * y.c;
    if (kx != ky) return kx < ky;
    return x < y;
  });

  std::vector<Key> kept(orbits.begin(),
                        orbits.begin() + std::min<std::size_t>(M, orbits.size()));
  std::sort(kept.begin(), kept.end());

  for (std::size_t i = 0; i < g.nspec(); ++i) {
    g.decode(i, j);
    if (j[0] == 0 && j[1] == 0 && j[2] == 0) continue;
    const auto c = orbit_canon(j, g.dim(), nh);
    keep[i] = std::binary_search(kept.begin(), kept.end(), Key{c[0], c[1], c[2]}) ? 1 : 0;
  }
  return keep;
}

void galerkin_truncate(SpecField& u, const std::vector<std::uint8_t>& mask) {
  for (int c = 0; c < u.channels; ++c) {
    auto* p = u.ch(c);
    for (std::size_t i = 0; i < u.grid->nspec(); ++i)
      if (!mask[i]) p[i] = 0.0;
  }
}

namespace {

// Parseval weights for the half spectrum: interior k_last planes count twice
inline double spec_weight(const Grid& g, std::size_t idx) {
  const int nh = g.n() / 2 + 1;
  const int jlast = static_cast<int>(idx % nh);
  return (jlast == 0 || jlast == g.n() / 2) ? 1.0 : 2.0;
}

}  // namespace

double l2norm2(const SpecField& f) {
  const Grid& g = *f.grid;
  double s = 0;
  for (int c = 0; c < f.channels; ++c) {
    const auto* p = f.ch(c);
    for (std::size_t i = 0; i < g.nspec(); ++i) s += spec_weight(g, i) * std::norm(p[i]);
  }
  return s * g.volume();
}

double l2inner(const SpecField& a, const SpecField& b) {
  const Grid& g = *a.grid;
  double s = 0;
  for (int c = 0; c < a.channels; ++c) {
    const auto* pa = a.ch(c);
    const auto* pb = b.ch(c);
    for (std::size_t i = 0; i < g.nspec(); ++i)
      s += spec_weight(g, i) * (pa[i].real() * pb[i].real() + pa[i].imag() * pb[i].imag());
  }
  return s * g.volume();
}

double l2norm2(const RealField& f) {
  const Grid& g = *f.grid;
  const double w = g.volume() / static_cast<double>(g.npoints());
  double s = 0;
  for (int c = 0; c < f.channels; ++c) s += kernels::sumsq(g.npoints(), f.ch(c));
  return s * w;
}

double integral(const RealField& f, int ch) {
  const Grid& g = *f.grid;
  double s = 0;
  const auto* p = f.ch(ch);
  for (std::size_t i = 0; i < g.npoints(); ++i) s += p[i];
  return s * g.volume() / static_cast<double>(g.npoints());
}

double mean(const RealField& f, int ch) { return integral(f, ch) / f.grid->volume(); }

}  // namespace nmq
