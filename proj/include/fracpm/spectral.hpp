#pragma once

// Periodic pseudo-spectral fields on [0, L)^N and the fractional operators
// used by the model. Transforms are unnormalised FFTW r2c/c2r pairs; the
// backward transform divides by n^N.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>
#include <vector>

#include "fracpm/errors.hpp"
#include "fracpm/params.hpp"

namespace fracpm {

using Complex = std::complex<double>;

struct Domain {
  int dim = 2;
  std::size_t n = 64;
  double length = 2.0 * std::numbers::pi;

  void validate() const {
    if (dim != 2 && dim != 3) throw DomainError("Domain: dimension must be 2 or 3");
    if (n < 8 || n % 2 != 0) throw DomainError("Domain: points per axis must be even and >= 8");
    if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("Domain: box length must be positive");
  }
  std::size_t size() const { return dim == 2 ? n * n : n * n * n; }
  std::size_t spectral_size() const { return size() / n * (n / 2 + 1); }
  double dx() const { return length / static_cast<double>(n); }
  double cell_volume() const { return std::pow(dx(), dim); }
  double volume() const { return std::pow(length, dim); }
  double wavenumber_unit() const { return 2.0 * std::numbers::pi / length; }
  bool operator==(const Domain& o) const { return dim == o.dim && n == o.n && length == o.length; }
};

inline void require_same(const Domain& a, const Domain& b) {
  if (!(a == b)) throw UsageError("fields live on incompatible domains");
}

class GridField {
 public:
  GridField() = default;
  explicit GridField(const Domain& d, double fill = 0.0) : domain_(d), values_(d.size(), fill) { d.validate(); }
  GridField(const Domain& d, std::vector<double> v) : domain_(d), values_(std::move(v)) {
    d.validate();
    if (values_.size() != d.size()) throw UsageError("GridField: value count does not match the domain");
  }

  // f(x) with x the cell-corner coordinates (i * dx per axis).
  static GridField sample(const Domain& d, const std::function<double(const std::array<double, 3>&)>& f) {
    GridField g(d);
    const double h = d.dx();
    std::size_t idx = 0;
    const std::size_t nz = d.dim == 3 ? d.n : 1;
    for (std::size_t i = 0; i < d.n; ++i)
      for (std::size_t j = 0; j < d.n; ++j)
        for (std::size_t k = 0; k < nz; ++k) g.values_[idx++] = f({i * h, j * h, d.dim == 3 ? k * h : 0.0});
    return g;
  }

  const Domain& domain() const { return domain_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }
  double sum() const {
    long double s = 0.0L;
    for (double v : values_) s += v;
    return static_cast<double>(s);
  }
  // Σ u Δx^N.
  double integral() const { return sum() * domain_.cell_volume(); }

  GridField& operator+=(const GridField& o) {
    require_same(domain_, o.domain_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  GridField& operator-=(const GridField& o) {
    require_same(domain_, o.domain_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  GridField& operator*=(double c) {
    for (double& v : values_) v *= c;
    return *this;
  }
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(double c, GridField a) { return a *= c; }

 private:
  Domain domain_;
  std::vector<double> values_;
};

// Half spectrum (last axis 0..n/2), row-major.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const Domain& d) : domain_(d), coeffs_(d.spectral_size(), Complex(0.0, 0.0)) {}
  SpectralField(const Domain& d, std::vector<Complex> c) : domain_(d), coeffs_(std::move(c)) {
    if (coeffs_.size() != d.spectral_size()) throw UsageError("SpectralField: coefficient count mismatch");
  }
  const Domain& domain() const { return domain_; }
  std::size_t size() const { return coeffs_.size(); }
  const std::vector<Complex>& coeffs() const { return coeffs_; }
  std::vector<Complex>& coeffs() { return coeffs_; }
  Complex operator[](std::size_t i) const { return coeffs_[i]; }
  Complex& operator[](std::size_t i) { return coeffs_[i]; }

 private:
  Domain domain_;
  std::vector<Complex> coeffs_;
};

// Per-mode data for one domain: wavevectors, |ξ|², Parseval multiplicities.
struct ModeTable {
  std::vector<double> k2;
  std::array<std::vector<double>, 3> xi;
  std::array<std::vector<unsigned char>, 3> nyquist;  // mode sits on the Nyquist plane of axis d
  std::vector<double> multiplicity;                  // 1 or 2 (conjugate partner omitted)
  std::vector<unsigned char> dealias_keep;           // 2/3 rule

  explicit ModeTable(const Domain& d) {
    const std::size_t ns = d.spectral_size(), n = d.n, nh = n / 2 + 1;
    k2.resize(ns);
    multiplicity.resize(ns);
    dealias_keep.resize(ns);
    for (int a = 0; a < d.dim; ++a) {
      xi[a].resize(ns);
      nyquist[a].resize(ns);
    }
    const double unit = d.wavenumber_unit();
    const auto signed_index = [n](std::size_t i) { return i <= n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n); };
    const long cut = static_cast<long>(n / 3);
    const std::size_t n_outer = d.dim == 3 ? n : 1;
    std::size_t idx = 0;
    for (std::size_t i0 = 0; i0 < n; ++i0)
      for (std::size_t i1 = 0; i1 < (d.dim == 3 ? n : nh); ++i1)
        for (std::size_t i2 = 0; i2 < (d.dim == 3 ? nh : n_outer); ++i2) {
          std::array<long, 3> kk{signed_index(i0), 0, 0};
          std::array<std::size_t, 3> raw{i0, i1, 0};
          if (d.dim == 3) {
            kk[1] = signed_index(i1);
            kk[2] = static_cast<long>(i2);
            raw[2] = i2;
          } else {
            kk[1] = static_cast<long>(i1);
          }
          double s2 = 0.0;
          bool keep = true;
          for (int a = 0; a < d.dim; ++a) {
            const double x = unit * static_cast<double>(kk[a]);
            xi[a][idx] = x;
            s2 += x * x;
            nyquist[a][idx] = raw[a] == n / 2;
            if (std::labs(kk[a]) > cut) keep = false;
          }
          const std::size_t last = raw[d.dim - 1];
          multiplicity[idx] = (last == 0 || last == n / 2) ? 1.0 : 2.0;
          k2[idx] = s2;
          dealias_keep[idx] = keep;
          ++idx;
        }
  }
};

namespace detail {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    if (p) fftw_destroy_plan(p);
  }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

inline std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

// Cached FFT plans and mode data for one domain; shared read-only.
class SpectralContext {
 public:
  explicit SpectralContext(const Domain& d) : domain_(d), modes_(d) {
    d.validate();
    const int dims[3] = {static_cast<int>(d.n), static_cast<int>(d.n), static_cast<int>(d.n)};
    std::lock_guard<std::mutex> lock(detail::fftw_mutex());
    double* r = fftw_alloc_real(d.size());
    fftw_complex* c = fftw_alloc_complex(d.spectral_size());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_.reset(fftw_plan_dft_r2c(d.dim, dims, r, c, flags));
    backward_.reset(fftw_plan_dft_c2r(d.dim, dims, c, r, flags));
    fftw_free(r);
    fftw_free(c);
    if (!forward_ || !backward_) throw NumericError("FFTW planning failed");
  }

  static std::shared_ptr<const SpectralContext> get(const Domain& d) {
    static std::mutex m;
    static std::map<std::tuple<int, std::size_t, double>, std::shared_ptr<const SpectralContext>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto key = std::make_tuple(d.dim, d.n, d.length);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto ctx = std::make_shared<const SpectralContext>(d);
    cache.emplace(key, ctx);
    return ctx;
  }

  const Domain& domain() const { return domain_; }
  const ModeTable& modes() const { return modes_; }

  void forward(const double* in, Complex* out) const {
    // r2c does not modify its input when planned out of place.
    fftw_execute_dft_r2c(forward_.get(), const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  // Destroys `in`; unnormalised.
  void backward(Complex* in, double* out) const {
    fftw_execute_dft_c2r(backward_.get(), reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  Domain domain_;
  ModeTable modes_;
  detail::PlanPtr forward_, backward_;
};

inline SpectralField to_spectral(const GridField& f) {
  auto ctx = SpectralContext::get(f.domain());
  SpectralField out(f.domain());
  ctx->forward(f.values().data(), out.coeffs().data());
  return out;
}

inline GridField to_grid(const SpectralField& f) {
  auto ctx = SpectralContext::get(f.domain());
  std::vector<Complex> tmp = f.coeffs();
  GridField out(f.domain());
  ctx->backward(tmp.data(), out.values().data());
  out *= 1.0 / static_cast<double>(f.domain().size());
  return out;
}

// Multiplies every coefficient by mult(mode index).
template <class F>
SpectralField apply_multiplier(const SpectralField& f, F&& mult) {
  SpectralField out(f.domain());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * mult(i);
  return out;
}

inline double frac_symbol(double k2, double sigma) {
  if (k2 == 0.0) return sigma == 0.0 ? 1.0 : 0.0;
  return std::pow(k2, sigma);
}

inline SpectralField frac_laplacian(const SpectralField& f, double sigma) {
  if (!(sigma > -1.0 && sigma <= 1.0)) throw DomainError("frac_laplacian: sigma must lie in (-1, 1]");
  const auto& k2 = SpectralContext::get(f.domain())->modes().k2;
  return apply_multiplier(f, [&](std::size_t i) { return frac_symbol(k2[i], sigma); });
}

// |ξ|^{2σ} f̂; the zero mode is dropped for σ < 0 (pressure defined modulo constants).
inline GridField frac_laplacian(const GridField& f, double sigma) { return to_grid(frac_laplacian(to_spectral(f), sigma)); }

// Spectral components iξ_d |ξ|^{-2s} f̂ (Nyquist planes of axis d zeroed).
inline std::vector<SpectralField> grad_inv_laplacian(const SpectralField& f, double s) {
  const auto& md = SpectralContext::get(f.domain())->modes();
  std::vector<SpectralField> out;
  for (int a = 0; a < f.domain().dim; ++a)
    out.push_back(apply_multiplier(f, [&](std::size_t i) {
      if (md.k2[i] == 0.0 || md.nyquist[a][i]) return Complex(0.0, 0.0);
      return Complex(0.0, md.xi[a][i] * std::pow(md.k2[i], -s));
    }));
  return out;
}

inline std::vector<GridField> grad_inv_laplacian(const GridField& f, double s) {
  std::vector<GridField> out;
  for (const auto& c : grad_inv_laplacian(to_spectral(f), s)) out.push_back(to_grid(c));
  return out;
}

// Σ_d iξ_d F̂_d.
inline SpectralField divergence(const std::vector<SpectralField>& comps) {
  if (comps.empty()) throw UsageError("divergence: no components");
  const Domain& d = comps.front().domain();
  if (static_cast<int>(comps.size()) != d.dim) throw UsageError("divergence: component count must equal dimension");
  const auto& md = SpectralContext::get(d)->modes();
  SpectralField out(d);
  for (int a = 0; a < d.dim; ++a) {
    require_same(d, comps[a].domain());
    for (std::size_t i = 0; i < out.size(); ++i)
      if (!md.nyquist[a][i]) out[i] += Complex(0.0, md.xi[a][i]) * comps[a][i];
  }
  return out;
}

inline GridField divergence(const std::vector<GridField>& comps) {
  std::vector<SpectralField> hat;
  for (const auto& c : comps) hat.push_back(to_spectral(c));
  return to_grid(divergence(hat));
}

inline void dealias(SpectralField& f) {
  const auto& keep = SpectralContext::get(f.domain())->modes().dealias_keep;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!keep[i]) f[i] = 0.0;
}

namespace detail {

// Smallest 2^a 3^b 5^c that is even and >= n.
inline std::size_t fft_friendly(std::size_t n) {
  for (std::size_t c = n + (n % 2);; c += 2) {
    std::size_t r = c;
    for (std::size_t f : {2u, 3u, 5u})
      while (r % f == 0) r /= f;
    if (r == 1) return c;
  }
}

// Re-embeds a spectrum whose modes satisfy |k_d| <= n/3 on a grid of a
// different resolution, keeping physical values unchanged.
inline SpectralField resample_spectrum(const SpectralField& f, const Domain& to) {
  const Domain& from = f.domain();
  SpectralField out(to);
  const long cut = static_cast<long>(std::min(from.n, to.n) / 3);
  const double scale = std::pow(static_cast<double>(to.n) / static_cast<double>(from.n), from.dim);
  const auto signed_index = [](std::size_t i, std::size_t n) {
    return i <= n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
  };
  const auto wrap = [](long k, std::size_t n) {
    return static_cast<std::size_t>(k >= 0 ? k : k + static_cast<long>(n));
  };
  const std::size_t nh_from = from.n / 2 + 1, nh_to = to.n / 2 + 1;
  if (from.dim == 2) {
    for (std::size_t i0 = 0; i0 < from.n; ++i0) {
      const long k0 = signed_index(i0, from.n);
      if (std::labs(k0) > cut) continue;
      for (long k1 = 0; k1 <= cut; ++k1)
        out[wrap(k0, to.n) * nh_to + static_cast<std::size_t>(k1)] =
            scale * f[i0 * nh_from + static_cast<std::size_t>(k1)];
    }
  } else {
    for (std::size_t i0 = 0; i0 < from.n; ++i0) {
      const long k0 = signed_index(i0, from.n);
      if (std::labs(k0) > cut) continue;
      for (std::size_t i1 = 0; i1 < from.n; ++i1) {
        const long k1 = signed_index(i1, from.n);
        if (std::labs(k1) > cut) continue;
        for (long k2 = 0; k2 <= cut; ++k2)
          out[(wrap(k0, to.n) * to.n + wrap(k1, to.n)) * nh_to + static_cast<std::size_t>(k2)] =
              scale * f[(i0 * from.n + i1) * nh_from + static_cast<std::size_t>(k2)];
      }
    }
  }
  return out;
}

}  // namespace detail

// Points per axis on which |u|^m ∇p is formed: for integer m the product of
// 2/3-truncated factors is then alias-free in the retained modes.
inline std::size_t flux_grid_points(std::size_t n, double m) {
  if (m <= 1.0) return n;
  return detail::fft_friendly(static_cast<std::size_t>(std::ceil((m + 2.0) * static_cast<double>(n) / 3.0)));
}

// Θ(u) = |u|^m ∇(-Δ)^{-s} u in spectral form. Both factors are built from
// the 2/3-truncated spectrum of u on a padded grid and the product is
// truncated again.
inline std::vector<SpectralField> nonlinear_flux_hat(const SpectralField& u_hat, const FracParams& p) {
  const Domain& d = u_hat.domain();
  const Domain big{d.dim, flux_grid_points(d.n, p.m), d.length};
  SpectralField ut = u_hat;
  dealias(ut);
  const SpectralField ub = big.n == d.n ? ut : detail::resample_spectrum(ut, big);
  const GridField u = to_grid(ub);
  std::vector<double> weight(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) weight[i] = std::pow(std::fabs(u[i]), p.m);
  std::vector<SpectralField> out;
  for (auto& g : grad_inv_laplacian(ub, p.s)) {
    GridField gf = to_grid(g);
    for (std::size_t i = 0; i < gf.size(); ++i) gf[i] *= weight[i];
    SpectralField h = to_spectral(gf);
    if (big.n != d.n) h = detail::resample_spectrum(h, d);
    dealias(h);
    out.push_back(std::move(h));
  }
  return out;
}

// max |û| over the outer quarter of the retained band (|k| in (3/4, 1]·k_c,
// k_c = (n/3)·2π/L) relative to max |û|; small values mean the field is
// resolved by the grid.
inline double spectral_tail_ratio(const SpectralField& f) {
  const auto& md = SpectralContext::get(f.domain())->modes();
  const double kc = static_cast<double>(f.domain().n / 3) * f.domain().wavenumber_unit();
  const double lo = 0.5625 * kc * kc, hi = kc * kc * (1.0 + 1e-12);
  double top = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = std::abs(f[i]);
    top = std::max(top, a);
    if (md.k2[i] > lo && md.k2[i] <= hi) tail = std::max(tail, a);
  }
  return top > 0.0 ? tail / top : 0.0;
}

inline std::vector<GridField> nonlinear_flux(const GridField& u, const FracParams& p) {
  std::vector<GridField> out;
  for (const auto& h : nonlinear_flux_hat(to_spectral(u), p)) out.push_back(to_grid(h));
  return out;
}

inline double lq_norm(const GridField& f, double q) {
  if (!(q >= 1.0)) throw DomainError("lq_norm: q must be >= 1");
  double mx = 0.0;
  for (double v : f.values()) mx = std::max(mx, std::fabs(v));
  if (std::isinf(q) || mx == 0.0) return mx;
  long double s = 0.0L;
  for (double v : f.values()) s += std::pow(static_cast<long double>(std::fabs(v) / mx), static_cast<long double>(q));
  return mx * std::pow(static_cast<double>(s) * f.domain().cell_volume(), 1.0 / q);
}

// (Σ |ξ|^{2σ} |f̂|²)^{1/2} with the normalisation of lq_norm(·, 2).
inline double hs_seminorm(const SpectralField& f, double sigma) {
  const Domain& d = f.domain();
  const auto& md = SpectralContext::get(d)->modes();
  long double s = 0.0L;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (md.k2[i] > 0.0) s += md.multiplicity[i] * std::pow(md.k2[i], sigma) * std::norm(f[i]);
  const double nn = static_cast<double>(d.size());
  return std::sqrt(static_cast<double>(s) * d.volume() / (nn * nn));
}

inline double hs_seminorm(const GridField& f, double sigma) {
  if (!(sigma >= 0.0 && sigma < 1.0)) throw DomainError("hs_seminorm: sigma must lie in [0, 1)");
  return hs_seminorm(to_spectral(f), sigma);
}

// sign(u)|u|^p.
inline GridField signed_power(const GridField& u, double p) {
  GridField out(u.domain());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::copysign(std::pow(std::fabs(u[i]), p), u[i]);
  return out;
}

// ‖|u|^{θ-1}u‖²_{Ḣ^{1-s}} with θ = (m+q)/2.
inline double energy_integrand(const GridField& u, double m, double q, double s) {
  const double theta = 0.5 * (m + q);
  const double h = hs_seminorm(signed_power(u, theta), 1.0 - s);
  return h * h;
}

struct SVResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const { return lhs - rhs; }
  double scale() const { return std::fabs(lhs) + std::fabs(rhs); }
};

// ∫|u|^{m+q-2}u (-Δ)^{1-s}u  versus  ((m+q-1)/θ²) ‖|u|^{θ-1}u‖²_{Ḣ^{1-s}}.
inline SVResidual stroock_varopoulos_terms(const GridField& u, double m, double q, double s) {
  if (!(q > 1.0)) throw DomainError("stroock_varopoulos_residual: q must exceed 1");
  const double theta = 0.5 * (m + q);
  const GridField lap = frac_laplacian(u, 1.0 - s);
  const GridField phi = signed_power(u, m + q - 1.0);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < u.size(); ++i) acc += static_cast<long double>(phi[i]) * lap[i];
  SVResidual r;
  r.lhs = static_cast<double>(acc) * u.domain().cell_volume();
  r.rhs = (m + q - 1.0) / (theta * theta) * energy_integrand(u, m, q, s);
  return r;
}

inline double stroock_varopoulos_residual(const GridField& u, double m, double q, double s) {
  return stroock_varopoulos_terms(u, m, q, s).residual();
}

// Sum of random Fourier modes with |k_d| <= kmax (integer wavenumbers),
// Gaussian coefficients; deterministic for a given engine state.
template <class Rng>
GridField random_bandlimited_field(const Domain& d, int kmax, Rng& rng, double amplitude = 1.0) {
  d.validate();
  if (kmax < 1 || static_cast<std::size_t>(kmax) >= d.n / 2) throw DomainError("random_bandlimited_field: bad band limit");
  const auto& md = SpectralContext::get(d)->modes();
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField f(d);
  const double unit = d.wavenumber_unit();
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool inside = true;
    for (int a = 0; a < d.dim; ++a)
      if (std::fabs(md.xi[a][i]) > kmax * unit * (1.0 + 1e-12)) inside = false;
    const double re = normal(rng), im = normal(rng);
    if (inside && i != 0) f[i] = Complex(re, im);
  }
  GridField g = to_grid(f);
  double mx = 0.0;
  for (double v : g.values()) mx = std::max(mx, std::fabs(v));
  if (mx > 0.0) g *= amplitude / mx;
  return g;
}

}  // namespace fracpm
