#pragma once

// Discrete Fourier transform on the pattern P(M): a dense reference matrix
// and a fast transform that factors through the Smith form of M.

#include "tihom/lattice.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tihom {

using cplx = std::complex<double>;

/// Values a_y indexed by the pattern ordering of P(M).
using PatternSamples = std::vector<cplx>;
/// Values \hat a_h indexed by the frequency ordering of G(M^T).
using FrequencySamples = std::vector<cplx>;

/// Unnormalised complex DFT of a fixed length.
///
/// Mixed radix (4, 2, 3, 5 and generic small primes); lengths with a prime
/// factor above kBluesteinThreshold go through Bluestein's chirp-z
/// convolution on a power-of-two grid.
class Fft1d {
 public:
  static constexpr std::size_t kBluesteinThreshold = 61;

  explicit Fft1d(std::size_t n);
  ~Fft1d();
  Fft1d(Fft1d&&) noexcept;
  Fft1d& operator=(Fft1d&&) noexcept;

  std::size_t size() const { return n_; }

  /// In place, X_k = sum_j x_j exp(-2 pi i jk / n).
  void forward(cplx* data) const;
  /// In place, x_j = sum_k X_k exp(+2 pi i jk / n).
  void inverse(cplx* data) const;

  std::string describe() const;

 private:
  void transform(cplx* data) const;
  void work(cplx* out, const cplx* in, std::size_t fstride, const std::size_t* factors) const;
  void butterfly2(cplx* out, std::size_t fstride, std::size_t m) const;
  void butterfly4(cplx* out, std::size_t fstride, std::size_t m) const;
  void butterfly_generic(cplx* out, std::size_t fstride, std::size_t m, std::size_t p) const;

  std::size_t n_ = 0;
  std::vector<std::size_t> factors_;  // (radix, remaining length) pairs
  std::vector<cplx> twiddles_;

  struct Bluestein;
  std::unique_ptr<Bluestein> bluestein_;
};

/// Unitary transform a -> F(M) a with F(M) as in fourier_matrix().
///
/// The group Z^d / M^T Z^d is split into cyclic factors of orders d_i by the
/// Smith form, which turns the lattice DFT into a separable d-dimensional
/// transform of shape (d_1, ..., d_d) over Smith coordinates.
class PatternFft {
 public:
  explicit PatternFft(const PatternMatrix& M);

  const PatternMatrix& lattice() const { return M_; }
  std::size_t size() const { return static_cast<std::size_t>(M_.size()); }

  void forward(std::span<const cplx> in, std::span<cplx> out) const;
  void inverse(std::span<const cplx> in, std::span<cplx> out) const;
  /// In-place variants.
  void forward(std::span<cplx> data) const;
  void inverse(std::span<cplx> data) const;

  std::string describe() const;

 private:
  void separable(std::span<cplx> data, bool inverse) const;

  PatternMatrix M_;
  std::vector<Fft1d> axes_;
};

/// Dense m x m Fourier matrix, rows h in G(M^T), columns y in P(M).
/// Reference and test scale only: m <= 4096.
Eigen::MatrixXcd fourier_matrix(const PatternMatrix& M);

FrequencySamples fft(const PatternMatrix& M, std::span<const cplx> a);
PatternSamples ifft(const PatternMatrix& M, std::span<const cplx> ahat);

}  // namespace tihom
