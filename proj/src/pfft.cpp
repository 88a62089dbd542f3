#include "tihom/pfft.hpp"

#include "tihom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tihom {

namespace {

std::vector<std::size_t> prime_factors(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

/// exp(-2 pi i num / den) with num already reduced into [0, den).
cplx unit_root(std::size_t num, std::size_t den) {
  const double phase = -2.0 * std::numbers::pi * static_cast<double>(num) / static_cast<double>(den);
  return {std::cos(phase), std::sin(phase)};
}

}  // namespace

struct Fft1d::Bluestein {
  std::size_t padded = 0;
  std::vector<cplx> chirp;       // exp(-i pi k^2 / n)
  std::vector<cplx> kernel_hat;  // FFT of the conjugate chirp, length padded
  std::unique_ptr<Fft1d> inner;
};

Fft1d::Fft1d(std::size_t n) : n_(n) {
  if (n == 0) throw ShapeError("FFT length must be positive");
  const auto primes = prime_factors(n);
  const bool use_bluestein = !primes.empty() && primes.back() > kBluesteinThreshold;
  if (use_bluestein) {
    auto b = std::make_unique<Bluestein>();
    b->padded = 1;
    while (b->padded < 2 * n - 1) b->padded <<= 1;
    b->chirp.resize(n);
    const std::size_t two_n = 2 * n;
    for (std::size_t k = 0; k < n; ++k) {
      // k^2 mod 2n in exact integer arithmetic keeps the phase accurate
      const std::size_t k2 = (k % two_n) * (k % two_n) % two_n;
      b->chirp[k] = unit_root(k2, two_n);
    }
    b->inner = std::make_unique<Fft1d>(b->padded);
    b->kernel_hat.assign(b->padded, cplx{});
    b->kernel_hat[0] = std::conj(b->chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
      b->kernel_hat[k] = std::conj(b->chirp[k]);
      b->kernel_hat[b->padded - k] = std::conj(b->chirp[k]);
    }
    b->inner->forward(b->kernel_hat.data());
    bluestein_ = std::move(b);
    return;
  }

  twiddles_.resize(n);
  for (std::size_t k = 0; k < n; ++k) twiddles_[k] = unit_root(k, n);

  // radix 4 first, then the remaining primes in increasing order
  std::size_t rest = n;
  std::vector<std::size_t> radices;
  while (rest % 4 == 0) {
    radices.push_back(4);
    rest /= 4;
  }
  for (std::size_t p : prime_factors(rest)) radices.push_back(p);
  rest = n;
  for (std::size_t p : radices) {
    rest /= p;
    factors_.push_back(p);
    factors_.push_back(rest);
  }
}

Fft1d::~Fft1d() = default;
Fft1d::Fft1d(Fft1d&&) noexcept = default;
Fft1d& Fft1d::operator=(Fft1d&&) noexcept = default;

void Fft1d::forward(cplx* data) const { transform(data); }

void Fft1d::inverse(cplx* data) const {
  for (std::size_t i = 0; i < n_; ++i) data[i] = std::conj(data[i]);
  transform(data);
  for (std::size_t i = 0; i < n_; ++i) data[i] = std::conj(data[i]);
}

void Fft1d::transform(cplx* data) const {
  if (n_ == 1) return;
  if (bluestein_) {
    const auto& b = *bluestein_;
    std::vector<cplx> work(b.padded, cplx{});
    for (std::size_t k = 0; k < n_; ++k) work[k] = data[k] * b.chirp[k];
    b.inner->forward(work.data());
    for (std::size_t k = 0; k < b.padded; ++k) work[k] *= b.kernel_hat[k];
    b.inner->inverse(work.data());
    const double scale = 1.0 / static_cast<double>(b.padded);
    for (std::size_t k = 0; k < n_; ++k) data[k] = work[k] * b.chirp[k] * scale;
    return;
  }
  std::vector<cplx> in(data, data + n_);
  work(data, in.data(), 1, factors_.data());
}

void Fft1d::work(cplx* out, const cplx* in, std::size_t fstride, const std::size_t* factors) const {
  const std::size_t p = factors[0];
  const std::size_t m = factors[1];
  cplx* const begin = out;
  cplx* const end = out + p * m;
  if (m == 1) {
    do {
      *out = *in;
      in += fstride;
    } while (++out != end);
  } else {
    do {
      work(out, in, fstride * p, factors + 2);
      in += fstride;
    } while ((out += m) != end);
  }
  out = begin;
  switch (p) {
    case 2:
      butterfly2(out, fstride, m);
      break;
    case 4:
      butterfly4(out, fstride, m);
      break;
    default:
      butterfly_generic(out, fstride, m, p);
  }
}

void Fft1d::butterfly2(cplx* out, std::size_t fstride, std::size_t m) const {
  for (std::size_t k = 0; k < m; ++k) {
    const cplx t = out[k + m] * twiddles_[k * fstride];
    out[k + m] = out[k] - t;
    out[k] += t;
  }
}

void Fft1d::butterfly4(cplx* out, std::size_t fstride, std::size_t m) const {
  for (std::size_t k = 0; k < m; ++k) {
    const cplx s0 = out[k + m] * twiddles_[k * fstride];
    const cplx s1 = out[k + 2 * m] * twiddles_[2 * k * fstride];
    const cplx s2 = out[k + 3 * m] * twiddles_[3 * k * fstride];
    const cplx s5 = out[k] - s1;
    out[k] += s1;
    const cplx s3 = s0 + s2;
    const cplx s4 = s0 - s2;
    out[k + 2 * m] = out[k] - s3;
    out[k] += s3;
    out[k + m] = {s5.real() + s4.imag(), s5.imag() - s4.real()};
    out[k + 3 * m] = {s5.real() - s4.imag(), s5.imag() + s4.real()};
  }
}

void Fft1d::butterfly_generic(cplx* out, std::size_t fstride, std::size_t m, std::size_t p) const {
  std::vector<cplx> scratch(p);
  for (std::size_t u = 0; u < m; ++u) {
    std::size_t k = u;
    for (std::size_t q = 0; q < p; ++q, k += m) scratch[q] = out[k];
    k = u;
    for (std::size_t q1 = 0; q1 < p; ++q1, k += m) {
      std::size_t tw = 0;
      cplx acc = scratch[0];
      for (std::size_t q = 1; q < p; ++q) {
        tw += fstride * k;
        tw %= n_;
        acc += scratch[q] * twiddles_[tw];
      }
      out[k] = acc;
    }
  }
}

std::string Fft1d::describe() const {
  std::ostringstream os;
  if (bluestein_) {
    os << "bluestein(" << n_ << " via " << bluestein_->padded << ")";
  } else if (n_ == 1) {
    os << "identity";
  } else {
    os << "radix ";
    for (std::size_t i = 0; i < factors_.size(); i += 2) os << (i ? "x" : "") << factors_[i];
  }
  return os.str();
}

PatternFft::PatternFft(const PatternMatrix& M) : M_(M) {
  for (Index i = 0; i < M_.dim(); ++i) axes_.emplace_back(static_cast<std::size_t>(M_.factors()(i)));
}

void PatternFft::separable(std::span<cplx> data, bool inverse) const {
  if (data.size() != size()) throw ShapeError("sample length does not match |det M|");
  const std::size_t total = size();
  std::size_t stride = total;
  std::vector<cplx> line;
  for (std::size_t axis = 0; axis < axes_.size(); ++axis) {
    const std::size_t len = axes_[axis].size();
    stride /= len;
    if (len == 1) continue;
    line.resize(len);
    const std::size_t block = len * stride;
    for (std::size_t outer = 0; outer < total; outer += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        cplx* base = data.data() + outer + inner;
        for (std::size_t t = 0; t < len; ++t) line[t] = base[t * stride];
        if (inverse) {
          axes_[axis].inverse(line.data());
        } else {
          axes_[axis].forward(line.data());
        }
        for (std::size_t t = 0; t < len; ++t) base[t * stride] = line[t];
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(total));
  for (auto& v : data) v *= scale;
}

void PatternFft::forward(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != size() || out.size() != size()) {
    throw ShapeError("sample length does not match |det M|");
  }
  std::copy(in.begin(), in.end(), out.begin());
  separable(out, false);
}

void PatternFft::inverse(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != size() || out.size() != size()) {
    throw ShapeError("sample length does not match |det M|");
  }
  std::copy(in.begin(), in.end(), out.begin());
  separable(out, true);
}

void PatternFft::forward(std::span<cplx> data) const { separable(data, false); }
void PatternFft::inverse(std::span<cplx> data) const { separable(data, true); }

std::string PatternFft::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    os << (i ? "; " : "") << "axis " << i << ": n=" << axes_[i].size() << " " << axes_[i].describe();
  }
  return os.str();
}

Eigen::MatrixXcd fourier_matrix(const PatternMatrix& M) {
  constexpr Index kMaxSize = 4096;
  if (M.size() > kMaxSize) {
    throw CapacityError("fourier_matrix is limited to m <= 4096, got m = " + std::to_string(M.size()));
  }
  const auto m = static_cast<std::size_t>(M.size());
  const Pattern P = pattern(M);
  const GeneratingSet H = frequency_set(M);
  Eigen::MatrixXcd F(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      // h^T y = h^T n / m, reduced exactly mod m
      Index num = 0;
      for (Index i = 0; i < M.dim(); ++i) num = checked::add(num, checked::mul(H.freqs[r](i), P.numerators[c](i)));
      const auto reduced = static_cast<std::size_t>(checked::pos_mod(num, M.size()));
      F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = unit_root(reduced, m) * scale;
    }
  }
  return F;
}

FrequencySamples fft(const PatternMatrix& M, std::span<const cplx> a) {
  if (a.size() != static_cast<std::size_t>(M.size())) {
    throw ShapeError("fft: expected " + std::to_string(M.size()) + " samples, got " + std::to_string(a.size()));
  }
  FrequencySamples out(a.size());
  PatternFft(M).forward(a, out);
  return out;
}

PatternSamples ifft(const PatternMatrix& M, std::span<const cplx> ahat) {
  if (ahat.size() != static_cast<std::size_t>(M.size())) {
    throw ShapeError("ifft: expected " + std::to_string(M.size()) + " samples, got " + std::to_string(ahat.size()));
  }
  PatternSamples out(ahat.size());
  PatternFft(M).inverse(ahat, out);
  return out;
}

}  // namespace tihom
