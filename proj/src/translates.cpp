#include "tihom/translates.hpp"

#include "tihom/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tihom {

namespace {

constexpr double kPi = std::numbers::pi;

/// Integer samples g_N(n), n >= 0, of the centred cardinal B-spline of
/// order N (N-fold convolution of the unit box), by the Cox-de Boor
/// recurrence evaluated on the grid n + N/2.
std::vector<double> centred_bspline_samples(int order) {
  const int N = order;
  const double phase = (N % 2 == 0) ? 0.0 : 0.5;
  // values of M_k at x_i = i + phase, i = 0..N
  std::vector<double> cur(static_cast<std::size_t>(N) + 1, 0.0);
  cur[0] = 1.0;  // M_1 = 1 on [0, 1)
  for (int k = 2; k <= N; ++k) {
    std::vector<double> next(cur.size(), 0.0);
    for (int i = 0; i <= N; ++i) {
      const double x = i + phase;
      const double left = cur[static_cast<std::size_t>(i)];
      const double right = i > 0 ? cur[static_cast<std::size_t>(i - 1)] : 0.0;
      next[static_cast<std::size_t>(i)] = (x * left + (k - x) * right) / (k - 1);
    }
    cur = std::move(next);
  }
  // g_N(n) = M_N(n + N/2), and n + N/2 = i + phase
  std::vector<double> out;
  for (int n = 0;; ++n) {
    const double x = n + N / 2.0;
    const int i = static_cast<int>(std::lround(x - phase));
    if (i > N || x >= N) break;
    out.push_back(cur[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// sum_n g(n) exp(2 pi i n xi) for a symmetric sample table g(0), g(1), ...
double cosine_series(const std::vector<double>& g, double xi) {
  double s = g.empty() ? 0.0 : g[0];
  for (std::size_t n = 1; n < g.size(); ++n) {
    s += 2.0 * g[n] * std::cos(2.0 * kPi * static_cast<double>(n) * xi);
  }
  return s;
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

bool in_half_open_cell(Index num, Index m) {
  // num / m in [-1/2, 1/2)
  const Index twice = checked::mul(2, num);
  return twice >= -m && twice < m;
}

}  // namespace

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Dirichlet:
      return "dirichlet";
    case GeneratorKind::DlVP:
      return "dlvp";
    case GeneratorKind::BSpline:
      return "bspline";
  }
  return "unknown";
}

GeneratorSpec GeneratorSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("generator spec needs a string field \"kind\"");
  }
  const auto kind = j["kind"].get<std::string>();
  if (kind == "dirichlet") return dirichlet();
  if (kind == "dlvp") {
    if (!j.contains("alpha") || !j["alpha"].is_array()) {
      throw ConfigError("dlvp generator needs an \"alpha\" array");
    }
    return dlvp(j["alpha"].get<std::vector<double>>());
  }
  if (kind == "bspline") {
    if (!j.contains("order") || !j["order"].is_number_integer()) {
      throw ConfigError("bspline generator needs an integer \"order\"");
    }
    return bspline(j["order"].get<int>());
  }
  throw ConfigError("unknown generator kind '" + kind + "'");
}

nlohmann::json GeneratorSpec::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind);
  if (kind == GeneratorKind::DlVP) j["alpha"] = alpha;
  if (kind == GeneratorKind::BSpline) j["order"] = order;
  return j;
}

CoefficientRule::CoefficientRule(PatternMatrix M, GeneratorSpec spec)
    : M_(std::move(M)), spec_(std::move(spec)) {
  inv_sqrt_m_ = 1.0 / std::sqrt(static_cast<double>(M_.size()));
  switch (spec_.kind) {
    case GeneratorKind::Dirichlet:
      break;
    case GeneratorKind::DlVP:
      if (static_cast<int>(spec_.alpha.size()) != M_.dim()) {
        throw DomainError("dlvp alpha must have one entry per dimension");
      }
      for (double a : spec_.alpha) {
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("dlvp alpha must lie in [0, 1]^d");
      }
      break;
    case GeneratorKind::BSpline:
      if (spec_.order < 1 || spec_.order > kMaxOrder) {
        throw DomainError("bspline order must lie in [1, " + std::to_string(kMaxOrder) + "]");
      }
      bspline_p_ = centred_bspline_samples(spec_.order);
      bspline_2p_ = centred_bspline_samples(2 * spec_.order);
      break;
  }
}

double CoefficientRule::profile(double xi, std::size_t axis) const {
  switch (spec_.kind) {
    case GeneratorKind::Dirichlet:
      return (xi >= -0.5 && xi < 0.5) ? 1.0 : 0.0;
    case GeneratorKind::DlVP: {
      const double a = spec_.alpha[axis];
      if (a == 0.0) return (xi >= -0.5 && xi < 0.5) ? 1.0 : 0.0;
      const double r = std::abs(xi);
      if (r <= 0.5 * (1.0 - a)) return 1.0;
      if (r >= 0.5 * (1.0 + a)) return 0.0;
      return (0.5 * (1.0 + a) - r) / a;
    }
    case GeneratorKind::BSpline:
      return std::pow(sinc(kPi * xi), spec_.order);
  }
  return 0.0;
}

double CoefficientRule::periodised_profile(double xi, std::size_t axis, int power) const {
  switch (spec_.kind) {
    case GeneratorKind::Dirichlet:
      return 1.0;
    case GeneratorKind::DlVP: {
      if (spec_.alpha[axis] == 0.0) return 1.0;
      double s = 0.0;
      for (int z = -1; z <= 1; ++z) s += std::pow(profile(xi + z, axis), power);
      return s;
    }
    case GeneratorKind::BSpline:
      return cosine_series(power == 1 ? bspline_p_ : bspline_2p_, xi);
  }
  return 0.0;
}

double CoefficientRule::raw(const IVec& k) const {
  const IVec n = M_.inverse_transpose_numerator(k);
  const Index m = M_.size();
  double v = spec_.kind == GeneratorKind::Dirichlet ? 1.0 : inv_sqrt_m_;
  for (Index j = 0; j < n.size(); ++j) {
    const bool indicator = spec_.kind == GeneratorKind::Dirichlet ||
                           (spec_.kind == GeneratorKind::DlVP && spec_.alpha[static_cast<std::size_t>(j)] == 0.0);
    if (indicator) {
      // exact rational test of the half-open cell
      if (!in_half_open_cell(n(j), m)) return 0.0;
    } else {
      v *= profile(static_cast<double>(n(j)) / static_cast<double>(m), static_cast<std::size_t>(j));
      if (v == 0.0) return 0.0;
    }
  }
  return v;
}

double CoefficientRule::operator()(const IVec& k) const {
  const double v = raw(k);
  if (v == 0.0 || scale_.empty()) return v;
  return v * scale_[M_.frequency_index(k)];
}

std::optional<int> CoefficientRule::support_radius() const {
  switch (spec_.kind) {
    case GeneratorKind::Dirichlet:
      return 0;
    case GeneratorKind::DlVP:
      for (double a : spec_.alpha) {
        if (a > 0.0) return 1;
      }
      return 0;
    case GeneratorKind::BSpline:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<double> CoefficientRule::squared_bracket() const {
  const auto m = static_cast<std::size_t>(M_.size());
  const double prefactor = spec_.kind == GeneratorKind::Dirichlet ? static_cast<double>(m) : 1.0;
  std::vector<double> out(m);
  for (std::size_t l = 0; l < m; ++l) {
    const IVec n = M_.inverse_transpose_numerator(M_.frequency(l));
    double v = prefactor;
    for (Index j = 0; j < n.size(); ++j) {
      v *= periodised_profile(static_cast<double>(n(j)) / static_cast<double>(m), static_cast<std::size_t>(j), 2);
    }
    const double s = class_scale(l);
    out[l] = v * s * s;
  }
  return out;
}

std::vector<double> CoefficientRule::bracket() const {
  const auto m = static_cast<std::size_t>(M_.size());
  const double prefactor = spec_.kind == GeneratorKind::Dirichlet ? 1.0 : inv_sqrt_m_;
  std::vector<double> out(m);
  for (std::size_t l = 0; l < m; ++l) {
    const IVec n = M_.inverse_transpose_numerator(M_.frequency(l));
    double v = prefactor;
    for (Index j = 0; j < n.size(); ++j) {
      v *= periodised_profile(static_cast<double>(n(j)) / static_cast<double>(m), static_cast<std::size_t>(j), 1);
    }
    out[l] = v * class_scale(l);
  }
  return out;
}

double CoefficientRule::tail_bound(int radius) const {
  if (const auto support = support_radius()) return radius >= *support ? 0.0 : 1.0;
  if (radius < 1) return 1.0;
  // 1-d tail: 2 sum_{z > Z} (pi (z - 1/2))^{-2p} <= 2 pi^{-2p} (Z - 1/2)^{1-2p} / (2p - 1)
  const int two_p = 2 * spec_.order;
  const double tail_1d =
      2.0 * std::pow(kPi, -two_p) * std::pow(radius - 0.5, 1 - two_p) / (two_p - 1);
  // normalised by the smallest per-axis class mass, attained at xi = 1/2
  const double min_mass = cosine_series(bspline_2p_, 0.5);
  return M_.dim() * tail_1d / std::pow(min_mass, M_.dim());
}

int CoefficientRule::default_radius(double tol, long max_terms) const {
  if (const auto support = support_radius()) return *support;
  int radius = 1;
  for (;;) {
    const long next_side = 2L * (radius + 1) + 1;
    long next_terms = 1;
    for (int i = 0; i < M_.dim(); ++i) next_terms *= next_side;
    if (tail_bound(radius) < tol || next_terms > max_terms) return radius;
    ++radius;
  }
}

CoefficientRule dirichlet_rule(const PatternMatrix& M) { return {M, GeneratorSpec::dirichlet()}; }

CoefficientRule dlvp_rule(const PatternMatrix& M, const std::vector<double>& alpha) {
  return {M, GeneratorSpec::dlvp(alpha)};
}

CoefficientRule bspline_rule(const PatternMatrix& M, int order) { return {M, GeneratorSpec::bspline(order)}; }

CoefficientRule make_rule(const PatternMatrix& M, const GeneratorSpec& spec) { return {M, spec}; }

namespace {

template <class Fn>
void for_each_in_box(int d, int radius, Fn&& fn) {
  IVec z = IVec::Constant(d, -radius);
  for (;;) {
    fn(z);
    int i = d - 1;
    while (i >= 0 && z(i) == radius) {
      z(i) = -radius;
      --i;
    }
    if (i < 0) return;
    ++z(i);
  }
}

}  // namespace

cplx bracket_sum(const std::function<cplx(const IVec&)>& a, const PatternMatrix& M, const IVec& h, int radius) {
  if (radius < 0) throw DomainError("bracket sum radius must be non-negative");
  if (h.size() != M.dim()) throw ShapeError("frequency dimension does not match pattern matrix");
  const IMat Mt = M.entries().transpose();
  cplx sum{};
  for_each_in_box(M.dim(), radius, [&](const IVec& z) {
    IVec k = h + checked::mat_vec(Mt, z);
    sum += a(k);
  });
  return sum;
}

BracketTable squared_bracket_table(const CoefficientRule& rule, int radius) {
  const PatternMatrix& M = rule.lattice();
  const auto m = static_cast<std::size_t>(M.size());
  BracketTable table;
  table.radius = radius;
  table.truncation_error = rule.tail_bound(radius);
  table.values.resize(m);
  const double md = static_cast<double>(m);
  for (std::size_t l = 0; l < m; ++l) {
    const cplx s = bracket_sum(
        [&](const IVec& k) {
          const double c = rule(k);
          return cplx(c * c);
        },
        M, M.frequency(l), radius);
    table.values[l] = md * s.real();
  }
  return table;
}

CoefficientRule orthonormalize(const CoefficientRule& rule) {
  const std::vector<double> mass = rule.squared_bracket();
  CoefficientRule out = rule;
  out.scale_.assign(mass.size(), 1.0);
  for (std::size_t l = 0; l < mass.size(); ++l) {
    if (!(mass[l] > 1e-300) || !std::isfinite(mass[l])) {
      std::ostringstream os;
      os << "generator is degenerate: m [|c|^2]_h = " << mass[l] << " at h = ("
         << rule.lattice().frequency(l).transpose() << ")";
      throw DegenerateGeneratorError(os.str());
    }
    out.scale_[l] = rule.class_scale(l) / std::sqrt(mass[l]);
  }
  out.orthonormal_ = true;
  return out;
}

FrequencySamples fundamental_interpolant(const CoefficientRule& rule) {
  const std::vector<double> b = rule.bracket();
  const double m = static_cast<double>(rule.lattice().size());
  double largest = 0.0;
  for (double v : b) largest = std::max(largest, std::abs(v));
  FrequencySamples out(b.size());
  for (std::size_t l = 0; l < b.size(); ++l) {
    if (!(std::abs(b[l]) > 1e-14 * largest)) {
      std::ostringstream os;
      os << "interpolation is degenerate: [c]_h vanishes at h = (" << rule.lattice().frequency(l).transpose()
         << ")";
      throw DegenerateGeneratorError(os.str());
    }
    out[l] = 1.0 / (m * b[l]);
  }
  return out;
}

cplx synthesize(const CoefficientRule& rule, std::span<const cplx> coeffs, const RVec& x, int radius) {
  const PatternMatrix& M = rule.lattice();
  if (coeffs.size() != static_cast<std::size_t>(M.size())) throw ShapeError("synthesize: coefficient length != m");
  if (x.size() != M.dim()) throw ShapeError("synthesize: point dimension mismatch");
  cplx g{};
  for (std::size_t l = 0; l < coeffs.size(); ++l) {
    if (coeffs[l] == cplx{}) continue;
    g += coeffs[l] * bracket_sum(
                         [&](const IVec& k) {
                           const double c = rule(k);
                           if (c == 0.0) return cplx{};
                           const double phase = k.cast<double>().dot(x);
                           return c * cplx(std::cos(phase), std::sin(phase));
                         },
                         M, M.frequency(l), radius);
  }
  return g;
}

PatternSamples nodal_values(const CoefficientRule& rule, std::span<const cplx> coeffs) {
  const PatternMatrix& M = rule.lattice();
  if (coeffs.size() != static_cast<std::size_t>(M.size())) throw ShapeError("nodal_values: coefficient length != m");
  const std::vector<double> b = rule.bracket();
  PatternSamples weighted(coeffs.size());
  for (std::size_t l = 0; l < coeffs.size(); ++l) weighted[l] = coeffs[l] * b[l];
  PatternSamples out = ifft(M, weighted);
  const double root_m = std::sqrt(static_cast<double>(M.size()));
  for (auto& v : out) v *= root_m;
  return out;
}

}  // namespace tihom
