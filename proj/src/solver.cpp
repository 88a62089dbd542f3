#include "tihom/solver.hpp"

#include "tihom/errors.hpp"
#include "tihom/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace tihom {

namespace {

using Clock = std::chrono::steady_clock;

template <class T>
T pairwise(const T* x, std::size_t n) {
  if (n <= 64) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise(x, half) + pairwise(x + half, n - half);
}

double squared_norm(const StrainField& f) {
  std::vector<double> sq(static_cast<std::size_t>(f.size()));
  const cplx* data = f.data();
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(data[i]);
  return pairwise(sq.data(), sq.size());
}

cplx inner(const StrainField& a, const StrainField& b) {
  std::vector<cplx> prod(static_cast<std::size_t>(a.size()));
  const cplx* pa = a.data();
  const cplx* pb = b.data();
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = std::conj(pa[i]) * pb[i];
  return pairwise(prod.data(), prod.size());
}

struct Problem {
  std::size_t m;
  int D;
};

Problem check_inputs(const StiffnessField& C, const Tensor4& C0, const MandelVec& eps0, const GreenTable& G) {
  const std::size_t m = G.size();
  const auto D = static_cast<int>(G.reference.rows());
  if (m != static_cast<std::size_t>(G.lattice.size())) throw ShapeError("green table is incomplete");
  if (C.size() != m) {
    throw ShapeError("stiffness field has " + std::to_string(C.size()) + " nodes, pattern has " + std::to_string(m));
  }
  if (C0.rows() != D || C0.cols() != D) throw ShapeError("reference stiffness size does not match the green table");
  if (eps0.size() != D) throw ShapeError("loading has " + std::to_string(eps0.size()) + " Mandel components, expected " +
                                         std::to_string(D));
  if (!(C0 - G.reference).isZero(1e-12 * (1.0 + C0.cwiseAbs().maxCoeff()))) {
    throw ContractError("green table was built for a different reference stiffness");
  }
  for (const auto& c : C) {
    if (c.rows() != D || c.cols() != D) throw ShapeError("stiffness field entry has the wrong Mandel size");
  }
  return {m, D};
}

/// out_y = (C_y - shift) (E_y + eps0); shift may be empty.
StrainField stress_like(const StiffnessField& C, const Tensor4* shift, const StrainField* E, const MandelVec& eps0) {
  const std::size_t m = C.size();
  const auto D = static_cast<int>(eps0.size());
  StrainField out(static_cast<Eigen::Index>(m), D);
  parallel_for(m, [&](std::size_t y) {
    const auto row = static_cast<Eigen::Index>(y);
    for (int a = 0; a < D; ++a) {
      cplx s{};
      for (int b = 0; b < D; ++b) {
        const double c = shift ? C[y](a, b) - (*shift)(a, b) : C[y](a, b);
        const cplx e = E ? (*E)(row, b) + eps0(b) : cplx(eps0(b));
        s += c * e;
      }
      out(row, a) = s;
    }
  });
  return out;
}

/// out_y = C_y x_y.
StrainField apply_field(const StiffnessField& C, const StrainField& x) {
  const std::size_t m = C.size();
  const auto D = static_cast<int>(x.cols());
  StrainField out(x.rows(), x.cols());
  parallel_for(m, [&](std::size_t y) {
    const auto row = static_cast<Eigen::Index>(y);
    for (int a = 0; a < D; ++a) {
      cplx s{};
      for (int b = 0; b < D; ++b) s += C[y](a, b) * x(row, b);
      out(row, a) = s;
    }
  });
  return out;
}

StrainField apply_constant(const Tensor4& A, const StrainField& x) { return x * A.transpose().cast<cplx>(); }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void finish(SolveReport& report, const StiffnessField& C, const MandelVec& eps0, Clock::time_point start) {
  report.effective_action = effective_stiffness(C, report.strain, eps0);
  report.imag_norm = field_norm(report.strain.imag().cast<cplx>());
  report.residual = report.residual_history.empty() ? 0.0 : report.residual_history.back();
  report.wall_seconds = seconds_since(start);
}

}  // namespace

std::string to_string(Scheme scheme) {
  return scheme == Scheme::LsFixedPoint ? "ls_fixed_point" : "ve_krylov";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "ls_fixed_point" || name == "ls") return Scheme::LsFixedPoint;
  if (name == "ve_krylov" || name == "ve") return Scheme::VeKrylov;
  throw ConfigError("unknown scheme '" + name + "' (expected ls_fixed_point or ve_krylov)");
}

void SolverConfig::validate() const {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw ConfigError("solver tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("solver max_iterations must be at least 1");
  if (gmres_restart < 1) throw ConfigError("solver gmres_restart must be at least 1");
}

double pairwise_sum(const double* values, std::size_t n) { return n == 0 ? 0.0 : pairwise(values, n); }

double field_norm(const StrainField& field) { return std::sqrt(squared_norm(field)); }

GreenOperator::GreenOperator(const GreenTable& table) : table_(&table), fft_(table.lattice) {}

void GreenOperator::forward(StrainField& field) const {
  if (field.rows() != static_cast<Eigen::Index>(nodes())) throw ShapeError("field does not match the pattern");
  for (Eigen::Index c = 0; c < field.cols(); ++c) fft_.forward(std::span<cplx>(field.col(c).data(), nodes()));
}

void GreenOperator::inverse(StrainField& field) const {
  if (field.rows() != static_cast<Eigen::Index>(nodes())) throw ShapeError("field does not match the pattern");
  for (Eigen::Index c = 0; c < field.cols(); ++c) fft_.inverse(std::span<cplx>(field.col(c).data(), nodes()));
}

void GreenOperator::multiply(const std::vector<Tensor4>& coeffs, StrainField& field_hat) {
  if (coeffs.size() != static_cast<std::size_t>(field_hat.rows())) throw ShapeError("table does not match the field");
  const auto D = static_cast<int>(field_hat.cols());
  parallel_for(coeffs.size(), [&](std::size_t l) {
    const auto row = static_cast<Eigen::Index>(l);
    cplx v[6];
    for (int a = 0; a < D; ++a) v[a] = field_hat(row, a);
    for (int a = 0; a < D; ++a) {
      cplx s{};
      for (int b = 0; b < D; ++b) s += coeffs[l](a, b) * v[b];
      field_hat(row, a) = s;
    }
  });
}

void GreenOperator::apply(StrainField& field) const {
  if (field.cols() != components()) throw ShapeError("field does not have the table's Mandel size");
  forward(field);
  multiply(table_->coeffs, field);
  inverse(field);
}

SolveReport ls_fixed_point(const StiffnessField& C, const Tensor4& C0, const MandelVec& eps0, const GreenTable& G,
                           const SolverConfig& cfg) {
  cfg.validate();
  const auto start = Clock::now();
  const auto [m, D] = check_inputs(C, C0, eps0, G);
  const GreenOperator gamma(G);
  SolveReport report;
  report.method = "neumann";
  report.strain = StrainField::Zero(static_cast<Eigen::Index>(m), D);
  const double denom = std::sqrt(static_cast<double>(m)) * eps0.norm();
  if (denom == 0.0) {
    report.converged = true;
    finish(report, C, eps0, start);
    return report;
  }
  StrainField& E = report.strain;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    StrainField next = stress_like(C, &C0, &E, eps0);
    gamma.apply(next);
    next = -next;
    const double res = field_norm(E - next) / denom;
    report.iterations = it;
    report.residual_history.push_back(res);
    if (res <= cfg.tolerance) {
      report.converged = true;
      break;
    }
    if (!std::isfinite(res)) break;
    E = std::move(next);
  }
  finish(report, C, eps0, start);
  return report;
}

namespace {

/// The VE system in frequency-domain coordinates w, with E = S w.
class VeSystem {
 public:
  static constexpr double kKernelCutoff = 1e-12;

  VeSystem(const StiffnessField& C, const Tensor4& C0, const GreenTable& G) : C_(C), C0_(C0), gamma_(G) {
    sqrt_.resize(G.size());
    std::vector<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> eig(G.size());
    std::vector<double> top(G.size(), 0.0);
    parallel_for(G.size(), [&](std::size_t l) {
      eig[l].compute(G.coeffs[l]);
      top[l] = eig[l].eigenvalues().maxCoeff();
    });
    // round-off eigenvalues of the kernel would otherwise enter S as a
    // nearly singular direction and stall the iteration
    const double cutoff = kKernelCutoff * *std::max_element(top.begin(), top.end());
    parallel_for(G.size(), [&](std::size_t l) {
      Eigen::VectorXd lam = eig[l].eigenvalues();
      for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = lam(i) > cutoff ? std::sqrt(lam(i)) : 0.0;
      sqrt_[l] = eig[l].eigenvectors() * lam.asDiagonal() * eig[l].eigenvectors().transpose();
    });
  }

  /// S w (frequency) -> E (space).
  StrainField strain(const StrainField& w) const {
    StrainField x = w;
    GreenOperator::multiply(sqrt_, x);
    gamma_.inverse(x);
    return x;
  }

  /// S fft(C x) for a space-domain x.
  StrainField project(const StrainField& x_space) const {
    StrainField y = apply_field(C_, x_space);
    gamma_.forward(y);
    GreenOperator::multiply(sqrt_, y);
    return y;
  }

  StrainField apply(const StrainField& w) const { return project(strain(w)); }

  /// ||C0 S r||, the norm of C0 G^p C (E + eps0) when r = b - A w.
  double measure(const StrainField& r) const {
    StrainField x = r;
    GreenOperator::multiply(sqrt_, x);
    return field_norm(apply_constant(C0_, x));
  }

 private:
  const StiffnessField& C_;
  const Tensor4& C0_;
  GreenOperator gamma_;
  std::vector<Tensor4> sqrt_;
};

struct KrylovState {
  StrainField w;
  int iterations = 0;
  bool converged = false;
  bool breakdown = false;
};

void conjugate_gradients(const VeSystem& sys, const StrainField& b, double denom, const SolverConfig& cfg,
                         KrylovState& st, std::vector<double>& history) {
  StrainField r = b - sys.apply(st.w);
  StrainField p = r;
  double rr = inner(r, r).real();
  while (st.iterations < cfg.max_iterations) {
    const StrainField Ap = sys.apply(p);
    const double pAp = inner(p, Ap).real();
    if (!(pAp > 0.0) || !std::isfinite(pAp)) {
      st.breakdown = true;
      return;
    }
    const double alpha = rr / pAp;
    st.w += alpha * p;
    r -= alpha * Ap;
    ++st.iterations;
    double res = sys.measure(r) / denom;
    if (res <= cfg.tolerance) {
      // confirm against the true residual before accepting
      r = b - sys.apply(st.w);
      res = sys.measure(r) / denom;
      history.push_back(res);
      if (res <= cfg.tolerance) {
        st.converged = true;
        return;
      }
      p = r;
      rr = inner(r, r).real();
      continue;
    }
    history.push_back(res);
    if (!std::isfinite(res)) {
      st.breakdown = true;
      return;
    }
    const double rr_new = inner(r, r).real();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
}

void gmres(const VeSystem& sys, const StrainField& b, double denom, const SolverConfig& cfg, KrylovState& st,
           std::vector<double>& history) {
  const int restart = cfg.gmres_restart;
  const double b_norm = field_norm(b);
  double inner_tol = cfg.tolerance;
  while (st.iterations < cfg.max_iterations) {
    StrainField r = b - sys.apply(st.w);
    const double true_res = sys.measure(r) / denom;
    if (true_res <= cfg.tolerance) {
      st.converged = true;
      if (history.empty() || history.back() != true_res) history.push_back(true_res);
      return;
    }
    double beta = field_norm(r);
    if (beta == 0.0) {
      st.converged = true;
      return;
    }
    std::vector<StrainField> V;
    V.push_back(r / beta);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(restart + 1, restart);
    std::vector<cplx> cs(static_cast<std::size_t>(restart)), sn(static_cast<std::size_t>(restart));
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(restart + 1);
    g(0) = beta;
    int k = 0;
    for (; k < restart && st.iterations < cfg.max_iterations; ++k) {
      StrainField v = sys.apply(V[static_cast<std::size_t>(k)]);
      // modified Gram-Schmidt
      for (int i = 0; i <= k; ++i) {
        H(i, k) = inner(V[static_cast<std::size_t>(i)], v);
        v -= H(i, k) * V[static_cast<std::size_t>(i)];
      }
      H(k + 1, k) = field_norm(v);
      for (int i = 0; i < k; ++i) {
        const cplx t = std::conj(cs[static_cast<std::size_t>(i)]) * H(i, k) +
                       std::conj(sn[static_cast<std::size_t>(i)]) * H(i + 1, k);
        H(i + 1, k) = -sn[static_cast<std::size_t>(i)] * H(i, k) + cs[static_cast<std::size_t>(i)] * H(i + 1, k);
        H(i, k) = t;
      }
      const double hk = std::abs(H(k, k));
      const double hk1 = std::abs(H(k + 1, k));
      const double den = std::hypot(hk, hk1);
      const auto ku = static_cast<std::size_t>(k);
      if (den == 0.0) {
        cs[ku] = 1.0;
        sn[ku] = 0.0;
      } else {
        cs[ku] = H(k, k) / den;
        sn[ku] = H(k + 1, k) / den;
      }
      H(k, k) = std::conj(cs[ku]) * H(k, k) + std::conj(sn[ku]) * H(k + 1, k);
      H(k + 1, k) = 0.0;
      g(k + 1) = -sn[ku] * g(k);
      g(k) = std::conj(cs[ku]) * g(k);
      ++st.iterations;
      const double est = std::abs(g(k + 1));
      history.push_back(est / b_norm);
      if (est <= inner_tol * b_norm || hk1 == 0.0) {
        ++k;
        break;
      }
      V.push_back(v / hk1);
    }
    // back substitution
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(k);
    for (int i = k - 1; i >= 0; --i) {
      cplx s = g(i);
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y(j);
      y(i) = s / H(i, i);
    }
    for (int i = 0; i < k; ++i) st.w += y(i) * V[static_cast<std::size_t>(i)];
    // tighten the inner target when the estimate and the reported measure disagree
    const StrainField r_new = b - sys.apply(st.w);
    const double res = sys.measure(r_new) / denom;
    history.push_back(res);
    if (res <= cfg.tolerance) {
      st.converged = true;
      return;
    }
    inner_tol = std::max(inner_tol * std::min(0.5, cfg.tolerance / res), 1e-15);
  }
}

}  // namespace

SolveReport ve_krylov(const StiffnessField& C, const Tensor4& C0, const MandelVec& eps0, const GreenTable& G,
                      const SolverConfig& cfg) {
  cfg.validate();
  const auto start = Clock::now();
  const auto [m, D] = check_inputs(C, C0, eps0, G);
  SolveReport report;
  report.strain = StrainField::Zero(static_cast<Eigen::Index>(m), D);
  const VeSystem sys(C, C0, G);

  const StrainField constant = StrainField::Zero(static_cast<Eigen::Index>(m), D).rowwise() +
                               eps0.transpose().cast<cplx>();
  const StrainField b = -sys.project(constant);
  const double denom = sys.measure(b);
  // loads at round-off level (constant polarisation) have the zero solution
  const double load_scale = C0.norm() * field_norm(apply_field(C, constant));
  if (!(denom > 1e-14 * load_scale)) {
    report.method = "none";
    report.converged = true;
    finish(report, C, eps0, start);
    return report;
  }

  KrylovState st;
  st.w = StrainField::Zero(static_cast<Eigen::Index>(m), D);
  if (cfg.krylov == KrylovMethod::Auto) {
    report.method = "cg";
    conjugate_gradients(sys, b, denom, cfg, st, report.residual_history);
    if (st.breakdown) {
      report.method = "cg+gmres";
      gmres(sys, b, denom, cfg, st, report.residual_history);
    }
  } else {
    report.method = "gmres";
    gmres(sys, b, denom, cfg, st, report.residual_history);
  }
  report.converged = st.converged;
  report.iterations = st.iterations;
  report.strain = sys.strain(st.w);
  finish(report, C, eps0, start);
  return report;
}

SolveReport solve(const StiffnessField& C, const Tensor4& C0, const MandelVec& eps0, const GreenTable& G,
                  const SolverConfig& cfg) {
  return cfg.scheme == Scheme::LsFixedPoint ? ls_fixed_point(C, C0, eps0, G, cfg) : ve_krylov(C, C0, eps0, G, cfg);
}

StrainField dense_oracle(const StiffnessField& C, const Tensor4& C0, const MandelVec& eps0, const GreenTable& G) {
  const auto [m, D] = check_inputs(C, C0, eps0, G);
  const std::size_t N = m * static_cast<std::size_t>(D);
  if (N > 2048) {
    throw CapacityError("dense_oracle is limited to m D <= 2048, got " + std::to_string(N));
  }
  const GreenOperator gamma(G);
  const auto rows = static_cast<Eigen::Index>(m);
  Eigen::MatrixXcd A(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  const MandelVec zero = MandelVec::Zero(D);
  for (std::size_t col = 0; col < N; ++col) {
    StrainField e = StrainField::Zero(rows, D);
    e.data()[col] = 1.0;
    StrainField t = stress_like(C, &C0, &e, zero);
    gamma.apply(t);
    t += e;
    A.col(static_cast<Eigen::Index>(col)) = Eigen::Map<const Eigen::VectorXcd>(t.data(), t.size());
  }
  StrainField rhs = stress_like(C, &C0, nullptr, eps0);
  gamma.apply(rhs);
  rhs = -rhs;
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13)) {
    std::ostringstream os;
    os << "dense LS system is singular to working precision (reciprocal condition estimate " << rcond << ")";
    throw SingularSystemError(os.str());
  }
  const Eigen::VectorXcd x = lu.solve(Eigen::Map<const Eigen::VectorXcd>(rhs.data(), rhs.size()));
  return Eigen::Map<const StrainField>(x.data(), rows, D);
}

MandelVec effective_stiffness(const StiffnessField& C, const StrainField& E, const MandelVec& eps0) {
  if (static_cast<std::size_t>(E.rows()) != C.size() || E.cols() != eps0.size()) {
    throw ShapeError("effective_stiffness: field shape does not match the stiffness field");
  }
  const StrainField sigma = stress_like(C, nullptr, &E, eps0);
  const auto D = static_cast<int>(eps0.size());
  MandelVec out(D);
  std::vector<double> col(C.size());
  for (int a = 0; a < D; ++a) {
    for (std::size_t y = 0; y < C.size(); ++y) col[y] = sigma(static_cast<Eigen::Index>(y), a).real();
    out(a) = pairwise_sum(col.data(), col.size()) / static_cast<double>(C.size());
  }
  return out;
}

StrainField total_strain(const StrainField& E, const MandelVec& eps0) {
  if (E.cols() != eps0.size()) throw ShapeError("total_strain: Mandel size mismatch");
  return E.rowwise() + eps0.transpose().cast<cplx>();
}

double relative_gap(const StrainField& a, const StrainField& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("relative_gap: shape mismatch");
  const double nb = field_norm(b);
  const double diff = field_norm(a - b);
  return nb == 0.0 ? diff : diff / nb;
}

ErrorMetrics error_metrics(const StrainField& total, const StrainField* reference_total, const MandelVec& action,
                           const MandelVec* reference_action, ElogForm form) {
  ErrorMetrics out;
  if (reference_total) {
    if (reference_total->rows() != total.rows() || reference_total->cols() != total.cols()) {
      throw ShapeError("reference strain field does not match the solution field");
    }
    out.e_l2 = relative_gap(total, *reference_total);
    std::vector<double> elog(static_cast<std::size_t>(total.rows()));
    for (Eigen::Index y = 0; y < total.rows(); ++y) {
      const double mag = form == ElogForm::Difference ? (total.row(y) - reference_total->row(y)).norm()
                                                      : (total.row(y) + reference_total->row(y)).norm();
      elog[static_cast<std::size_t>(y)] = std::log1p(mag);
    }
    out.e_log = std::move(elog);
  }
  if (reference_action) {
    if (reference_action->size() != action.size()) throw ShapeError("reference effective action has the wrong size");
    const double nr = reference_action->norm();
    const double diff = (action - *reference_action).norm();
    out.e_eff = nr == 0.0 ? diff : diff / nr;
  }
  return out;
}

}  // namespace tihom
