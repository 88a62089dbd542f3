#include "tihom/lattice.hpp"

#include "tihom/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <sstream>
#include <utility>

namespace tihom {

namespace checked {

Index add(Index a, Index b) {
  Index r;
  if (__builtin_add_overflow(a, b, &r)) {
    throw OverflowError("integer overflow in lattice addition");
  }
  return r;
}

Index mul(Index a, Index b) {
  Index r;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw OverflowError("integer overflow in lattice multiplication");
  }
  return r;
}

Index floor_div(Index a, Index b) {
  Index q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Index sym_mod(Index n, Index q) {
  // n - q * floor((2n + q) / 2q)
  const Index two_q = mul(2, q);
  return add(n, -mul(q, floor_div(add(mul(2, n), q), two_q)));
}

Index pos_mod(Index n, Index q) {
  Index r = n % q;
  return r < 0 ? r + q : r;
}

IVec mat_vec(const IMat& a, const IVec& x) {
  IVec y(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    Index s = 0;
    for (Index j = 0; j < a.cols(); ++j) s = add(s, mul(a(i, j), x(j)));
    y(i) = s;
  }
  return y;
}

IMat mat_mat(const IMat& a, const IMat& b) {
  IMat c(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      Index s = 0;
      for (Index k = 0; k < a.cols(); ++k) s = add(s, mul(a(i, k), b(k, j)));
      c(i, j) = s;
    }
  }
  return c;
}

Index det(const IMat& a) {
  switch (a.rows()) {
    case 1:
      return a(0, 0);
    case 2:
      return add(mul(a(0, 0), a(1, 1)), -mul(a(0, 1), a(1, 0)));
    case 3: {
      Index s = 0;
      for (int j = 0; j < 3; ++j) {
        const Index minor =
            add(mul(a(1, (j + 1) % 3), a(2, (j + 2) % 3)),
                -mul(a(1, (j + 2) % 3), a(2, (j + 1) % 3)));
        s = add(s, mul(a(0, j), minor));
      }
      return s;
    }
    default:
      throw RegularityError("pattern matrices must have dimension 1, 2 or 3");
  }
}

}  // namespace checked

namespace {

IMat adjugate(const IMat& a) {
  const Index d = a.rows();
  IMat adj(d, d);
  if (d == 1) {
    adj(0, 0) = 1;
  } else if (d == 2) {
    adj << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  } else {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        // cofactor C_ji goes to adj(i, j)
        const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
        const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
        adj(i, j) = checked::add(checked::mul(a(r0, c0), a(r1, c1)),
                                 -checked::mul(a(r0, c1), a(r1, c0)));
      }
    }
  }
  return adj;
}

void check_shape(const IMat& M) {
  if (M.rows() != M.cols() || M.rows() < 1 || M.rows() > 3) {
    throw RegularityError("pattern matrix must be square with dimension 1, 2 or 3");
  }
}

}  // namespace

SmithDecomposition smith_normal_form(const IMat& M) {
  check_shape(M);
  if (checked::det(M) == 0) throw RegularityError("pattern matrix is singular");
  const int d = static_cast<int>(M.rows());
  IMat A = M;
  IMat U = IMat::Identity(d, d);
  IMat V = IMat::Identity(d, d);

  // row_dst -= q * row_src (tracked in U); analogous for columns (tracked in V)
  auto row_op = [&](int dst, int src, Index q) {
    for (int c = 0; c < d; ++c) {
      A(dst, c) = checked::add(A(dst, c), -checked::mul(q, A(src, c)));
      U(dst, c) = checked::add(U(dst, c), -checked::mul(q, U(src, c)));
    }
  };
  auto col_op = [&](int dst, int src, Index q) {
    for (int r = 0; r < d; ++r) {
      A(r, dst) = checked::add(A(r, dst), -checked::mul(q, A(r, src)));
      V(r, dst) = checked::add(V(r, dst), -checked::mul(q, V(r, src)));
    }
  };

  for (int t = 0; t < d; ++t) {
    for (;;) {
      int pi = -1, pj = -1;
      for (int i = t; i < d; ++i) {
        for (int j = t; j < d; ++j) {
          if (A(i, j) != 0 && (pi < 0 || std::llabs(A(i, j)) < std::llabs(A(pi, pj)))) {
            pi = i;
            pj = j;
          }
        }
      }
      if (pi != t) {
        A.row(t).swap(A.row(pi));
        U.row(t).swap(U.row(pi));
      }
      if (pj != t) {
        A.col(t).swap(A.col(pj));
        V.col(t).swap(V.col(pj));
      }
      bool clean = true;
      for (int i = t + 1; i < d; ++i) {
        if (A(i, t) != 0) {
          row_op(i, t, A(i, t) / A(t, t));
          clean = clean && A(i, t) == 0;
        }
      }
      for (int j = t + 1; j < d; ++j) {
        if (A(t, j) != 0) {
          col_op(j, t, A(t, j) / A(t, t));
          clean = clean && A(t, j) == 0;
        }
      }
      if (!clean) continue;
      int offending = -1;
      for (int i = t + 1; i < d && offending < 0; ++i) {
        for (int j = t + 1; j < d; ++j) {
          if (A(i, j) % A(t, t) != 0) {
            offending = i;
            break;
          }
        }
      }
      if (offending < 0) break;
      row_op(t, offending, -1);
    }
    if (A(t, t) < 0) {
      A.row(t) = -A.row(t);
      U.row(t) = -U.row(t);
    }
  }
  return {U, A, V};
}

PatternMatrix::PatternMatrix(IMat entries) : entries_(std::move(entries)) {
  check_shape(entries_);
  det_ = checked::det(entries_);
  if (det_ == 0) throw RegularityError("pattern matrix is singular: " + to_string());
  m_ = det_ < 0 ? -det_ : det_;
  adjugate_ = adjugate(entries_);
  if (det_ < 0) adjugate_ = -adjugate_;
  snf_ = smith_normal_form(entries_);
  factors_ = snf_.factors();
}

PatternMatrix PatternMatrix::parse(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse pattern matrix '" + std::string(text) + "': " + e.what());
  }
  if (!j.is_array() || j.empty() || j.size() > 3) {
    throw ConfigError("pattern matrix must be a nested list with 1 to 3 rows");
  }
  const auto d = static_cast<Index>(j.size());
  IMat M(d, d);
  for (Index r = 0; r < d; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != d) {
      throw ConfigError("pattern matrix must be square");
    }
    for (Index c = 0; c < d; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number_integer()) throw ConfigError("pattern matrix entries must be integers");
      M(r, c) = v.get<Index>();
    }
  }
  return PatternMatrix(M);
}

PatternMatrix PatternMatrix::diagonal(const std::vector<Index>& diag) {
  const auto d = static_cast<Index>(diag.size());
  if (d < 1 || d > 3) throw RegularityError("pattern matrices must have dimension 1, 2 or 3");
  IMat M = IMat::Zero(d, d);
  for (Index i = 0; i < d; ++i) M(i, i) = diag[static_cast<std::size_t>(i)];
  return PatternMatrix(M);
}

IVec PatternMatrix::inverse_numerator(const IVec& k) const {
  return checked::mat_vec(adjugate_, k);
}

IVec PatternMatrix::inverse_transpose_numerator(const IVec& k) const {
  return checked::mat_vec(adjugate_.transpose(), k);
}

std::size_t PatternMatrix::node_index(const IVec& k) const {
  IVec j = checked::mat_vec(snf_.U, k);
  for (Index i = 0; i < j.size(); ++i) j(i) = checked::pos_mod(j(i), factors_(i));
  return smith_linear(j);
}

std::size_t PatternMatrix::frequency_index(const IVec& h) const {
  IVec l = checked::mat_vec(snf_.V.transpose(), h);
  for (Index i = 0; i < l.size(); ++i) l(i) = checked::pos_mod(l(i), factors_(i));
  return smith_linear(l);
}

IVec PatternMatrix::node_numerator(std::size_t j) const {
  IVec c = smith_coords(j);
  for (Index i = 0; i < c.size(); ++i) c(i) = checked::mul(c(i), m_ / factors_(i));
  IVec n = checked::mat_vec(snf_.V, c);
  for (Index i = 0; i < n.size(); ++i) n(i) = checked::sym_mod(n(i), m_);
  return n;
}

IVec PatternMatrix::node_generator(std::size_t j) const {
  IVec k = checked::mat_vec(entries_, node_numerator(j));
  for (Index i = 0; i < k.size(); ++i) k(i) /= m_;
  return k;
}

IVec PatternMatrix::frequency(std::size_t l) const {
  IVec c = smith_coords(l);
  for (Index i = 0; i < c.size(); ++i) c(i) = checked::mul(c(i), m_ / factors_(i));
  IVec n = checked::mat_vec(snf_.U.transpose(), c);
  for (Index i = 0; i < n.size(); ++i) n(i) = checked::sym_mod(n(i), m_);
  IVec h = checked::mat_vec(entries_.transpose(), n);
  for (Index i = 0; i < h.size(); ++i) h(i) /= m_;
  return h;
}

IVec PatternMatrix::smith_coords(std::size_t linear) const {
  const Index d = dim();
  IVec c(d);
  auto rest = static_cast<Index>(linear);
  for (Index i = d - 1; i >= 0; --i) {
    c(i) = rest % factors_(i);
    rest /= factors_(i);
  }
  return c;
}

std::size_t PatternMatrix::smith_linear(const IVec& coords) const {
  Index idx = 0;
  for (Index i = 0; i < dim(); ++i) idx = idx * factors_(i) + coords(i);
  return static_cast<std::size_t>(idx);
}

std::string PatternMatrix::to_string() const {
  std::ostringstream os;
  os << '[';
  for (Index r = 0; r < entries_.rows(); ++r) {
    os << (r ? ",[" : "[");
    for (Index c = 0; c < entries_.cols(); ++c) os << (c ? "," : "") << entries_(r, c);
    os << ']';
  }
  os << ']';
  return os.str();
}

Pattern pattern(const PatternMatrix& M) {
  Pattern p;
  p.denominator = M.size();
  p.numerators.reserve(static_cast<std::size_t>(M.size()));
  for (std::size_t j = 0; j < static_cast<std::size_t>(M.size()); ++j) {
    p.numerators.push_back(M.node_numerator(j));
  }
  return p;
}

GeneratingSet generating_set(const PatternMatrix& M) {
  GeneratingSet g;
  g.freqs.reserve(static_cast<std::size_t>(M.size()));
  for (std::size_t j = 0; j < static_cast<std::size_t>(M.size()); ++j) {
    g.freqs.push_back(M.node_generator(j));
  }
  return g;
}

GeneratingSet frequency_set(const PatternMatrix& M) {
  GeneratingSet g;
  g.freqs.reserve(static_cast<std::size_t>(M.size()));
  for (std::size_t l = 0; l < static_cast<std::size_t>(M.size()); ++l) {
    g.freqs.push_back(M.frequency(l));
  }
  return g;
}

IVec canonical_residue(const IVec& k, const PatternMatrix& M) {
  if (k.size() != M.dim()) throw ShapeError("frequency dimension does not match pattern matrix");
  IVec n = M.inverse_numerator(k);
  for (Index i = 0; i < n.size(); ++i) n(i) = checked::sym_mod(n(i), M.size());
  IVec h = checked::mat_vec(M.entries(), n);
  for (Index i = 0; i < h.size(); ++i) h(i) /= M.size();
  return h;
}

}  // namespace tihom
