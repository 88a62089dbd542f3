#include "tihom/geometry.hpp"

#include "tihom/errors.hpp"
#include "tihom/field_io.hpp"
#include "tihom/parallel.hpp"

#include <Eigen/LU>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace tihom {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// interface nodes are snapped to the interface within this distance (in
// units of the period) so that their phase does not depend on round-off
constexpr double kSnap = 1e-12;

double wrap_unit(double s) {
  s -= std::floor(s);
  if (s > 1.0 - kSnap) s = 0.0;
  return s;
}

RVec json_rvec(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw ConfigError(std::string("microstructure needs an array \"") + key + "\"");
  const auto v = j[key].get<std::vector<double>>();
  if (v.empty() || v.size() > 3) throw ConfigError(std::string("\"") + key + "\" must have 1 to 3 entries");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<Phase> json_phases(const nlohmann::json& j, std::size_t count) {
  if (!j.contains("phases") || !j["phases"].is_array()) throw ConfigError("microstructure needs a \"phases\" array");
  std::vector<Phase> out;
  for (const auto& p : j["phases"]) out.push_back(Phase::from_json(p));
  if (count != 0 && out.size() != count) {
    throw ConfigError("microstructure expects " + std::to_string(count) + " phases, got " + std::to_string(out.size()));
  }
  return out;
}

double get_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw ConfigError(std::string("missing numeric field \"") + key + "\"");
  return j[key].get<double>();
}

/// Mandel form of sym(n a^T) as a D x d matrix acting on a.
Eigen::MatrixXd normal_gradient(const RVec& n) {
  const int d = static_cast<int>(n.size());
  Eigen::MatrixXd B(mandel_size(d), d);
  for (int j = 0; j < d; ++j) {
    RMat a = RMat::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      a(i, j) += 0.5 * n(i);
      a(j, i) += 0.5 * n(i);
    }
    B.col(j) = to_mandel(a);
  }
  return B;
}

}  // namespace

Phase Phase::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("phase must be an object {\"lambda\": ..., \"mu\": ...}");
  return {get_number(j, "lambda"), get_number(j, "mu")};
}

nlohmann::json Phase::to_json() const {
  nlohmann::ordered_json j;
  j["lambda"] = lambda;
  j["mu"] = mu;
  return j;
}

RVec wrap_to_cell(const RVec& x) {
  RVec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double s = x(i) - kTwoPi * std::floor((x(i) + kPi) / kTwoPi);
    if (s >= kPi) s -= kTwoPi;
    out(i) = s;
  }
  return out;
}

Microstructure::Microstructure(int dim, Geometry geometry, std::vector<Phase> phases)
    : dim_(dim), geometry_(std::move(geometry)), phases_(std::move(phases)) {
  validate();
}

Microstructure Microstructure::laminate(IVec normal, double fraction, Phase a, Phase b) {
  const int d = static_cast<int>(normal.size());
  return {d, LaminateGeometry{std::move(normal), fraction}, {a, b}};
}

Microstructure Microstructure::hashin(RVec center, double rotation, double core_a, double core_b, double coat_a,
                                     double coat_b, Phase core, Phase coating, Phase matrix) {
  return {2, HashinGeometry{std::move(center), rotation, core_a, core_b, coat_a, coat_b}, {core, coating, matrix}};
}

Microstructure Microstructure::inclusion(InclusionGeometry::Shape shape, RVec center, RVec half_widths, Phase inside,
                                         Phase outside) {
  const int d = static_cast<int>(center.size());
  return {d, InclusionGeometry{shape, std::move(center), std::move(half_widths)}, {inside, outside}};
}

Microstructure Microstructure::voxels(std::vector<int> shape, std::vector<int> ids, std::vector<Phase> phases) {
  const int d = static_cast<int>(shape.size());
  return {d, VoxelGeometry{std::move(shape), std::move(ids)}, std::move(phases)};
}

Microstructure Microstructure::homogeneous(int dim, Phase phase) {
  return voxels(std::vector<int>(static_cast<std::size_t>(dim), 1), {0}, {phase});
}

std::string Microstructure::kind() const {
  switch (geometry_.index()) {
    case 0:
      return "laminate";
    case 1:
      return "hashin_ellipses";
    case 2:
      return "inclusion";
    default:
      return "voxel_map";
  }
}

void Microstructure::validate() const {
  if (dim_ < 1 || dim_ > 3) throw GeometryError("microstructure dimension must be 1, 2 or 3");
  for (std::size_t i = 0; i < phases_.size(); ++i) {
    try {
      (void)phases_[i].stiffness(dim_);
    } catch (const DomainError& e) {
      throw GeometryError("phase " + std::to_string(i) + " is not elliptic: " + e.what());
    }
  }
  if (const auto* lam = std::get_if<LaminateGeometry>(&geometry_)) {
    if (lam->normal.size() != dim_ || lam->normal.isZero()) throw GeometryError("laminate normal must be a nonzero d-vector");
    if (!(lam->fraction >= 0.0 && lam->fraction <= 1.0)) throw GeometryError("laminate fraction must lie in [0, 1]");
    if (phases_.size() != 2) throw GeometryError("laminate needs exactly two phases");
  } else if (const auto* h = std::get_if<HashinGeometry>(&geometry_)) {
    if (dim_ != 2 || h->center.size() != 2) throw GeometryError("hashin_ellipses is two-dimensional");
    if (phases_.size() != 3) throw GeometryError("hashin_ellipses needs phases for core, coating and matrix");
    if (!(h->core_a > 0.0 && h->core_b > 0.0)) throw GeometryError("core semi-axes must be positive");
    if (!(h->coat_a > h->core_a && h->coat_b > h->core_b)) {
      throw GeometryError("coating ellipse must strictly contain the core ellipse");
    }
    const double fc = h->core_a * h->core_a - h->core_b * h->core_b;
    const double fe = h->coat_a * h->coat_a - h->coat_b * h->coat_b;
    if (std::abs(fc - fe) > 1e-9 * (h->coat_a * h->coat_a + h->coat_b * h->coat_b)) {
      std::ostringstream os;
      os << "ellipses are not confocal: a_c^2 - b_c^2 = " << fc << " but a_e^2 - b_e^2 = " << fe;
      throw GeometryError(os.str());
    }
    const double c = std::cos(h->rotation), s = std::sin(h->rotation);
    const double ext_x = std::sqrt(h->coat_a * h->coat_a * c * c + h->coat_b * h->coat_b * s * s);
    const double ext_y = std::sqrt(h->coat_a * h->coat_a * s * s + h->coat_b * h->coat_b * c * c);
    if (!(ext_x < kPi && ext_y < kPi)) throw GeometryError("coating ellipse does not fit in the periodic cell");
  } else if (const auto* inc = std::get_if<InclusionGeometry>(&geometry_)) {
    if (inc->center.size() != dim_ || inc->half_widths.size() != dim_) {
      throw GeometryError("inclusion center and size must be d-vectors");
    }
    if (!(inc->half_widths.minCoeff() > 0.0)) throw GeometryError("inclusion size must be positive");
    if (!(inc->half_widths.maxCoeff() < kPi)) throw GeometryError("inclusion does not fit in the periodic cell");
    if (phases_.size() != 2) throw GeometryError("inclusion needs exactly two phases");
  } else {
    const auto& v = std::get<VoxelGeometry>(geometry_);
    if (static_cast<int>(v.shape.size()) != dim_) throw GeometryError("voxel grid rank must equal the dimension");
    std::size_t total = 1;
    for (int n : v.shape) {
      if (n < 1) throw GeometryError("voxel grid sizes must be positive");
      total *= static_cast<std::size_t>(n);
    }
    if (v.ids.size() != total) {
      throw GeometryError("voxel map has " + std::to_string(v.ids.size()) + " ids, grid needs " + std::to_string(total));
    }
    for (int id : v.ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= phases_.size()) {
        throw GeometryError("voxel id " + std::to_string(id) + " has no phase");
      }
    }
  }
}

int Microstructure::phase_at(const RVec& x_in) const {
  if (x_in.size() != dim_) throw ShapeError("point dimension does not match the microstructure");
  const RVec x = wrap_to_cell(x_in);
  if (const auto* lam = std::get_if<LaminateGeometry>(&geometry_)) {
    const double t = lam->normal.cast<double>().dot(x) / kTwoPi;
    double s = wrap_unit(t);
    if (std::abs(s - lam->fraction) < kSnap) s = lam->fraction;
    return s < lam->fraction ? 0 : 1;
  }
  if (const auto* h = std::get_if<HashinGeometry>(&geometry_)) {
    const RVec dx = wrap_to_cell(x - h->center);
    const double c = std::cos(h->rotation), s = std::sin(h->rotation);
    const double u = c * dx(0) + s * dx(1);
    const double v = -s * dx(0) + c * dx(1);
    const auto inside = [&](double a, double b) { return (u / a) * (u / a) + (v / b) * (v / b) <= 1.0 + kSnap; };
    if (inside(h->core_a, h->core_b)) return 0;
    if (inside(h->coat_a, h->coat_b)) return 1;
    return 2;
  }
  if (const auto* inc = std::get_if<InclusionGeometry>(&geometry_)) {
    const RVec dx = wrap_to_cell(x - inc->center);
    if (inc->shape == InclusionGeometry::Shape::Ball) {
      return dx.norm() <= inc->half_widths(0) * (1.0 + kSnap) ? 0 : 1;
    }
    return (dx.cwiseAbs().array() <= inc->half_widths.array() * (1.0 + kSnap)).all() ? 0 : 1;
  }
  const auto& v = std::get<VoxelGeometry>(geometry_);
  std::size_t linear = 0;
  for (int i = 0; i < dim_; ++i) {
    const int n = v.shape[static_cast<std::size_t>(i)];
    auto idx = static_cast<int>(std::floor((x(i) + kPi) / kTwoPi * n + kSnap));
    idx = std::clamp(idx, 0, n - 1);
    linear = linear * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx);
  }
  return v.ids[linear];
}

Microstructure Microstructure::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("microstructure needs a string field \"kind\"");
  }
  const auto kind = j["kind"].get<std::string>();
  if (kind == "laminate") {
    if (!j.contains("normal") || !j["normal"].is_array()) throw ConfigError("laminate needs an integer \"normal\"");
    const auto n = j["normal"].get<std::vector<Index>>();
    IVec normal(static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) normal(static_cast<Eigen::Index>(i)) = n[i];
    const auto phases = json_phases(j, 2);
    return laminate(normal, get_number(j, "fraction"), phases[0], phases[1]);
  }
  if (kind == "hashin_ellipses") {
    const auto phases = json_phases(j, 3);
    const RVec core = json_rvec(j, "core");
    const RVec coat = json_rvec(j, "coating");
    if (core.size() != 2) throw ConfigError("\"core\" must hold the two semi-axes");
    const double rotation = j.contains("rotation") ? get_number(j, "rotation") : 0.0;
    const RVec center = j.contains("center") ? json_rvec(j, "center") : RVec(RVec::Zero(2));
    double coat_b = 0.0;
    if (coat.size() == 2) {
      coat_b = coat(1);
    } else {
      // confocal completion of the minor semi-axis
      const double b2 = coat(0) * coat(0) - core(0) * core(0) + core(1) * core(1);
      if (!(b2 > 0.0)) throw GeometryError("no confocal coating with the given major semi-axis");
      coat_b = std::sqrt(b2);
    }
    return hashin(center, rotation, core(0), core(1), coat(0), coat_b, phases[0], phases[1], phases[2]);
  }
  if (kind == "inclusion") {
    const auto phases = json_phases(j, 2);
    const RVec center = json_rvec(j, "center");
    const std::string shape = j.value("shape", "ball");
    if (shape == "ball") {
      const double r = get_number(j, "radius");
      return inclusion(InclusionGeometry::Shape::Ball, center, RVec::Constant(center.size(), r), phases[0], phases[1]);
    }
    if (shape == "box") {
      return inclusion(InclusionGeometry::Shape::Box, center, json_rvec(j, "half_widths"), phases[0], phases[1]);
    }
    throw ConfigError("inclusion shape must be \"ball\" or \"box\"");
  }
  if (kind == "voxel_map") {
    if (!j.contains("shape") || !j.contains("ids")) throw ConfigError("voxel_map needs \"shape\" and \"ids\"");
    return voxels(j["shape"].get<std::vector<int>>(), j["ids"].get<std::vector<int>>(), json_phases(j, 0));
  }
  if (kind == "homogeneous") {
    const auto phases = json_phases(j, 1);
    if (!j.contains("dim") || !j["dim"].is_number_integer()) throw ConfigError("homogeneous needs an integer \"dim\"");
    return homogeneous(j["dim"].get<int>(), phases[0]);
  }
  throw ConfigError("unknown microstructure kind '" + kind + "'");
}

nlohmann::json Microstructure::to_json() const {
  nlohmann::json j;
  j["kind"] = kind();
  const auto vec = [](const auto& v) {
    std::vector<typename std::decay_t<decltype(v)>::Scalar> out(v.data(), v.data() + v.size());
    return out;
  };
  if (const auto* lam = std::get_if<LaminateGeometry>(&geometry_)) {
    j["normal"] = vec(lam->normal);
    j["fraction"] = lam->fraction;
  } else if (const auto* h = std::get_if<HashinGeometry>(&geometry_)) {
    j["center"] = vec(h->center);
    j["rotation"] = h->rotation;
    j["core"] = {h->core_a, h->core_b};
    j["coating"] = {h->coat_a, h->coat_b};
  } else if (const auto* inc = std::get_if<InclusionGeometry>(&geometry_)) {
    j["shape"] = inc->shape == InclusionGeometry::Shape::Ball ? "ball" : "box";
    j["center"] = vec(inc->center);
    if (inc->shape == InclusionGeometry::Shape::Ball) {
      j["radius"] = inc->half_widths(0);
    } else {
      j["half_widths"] = vec(inc->half_widths);
    }
  } else {
    const auto& v = std::get<VoxelGeometry>(geometry_);
    j["shape"] = v.shape;
    j["ids"] = v.ids;
  }
  j["phases"] = nlohmann::json::array();
  for (const auto& p : phases_) j["phases"].push_back(p.to_json());
  return j;
}

SamplingOptions SamplingOptions::from_json(const nlohmann::json& j) {
  SamplingOptions o;
  if (j.is_null()) return o;
  if (!j.is_object()) throw ConfigError("\"sampling\" must be an object");
  const std::string mode = j.value("mode", "node");
  if (mode == "node") {
    o.mode = SamplingMode::Node;
  } else if (mode == "cell_average") {
    o.mode = SamplingMode::CellAverage;
  } else {
    throw ConfigError("sampling mode must be \"node\" or \"cell_average\"");
  }
  o.subsamples = j.value("subsamples", o.subsamples);
  if (o.subsamples < 1 || o.subsamples > 64) throw ConfigError("sampling subsamples must lie in [1, 64]");
  return o;
}

std::vector<int> sample_phases(const Microstructure& ms, const PatternMatrix& M) {
  if (ms.dim() != M.dim()) throw ShapeError("microstructure and pattern matrix dimensions differ");
  const Pattern P = pattern(M);
  std::vector<int> out(P.size());
  parallel_for(P.size(), [&](std::size_t j) { out[j] = ms.phase_at(kTwoPi * P.point(j)); });
  return out;
}

StiffnessField sample_stiffness(const Microstructure& ms, const PatternMatrix& M, const SamplingOptions& opts) {
  if (ms.dim() != M.dim()) throw ShapeError("microstructure and pattern matrix dimensions differ");
  const int d = M.dim();
  std::vector<Tensor4> table;
  for (const auto& p : ms.phases()) table.push_back(p.stiffness(d));
  const Pattern P = pattern(M);
  StiffnessField out(P.size());
  if (opts.mode == SamplingMode::Node) {
    parallel_for(P.size(), [&](std::size_t j) {
      out[j] = table[static_cast<std::size_t>(ms.phase_at(kTwoPi * P.point(j)))];
    });
    return out;
  }
  // offsets M^{-1}((i + 1/2)/s - 1/2) of the subsample grid
  const int s = opts.subsamples;
  const RMat Minv = M.entries().cast<double>().inverse();
  std::vector<RVec> offsets;
  IVec i = IVec::Zero(d);
  for (;;) {
    RVec u(d);
    for (int a = 0; a < d; ++a) u(a) = (static_cast<double>(i(a)) + 0.5) / s - 0.5;
    offsets.push_back(Minv * u);
    int a = d - 1;
    while (a >= 0 && i(a) == s - 1) i(a--) = 0;
    if (a < 0) break;
    ++i(a);
  }
  const double w = 1.0 / static_cast<double>(offsets.size());
  parallel_for(P.size(), [&](std::size_t j) {
    const int D = mandel_size(d);
    std::vector<int> counts(table.size(), 0);
    for (const auto& off : offsets) ++counts[static_cast<std::size_t>(ms.phase_at(kTwoPi * (P.point(j) + off)))];
    Tensor4 acc = Tensor4::Zero(D, D);
    for (std::size_t p = 0; p < table.size(); ++p) acc += (w * counts[p]) * table[p];
    out[j] = acc;
  });
  return out;
}

Tensor4 mean_reference_stiffness(const std::vector<Phase>& phases, int d) {
  if (phases.empty()) throw ConfigError("no phases to average");
  double lambda = 0.0, mu = 0.0;
  for (const auto& p : phases) {
    lambda += p.lambda;
    mu += p.mu;
  }
  const double n = static_cast<double>(phases.size());
  return iso_stiffness(lambda / n, mu / n, d);
}

Tensor4 midpoint_reference_stiffness(const std::vector<Phase>& phases, int d) {
  if (phases.empty()) throw ConfigError("no phases to average");
  double lmin = phases[0].lambda, lmax = lmin, mmin = phases[0].mu, mmax = mmin;
  for (const auto& p : phases) {
    lmin = std::min(lmin, p.lambda);
    lmax = std::max(lmax, p.lambda);
    mmin = std::min(mmin, p.mu);
    mmax = std::max(mmax, p.mu);
  }
  return iso_stiffness(0.5 * (lmin + lmax), 0.5 * (mmin + mmax), d);
}

std::optional<StrainField> ReferenceSolution::strain_on(const PatternMatrix& M) const {
  if (sampled && sampled_on && *sampled_on == M) return sampled;
  if (strain_at) {
    const Pattern P = pattern(M);
    const MandelVec probe = strain_at(RVec::Zero(M.dim()));
    StrainField out(static_cast<Eigen::Index>(P.size()), probe.size());
    for (std::size_t j = 0; j < P.size(); ++j) {
      out.row(static_cast<Eigen::Index>(j)) = strain_at(kTwoPi * P.point(j)).transpose().cast<cplx>();
    }
    return out;
  }
  if (sampled) throw ShapeError("reference field was sampled on " + sampled_on->to_string() + ", not " + M.to_string());
  return std::nullopt;
}

LaminateSolution laminate_solution(int d, int axis, double fraction, const Phase& a, const Phase& b,
                                   const MandelVec& eps0) {
  if (axis < 0 || axis >= d) throw GeometryError("laminate axis out of range");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw GeometryError("laminate fraction must lie in [0, 1]");
  const int D = mandel_size(d);
  if (eps0.size() != D) throw ShapeError("loading has the wrong Mandel size");
  const Tensor4 Ca = a.stiffness(d), Cb = b.stiffness(d);
  RVec n = RVec::Zero(d);
  n(axis) = 1.0;
  // eps_a = eps0 + (1-f) B jump, eps_b = eps0 - f B jump with B jump = sym(n x jump);
  // traction continuity (Ca eps_a - Cb eps_b) n = 0 fixes the jump vector
  const Eigen::MatrixXd B = normal_gradient(n);
  const Eigen::MatrixXd Cbar = (1.0 - fraction) * Ca + fraction * Cb;
  const Eigen::MatrixXd K = B.transpose() * Cbar * B;
  const Eigen::VectorXd rhs = -B.transpose() * (Ca - Cb) * eps0;
  const Eigen::VectorXd jump = K.fullPivLu().solve(rhs);
  LaminateSolution out;
  out.strain_a = eps0 + (1.0 - fraction) * B * jump;
  out.strain_b = eps0 - fraction * B * jump;
  out.effective_action = fraction * Ca * out.strain_a + (1.0 - fraction) * Cb * out.strain_b;
  return out;
}

ReferenceSolution laminate_reference(const LaminateGeometry& geometry, const Phase& a, const Phase& b,
                                     const MandelVec& eps0) {
  const int d = static_cast<int>(geometry.normal.size());
  int axis = -1;
  for (int i = 0; i < d; ++i) {
    if (geometry.normal(i) != 0) {
      if (axis >= 0 || std::abs(geometry.normal(i)) != 1) {
        throw GeometryError("laminate_reference supports axis-aligned unit normals only");
      }
      axis = i;
    }
  }
  if (axis < 0) throw GeometryError("laminate normal must be nonzero");
  const auto sol = laminate_solution(d, axis, geometry.fraction, a, b, eps0);
  const Microstructure ms = Microstructure::laminate(geometry.normal, geometry.fraction, a, b);
  ReferenceSolution ref;
  ref.strain_at = [ms, sol](const RVec& x) { return ms.phase_at(x) == 0 ? sol.strain_a : sol.strain_b; };
  ref.effective_action = sol.effective_action;
  ref.provenance = "closed-form laminate solution";
  return ref;
}

ReferenceSolution load_reference_values(const std::filesystem::path& path, const PatternMatrix* expected,
                                        int components) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IngestionError("cannot open reference file '" + path.string() + "'");
  char magic[4] = {};
  probe.read(magic, 4);
  probe.close();

  ReferenceSolution ref;
  const auto take_field = [&](const std::filesystem::path& field_path) {
    const FieldFile f = read_field(field_path);
    if (f.domain != FieldDomain::Space) throw IngestionError("reference strain must be a space-domain field");
    if (expected && !(f.lattice == *expected)) {
      throw IngestionError("reference field pattern matrix " + f.lattice.to_string() + " does not match " +
                           expected->to_string());
    }
    if (components > 0 && static_cast<int>(f.components) != components) {
      throw IngestionError("reference field has " + std::to_string(f.components) + " components, expected " +
                           std::to_string(components));
    }
    ref.sampled = f.as_strain();
    ref.sampled_on = f.lattice;
  };

  if (std::string(magic, 4) == "PFLD") {
    take_field(path);
    ref.provenance = path.filename().string();
    return ref;
  }

  nlohmann::json j;
  try {
    std::ifstream is(path);
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("reference file '" + path.string() + "' is neither PFLD nor JSON: " + e.what());
  }
  const auto read_action = [&](const nlohmann::json& v) {
    if (!v.is_array() || v.empty()) throw IngestionError("effective action must be a nonempty numeric array");
    std::vector<double> a;
    try {
      a = v.get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw IngestionError("effective action must be a numeric array");
    }
    if (components > 0 && static_cast<int>(a.size()) != components) {
      throw IngestionError("effective action has " + std::to_string(a.size()) + " components, expected " +
                           std::to_string(components));
    }
    ref.effective_action = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
  };
  if (j.is_array()) {
    read_action(j);
  } else if (j.is_object()) {
    if (j.contains("effective_action")) read_action(j["effective_action"]);
    if (j.contains("strain_field")) {
      if (!j["strain_field"].is_string()) throw IngestionError("\"strain_field\" must be a path");
      std::filesystem::path field_path = j["strain_field"].get<std::string>();
      if (field_path.is_relative()) field_path = path.parent_path() / field_path;
      take_field(field_path);
    }
    ref.provenance = j.value("provenance", path.filename().string());
  } else {
    throw IngestionError("reference JSON must be an array or an object");
  }
  if (!ref.has_strain() && !ref.effective_action) {
    throw IngestionError("reference file '" + path.string() + "' holds neither a strain field nor an effective action");
  }
  return ref;
}

}  // namespace tihom
