#include "oogrisk/modelspec.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "oogrisk/error.hpp"

namespace oogrisk {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// ExprMatrix

ExprMatrix::ExprMatrix(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), entries_(static_cast<size_t>(rows * cols)) {}

ExprMatrix ExprMatrix::literal(const Matrix& m) {
  ExprMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.at(i, j).value = m(i, j);
  return out;
}

bool ExprMatrix::has_expressions() const {
  for (const auto& e : entries_)
    if (e.ast) return true;
  return false;
}

Matrix ExprMatrix::evaluate(const expr::Bindings& b, const std::string& path) const {
  Matrix m(rows_, cols_);
  for (Eigen::Index i = 0; i < rows_; ++i)
    for (Eigen::Index j = 0; j < cols_; ++j) {
      const auto& e = at(i, j);
      m(i, j) = e.ast ? expr::eval(*e.ast, b,
                                   path + "[" + std::to_string(i) + "][" + std::to_string(j) + "]")
                      : e.value;
    }
  return m;
}

const char* to_string(ResidualConvention c) {
  return c == ResidualConvention::Literal ? "literal" : "innovation";
}

AttackChannels SystemSpec::attack() const {
  const int n_u = static_cast<int>(this->n_u());
  const int n_m = static_cast<int>(this->n_m());
  if (!attacked_sensors.empty() && attacked_actuators.empty())
    return AttackChannels::sensors(attacked_sensors, n_u, n_m);
  AttackChannels a = AttackChannels::actuators(attacked_actuators, n_u, n_m);
  if (!attacked_sensors.empty())
    a.sensor_mask = AttackChannels::sensors(attacked_sensors, n_u, n_m).sensor_mask;
  return a;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& path) {
  if (!obj.is_object())
    throw Error(ErrorCode::InvalidModel, "expected an object", path.empty() ? "<root>" : path);
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items()) {
    if (!ok.count(k))
      throw Error(ErrorCode::InvalidModel, "unknown key '" + k + "'",
                  path.empty() ? k : path + "." + k);
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw Error(ErrorCode::InvalidModel, "expected a number", path);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::InvalidModel, "non-finite number", path);
  return d;
}

bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw Error(ErrorCode::InvalidModel, "expected true or false", path);
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw Error(ErrorCode::InvalidModel, "expected a string", path);
  return v.get<std::string>();
}

struct MatrixContext {
  bool allow_expr = false;
  const expr::IntervalBindings* box = nullptr;
};

ExprMatrix::Entry parse_entry(const json& v, const std::string& path, const MatrixContext& ctx) {
  ExprMatrix::Entry e;
  if (v.is_number()) {
    e.value = get_number(v, path);
    return e;
  }
  if (v.is_string()) {
    if (!ctx.allow_expr)
      throw Error(ErrorCode::InvalidModel, "expressions are only allowed in plant matrices",
                  path);
    e.ast = expr::parse(v.get<std::string>(), path);
    // Checks identifiers and rejects divisors whose range contains zero.
    expr::eval_interval(*e.ast, *ctx.box, path);
    return e;
  }
  throw Error(ErrorCode::InvalidModel, "matrix entry must be a number or an expression string",
              path);
}

// Missing or [] gives nullopt. A flat array is a column vector.
std::optional<ExprMatrix> parse_matrix(const json& obj, const char* key, const std::string& path,
                                       const MatrixContext& ctx) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_array()) throw Error(ErrorCode::InvalidModel, "expected an array", p);
  if (v.empty()) return std::nullopt;
  if (!v.front().is_array()) {
    ExprMatrix m(static_cast<Eigen::Index>(v.size()), 1);
    for (size_t i = 0; i < v.size(); ++i)
      m.at(static_cast<Eigen::Index>(i), 0) =
          parse_entry(v[i], p + "[" + std::to_string(i) + "]", ctx);
    return m;
  }
  const size_t cols = v.front().size();
  if (cols == 0) throw Error(ErrorCode::InvalidModel, "empty row", p + "[0]");
  ExprMatrix m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < v.size(); ++i) {
    const std::string rp = p + "[" + std::to_string(i) + "]";
    if (!v[i].is_array()) throw Error(ErrorCode::InvalidModel, "expected a row array", rp);
    if (v[i].size() != cols)
      throw Error(ErrorCode::DimensionMismatch,
                  "row has " + std::to_string(v[i].size()) + " entries, expected " +
                      std::to_string(cols),
                  rp);
    for (size_t j = 0; j < cols; ++j)
      m.at(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_entry(v[i][j], rp + "[" + std::to_string(j) + "]", ctx);
  }
  return m;
}

Matrix literal_matrix(const json& obj, const char* key, const std::string& path,
                      Eigen::Index rows, Eigen::Index cols) {
  const std::string p = join(path, key);
  const auto m = parse_matrix(obj, key, path, MatrixContext{});
  if (!m) return Matrix::Zero(rows, cols);
  if (m->rows() != rows || m->cols() != cols)
    throw Error(ErrorCode::DimensionMismatch,
                "is " + std::to_string(m->rows()) + "x" + std::to_string(m->cols()) +
                    ", expected " + std::to_string(rows) + "x" + std::to_string(cols),
                p);
  return m->evaluate({}, p);
}

ExprMatrix expect_dims(std::optional<ExprMatrix> m, Eigen::Index rows, Eigen::Index cols,
                       const std::string& p) {
  if (!m) return ExprMatrix::literal(Matrix::Zero(rows, cols));
  if (m->rows() != rows || m->cols() != cols)
    throw Error(ErrorCode::DimensionMismatch,
                "is " + std::to_string(m->rows()) + "x" + std::to_string(m->cols()) +
                    ", expected " + std::to_string(rows) + "x" + std::to_string(cols),
                p);
  return *m;
}

std::vector<int> parse_indices(const json& obj, const char* key, const std::string& path) {
  std::vector<int> out;
  if (!obj.contains(key)) return out;
  const std::string p = join(path, key);
  const json& v = obj.at(key);
  if (!v.is_array()) throw Error(ErrorCode::InvalidModel, "expected an array of indices", p);
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer())
      throw Error(ErrorCode::InvalidModel, "expected an integer index",
                  p + "[" + std::to_string(i) + "]");
    out.push_back(v[i].get<int>());
  }
  return out;
}

UncertaintySpec parse_uncertainty(const json& root) {
  UncertaintySpec u;
  if (!root.contains("uncertainty")) return u;
  const json& uj = root.at("uncertainty");
  check_keys(uj, {"params", "nominal"}, "uncertainty");
  if (uj.contains("params")) {
    const json& ps = uj.at("params");
    if (!ps.is_array())
      throw Error(ErrorCode::InvalidModel, "expected an array", "uncertainty.params");
    for (size_t i = 0; i < ps.size(); ++i) {
      const std::string p = "uncertainty.params[" + std::to_string(i) + "]";
      check_keys(ps[i], {"name", "low", "high", "dist"}, p);
      for (const char* req : {"name", "low", "high"})
        if (!ps[i].contains(req))
          throw Error(ErrorCode::InvalidModel, std::string("missing '") + req + "'", p);
      ParamRange r;
      r.name = get_string(ps[i].at("name"), p + ".name");
      const auto ast = expr::parse(r.name, p + ".name");
      if (ast->kind != expr::Node::Kind::Ident)
        throw Error(ErrorCode::InvalidModel, "parameter name must be an identifier",
                    p + ".name");
      r.low = get_number(ps[i].at("low"), p + ".low");
      r.high = get_number(ps[i].at("high"), p + ".high");
      if (ps[i].contains("dist") && get_string(ps[i].at("dist"), p + ".dist") != "uniform")
        throw Error(ErrorCode::InvalidModel, "only \"uniform\" is supported", p + ".dist");
      u.params.push_back(r);
    }
  }
  if (uj.contains("nominal")) {
    const json& nj = uj.at("nominal");
    if (!nj.is_object())
      throw Error(ErrorCode::InvalidModel, "expected an object", "uncertainty.nominal");
    u.nominal.resize(static_cast<Eigen::Index>(u.params.size()));
    for (size_t i = 0; i < u.params.size(); ++i)
      u.nominal(static_cast<Eigen::Index>(i)) = 0.5 * (u.params[i].low + u.params[i].high);
    for (const auto& [k, v] : nj.items()) {
      const int idx = u.index_of(k);
      if (idx < 0)
        throw Error(ErrorCode::UnknownParameter, "unknown parameter '" + k + "'",
                    "uncertainty.nominal." + k);
      u.nominal(idx) = get_number(v, "uncertainty.nominal." + k);
    }
  }
  u.finalize();
  return u;
}

size_t line_col(std::string_view text, size_t byte, size_t& col) {
  size_t line = 1;
  col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return line;
}

}  // namespace

SystemSpec parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    size_t col = 0;
    const size_t line = line_col(text, e.byte > 0 ? e.byte - 1 : 0, col);
    throw Error(ErrorCode::SyntaxError,
                "invalid JSON at line " + std::to_string(line) + ", column " + std::to_string(col),
                "<root>");
  }
  check_keys(root,
             {"name", "description", "plant", "controller", "detector", "observer", "attack",
              "uncertainty", "allow_unstable"},
             "");

  SystemSpec s;
  if (root.contains("name")) s.name = get_string(root.at("name"), "name");
  if (root.contains("description"))
    s.description = get_string(root.at("description"), "description");
  if (root.contains("allow_unstable"))
    s.allow_unstable = get_bool(root.at("allow_unstable"), "allow_unstable");

  s.uncertainty = parse_uncertainty(root);
  expr::IntervalBindings box;
  for (const auto& p : s.uncertainty.params) box[p.name] = {p.low, p.high};

  // Plant
  if (!root.contains("plant")) throw Error(ErrorCode::InvalidModel, "missing section", "plant");
  const json& pj = root.at("plant");
  check_keys(pj, {"A", "B", "C", "C_J", "D_J", "Q", "R", "continuous", "Ts"}, "plant");
  const MatrixContext ectx{true, &box};
  auto A = parse_matrix(pj, "A", "plant", ectx);
  auto B = parse_matrix(pj, "B", "plant", ectx);
  auto C = parse_matrix(pj, "C", "plant", ectx);
  if (!A) throw Error(ErrorCode::InvalidModel, "plant needs a nonempty A", "plant.A");
  if (!B) throw Error(ErrorCode::InvalidModel, "plant needs a nonempty B", "plant.B");
  if (!C) throw Error(ErrorCode::InvalidModel, "plant needs a nonempty C", "plant.C");
  const Eigen::Index n_x = A->rows();
  s.A = expect_dims(A, n_x, n_x, "plant.A");
  s.B = expect_dims(B, n_x, B->cols(), "plant.B");
  s.C = expect_dims(C, C->rows(), n_x, "plant.C");
  const Eigen::Index n_u = s.B.cols();
  const Eigen::Index n_m = s.C.rows();

  const bool has_lq = pj.contains("Q") || pj.contains("R");
  if (has_lq) {
    if (pj.contains("C_J") || pj.contains("D_J"))
      throw Error(ErrorCode::InvalidModel, "give either C_J/D_J or Q/R, not both", "plant");
    const Matrix Q = literal_matrix(pj, "Q", "plant", n_x, n_x);
    const Matrix R = literal_matrix(pj, "R", "plant", n_u, n_u);
    const auto perf = lq_performance_output(Q, R);
    s.C_J = ExprMatrix::literal(perf.C_J);
    s.D_J = ExprMatrix::literal(perf.D_J);
  } else {
    auto CJ = parse_matrix(pj, "C_J", "plant", ectx);
    auto DJ = parse_matrix(pj, "D_J", "plant", ectx);
    if (!CJ && !DJ)
      throw Error(ErrorCode::InvalidModel, "performance output missing (C_J/D_J or Q/R)",
                  "plant.C_J");
    const Eigen::Index n_p = CJ ? CJ->rows() : DJ->rows();
    s.C_J = expect_dims(CJ, n_p, n_x, "plant.C_J");
    s.D_J = expect_dims(DJ, n_p, n_u, "plant.D_J");
  }
  if (pj.contains("continuous")) s.continuous = get_bool(pj.at("continuous"), "plant.continuous");
  if (pj.contains("Ts")) {
    s.Ts = get_number(pj.at("Ts"), "plant.Ts");
    if (!(*s.Ts > 0.0)) throw Error(ErrorCode::InvalidModel, "Ts must be positive", "plant.Ts");
  }
  if (s.continuous && !s.Ts)
    throw Error(ErrorCode::InvalidModel, "continuous plant needs Ts for discretization",
                "plant.Ts");

  // Controller
  if (root.contains("controller")) {
    const json& cj = root.at("controller");
    check_keys(cj, {"A_c", "B_c", "C_c", "D_c"}, "controller");
    const auto Ac = parse_matrix(cj, "A_c", "controller", MatrixContext{});
    const Eigen::Index n_z = Ac ? Ac->rows() : 0;
    s.controller.A_c = literal_matrix(cj, "A_c", "controller", n_z, n_z);
    s.controller.B_c = literal_matrix(cj, "B_c", "controller", n_z, n_m);
    s.controller.C_c = literal_matrix(cj, "C_c", "controller", n_u, n_z);
    s.controller.D_c = literal_matrix(cj, "D_c", "controller", n_u, n_m);
  } else {
    s.controller = ControllerSpec::static_gain(Matrix::Zero(n_u, n_m));
  }

  // Detector
  if (root.contains("detector") && root.contains("observer"))
    throw Error(ErrorCode::InvalidModel, "give either detector or observer, not both",
                "observer");
  if (root.contains("observer")) {
    const json& oj = root.at("observer");
    check_keys(oj, {"K_e", "residual", "threshold"}, "observer");
    ObserverSpec o;
    o.K_e = literal_matrix(oj, "K_e", "observer", n_x, n_m);
    if (oj.contains("residual")) {
      const std::string r = get_string(oj.at("residual"), "observer.residual");
      if (r == "literal")
        o.residual = ResidualConvention::Literal;
      else if (r == "innovation")
        o.residual = ResidualConvention::Innovation;
      else
        throw Error(ErrorCode::InvalidModel, "expected \"literal\" or \"innovation\"",
                    "observer.residual");
    }
    if (oj.contains("threshold")) s.threshold = get_number(oj.at("threshold"), "observer.threshold");
    s.observer = o;
  } else {
    const json empty = json::object();
    const json& dj = root.contains("detector") ? root.at("detector") : empty;
    check_keys(dj, {"A_e", "B_e", "K_e", "C_e", "D_e", "E_e", "threshold"}, "detector");
    const MatrixContext lit{};
    const auto Ae = parse_matrix(dj, "A_e", "detector", lit);
    const Eigen::Index n_s = Ae ? Ae->rows() : 0;
    Eigen::Index n_r = 0;
    for (const char* k : {"C_e", "D_e", "E_e"})
      if (const auto m = parse_matrix(dj, k, "detector", lit)) {
        n_r = m->rows();
        break;
      }
    DetectorSpec d;
    d.A_e = literal_matrix(dj, "A_e", "detector", n_s, n_s);
    d.B_e = literal_matrix(dj, "B_e", "detector", n_s, n_u);
    d.K_e = literal_matrix(dj, "K_e", "detector", n_s, n_m);
    d.C_e = literal_matrix(dj, "C_e", "detector", n_r, n_s);
    d.D_e = literal_matrix(dj, "D_e", "detector", n_r, n_u);
    d.E_e = literal_matrix(dj, "E_e", "detector", n_r, n_m);
    if (dj.contains("threshold")) s.threshold = get_number(dj.at("threshold"), "detector.threshold");
    d.threshold = s.threshold;
    s.detector = d;
  }
  if (!(s.threshold > 0.0))
    throw Error(ErrorCode::InvalidModel, "threshold must be positive",
                s.observer ? "observer.threshold" : "detector.threshold");

  // Attack
  if (!root.contains("attack")) throw Error(ErrorCode::InvalidModel, "missing section", "attack");
  const json& aj = root.at("attack");
  check_keys(aj, {"actuators", "sensors"}, "attack");
  s.attacked_actuators = parse_indices(aj, "actuators", "attack");
  s.attacked_sensors = parse_indices(aj, "sensors", "attack");
  s.attack().validate(n_u, n_m);

  // Eager checks at the nominal point.
  const PlantSpec nominal = resolve_uncertainty(s, s.uncertainty.nominal);
  s.controller.validate(n_u, n_m);
  resolve_detector(s).validate(n_u, n_m);
  (void)nominal;
  return s;
}

SystemSpec load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ojson matrix_json(const ExprMatrix& m) {
  ojson a = ojson::array();
  if (m.rows() == 0 || m.cols() == 0) return a;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto& e = m.at(i, j);
      if (e.ast)
        row.push_back(expr::to_string(*e.ast));
      else
        row.push_back(e.value);
    }
    a.push_back(row);
  }
  return a;
}

ojson matrix_json(const Matrix& m) { return matrix_json(ExprMatrix::literal(m)); }

bool entries_equal(const ExprMatrix& a, const ExprMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const auto& x = a.at(i, j);
      const auto& y = b.at(i, j);
      if (bool(x.ast) != bool(y.ast)) return false;
      if (x.ast ? !expr::equal(*x.ast, *y.ast) : x.value != y.value) return false;
    }
  return true;
}

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

}  // namespace

std::string serialize_config(const SystemSpec& s) {
  ojson root;
  root["name"] = s.name;
  root["description"] = s.description;
  ojson plant;
  plant["A"] = matrix_json(s.A);
  plant["B"] = matrix_json(s.B);
  plant["C"] = matrix_json(s.C);
  plant["C_J"] = matrix_json(s.C_J);
  plant["D_J"] = matrix_json(s.D_J);
  plant["continuous"] = s.continuous;
  if (s.Ts) plant["Ts"] = *s.Ts;
  root["plant"] = plant;
  ojson ctrl;
  ctrl["A_c"] = matrix_json(s.controller.A_c);
  ctrl["B_c"] = matrix_json(s.controller.B_c);
  ctrl["C_c"] = matrix_json(s.controller.C_c);
  ctrl["D_c"] = matrix_json(s.controller.D_c);
  root["controller"] = ctrl;
  if (s.observer) {
    ojson o;
    o["K_e"] = matrix_json(s.observer->K_e);
    o["residual"] = to_string(s.observer->residual);
    o["threshold"] = s.threshold;
    root["observer"] = o;
  } else if (s.detector) {
    ojson d;
    d["A_e"] = matrix_json(s.detector->A_e);
    d["B_e"] = matrix_json(s.detector->B_e);
    d["K_e"] = matrix_json(s.detector->K_e);
    d["C_e"] = matrix_json(s.detector->C_e);
    d["D_e"] = matrix_json(s.detector->D_e);
    d["E_e"] = matrix_json(s.detector->E_e);
    d["threshold"] = s.threshold;
    root["detector"] = d;
  }
  ojson attack;
  attack["actuators"] = s.attacked_actuators;
  attack["sensors"] = s.attacked_sensors;
  root["attack"] = attack;
  ojson unc;
  unc["params"] = ojson::array();
  ojson nominal = ojson::object();
  for (size_t i = 0; i < s.uncertainty.params.size(); ++i) {
    const auto& p = s.uncertainty.params[i];
    unc["params"].push_back({{"name", p.name}, {"low", p.low}, {"high", p.high}, {"dist", "uniform"}});
    nominal[p.name] = s.uncertainty.nominal(static_cast<Eigen::Index>(i));
  }
  unc["nominal"] = nominal;
  root["uncertainty"] = unc;
  root["allow_unstable"] = s.allow_unstable;
  return root.dump(2) + "\n";
}

bool equal(const SystemSpec& a, const SystemSpec& b) {
  if (a.name != b.name || a.description != b.description) return false;
  if (!entries_equal(a.A, b.A) || !entries_equal(a.B, b.B) || !entries_equal(a.C, b.C) ||
      !entries_equal(a.C_J, b.C_J) || !entries_equal(a.D_J, b.D_J))
    return false;
  if (a.continuous != b.continuous || a.Ts != b.Ts) return false;
  const auto& ca = a.controller;
  const auto& cb = b.controller;
  if (!same(ca.A_c, cb.A_c) || !same(ca.B_c, cb.B_c) || !same(ca.C_c, cb.C_c) ||
      !same(ca.D_c, cb.D_c))
    return false;
  if (bool(a.detector) != bool(b.detector) || bool(a.observer) != bool(b.observer)) return false;
  if (a.detector) {
    const auto& x = *a.detector;
    const auto& y = *b.detector;
    if (!same(x.A_e, y.A_e) || !same(x.B_e, y.B_e) || !same(x.K_e, y.K_e) ||
        !same(x.C_e, y.C_e) || !same(x.D_e, y.D_e) || !same(x.E_e, y.E_e))
      return false;
  }
  if (a.observer && (!same(a.observer->K_e, b.observer->K_e) ||
                     a.observer->residual != b.observer->residual))
    return false;
  if (a.threshold != b.threshold) return false;
  if (a.attacked_actuators != b.attacked_actuators || a.attacked_sensors != b.attacked_sensors)
    return false;
  if (a.uncertainty.params.size() != b.uncertainty.params.size()) return false;
  for (size_t i = 0; i < a.uncertainty.params.size(); ++i) {
    const auto& p = a.uncertainty.params[i];
    const auto& q = b.uncertainty.params[i];
    if (p.name != q.name || p.low != q.low || p.high != q.high) return false;
  }
  if (!same(a.uncertainty.nominal, b.uncertainty.nominal)) return false;
  return a.allow_unstable == b.allow_unstable;
}

// ---------------------------------------------------------------------------
// Resolution

PlantSpec resolve_uncertainty(const SystemSpec& spec, const Vector& delta) {
  const auto& u = spec.uncertainty;
  if (static_cast<size_t>(delta.size()) != u.dim())
    throw Error(ErrorCode::DimensionMismatch,
                "parameter vector has " + std::to_string(delta.size()) + " entries, expected " +
                    std::to_string(u.dim()),
                "delta");
  expr::Bindings b;
  for (size_t i = 0; i < u.dim(); ++i) {
    const auto& p = u.params[i];
    const double v = delta(static_cast<Eigen::Index>(i));
    if (!(v >= p.low && v <= p.high))
      throw Error(ErrorCode::ParameterOutOfRange,
                  p.name + "=" + std::to_string(v) + " outside [" + std::to_string(p.low) + ", " +
                      std::to_string(p.high) + "]",
                  "delta." + p.name);
    b[p.name] = v;
  }
  Matrix A = spec.A.evaluate(b, "plant.A");
  Matrix B = spec.B.evaluate(b, "plant.B");
  Matrix C = spec.C.evaluate(b, "plant.C");
  Matrix D = Matrix::Zero(C.rows(), B.cols());
  StateSpaceModel model;
  if (spec.continuous) {
    model = zoh_discretize(StateSpaceModel::continuous(A, B, C, D), *spec.Ts);
  } else {
    model = StateSpaceModel::discrete(A, B, C, D, spec.Ts.value_or(1.0));
  }
  PlantSpec plant{model, spec.C_J.evaluate(b, "plant.C_J"), spec.D_J.evaluate(b, "plant.D_J")};
  plant.validate();
  return plant;
}

DetectorSpec resolve_detector(const SystemSpec& spec) {
  if (spec.detector) {
    DetectorSpec d = *spec.detector;
    d.threshold = spec.threshold;
    return d;
  }
  const ObserverSpec& o = *spec.observer;
  const PlantSpec nom = resolve_uncertainty(spec, spec.uncertainty.nominal);
  const Matrix& Ad = nom.dynamics.A;
  const Matrix& Bd = nom.dynamics.B;
  const Matrix& Cd = nom.dynamics.C;
  const auto n_m = Cd.rows();
  DetectorSpec d;
  d.A_e = Ad - o.K_e * Cd;
  d.B_e = Bd;
  d.K_e = o.K_e;
  d.D_e = Matrix::Zero(n_m, Bd.cols());
  if (o.residual == ResidualConvention::Literal) {
    d.C_e = Cd;
    d.E_e = Matrix::Zero(n_m, n_m);
  } else {
    d.C_e = -Cd;
    d.E_e = Matrix::Identity(n_m, n_m);
  }
  d.threshold = spec.threshold;
  return d;
}

ClosedLoopRealization build_realization(const SystemSpec& spec, const Vector& delta,
                                        const DetectorSpec& det, const SysTolerances& tol) {
  const PlantSpec plant = resolve_uncertainty(spec, delta);
  ClosedLoopRealization r =
      assemble_closed_loop(plant, spec.controller, det, spec.attack(),
                           spec.allow_unstable ? StabilityPolicy::Warn : StabilityPolicy::Require,
                           tol);
  r.delta = delta;
  return r;
}

ClosedLoopRealization build_realization(const SystemSpec& spec, const Vector& delta,
                                        const SysTolerances& tol) {
  return build_realization(spec, delta, resolve_detector(spec), tol);
}

}  // namespace oogrisk
