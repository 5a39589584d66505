#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "oogrisk/error.hpp"
#include "oogrisk/risk.hpp"

namespace oogrisk {

namespace {

using Json = nlohmann::ordered_json;

std::string number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(k).dump() + ": ";
        write(v, out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        write(v, out, depth + 1);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      out += number(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

Json vec(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector to_vec(const Json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> get_opt(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

Boundedness parse_boundedness(const std::string& s) {
  for (auto b : {Boundedness::BoundedByNoUnitCircleZeros, Boundedness::BoundedBySharedZeros,
                 Boundedness::Unbounded, Boundedness::Inconclusive})
    if (s == to_string(b)) return b;
  throw Error(ErrorCode::InvalidArgument, "unknown boundedness '" + s + "'", "boundedness");
}

}  // namespace

std::string report_to_json(const RiskReport& r, bool include_timings) {
  Json j;
  j["schema"] = r.schema;
  j["mode"] = to_string(r.mode);
  j["system"] = r.system;
  j["residual_convention"] = r.residual_convention;
  j["allow_unstable"] = r.allow_unstable;
  j["assumption1_holds"] = r.assumption1_holds;
  j["max_spectral_radius"] = r.max_spectral_radius;

  Json sc;
  sc["params"] = r.params;
  sc["method"] = to_string(r.method);
  sc["seed"] = r.seed;
  sc["n"] = r.n;
  Json deltas = Json::array();
  for (const auto& d : r.deltas) deltas.push_back(vec(d));
  sc["deltas"] = deltas;
  j["scenarios"] = sc;

  if (r.mode == RiskMode::VaR) {
    j["beta"] = r.beta;
    j["var"] = opt(r.gamma_value);
    j["var_k"] = r.var_k;
    j["n_bounded"] = r.n_bounded;
  } else {
    j["lambda"] = r.lambda;
    j["beta"] = r.beta;
    j["gamma_ra"] = opt(r.gamma_value);
    j["gamma"] = vec(r.gamma_vector);
    j["support_count"] = r.support_count;
    j["epsilon"] = opt(r.epsilon_posteriori);
  }
  j["boundedness"] = to_string(r.boundedness);
  j["boundedness_detail"] = r.boundedness_detail;

  Json s;
  s["status"] = r.solver_status;
  s["iterations"] = r.solver_iterations;
  s["max_constraint_eig"] = r.max_constraint_eig;
  s["relative_gap"] = r.relative_gap;
  if (r.mode == RiskMode::ExpectedLoss) {
    s["p_min_eig"] = r.p_min_eig;
    s["p_max_eig"] = r.p_max_eig;
  }
  j["solver"] = s;

  if (r.mode == RiskMode::VaR) {
    Json per = Json::array();
    for (const auto& o : r.per_scenario) {
      Json e;
      e["delta"] = vec(o.delta);
      e["gamma"] = opt(o.gamma);
      e["boundedness"] = to_string(o.boundedness);
      e["solver_status"] = o.solver_status;
      e["iterations"] = o.iterations;
      e["used_bisection"] = o.used_bisection;
      per.push_back(e);
    }
    j["per_scenario"] = per;
  }
  if (r.hoeffding_n1) j["hoeffding_n1"] = *r.hoeffding_n1;
  if (include_timings) {
    Json t;
    t["assembly"] = r.timings.assembly;
    t["boundedness"] = r.timings.boundedness;
    t["solve"] = r.timings.solve;
    t["total"] = r.timings.total;
    j["timings"] = t;
  }
  std::string out;
  write(j, out, 0);
  out += "\n";
  return out;
}

RiskReport report_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, e.what(), "report");
  }
  try {
    RiskReport r;
    r.schema = j.at("schema").get<int>();
    if (r.schema != 1)
      throw Error(ErrorCode::InvalidArgument, "unsupported schema " + std::to_string(r.schema),
                  "schema");
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "var")
      r.mode = RiskMode::VaR;
    else if (mode == "expected-loss")
      r.mode = RiskMode::ExpectedLoss;
    else
      throw Error(ErrorCode::InvalidArgument, "unknown mode '" + mode + "'", "mode");
    r.system = j.at("system").get<std::string>();
    r.residual_convention = j.at("residual_convention").get<std::string>();
    r.allow_unstable = j.at("allow_unstable").get<bool>();
    r.assumption1_holds = j.at("assumption1_holds").get<bool>();
    r.max_spectral_radius = j.at("max_spectral_radius").get<double>();

    const Json& sc = j.at("scenarios");
    r.params = sc.at("params").get<std::vector<std::string>>();
    r.method = sc.at("method").get<std::string>() == "iid" ? SamplingMethod::IID : SamplingMethod::Grid;
    r.seed = sc.at("seed").get<std::uint64_t>();
    r.n = sc.at("n").get<long long>();
    for (const auto& d : sc.at("deltas")) r.deltas.push_back(to_vec(d));

    r.beta = j.at("beta").get<double>();
    if (r.mode == RiskMode::VaR) {
      r.gamma_value = get_opt<double>(j, "var");
      r.var_k = j.at("var_k").get<long long>();
      r.n_bounded = j.at("n_bounded").get<long long>();
      for (const auto& e : j.at("per_scenario")) {
        ScenarioOutcome o;
        o.delta = to_vec(e.at("delta"));
        o.gamma = get_opt<double>(e, "gamma");
        o.boundedness = parse_boundedness(e.at("boundedness").get<std::string>());
        o.solver_status = e.at("solver_status").get<std::string>();
        o.iterations = e.at("iterations").get<int>();
        o.used_bisection = e.at("used_bisection").get<bool>();
        r.per_scenario.push_back(o);
      }
    } else {
      r.lambda = j.at("lambda").get<double>();
      r.gamma_value = get_opt<double>(j, "gamma_ra");
      r.gamma_vector = to_vec(j.at("gamma"));
      r.support_count = j.at("support_count").get<long long>();
      r.epsilon_posteriori = get_opt<double>(j, "epsilon");
    }
    r.boundedness = parse_boundedness(j.at("boundedness").get<std::string>());
    r.boundedness_detail = j.at("boundedness_detail").get<std::string>();

    const Json& s = j.at("solver");
    r.solver_status = s.at("status").get<std::string>();
    r.solver_iterations = s.at("iterations").get<int>();
    r.max_constraint_eig = s.at("max_constraint_eig").get<double>();
    r.relative_gap = s.at("relative_gap").get<double>();
    if (r.mode == RiskMode::ExpectedLoss) {
      r.p_min_eig = s.at("p_min_eig").get<double>();
      r.p_max_eig = s.at("p_max_eig").get<double>();
    }
    r.hoeffding_n1 = get_opt<long long>(j, "hoeffding_n1");
    if (j.contains("timings")) {
      const Json& t = j.at("timings");
      r.timings.assembly = t.at("assembly").get<double>();
      r.timings.boundedness = t.at("boundedness").get<double>();
      r.timings.solve = t.at("solve").get<double>();
      r.timings.total = t.at("total").get<double>();
    }
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, e.what(), "report");
  }
}

}  // namespace oogrisk
