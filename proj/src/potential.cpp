#include "dwelltime/potential.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "dwelltime/errors.hpp"

namespace dwelltime {

namespace {

const std::map<PotentialKind, std::set<std::string>>& allowed_parameters() {
  static const std::map<PotentialKind, std::set<std::string>> table = {
      {PotentialKind::square_well, {"V0", "a"}},
      {PotentialKind::rectangular_barrier_1d, {"V0", "L"}},
      {PotentialKind::gaussian, {"V0", "sigma", "cutoff"}},
      {PotentialKind::woods_saxon, {"V0", "R", "diffuseness", "cutoff"}},
      {PotentialKind::tabulated, {"cutoff"}},
  };
  return table;
}

}  // namespace

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::square_well: return "square_well";
    case PotentialKind::rectangular_barrier_1d: return "rectangular_barrier_1d";
    case PotentialKind::gaussian: return "gaussian";
    case PotentialKind::woods_saxon: return "woods_saxon";
    case PotentialKind::tabulated: return "tabulated";
  }
  return "unknown";
}

PotentialKind potential_kind_from_string(const std::string& name) {
  if (name == "square_well") return PotentialKind::square_well;
  if (name == "rectangular_barrier_1d") return PotentialKind::rectangular_barrier_1d;
  if (name == "gaussian") return PotentialKind::gaussian;
  if (name == "woods_saxon") return PotentialKind::woods_saxon;
  if (name == "tabulated") return PotentialKind::tabulated;
  throw ConfigError("unknown potential kind '" + name + "'");
}

PotentialSpec::PotentialSpec() : PotentialSpec(square_well(0.0, 1.0)) {}

PotentialSpec PotentialSpec::square_well(double depth, double radius) {
  return from_parameters(PotentialKind::square_well, {{"V0", depth}, {"a", radius}}, radius);
}

PotentialSpec PotentialSpec::rectangular_barrier(double height, double width) {
  return from_parameters(PotentialKind::rectangular_barrier_1d, {{"V0", height}, {"L", width}}, width);
}

PotentialSpec PotentialSpec::gaussian(double depth, double sigma, double cutoff) {
  return from_parameters(PotentialKind::gaussian, {{"V0", depth}, {"sigma", sigma}}, cutoff);
}

PotentialSpec PotentialSpec::woods_saxon(double depth, double radius, double diffuseness, double cutoff) {
  return from_parameters(PotentialKind::woods_saxon,
                         {{"V0", depth}, {"R", radius}, {"diffuseness", diffuseness}}, cutoff);
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> r, std::vector<double> v, double cutoff) {
  return from_parameters(PotentialKind::tabulated, {}, cutoff, std::move(r), std::move(v));
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> r, std::vector<double> v) {
  const double cutoff = r.empty() ? 0.0 : r.back();
  return tabulated(std::move(r), std::move(v), cutoff);
}

PotentialSpec PotentialSpec::from_parameters(PotentialKind kind, std::map<std::string, double> params,
                                             double support_radius, std::vector<double> r,
                                             std::vector<double> v) {
  const auto& allowed = allowed_parameters().at(kind);
  for (const auto& [name, value] : params) {
    if (!allowed.count(name)) {
      throw ConfigError("unknown parameter '" + name + "' for potential kind " + to_string(kind));
    }
    if (!std::isfinite(value)) throw ConfigError("parameter '" + name + "' is not finite");
  }

  PotentialSpec spec{Raw{}};
  spec.kind_ = kind;

  // The support radius of the sharp kinds is their edge; an explicit cutoff
  // parameter is accepted for the smooth and tabulated kinds.
  if (auto it = params.find("cutoff"); it != params.end()) {
    if (support_radius > 0.0 && support_radius != it->second) {
      throw ConfigError("conflicting cutoff and support_radius");
    }
    support_radius = it->second;
    params.erase(it);
  }
  switch (kind) {
    case PotentialKind::square_well:
      if (params.count("a") && support_radius > 0.0 && support_radius != params.at("a")) {
        throw ConfigError("square_well support_radius must equal a");
      }
      if (params.count("a")) support_radius = params.at("a");
      break;
    case PotentialKind::rectangular_barrier_1d:
      if (params.count("L") && support_radius > 0.0 && support_radius != params.at("L")) {
        throw ConfigError("rectangular_barrier_1d support_radius must equal L");
      }
      if (params.count("L")) support_radius = params.at("L");
      break;
    case PotentialKind::tabulated:
      if (support_radius <= 0.0 && !r.empty()) support_radius = r.back();
      break;
    default:
      break;
  }
  spec.params_ = std::move(params);
  spec.support_ = support_radius;
  spec.table_r_ = std::move(r);
  spec.table_v_ = std::move(v);
  spec.validate();
  return spec;
}

double PotentialSpec::parameter(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw ConfigError("potential " + to_string(kind_) + " has no parameter '" + name + "'");
  }
  return it->second;
}

void PotentialSpec::validate() const {
  auto require = [&](const char* name) {
    if (!params_.count(name)) {
      throw ConfigError(std::string("missing parameter '") + name + "' for " + to_string(kind_));
    }
    return params_.at(name);
  };
  auto positive = [&](const char* name) {
    if (require(name) <= 0.0) throw ConfigError(std::string("parameter '") + name + "' must be > 0");
  };
  if (!(support_ > 0.0) || !std::isfinite(support_)) {
    throw ConfigError("support radius must be positive and finite");
  }
  switch (kind_) {
    case PotentialKind::square_well:
      require("V0");
      positive("a");
      break;
    case PotentialKind::rectangular_barrier_1d:
      require("V0");
      positive("L");
      break;
    case PotentialKind::gaussian:
      require("V0");
      positive("sigma");
      break;
    case PotentialKind::woods_saxon:
      require("V0");
      positive("R");
      positive("diffuseness");
      break;
    case PotentialKind::tabulated: {
      if (table_r_.size() < 2 || table_r_.size() != table_v_.size()) {
        throw ConfigError("tabulated potential needs matching r and v arrays with >= 2 nodes");
      }
      if (table_r_.front() < 0.0) throw ConfigError("tabulated grid must start at r >= 0");
      for (std::size_t i = 1; i < table_r_.size(); ++i) {
        if (!(table_r_[i] > table_r_[i - 1])) {
          throw ConfigError("tabulated grid must be strictly increasing");
        }
      }
      for (double value : table_v_) {
        if (!std::isfinite(value)) throw ConfigError("tabulated values must be finite");
      }
      if (support_ > table_r_.back()) {
        throw ConfigError("tabulated support radius exceeds the last table node");
      }
      break;
    }
  }
}

double PotentialSpec::formula(double r) const {
  switch (kind_) {
    case PotentialKind::square_well:
      return -params_.at("V0");
    case PotentialKind::rectangular_barrier_1d:
      return params_.at("V0");
    case PotentialKind::gaussian: {
      const double s = params_.at("sigma");
      return -params_.at("V0") * std::exp(-r * r / (2.0 * s * s));
    }
    case PotentialKind::woods_saxon:
      return -params_.at("V0") / (1.0 + std::exp((r - params_.at("R")) / params_.at("diffuseness")));
    case PotentialKind::tabulated: {
      if (r <= table_r_.front()) return table_v_.front();
      auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
      if (it == table_r_.end()) return table_v_.back();
      const auto hi = static_cast<std::size_t>(it - table_r_.begin());
      const std::size_t lo = hi - 1;
      if (r == table_r_[lo]) return table_v_[lo];
      const double t = (r - table_r_[lo]) / (table_r_[hi] - table_r_[lo]);
      return table_v_[lo] + t * (table_v_[hi] - table_v_[lo]);
    }
  }
  return 0.0;
}

double PotentialSpec::evaluate(double r) const {
  if (r < 0.0 || std::isnan(r)) throw DomainError("potential evaluated at negative radius");
  if (r >= support_) return 0.0;
  return formula(r);
}

double PotentialSpec::limit(double r, Side side) const {
  if (r < 0.0) throw DomainError("potential evaluated at negative radius");
  if (r > support_ || (r == support_ && side == Side::above)) return 0.0;
  return formula(r);
}

std::vector<double> PotentialSpec::breakpoints() const {
  std::vector<double> points;
  if (kind_ == PotentialKind::tabulated) {
    for (double node : table_r_) {
      if (node > 0.0 && node < support_) points.push_back(node);
    }
  }
  points.push_back(support_);
  return points;
}

double PotentialSpec::max_abs_value() const {
  switch (kind_) {
    case PotentialKind::square_well:
    case PotentialKind::rectangular_barrier_1d:
    case PotentialKind::gaussian:
      return std::abs(params_.at("V0"));
    case PotentialKind::woods_saxon:
      return std::abs(formula(0.0));
    case PotentialKind::tabulated: {
      double m = 0.0;
      for (std::size_t i = 0; i < table_r_.size(); ++i) {
        if (table_r_[i] <= support_) m = std::max(m, std::abs(table_v_[i]));
      }
      return std::max(m, std::abs(formula(support_)));
    }
  }
  return 0.0;
}

bool PotentialSpec::is_zero() const { return max_abs_value() == 0.0; }

double evaluate(const PotentialSpec& potential, double r) { return potential.evaluate(r); }

double support_radius(const PotentialSpec& potential) { return potential.support_radius(); }

void to_json(nlohmann::json& j, const PotentialSpec& potential) {
  j = nlohmann::json{{"kind", to_string(potential.kind())},
                     {"params", potential.parameters()},
                     {"support_radius", potential.support_radius()}};
  if (potential.kind() == PotentialKind::tabulated) {
    j["r"] = potential.table_r();
    j["v"] = potential.table_v();
  }
}

PotentialSpec potential_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("potential: expected an object");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("potential.kind: expected a string");
  }
  const PotentialKind kind = potential_kind_from_string(j["kind"].get<std::string>());

  std::map<std::string, double> params;
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ConfigError("potential.params: expected an object of numbers");
    for (const auto& [name, value] : j["params"].items()) {
      if (!value.is_number()) throw ConfigError("potential.params." + name + ": expected a number");
      params[name] = value.get<double>();
    }
  }
  double support = 0.0;
  if (j.contains("support_radius")) {
    if (!j["support_radius"].is_number()) {
      throw ConfigError("potential.support_radius: expected a number");
    }
    support = j["support_radius"].get<double>();
  }
  std::vector<double> r;
  std::vector<double> v;
  if (kind == PotentialKind::tabulated) {
    for (const char* key : {"r", "v"}) {
      if (!j.contains(key) || !j[key].is_array()) {
        throw ConfigError(std::string("potential.") + key + ": expected an array of numbers");
      }
      for (const auto& x : j[key]) {
        if (!x.is_number()) throw ConfigError(std::string("potential.") + key + ": expected numbers");
      }
    }
    r = j["r"].get<std::vector<double>>();
    v = j["v"].get<std::vector<double>>();
  }
  return PotentialSpec::from_parameters(kind, std::move(params), support, std::move(r), std::move(v));
}

}  // namespace dwelltime
