#include "wsim/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace wsim::config {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "' needs a number, got '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "' needs an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "' needs an unsigned integer, got '" + value +
                                "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config key '" + key +
                              "' needs true/false, got '" + value + "'");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::HomScan: return "hom_scan";
    case Scenario::EprQst: return "epr_qst";
    case Scenario::WConversion: return "w_conversion";
    case Scenario::ErrorBudget: return "error_budget";
    case Scenario::ParamSweep: return "param_sweep";
  }
  throw std::invalid_argument("unknown scenario");
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "hom_scan") return Scenario::HomScan;
  if (name == "epr_qst") return Scenario::EprQst;
  if (name == "w_conversion") return Scenario::WConversion;
  if (name == "error_budget") return Scenario::ErrorBudget;
  if (name == "param_sweep") return Scenario::ParamSweep;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

ExperimentConfig::ExperimentConfig()
    : mu((7.0 + std::sqrt(17.0)) / 16.0), xi0(std::sqrt(0.885)) {}

protocol::PdbsParams ExperimentConfig::pdbs() const {
  if (optimal_pdbs) return protocol::optimal_params();
  return {mu, nu};
}

void ExperimentConfig::validate() const {
  require(mu >= 0.0 && mu <= 1.0, "mu must lie in [0, 1]");
  require(nu >= 0.0 && nu <= 1.0, "nu must lie in [0, 1]");
  require(xi0 >= 0.0 && xi0 <= 1.0, "xi0 must lie in [0, 1]");
  require(f12 >= 0.25 && f12 <= 1.0, "f12 must lie in [0.25, 1]");
  require(f34 >= 0.25 && f34 <= 1.0, "f34 must lie in [0.25, 1]");
  require(total_scale > 0.0, "total_scale must be positive");
  require(mc_samples >= 2, "mc_samples must be at least 2");
  require(acquisition_time > 0.0, "acquisition_time must be positive");
  require(lc_um > 0.0, "lc_um must be positive");
  require(delay_points >= 2, "delay_points must be at least 2");
  require(delay_max_um > delay_min_um, "delay range must be nonempty");
  require(hom_transmission > 0.0 && hom_transmission < 1.0,
          "hom_transmission must lie strictly between 0 and 1");
  require(grid_points >= 2, "grid_points must be at least 2");
  require(mu_min >= 0.0 && mu_min <= mu_max && mu_max <= 1.0,
          "mu range must satisfy 0 <= mu_min <= mu_max <= 1");
  require(nu_min >= 0.0 && nu_min <= nu_max && nu_max <= 1.0,
          "nu range must satisfy 0 <= nu_min <= nu_max <= 1");
  require(!output_dir.empty(), "output_dir must not be empty");
  const bool stochastic = scenario == Scenario::EprQst ||
                          scenario == Scenario::WConversion ||
                          scenario == Scenario::ErrorBudget;
  require(!stochastic || seed.has_value(),
          "scenario " + scenario_name(scenario) +
              " is stochastic and needs an explicit seed");
}

void apply_key(ExperimentConfig& cfg, const std::string& key,
               const std::string& value) {
  if (key == "scenario") {
    cfg.scenario = scenario_from_name(value);
  } else if (key == "mu") {
    cfg.mu = parse_double(key, value);
  } else if (key == "nu") {
    cfg.nu = parse_double(key, value);
  } else if (key == "optimal_pdbs") {
    cfg.optimal_pdbs = parse_bool(key, value);
  } else if (key == "xi0") {
    cfg.xi0 = parse_double(key, value);
  } else if (key == "f12") {
    cfg.f12 = parse_double(key, value);
  } else if (key == "f34") {
    cfg.f34 = parse_double(key, value);
  } else if (key == "total_scale") {
    cfg.total_scale = parse_double(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "mc_samples") {
    cfg.mc_samples = parse_int(key, value);
  } else if (key == "noise") {
    if (value == "poisson")
      cfg.noise = Noise::Poisson;
    else if (value == "exact")
      cfg.noise = Noise::Exact;
    else
      throw std::invalid_argument("noise must be poisson or exact, got '" +
                                  value + "'");
  } else if (key == "branch") {
    if (value == "H5")
      cfg.branch = protocol::Branch::H5;
    else if (value == "V5")
      cfg.branch = protocol::Branch::V5;
    else
      throw std::invalid_argument("branch must be H5 or V5, got '" + value +
                                  "'");
  } else if (key == "scheme") {
    if (value == "standard")
      cfg.scheme = tomography::SettingScheme::Standard;
    else if (value == "overcomplete")
      cfg.scheme = tomography::SettingScheme::Overcomplete;
    else
      throw std::invalid_argument(
          "scheme must be standard or overcomplete, got '" + value + "'");
  } else if (key == "acquisition_time") {
    cfg.acquisition_time = parse_double(key, value);
  } else if (key == "lc_um") {
    cfg.lc_um = parse_double(key, value);
  } else if (key == "delay_min_um") {
    cfg.delay_min_um = parse_double(key, value);
  } else if (key == "delay_max_um") {
    cfg.delay_max_um = parse_double(key, value);
  } else if (key == "delay_points") {
    cfg.delay_points = parse_int(key, value);
  } else if (key == "hom_transmission") {
    cfg.hom_transmission = parse_double(key, value);
  } else if (key == "grid_points") {
    cfg.grid_points = parse_int(key, value);
  } else if (key == "mu_min") {
    cfg.mu_min = parse_double(key, value);
  } else if (key == "mu_max") {
    cfg.mu_max = parse_double(key, value);
  } else if (key == "nu_min") {
    cfg.nu_min = parse_double(key, value);
  } else if (key == "nu_max") {
    cfg.nu_max = parse_double(key, value);
  } else if (key == "output_dir") {
    if (value.empty())
      throw std::invalid_argument("output_dir must not be empty");
    cfg.output_dir = value;
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

ExperimentConfig load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file " + path);
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

report::Json to_json(const ExperimentConfig& cfg) {
  report::Json j = report::Json::object();
  j["scenario"] = scenario_name(cfg.scenario);
  j["mu"] = cfg.mu;
  j["nu"] = cfg.nu;
  j["optimal_pdbs"] = cfg.optimal_pdbs;
  j["xi0"] = cfg.xi0;
  j["f12"] = cfg.f12;
  j["f34"] = cfg.f34;
  j["total_scale"] = cfg.total_scale;
  if (cfg.seed)
    j["seed"] = *cfg.seed;
  else
    j["seed"] = nullptr;
  j["mc_samples"] = cfg.mc_samples;
  j["noise"] = cfg.noise == Noise::Poisson ? "poisson" : "exact";
  j["branch"] = cfg.branch == protocol::Branch::H5 ? "H5" : "V5";
  j["scheme"] = cfg.scheme == tomography::SettingScheme::Standard
                    ? "standard"
                    : "overcomplete";
  j["acquisition_time"] = cfg.acquisition_time;
  j["lc_um"] = cfg.lc_um;
  j["delay_min_um"] = cfg.delay_min_um;
  j["delay_max_um"] = cfg.delay_max_um;
  j["delay_points"] = cfg.delay_points;
  j["hom_transmission"] = cfg.hom_transmission;
  j["grid_points"] = cfg.grid_points;
  j["mu_min"] = cfg.mu_min;
  j["mu_max"] = cfg.mu_max;
  j["nu_min"] = cfg.nu_min;
  j["nu_max"] = cfg.nu_max;
  j["output_dir"] = cfg.output_dir;
  return j;
}

ExperimentConfig from_json(const report::Json& j) {
  ExperimentConfig cfg;
  cfg.scenario = scenario_from_name(j.at("scenario").get<std::string>());
  cfg.mu = j.at("mu").get<double>();
  cfg.nu = j.at("nu").get<double>();
  cfg.optimal_pdbs = j.at("optimal_pdbs").get<bool>();
  cfg.xi0 = j.at("xi0").get<double>();
  cfg.f12 = j.at("f12").get<double>();
  cfg.f34 = j.at("f34").get<double>();
  cfg.total_scale = j.at("total_scale").get<double>();
  if (j.at("seed").is_null())
    cfg.seed.reset();
  else
    cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.mc_samples = j.at("mc_samples").get<int>();
  apply_key(cfg, "noise", j.at("noise").get<std::string>());
  apply_key(cfg, "branch", j.at("branch").get<std::string>());
  apply_key(cfg, "scheme", j.at("scheme").get<std::string>());
  cfg.acquisition_time = j.at("acquisition_time").get<double>();
  cfg.lc_um = j.at("lc_um").get<double>();
  cfg.delay_min_um = j.at("delay_min_um").get<double>();
  cfg.delay_max_um = j.at("delay_max_um").get<double>();
  cfg.delay_points = j.at("delay_points").get<int>();
  cfg.hom_transmission = j.at("hom_transmission").get<double>();
  cfg.grid_points = j.at("grid_points").get<int>();
  cfg.mu_min = j.at("mu_min").get<double>();
  cfg.mu_max = j.at("mu_max").get<double>();
  cfg.nu_min = j.at("nu_min").get<double>();
  cfg.nu_max = j.at("nu_max").get<double>();
  cfg.output_dir = j.at("output_dir").get<std::string>();
  return cfg;
}

}  // namespace wsim::config
