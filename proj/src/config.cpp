#include "logicloss/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace logicloss {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

Ini Ini::parse(const std::string& text, const std::string& origin) {
  Ini ini;
  ini.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!ini.values_[section].emplace(key, value).second)
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                               key + "'");
  }
  return ini;
}

Ini Ini::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

bool Ini::has(const std::string& section, const std::string& key) const {
  auto s = values_.find(section);
  return s != values_.end() && s->second.count(key) > 0;
}

std::string Ini::get_string(const std::string& section, const std::string& key,
                            const std::string& fallback) {
  consumed_.insert({section, key});
  auto s = values_.find(section);
  if (s == values_.end()) return fallback;
  auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

long long Ini::get_int(const std::string& section, const std::string& key, long long fallback) {
  const std::string v = get_string(section, key, "");
  if (v.empty()) return fallback;
  try {
    std::size_t used = 0;
    const long long out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ": [" + section + "] " + key + " = '" + v +
                             "' is not an integer");
  }
}

double Ini::get_double(const std::string& section, const std::string& key, double fallback) {
  const std::string v = get_string(section, key, "");
  if (v.empty()) return fallback;
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ": [" + section + "] " + key + " = '" + v +
                             "' is not a number");
  }
}

bool Ini::get_bool(const std::string& section, const std::string& key, bool fallback) {
  std::string v = get_string(section, key, "");
  if (v.empty()) return fallback;
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw std::runtime_error(origin_ + ": [" + section + "] " + key + " = '" + v +
                           "' is not a boolean");
}

void Ini::check_all_consumed() const {
  for (const auto& [section, kvs] : values_) {
    for (const auto& [key, value] : kvs) {
      if (!consumed_.count({section, key}))
        throw std::runtime_error(origin_ + ": unknown key [" + section + "] " + key);
    }
  }
}

void apply_constraints(TrainConfig& config, const std::string& spec) {
  config.use_m = config.use_u = config.use_t = false;
  std::string s = trim(spec);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s.empty() || s == "none") return;
  std::istringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (part == "m") config.use_m = true;
    else if (part == "u") config.use_u = true;
    else if (part == "t") config.use_t = true;
    else throw std::runtime_error("unknown constraint dataset '" + part + "' (expected M, U, T)");
  }
}

std::string constraints_string(const TrainConfig& config) {
  std::string out;
  if (config.use_m) out += "M";
  if (config.use_u) out += out.empty() ? "U" : ",U";
  if (config.use_t) out += out.empty() ? "T" : ",T";
  return out.empty() ? "none" : out;
}

RunConfig run_config_from_ini(Ini& ini) {
  RunConfig rc;
  TrainConfig& t = rc.train;
  t.model.feature_dim = static_cast<int>(ini.get_int("model", "feature_dim", t.model.feature_dim));
  t.model.hidden_dim = static_cast<int>(ini.get_int("model", "hidden_dim", t.model.hidden_dim));
  rc.data_dir = ini.get_string("data", "dir", rc.data_dir);
  rc.rules_path = ini.get_string("data", "rules", rc.rules_path);
  t.stage1_epochs = static_cast<int>(ini.get_int("train", "stage1_epochs", t.stage1_epochs));
  t.stage1_lr = ini.get_double("train", "stage1_lr", t.stage1_lr);
  t.stage2_epochs = static_cast<int>(ini.get_int("train", "stage2_epochs", t.stage2_epochs));
  t.stage2_lr = ini.get_double("train", "stage2_lr", t.stage2_lr);
  t.batch_size = static_cast<int>(ini.get_int("train", "batch_size", t.batch_size));
  t.seed = static_cast<std::uint64_t>(ini.get_int("train", "seed", static_cast<long long>(t.seed)));
  t.adam.beta1 = ini.get_double("train", "beta1", t.adam.beta1);
  t.adam.beta2 = ini.get_double("train", "beta2", t.adam.beta2);
  t.adam.eps = ini.get_double("train", "eps_adam", t.adam.eps);
  t.use_annotation = ini.get_bool("train", "use_annotation", t.use_annotation);
  apply_constraints(t, ini.get_string("constraints", "datasets", "none"));
  t.lambda_m = ini.get_double("constraints", "lambda_m", t.lambda_m);
  t.lambda_u = ini.get_double("constraints", "lambda_u", t.lambda_u);
  t.lambda_t = ini.get_double("constraints", "lambda_t", t.lambda_t);
  t.tnorm = tnorm_from_name(ini.get_string("constraints", "tnorm", tnorm_name(t.tnorm)));
  ini.check_all_consumed();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  Ini ini = Ini::parse_file(path);
  return run_config_from_ini(ini);
}

}  // namespace logicloss
