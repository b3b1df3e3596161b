#include "avgspde/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "avgspde/errors.hpp"

namespace avgspde {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  double x = 0.0;
  const auto t = trim(text);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(x))
    throw ParameterError(key + ": expected a finite number, got '" + text + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t x = 0;
  const auto t = trim(text);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size())
    throw ParameterError(key + ": expected a non-negative integer, got '" + text + "'");
  return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  const auto t = trim(text);
  std::vector<double> out;
  if (std::count(t.begin(), t.end(), ':') == 2) {
    // start:step:stop, inclusive of stop up to round-off
    const auto a = t.find(':'), b = t.rfind(':');
    const double lo = parse_double(key, t.substr(0, a));
    const double step = parse_double(key, t.substr(a + 1, b - a - 1));
    const double hi = parse_double(key, t.substr(b + 1));
    if (!(step > 0.0) || hi < lo) throw ParameterError(key + ": range needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (n > 100000) throw ParameterError(key + ": range has too many points");
    for (std::size_t i = 0; i < n; ++i) {
      // round to 12 significant digits so 0.8 + 5*0.1 reads back as 1.3
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.12g", lo + static_cast<double>(i) * step);
      out.push_back(parse_double(key, buf));
    }
    return out;
  }
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ParameterError(key + ": list must be nonempty");
  return out;
}

void require(bool ok, const std::string& key, const std::string& what, const std::string& got) {
  if (!ok) throw ParameterError(key + ": " + what + " (got " + got + ")");
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += format_shortest(xs[i]);
  }
  return s;
}

struct Key {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

Key real_key(std::string name, double ExperimentConfig::*m, std::function<bool(double)> ok, std::string what) {
  return {std::move(name),
          [m, ok, what](ExperimentConfig& c, const std::string& k, const std::string& v) {
            const double x = parse_double(k, v);
            require(ok(x), k, what, v);
            c.*m = x;
          },
          [m](const ExperimentConfig& c) { return format_shortest(c.*m); }};
}

Key count_key(std::string name, std::size_t ExperimentConfig::*m, std::size_t lo, std::size_t hi) {
  return {std::move(name),
          [m, lo, hi](ExperimentConfig& c, const std::string& k, const std::string& v) {
            const auto x = parse_u64(k, v);
            require(x >= lo && x <= hi, k, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", v);
            c.*m = static_cast<std::size_t>(x);
          },
          [m](const ExperimentConfig& c) { return std::to_string(c.*m); }};
}

Key list_key(std::string name, std::vector<double> ExperimentConfig::*m) {
  return {std::move(name),
          [m](ExperimentConfig& c, const std::string& k, const std::string& v) {
            auto xs = parse_list(k, v);
            for (double x : xs) require(x > 0.0, k, "entries must be > 0", v);
            c.*m = std::move(xs);
          },
          [m](const ExperimentConfig& c) { return join(c.*m); }};
}

Key choice_key(std::string name, std::string ExperimentConfig::*m, std::vector<std::string> choices) {
  return {std::move(name),
          [m, choices](ExperimentConfig& c, const std::string& k, const std::string& v) {
            const auto t = trim(v);
            if (std::find(choices.begin(), choices.end(), t) == choices.end()) {
              std::string list;
              for (const auto& ch : choices) list += (list.empty() ? "" : "|") + ch;
              throw ParameterError(k + ": must be one of " + list + " (got '" + v + "')");
            }
            c.*m = t;
          },
          [m](const ExperimentConfig& c) { return c.*m; }};
}

Key text_key(std::string name, std::string ExperimentConfig::*m) {
  return {std::move(name),
          [m](ExperimentConfig& c, const std::string& k, const std::string& v) {
            const auto t = trim(v);
            require(!t.empty(), k, "must be nonempty", "''");
            c.*m = t;
          },
          [m](const ExperimentConfig& c) { return c.*m; }};
}

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    auto pos = [](double x) { return x > 0.0; };
    auto nonneg = [](double x) { return x >= 0.0; };
    auto any = [](double) { return true; };
    std::vector<Key> k;
    k.push_back(real_key("L", &ExperimentConfig::L, pos, "must be > 0"));
    k.push_back(count_key("N", &ExperimentConfig::N, 1, 1024));
    k.push_back(real_key("epsilon", &ExperimentConfig::epsilon, pos, "must be > 0"));
    k.push_back(list_key("epsilons", &ExperimentConfig::epsilons));
    k.push_back(list_key("L_grid", &ExperimentConfig::L_grid));
    k.push_back(real_key("sigma1", &ExperimentConfig::sigma1, any, ""));
    k.push_back(real_key("sigma2", &ExperimentConfig::sigma2, [](double x) { return x != 0.0; }, "must be nonzero"));
    k.push_back(choice_key("q1_kind", &ExperimentConfig::q1_kind, {"resolvent", "cylindrical"}));
    k.push_back(real_key("q1_power", &ExperimentConfig::q1_power, nonneg, "must be >= 0"));
    k.push_back(choice_key("q2_kind", &ExperimentConfig::q2_kind, {"resolvent", "cylindrical"}));
    k.push_back(real_key("q2_power", &ExperimentConfig::q2_power, nonneg, "must be >= 0"));
    k.push_back(text_key("f", &ExperimentConfig::f));
    k.push_back(text_key("g", &ExperimentConfig::g));
    k.push_back(real_key("u0_amp", &ExperimentConfig::u0_amp, any, ""));
    k.push_back(count_key("u0_mode", &ExperimentConfig::u0_mode, 1, 1024));
    k.push_back(choice_key("v0", &ExperimentConfig::v0, {"zero", "stationary"}));
    k.push_back(choice_key("scheme", &ExperimentConfig::scheme, {"auto", "exact", "general"}));
    k.push_back(real_key("T", &ExperimentConfig::T, pos, "must be > 0"));
    k.push_back(real_key("dt", &ExperimentConfig::dt, pos, "must be > 0"));
    k.push_back(real_key("dt_surrogate", &ExperimentConfig::dt_surrogate, pos, "must be > 0"));
    k.push_back(real_key("t_burn", &ExperimentConfig::t_burn, nonneg, "must be >= 0"));
    k.push_back(count_key("replicas", &ExperimentConfig::replicas, 1, 1000000));
    k.push_back(count_key("stride", &ExperimentConfig::stride, 1, 1000000000));
    k.push_back(count_key("coeffs", &ExperimentConfig::coeffs, 0, 1024));
    k.push_back(real_key("kappa", &ExperimentConfig::kappa, [](double x) { return x > 0.0 && x < 1.0; },
                         "must be in (0, 1)"));
    k.push_back({"seed",
                 [](ExperimentConfig& c, const std::string& key, const std::string& v) { c.seed = parse_u64(key, v); },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
    return k;
  }();
  return keys;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : registry())
    if (k.name == name) return &k;
  return nullptr;
}

std::vector<double> grid_range(double lo, double step, double hi) {
  return parse_list("", format_shortest(lo) + ":" + format_shortest(step) + ":" + format_shortest(hi));
}

}  // namespace

std::string format_shortest(double x) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

bool is_subcommand(std::string_view name) {
  const auto& s = subcommands();
  return std::find(s.begin(), s.end(), name) != s.end();
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& k : registry()) n.push_back(k.name);
    return n;
  }();
  return names;
}

ExperimentConfig default_config(const std::string& sub) {
  if (!is_subcommand(sub)) throw ParameterError("unknown subcommand '" + sub + "'");
  ExperimentConfig c;
  c.subcommand = sub;
  c.epsilons = {0.4, 0.2, 0.1, 0.05, 0.025};
  c.L_grid = grid_range(0.8, 0.1, 2.0);
  if (sub == "simulate") {
    // single realisation with W = (1 - d_xx)^{-1} Z
    c.q2_power = 2.0;
    c.stride = 10;
  } else if (sub == "average") {
    c.L = 1.5;
    c.T = 20.0;
    c.u0_amp = 0.1;
    c.stride = 10;
  } else if (sub == "deviation") {
    c.T = 128.0;
    c.dt = 0.02;
  } else if (sub == "convergence") {
    c.T = 2.0;
    c.dt = 2e-4;
    c.replicas = 64;
    c.u0_amp = 0.2;
    c.v0 = "stationary";
    c.stride = 10;
  } else if (sub == "bifurcation") {
    c.T = 128.0;
    c.t_burn = 28.0;
    c.dt = 0.002;
    c.u0_amp = 0.1;
    c.stride = 5;
  } else if (sub == "variance") {
    c.epsilons = {0.025, 0.05, 0.1, 0.2};
    c.T = 128.0;
    c.t_burn = 25.6;
    c.dt = 0.002;
    c.dt_surrogate = 0.02;
    c.replicas = 16;
    c.v0 = "stationary";
    c.stride = 5;
  } else if (sub == "mixing") {
    c.T = 0.01;
    c.dt = 0.01;
  } else if (sub == "benchmark") {
    c.epsilons = {0.1, 0.01, 0.001};
    c.T = 20.0;
    c.replicas = 3;
    c.dt = 0.01;
    c.dt_surrogate = 0.01;
    c.scheme = "general";
    c.v0 = "stationary";
    c.stride = 100;
  } else if (sub == "gaussianity") {
    c.epsilon = 0.05;
    c.T = 8.0;
    c.dt = 1e-3;
    c.dt_surrogate = 0.01;
    c.replicas = 256;
    c.v0 = "stationary";
    c.stride = 1000;
  }
  return c;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw ParameterError("unknown key '" + key + "'");
  k->set(cfg, key, value);
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) {
  const Key* k = find_key(key);
  if (!k) throw ParameterError("unknown key '" + key + "'");
  return k->get(cfg);
}

void validate_config(const ExperimentConfig& c) {
  if (!is_subcommand(c.subcommand)) throw ParameterError("unknown subcommand '" + c.subcommand + "'");
  if (c.u0_mode > c.N) throw ParameterError("u0_mode: must be <= N");
  if (c.coeffs > c.N) throw ParameterError("coeffs: must be <= N");
  if (c.t_burn >= c.T) throw ParameterError("t_burn: must be < T");
  if (c.dt > c.T) throw ParameterError("dt: must be <= T");
  if (c.epsilons.empty()) throw ParameterError("epsilons: must be nonempty");
  if (c.L_grid.empty()) throw ParameterError("L_grid: must be nonempty");
}

ExperimentConfig parse_config(const std::string& path, const std::string& subcommand,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg = default_config(subcommand);
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError(path + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      // run manifest: replay its resolved config
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(text);
      } catch (const nlohmann::json::exception& e) {
        throw ParameterError(path + ": malformed manifest: " + e.what());
      }
      if (!j.contains("config") || !j["config"].is_object()) throw ParameterError(path + ": manifest has no config");
      for (const auto& [k, v] : j["config"].items()) {
        if (!v.is_string()) throw ParameterError(path + ": config value for '" + k + "' is not a string");
        try {
          set_config_value(cfg, k, v.get<std::string>());
        } catch (const ParameterError& e) {
          throw ParameterError(path + ": " + e.what());
        }
      }
    } else {
      std::istringstream lines(text);
      std::string line;
      for (int lineno = 1; std::getline(lines, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string where = path + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw ParameterError(where + "malformed line, expected key=value");
        const auto key = trim(body.substr(0, eq));
        if (key.empty()) throw ParameterError(where + "malformed line, empty key");
        try {
          set_config_value(cfg, key, body.substr(eq + 1));
        } catch (const ParameterError& e) {
          throw ParameterError(where + e.what());
        }
      }
    }
  }
  for (const auto& [k, v] : overrides) {
    try {
      set_config_value(cfg, k, v);
    } catch (const ParameterError& e) {
      throw ParameterError("--" + std::string(e.what()));
    }
  }
  validate_config(cfg);
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string s;
  for (const auto& k : registry()) s += k.name + "=" + k.get(cfg) + "\n";
  return s;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : cfg.subcommand + "\n" + serialize_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace avgspde
