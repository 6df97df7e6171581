#include "gasolve/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include "gasolve/error.hpp"

namespace gasolve {

const std::map<std::string, std::string>& known_keys() {
  static const std::map<std::string, std::string> keys = {
      {"problem.schedule", "ve"},
      {"problem.T", "10"},
      {"problem.delta", "0.001"},
      {"teacher.kind", "dpmpp3m"},
      {"teacher.nfe", "20"},
      {"teacher.grid", "logsnr"},
      {"teacher.rho", "1"},
      {"data.train_size", "1400"},
      {"data.val_size", "1000"},
      {"student.N", ""},
      {"student.mode", "gs"},
      {"train.lr", "0.001"},
      {"train.disc_lr", "0.00001"},
      {"train.beta1", "0.9"},
      {"train.beta2", "0.999"},
      {"train.weight_decay", "0"},
      {"train.ema_decay", "0.999"},
      {"train.clip_norm", "1"},
      {"train.adv_weight", "1"},
      {"train.lambda1", "0.1"},
      {"train.lambda2", "0.1"},
      {"train.batch_size", "24"},
      {"train.iterations", "2000"},
      {"train.distance", "l2"},
      {"train.disc_init", "random"},
      {"seed", "0"},
      {"output.dir", "."},
      {"order.steps", "10,20,40,80"},
      {"order.x", "3"},
      {"sweep.adv_weights", "0,0.1,1"},
  };
  return keys;
}

bool is_known_key(const std::string& key) {
  static const std::regex mixture_key(R"(mixture\.(0|[1-9][0-9]*)\.(weight|mean|var))");
  return known_keys().count(key) > 0 || std::regex_match(key, mixture_key);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));
    if (cfg.entries_.count(key) > 0) fail(ErrorKind::Config, "duplicate key '" + key + "'");
    cfg.set(key, value);
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Config::set(const std::string& key, const std::string& value) {
  if (!is_known_key(key)) fail(ErrorKind::Config, "unknown config key '" + key + "'");
  entries_[key] = value;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

void Config::require(const std::string& key) const {
  if (has(key)) return;
  const auto it = known_keys().find(key);
  if (it == known_keys().end() || it->second.empty()) {
    fail(ErrorKind::Config, "missing required key '" + key + "'");
  }
}

std::string Config::get(const std::string& key) const {
  if (const auto it = entries_.find(key); it != entries_.end()) return it->second;
  require(key);
  return known_keys().at(key);
}

double Config::get_double(const std::string& key) const {
  return parse_double(get(key), key);
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const auto s = get(key);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    fail(ErrorKind::Config, "key '" + key + "' expects a non-negative integer, got '" + s + "'");
  }
  return v;
}

std::size_t Config::get_size(const std::string& key) const {
  return static_cast<std::size_t>(get_u64(key));
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  return parse_doubles(get(key), key);
}

std::vector<std::size_t> Config::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (double v : get_doubles(key)) {
    if (!(v >= 1.0) || v != std::floor(v)) {
      fail(ErrorKind::Config, "key '" + key + "' expects positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string Config::echo() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

double parse_double(std::string_view text, const std::string& what) {
  const auto s = trim(text);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    fail(ErrorKind::Parse, "'" + what + "' expects a number, got '" + s + "'");
  }
  return v;
}

std::vector<double> parse_doubles(std::string_view text, const std::string& what) {
  std::vector<double> out;
  const auto s = trim(text);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(parse_double(std::string_view(s).substr(start, comma - start), what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace gasolve
