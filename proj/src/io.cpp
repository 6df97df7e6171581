#include "gasolve/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "gasolve/config.hpp"
#include "gasolve/error.hpp"

namespace gasolve {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_u64(std::string_view s, const std::string& what) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    fail(ErrorKind::Parse, "'" + what + "' expects a non-negative integer, got '" +
                               std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string serialize_dataset(const Dataset& data, const std::string& header_extra) {
  std::string out = "# gasolve-dataset v1 d=" + std::to_string(data.dim) +
                    " n=" + std::to_string(data.size()) +
                    " seed=" + std::to_string(data.seed);
  if (!header_extra.empty()) out += " " + header_extra;
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += format_doubles(data.x_T[i]);
    out += ',';
    out += format_doubles(data.target[i]);
    out += '\n';
  }
  return out;
}

Dataset parse_dataset(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Parse, "dataset file is empty");
  const auto tokens = split(line, ' ');
  if (tokens.size() < 3 || tokens[0] != "#" || tokens[1] != "gasolve-dataset") {
    fail(ErrorKind::Parse, "missing '# gasolve-dataset' header");
  }
  if (tokens[2] != "v" + std::to_string(kDatasetVersion)) {
    fail(ErrorKind::Version, "unsupported dataset version '" + tokens[2] + "'");
  }
  std::map<std::string, std::string> fields;
  for (std::size_t i = 3; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq != std::string::npos) fields[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
  }
  for (const char* key : {"d", "n", "seed"}) {
    if (fields.count(key) == 0) {
      fail(ErrorKind::Parse, std::string("dataset header lacks '") + key + "='");
    }
  }
  Dataset data;
  data.dim = parse_u64(fields["d"], "d");
  data.seed = parse_u64(fields["seed"], "seed");
  const auto rows = parse_u64(fields["n"], "n");
  if (data.dim == 0) fail(ErrorKind::Parse, "dataset dimension must be positive");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto values = parse_doubles(line, "dataset line " + std::to_string(lineno));
    if (values.size() != 2 * data.dim) {
      fail(ErrorKind::Length, "dataset line " + std::to_string(lineno) + " has " +
                                  std::to_string(values.size()) + " values, expected " +
                                  std::to_string(2 * data.dim));
    }
    data.x_T.emplace_back(values.begin(), values.begin() + data.dim);
    data.target.emplace_back(values.begin() + data.dim, values.end());
  }
  if (data.size() != rows) {
    fail(ErrorKind::Length, "dataset declares " + std::to_string(rows) + " rows but holds " +
                                std::to_string(data.size()));
  }
  return data;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data,
                   const std::string& header_extra) {
  write_text(path, serialize_dataset(data, header_extra));
}

Dataset read_dataset(const std::filesystem::path& path) { return parse_dataset(read_text(path)); }

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const auto& s = ckpt.state;
  std::ostringstream out;
  out << "# gasolve-ckpt v" << ckpt.version << '\n';
  out << "activation " << ckpt.activation << '\n';
  for (const auto& line : ckpt.config) out << "config " << line << '\n';
  out << "iteration " << s.iteration << '\n';
  out << "N " << s.params.N << '\n';
  out << "dim " << ckpt.dim << '\n';
  out << "mode " << to_string(ckpt.mode) << '\n';
  auto array = [&](const char* name, const Vec& v) {
    out << name;
    if (!v.empty()) out << ' ' << format_doubles(v);
    out << '\n';
  };
  array("theta", s.params.theta);
  array("xi", s.params.xi);
  array("a_diag", s.params.a_diag);
  array("a_off", s.params.a_off);
  array("c_recent", s.params.c_recent);
  array("c_old", s.params.c_old);
  array("ema", s.ema.shadow);
  array("adam_m", s.adam.m);
  array("adam_v", s.adam.v);
  out << "adam_step " << s.adam.step << '\n';
  if (ckpt.mode == StudentMode::Gas) {
    array("disc", s.disc.weights());
    array("disc_adam_m", s.disc_adam.m);
    array("disc_adam_v", s.disc_adam.v);
    out << "disc_adam_step " << s.disc_adam.step << '\n';
  }
  return out.str();
}

Checkpoint parse_checkpoint(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Parse, "checkpoint is empty");
  const std::string magic = "# gasolve-ckpt v";
  if (line.rfind(magic, 0) != 0) fail(ErrorKind::Parse, "missing '# gasolve-ckpt' header");
  Checkpoint ckpt;
  ckpt.version = static_cast<int>(parse_u64(line.substr(magic.size()), "version"));
  if (ckpt.version != kCheckpointVersion) {
    fail(ErrorKind::Version, "unsupported checkpoint version " + std::to_string(ckpt.version) +
                                 " (this build reads v" +
                                 std::to_string(kCheckpointVersion) + ")");
  }

  std::map<std::string, std::string> scalars;
  std::map<std::string, Vec> arrays;
  static const std::vector<std::string> scalar_names = {"activation", "iteration", "N",
                                                        "dim",        "mode",      "adam_step",
                                                        "disc_adam_step"};
  static const std::vector<std::string> array_names = {
      "theta", "xi",     "a_diag", "a_off", "c_recent",    "c_old",
      "ema",   "adam_m", "adam_v", "disc",  "disc_adam_m", "disc_adam_v"};
  auto is_one_of = [](const std::vector<std::string>& names, const std::string& n) {
    for (const auto& x : names) {
      if (x == n) return true;
    }
    return false;
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    const std::string name = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? std::string() : line.substr(sp + 1);
    if (name == "config") {
      ckpt.config.push_back(rest);
    } else if (is_one_of(scalar_names, name)) {
      if (scalars.count(name) > 0) fail(ErrorKind::Parse, "duplicate entry '" + name + "'");
      scalars[name] = rest;
    } else if (is_one_of(array_names, name)) {
      if (arrays.count(name) > 0) fail(ErrorKind::Parse, "duplicate array '" + name + "'");
      arrays[name] = parse_doubles(rest, name);
    } else {
      fail(ErrorKind::UnknownArray, "unknown checkpoint array '" + name + "'");
    }
  }

  auto scalar = [&](const std::string& name) -> const std::string& {
    const auto it = scalars.find(name);
    if (it == scalars.end()) fail(ErrorKind::Parse, "checkpoint lacks '" + name + "'");
    return it->second;
  };
  auto array = [&](const std::string& name, std::size_t expected) -> Vec {
    const auto it = arrays.find(name);
    if (it == arrays.end()) fail(ErrorKind::Parse, "checkpoint lacks array '" + name + "'");
    if (it->second.size() != expected) {
      fail(ErrorKind::Length, "array '" + name + "' has " + std::to_string(it->second.size()) +
                                  " values, expected " + std::to_string(expected));
    }
    return it->second;
  };

  ckpt.activation = scalar("activation");
  if (ckpt.activation != kActivationName) {
    fail(ErrorKind::Unsupported, "checkpoint discriminator activation '" + ckpt.activation +
                                     "' is not '" + std::string(kActivationName) + "'");
  }
  auto& s = ckpt.state;
  s.iteration = parse_u64(scalar("iteration"), "iteration");
  const std::size_t N = parse_u64(scalar("N"), "N");
  if (N == 0) fail(ErrorKind::Parse, "checkpoint step count must be positive");
  ckpt.dim = parse_u64(scalar("dim"), "dim");
  ckpt.mode = parse_mode(scalar("mode"));

  const GsLayout layout{N};
  s.params.N = N;
  s.params.theta = array("theta", N);
  s.params.xi = array("xi", N);
  s.params.a_diag = array("a_diag", N);
  s.params.a_off = array("a_off", layout.a_off_size());
  s.params.c_recent = array("c_recent", layout.c_recent_size());
  s.params.c_old = array("c_old", layout.c_old_size());
  const std::size_t P = param_count(N);
  s.ema.shadow = array("ema", P);
  s.adam.m = array("adam_m", P);
  s.adam.v = array("adam_v", P);
  s.adam.step = parse_u64(scalar("adam_step"), "adam_step");

  const bool has_disc = arrays.count("disc") > 0 || arrays.count("disc_adam_m") > 0 ||
                        arrays.count("disc_adam_v") > 0 || scalars.count("disc_adam_step") > 0;
  if (ckpt.mode == StudentMode::Gas) {
    const std::size_t W = Discriminator::weight_count(ckpt.dim);
    s.disc = Discriminator(ckpt.dim, array("disc", W));
    s.disc_adam.m = array("disc_adam_m", W);
    s.disc_adam.v = array("disc_adam_v", W);
    s.disc_adam.step = parse_u64(scalar("disc_adam_step"), "disc_adam_step");
  } else if (has_disc) {
    fail(ErrorKind::UnknownArray, "discriminator arrays found in a gs checkpoint");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_text(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_text(path));
}

std::string serialize_metrics(const std::vector<MetricsRow>& log, const std::string& aborted) {
  std::string out = "iteration,distill_loss,adv_loss,disc_objective,grad_norm_pre_clip,wallclock_ms\n";
  for (const auto& r : log) {
    out += std::to_string(r.iteration) + ',' + format_double(r.distill_loss) + ',' +
           format_double(r.adv_loss) + ',' + format_double(r.disc_objective) + ',' +
           format_double(r.grad_norm_pre_clip) + ',' + format_double(r.wallclock_ms) + '\n';
  }
  if (!aborted.empty()) out += "# aborted: " + aborted + '\n';
  return out;
}

}  // namespace gasolve
