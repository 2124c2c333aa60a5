#include "rgbt/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string_view>
#include <variant>

#include "rgbt/error.hpp"

namespace rgbt {

namespace {

using Value = std::variant<double, bool, std::string, std::vector<int>>;

struct Key {
  const char* name;
  std::function<void(Config&, const Value&)> set;
  std::function<Value(const Config&)> get;
};

[[noreturn]] void bad(const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); }

double num(const std::string& key, const Value& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  bad(key, "expected a number");
}

int integer(const std::string& key, const Value& v) {
  const double d = num(key, v);
  if (d != std::floor(d) || std::abs(d) > std::numeric_limits<int>::max()) bad(key, "expected an integer");
  return static_cast<int>(d);
}

std::uint64_t seed(const std::string& key, const Value& v) {
  const double d = num(key, v);
  if (d < 0 || d != std::floor(d) || d > 9007199254740992.0) bad(key, "expected a non-negative integer");
  return static_cast<std::uint64_t>(d);
}

bool boolean(const std::string& key, const Value& v) {
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  bad(key, "expected true or false");
}

std::string text(const std::string& key, const Value& v) {
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  bad(key, "expected a quoted string");
}

std::vector<int> ints(const std::string& key, const Value& v) {
  if (const auto* a = std::get_if<std::vector<int>>(&v)) return *a;
  bad(key, "expected an integer array");
}

#define RGBT_NUM(k, field) \
  Key{k, [](Config& c, const Value& v) { c.field = num(k, v); }, [](const Config& c) { return Value(double(c.field)); }}
#define RGBT_INT(k, field) \
  Key{k, [](Config& c, const Value& v) { c.field = integer(k, v); }, [](const Config& c) { return Value(double(c.field)); }}
#define RGBT_SEED(k, field) \
  Key{k, [](Config& c, const Value& v) { c.field = seed(k, v); }, [](const Config& c) { return Value(double(c.field)); }}
#define RGBT_BOOL(k, field) \
  Key{k, [](Config& c, const Value& v) { c.field = boolean(k, v); }, [](const Config& c) { return Value(bool(c.field)); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      // tracker thresholds and training constants
      RGBT_NUM("paper.q_hi", tracker.switcher.q_hi),
      RGBT_NUM("paper.s_hi", tracker.switcher.s_hi),
      RGBT_NUM("paper.q_low", tracker.switcher.q_low),
      RGBT_NUM("paper.s_low", tracker.switcher.s_low),
      RGBT_NUM("paper.t_diff", tracker.switcher.t_diff),
      RGBT_NUM("paper.q_skip", tracker.switcher.q_skip),
      RGBT_NUM("paper.lr_global", train.global.lr),
      RGBT_NUM("paper.lr_local", train.local.lr),
      RGBT_NUM("paper.lr_joint", train.joint.lr),
      RGBT_INT("paper.batch", train.batch),
      RGBT_NUM("paper.momentum", train.momentum),
      RGBT_NUM("paper.weight_decay", train.weight_decay),
      RGBT_INT("paper.patch", mfnet.patch),

      RGBT_NUM("switcher.t_disable", tracker.switcher.t_disable),

      RGBT_NUM("cf.padding", tracker.cf.padding),
      RGBT_NUM("cf.lambda", tracker.cf.lambda),
      RGBT_NUM("cf.eta", tracker.cf.eta),
      RGBT_INT("cf.scales", tracker.cf.scales),
      RGBT_NUM("cf.scale_step", tracker.cf.scale_step),
      RGBT_NUM("cf.sigma_factor", tracker.cf.sigma_factor),
      RGBT_INT("cf.max_template_px", tracker.cf.max_template_px),
      RGBT_INT("cf.features.cell", tracker.cf.features.cell),
      RGBT_INT("cf.features.orientations", tracker.cf.features.orientations),
      RGBT_NUM("cf.features.eps", tracker.cf.features.eps),

      Key{"cme.model", [](Config& c, const Value& v) {
            try {
              c.tracker.cme.model = parse_motion_model(text("cme.model", v));
            } catch (const RangeError& e) {
              bad("cme.model", e.what());
            }
          },
          [](const Config& c) { return Value(std::string(to_string(c.tracker.cme.model))); }},
      RGBT_INT("cme.max_keypoints", tracker.cme.max_keypoints),
      RGBT_NUM("cme.harris_k", tracker.cme.harris_k),
      RGBT_NUM("cme.harris_sigma", tracker.cme.harris_sigma),
      RGBT_NUM("cme.rel_threshold", tracker.cme.rel_threshold),
      RGBT_NUM("cme.ratio", tracker.cme.ratio),
      RGBT_INT("cme.iters", tracker.cme.iters),
      RGBT_NUM("cme.tau", tracker.cme.tau),
      RGBT_INT("cme.min_matches", tracker.cme.min_matches),
      RGBT_SEED("cme.seed", tracker.cme.seed),
      RGBT_NUM("cme.gate_pixel", tracker.cme.gate_pixel),
      RGBT_NUM("cme.gate_ratio", tracker.cme.gate_ratio),
      RGBT_NUM("cme.drastic_fraction", tracker.cme.drastic_fraction),
      RGBT_BOOL("cme.use_thermal", tracker.cme.use_thermal),

      RGBT_NUM("kalman.p0_pos", tracker.kf.p0_pos),
      RGBT_NUM("kalman.p0_vel", tracker.kf.p0_vel),
      RGBT_INT("kalman.zero_velocity_after", tracker.kf_zero_velocity_after),

      Key{"tracker.fusion", [](Config& c, const Value& v) { c.tracker.fusion = parse_fusion_mode(text("tracker.fusion", v)); },
          [](const Config& c) { return Value(std::string(to_string(c.tracker.fusion))); }},
      RGBT_NUM("tracker.constant_weight", tracker.constant_weight),
      RGBT_BOOL("tracker.enable_cme", tracker.enable_cme),
      RGBT_BOOL("tracker.enable_tmp", tracker.enable_tmp),
      RGBT_BOOL("tracker.enable_refine", tracker.enable_refine),
      RGBT_BOOL("tracker.init_on_thermal", ope.init_on_thermal),
      Key{"tracker.checkpoint", [](Config& c, const Value& v) { c.checkpoint = text("tracker.checkpoint", v); },
          [](const Config& c) { return Value(c.checkpoint); }},

      Key{"mfnet.stem_channels", [](Config& c, const Value& v) { c.mfnet.stem_channels = ints("mfnet.stem_channels", v); },
          [](const Config& c) { return Value(c.mfnet.stem_channels); }},
      RGBT_INT("mfnet.head_channels", mfnet.head_channels),
      RGBT_SEED("mfnet.seed", mfnet.seed),

      RGBT_INT("train.global_epochs", train.global.epochs),
      RGBT_INT("train.local_epochs", train.local.epochs),
      RGBT_INT("train.joint_epochs", train.joint.epochs),
      RGBT_NUM("train.lr_scale", train.lr_scale),
      RGBT_SEED("train.seed", train.seed),

      RGBT_NUM("eval.pr_threshold", pr_threshold),
      RGBT_INT("run.workers", workers),
  };
  return k;
}

#undef RGBT_NUM
#undef RGBT_INT
#undef RGBT_SEED
#undef RGBT_BOOL

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing # comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool parse_number(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

Value parse_value(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  if (s.empty()) throw ConfigError(where + ": missing value");
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw ConfigError(where + ": unterminated string");
    const std::string body = s.substr(1, s.size() - 2);
    if (body.find('"') != std::string::npos) throw ConfigError(where + ": embedded quotes are not supported");
    return body;
  }
  if (s.front() == '[') {
    if (s.back() != ']') throw ConfigError(where + ": unterminated array");
    std::vector<int> out;
    std::stringstream ss(s.substr(1, s.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      double d;
      if (!parse_number(item, d) || d != std::floor(d)) throw ConfigError(where + ": arrays hold integers only");
      out.push_back(static_cast<int>(d));
    }
    return out;
  }
  std::string t = s;
  if (t.front() == '+') t.erase(0, 1);
  double d;
  if (!parse_number(t, d)) throw ConfigError(where + ": cannot parse value '" + s + "'");
  return d;
}

std::string format(const Value& v) {
  std::ostringstream os;
  if (const double* d = std::get_if<double>(&v)) {
    char buf[32];
    os << std::string_view(buf, std::to_chars(buf, buf + sizeof buf, *d).ptr);
  } else if (const bool* b = std::get_if<bool>(&v)) {
    os << (*b ? "true" : "false");
  } else if (const std::string* s = std::get_if<std::string>(&v)) {
    os << '"' << *s << '"';
  } else {
    const auto& a = std::get<std::vector<int>>(v);
    os << '[';
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? ", " : "") << a[i];
    os << ']';
  }
  return os.str();
}

// Spatial size after the stride-2 3x3 stem convolutions.
int stem_out(int size, std::size_t depth) {
  for (std::size_t i = 0; i < depth; ++i) size = (size - 1) / 2 + 1;
  return size;
}

}  // namespace

void validate(const Config& c) {
  cf::validate(c.tracker.cf);
  cme::validate(c.tracker.cme);
  validate(c.tracker.switcher);
  if (!(c.tracker.constant_weight >= 0.0 && c.tracker.constant_weight <= 1.0)) throw ConfigError("tracker.constant_weight must lie in [0, 1]");
  if (!(c.tracker.kf.p0_pos > 0.0 && c.tracker.kf.p0_vel > 0.0)) throw ConfigError("kalman.p0_* must be > 0");
  if (c.tracker.kf_zero_velocity_after < 0) throw ConfigError("kalman.zero_velocity_after must be >= 0");
  const auto& m = c.mfnet;
  if (m.stem_channels.empty() || m.head_channels < 1) throw ConfigError("mfnet: empty stem or head");
  for (int ch : m.stem_channels) {
    if (ch < 1) throw ConfigError("mfnet.stem_channels must be positive");
  }
  const int f = m.patch > 0 ? stem_out(m.patch, m.stem_channels.size()) : 0;
  if (m.patch < 1 || (f << m.stem_channels.size()) != m.patch || f % 3 != 1) {
    throw ConfigError("paper.patch must be f * 2^depth with f = 1 (mod 3); got " + std::to_string(m.patch));
  }
  const auto& t = c.train;
  for (const auto* s : {&t.global, &t.local, &t.joint}) {
    if (s->epochs < 0) throw ConfigError("train.*_epochs must be >= 0");
    if (!(s->lr >= 0.0) || !std::isfinite(s->lr)) throw ConfigError("paper.lr_* must be finite and >= 0");
  }
  if (!(t.lr_scale >= 0.0) || !std::isfinite(t.lr_scale)) throw ConfigError("train.lr_scale must be finite and >= 0");
  if (t.batch < 1) throw ConfigError("paper.batch must be >= 1");
  if (!(t.momentum >= 0.0 && t.momentum < 1.0)) throw ConfigError("paper.momentum must lie in [0, 1)");
  if (!(t.weight_decay >= 0.0)) throw ConfigError("paper.weight_decay must be >= 0");
  if (!(c.pr_threshold >= 0.0)) throw ConfigError("eval.pr_threshold must be >= 0");
  if (c.workers < 0) throw ConfigError("run.workers must be >= 0");
}

Config parse_config(const std::string& text, const Config& base) {
  Config cfg = base;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string k = trim(line.substr(0, eq));
    if (k.empty()) throw ConfigError(where + ": empty key");
    const std::string full = section.empty() ? k : section + "." + k;
    const Value v = parse_value(line.substr(eq + 1), where);
    bool found = false;
    for (const Key& key : keys()) {
      if (full == key.name) {
        key.set(cfg, v);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError(where + ": unknown key '" + full + "'");
  }
  validate(cfg);
  return cfg;
}

Config load_config(const std::string& path, const Config& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

std::string print_config(const Config& cfg) {
  std::ostringstream os;
  std::string section;
  for (const Key& key : keys()) {
    const std::string name = key.name;
    const auto dot = name.find('.');
    const std::string sec = name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) os << '\n';
      os << '[' << sec << "]\n";
      section = sec;
    }
    os << name.substr(dot + 1) << " = " << format(key.get(cfg)) << '\n';
  }
  return os.str();
}

}  // namespace rgbt
