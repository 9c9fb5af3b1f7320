#include "deepbarrier/config.hpp"

#include "deepbarrier/errors.hpp"

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#ifndef DEEPBARRIER_VERSION
#define DEEPBARRIER_VERSION "0.0.0"
#endif

namespace deepbarrier {

namespace {

std::string at_line(const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  return m.is_null() ? std::string() : " (line " + std::to_string(m.line + 1) + ")";
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ValidationError(key + " must be a scalar" + at_line(node));
  try {
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    throw ValidationError(key + " has an invalid value '" + node.Scalar() + "'" + at_line(node));
  }
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) throw ValidationError(key + " must be a list" + at_line(node));
  std::vector<double> out;
  for (const auto& item : node) out.push_back(scalar<double>(item, key));
  return out;
}

/// Either a constant level, a list of [start, level] pairs, or null.
std::optional<LevelSchedule> schedule(const YAML::Node& node, const std::string& key) {
  if (node.IsNull()) return std::nullopt;
  if (node.IsScalar()) return LevelSchedule::constant(scalar<double>(node, key));
  if (!node.IsSequence()) throw ValidationError(key + " must be a level or a list of [start, level]" + at_line(node));
  LevelSchedule s{{}, {}};
  for (const auto& item : node) {
    const auto pair = number_list(item, key);
    if (pair.size() != 2) throw ValidationError(key + " entries must be [start, level]" + at_line(item));
    s.starts.push_back(pair[0]);
    s.levels.push_back(pair[1]);
  }
  return s;
}

Eigen::MatrixXd correlation_matrix(const YAML::Node& node, int dim) {
  if (node.IsScalar()) {
    const double rho = scalar<double>(node, "correlation");
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(dim, dim, rho);
    c.diagonal().setOnes();
    return c;
  }
  if (!node.IsSequence()) throw ValidationError("correlation must be a number or a matrix" + at_line(node));
  const auto rows = static_cast<int>(node.size());
  Eigen::MatrixXd c(rows, rows);
  for (int i = 0; i < rows; ++i) {
    const auto row = number_list(node[static_cast<std::size_t>(i)], "correlation");
    if (static_cast<int>(row.size()) != rows) throw ValidationError("correlation must be square" + at_line(node));
    for (int j = 0; j < rows; ++j) c(i, j) = row[static_cast<std::size_t>(j)];
  }
  return c;
}

using Setter = std::function<void(const YAML::Node&, RunConfig&)>;

#define DB_FIELD(key, type, target) \
  {key, [](const YAML::Node& n, RunConfig& c) { c.target = scalar<type>(n, key); }}

/// Keys in canonical order; dim precedes correlation.
const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      DB_FIELD("dim", int, model.dim),
      DB_FIELD("rate", double, model.rate),
      DB_FIELD("vol", double, model.vol),
      {"correlation", [](const YAML::Node& n, RunConfig& c) { c.correlation = correlation_matrix(n, c.model.dim); }},
      DB_FIELD("strike", double, instrument.strike),
      DB_FIELD("maturity", double, instrument.maturity),
      {"option_type",
       [](const YAML::Node& n, RunConfig& c) {
         c.instrument.option = parse_option_type(scalar<std::string>(n, "option_type"));
       }},
      {"barrier_kind",
       [](const YAML::Node& n, RunConfig& c) {
         c.instrument.barrier.kind = parse_barrier_kind(scalar<std::string>(n, "barrier_kind"));
       }},
      {"barrier_upper",
       [](const YAML::Node& n, RunConfig& c) { c.instrument.barrier.upper = schedule(n, "barrier_upper"); }},
      {"barrier_lower",
       [](const YAML::Node& n, RunConfig& c) { c.instrument.barrier.lower = schedule(n, "barrier_lower"); }},
      DB_FIELD("rebate", double, instrument.barrier.rebate),
      DB_FIELD("monitor_at_t0", bool, instrument.barrier.monitor_at_t0),
      DB_FIELD("active_at_maturity", bool, instrument.barrier.active_at_maturity),
      DB_FIELD("shift_correction", bool, instrument.barrier.shift_correction),
      {"basket_weights",
       [](const YAML::Node& n, RunConfig& c) {
         c.instrument.barrier.basket_weights = n.IsNull() ? std::vector<double>{} : number_list(n, "basket_weights");
       }},
      DB_FIELD("steps", int, train.steps),
      DB_FIELD("batch", long, train.batch),
      DB_FIELD("mini_batches", long, train.mini_batches),
      DB_FIELD("layers", int, train.layers),
      DB_FIELD("units", int, train.units),
      {"activation",
       [](const YAML::Node& n, RunConfig& c) {
         c.train.activation = nn::parse_activation(scalar<std::string>(n, "activation"));
       }},
      DB_FIELD("learning_rate", double, train.lr.initial),
      DB_FIELD("lr_decay", double, train.lr.decay),
      DB_FIELD("lr_decay_every", long, train.lr.every),
      DB_FIELD("beta1", double, train.beta1),
      DB_FIELD("beta2", double, train.beta2),
      DB_FIELD("epsilon", double, train.epsilon),
      DB_FIELD("seed", std::uint64_t, train.seed),
      DB_FIELD("x0_low", double, train.x0_low),
      DB_FIELD("x0_high", double, train.x0_high),
      {"x0_fixed",
       [](const YAML::Node& n, RunConfig& c) {
         c.train.x0_fixed = n.IsNull() ? std::nullopt : std::optional<double>(scalar<double>(n, "x0_fixed"));
       }},
      DB_FIELD("y0_output_scale", double, train.y0_output_scale),
      DB_FIELD("pi_output_scale", double, train.pi_output_scale),
      DB_FIELD("report_stride", long, train.report_stride),
      DB_FIELD("running_window", long, train.running_window),
      DB_FIELD("checkpoint_stride", long, train.checkpoint_stride),
      DB_FIELD("eval_paths", long, eval_paths),
      DB_FIELD("eval_seed", std::uint64_t, eval_seed),
      DB_FIELD("delta_clip", double, hedge.delta_clip),
      DB_FIELD("monitoring_adjusted", bool, hedge.monitoring_adjusted),
      {"out_dir", [](const YAML::Node& n, RunConfig& c) { c.out_dir = scalar<std::string>(n, "out_dir"); }},
  };
  return table;
}

#undef DB_FIELD

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  // Keep floats recognizably floating point in the dump.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string schedule_text(const std::optional<LevelSchedule>& s) {
  if (!s) return "null";
  if (s->is_constant() && s->starts.front() == 0.0) return num(s->levels.front());
  std::string out = "[";
  for (std::size_t k = 0; k < s->levels.size(); ++k) {
    out += (k ? ", [" : "[") + num(s->starts[k]) + ", " + num(s->levels[k]) + "]";
  }
  return out + "]";
}

std::string list_text(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + num(v[k]);
  return out + "]";
}

std::string matrix_text(const Eigen::MatrixXd& m) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out += (i ? ", " : "") + list_text(row);
  }
  return out + "]";
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  if (correlation.rows() != model.dim || correlation.cols() != model.dim) {
    throw ValidationError("correlation must be dim x dim");
  }
  instrument.validate();
  train.validate();
  if (model.dim > 1 && !instrument.barrier.basket_weights.empty() &&
      static_cast<int>(instrument.barrier.basket_weights.size()) != model.dim) {
    throw ValidationError("basket_weights must have dim entries");
  }
  if (eval_paths < 1) throw ValidationError("eval_paths must be >= 1");
  if (!(hedge.delta_clip > 0.0)) throw ValidationError("delta_clip must be > 0");
  if (out_dir.empty()) throw ValidationError("out_dir must not be empty");
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ValidationError("config parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  RunConfig cfg;
  if (root.IsNull()) {
    cfg.validate();
    return cfg;
  }
  if (!root.IsMap()) throw ValidationError("config must be a mapping of keys to values" + at_line(root));

  std::set<std::string> known;
  for (const auto& [key, _] : setters()) known.insert(key);
  std::set<std::string> seen;
  for (const auto& item : root) {
    const auto key = item.first.as<std::string>();
    if (!known.count(key)) throw ValidationError("unknown config key '" + key + "'" + at_line(item.first));
    if (!seen.insert(key).second) throw ValidationError("duplicate config key '" + key + "'" + at_line(item.first));
  }
  bool correlation_given = false;
  for (const auto& [key, set] : setters()) {
    const YAML::Node node = root[key];
    if (!node) continue;
    correlation_given |= key == "correlation";
    set(node, cfg);
  }
  if (cfg.model.dim < 1) throw ValidationError("dim must be >= 1");
  if (!correlation_given) cfg.correlation = Eigen::MatrixXd::Identity(cfg.model.dim, cfg.model.dim);
  if (cfg.correlation.rows() != cfg.model.dim) throw ValidationError("correlation must be dim x dim");
  cfg.model = MarketModel::from_correlation(cfg.model.rate, cfg.model.vol, cfg.correlation);
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::string& text,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  if (overrides.empty()) return parse_config(text);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ValidationError("config parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ValidationError("config must be a mapping of keys to values");
  for (const auto& [key, value] : overrides) {
    try {
      root[key] = YAML::Load(value);
    } catch (const YAML::ParserException& e) {
      throw ValidationError(key + " has an invalid value '" + value + "': " + e.msg);
    }
  }
  return parse_config(YAML::Dump(root));
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [key, _] : setters()) out.push_back(key);
  return out;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
  const auto& b = c.instrument.barrier;
  const auto& t = c.train;
  std::ostringstream o;
  o << "dim: " << c.model.dim << '\n'
    << "rate: " << num(c.model.rate) << '\n'
    << "vol: " << num(c.model.vol) << '\n'
    << "correlation: " << matrix_text(c.correlation) << '\n'
    << "strike: " << num(c.instrument.strike) << '\n'
    << "maturity: " << num(c.instrument.maturity) << '\n'
    << "option_type: " << to_string(c.instrument.option) << '\n'
    << "barrier_kind: " << to_string(b.kind) << '\n'
    << "barrier_upper: " << schedule_text(b.upper) << '\n'
    << "barrier_lower: " << schedule_text(b.lower) << '\n'
    << "rebate: " << num(b.rebate) << '\n'
    << "monitor_at_t0: " << (b.monitor_at_t0 ? "true" : "false") << '\n'
    << "active_at_maturity: " << (b.active_at_maturity ? "true" : "false") << '\n'
    << "shift_correction: " << (b.shift_correction ? "true" : "false") << '\n'
    << "basket_weights: " << list_text(b.basket_weights) << '\n'
    << "steps: " << t.steps << '\n'
    << "batch: " << t.batch << '\n'
    << "mini_batches: " << t.mini_batches << '\n'
    << "layers: " << t.layers << '\n'
    << "units: " << t.units << '\n'
    << "activation: " << nn::to_string(t.activation) << '\n'
    << "learning_rate: " << num(t.lr.initial) << '\n'
    << "lr_decay: " << num(t.lr.decay) << '\n'
    << "lr_decay_every: " << t.lr.every << '\n'
    << "beta1: " << num(t.beta1) << '\n'
    << "beta2: " << num(t.beta2) << '\n'
    << "epsilon: " << num(t.epsilon) << '\n'
    << "seed: " << t.seed << '\n'
    << "x0_low: " << num(t.x0_low) << '\n'
    << "x0_high: " << num(t.x0_high) << '\n'
    << "x0_fixed: " << (t.x0_fixed ? num(*t.x0_fixed) : std::string("null")) << '\n'
    << "y0_output_scale: " << num(t.y0_output_scale) << '\n'
    << "pi_output_scale: " << num(t.pi_output_scale) << '\n'
    << "report_stride: " << t.report_stride << '\n'
    << "running_window: " << t.running_window << '\n'
    << "checkpoint_stride: " << t.checkpoint_stride << '\n'
    << "eval_paths: " << c.eval_paths << '\n'
    << "eval_seed: " << c.eval_seed << '\n'
    << "delta_clip: " << num(c.hedge.delta_clip) << '\n'
    << "monitoring_adjusted: " << (c.hedge.monitoring_adjusted ? "true" : "false") << '\n'
    << "out_dir: " << YAML::Dump(YAML::Node(c.out_dir.string())) << '\n';
  return o.str();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(dump_config(cfg)); }

std::filesystem::path resolve_out_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("DEEPBARRIER_OUT_DIR"); env && *env) return env;
  return cfg.out_dir;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string library_version() { return DEEPBARRIER_VERSION; }

void RunManifest::add_output(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read output file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  outputs.push_back({path, bytes.size(), fnv1a_hex(bytes)});
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["seeds"] = {{"master", master_seed}, {"eval", eval_seed}};
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["config"] = config_text;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& f : outputs) {
    files.push_back({{"path", f.path.string()}, {"bytes", f.bytes}, {"fnv1a", f.fnv1a}});
  }
  j["outputs"] = files;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  RunManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.master_seed = j.at("seeds").at("master").get<std::uint64_t>();
    m.eval_seed = j.at("seeds").at("eval").get<std::uint64_t>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.config_text = j.at("config").get<std::string>();
    for (const auto& f : j.at("outputs")) {
      m.outputs.push_back({f.at("path").get<std::string>(), f.at("bytes").get<std::uintmax_t>(),
                           f.at("fnv1a").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid manifest: ") + e.what());
  }
  return m;
}

}  // namespace deepbarrier
