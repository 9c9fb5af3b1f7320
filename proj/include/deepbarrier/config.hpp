#pragma once

#include "deepbarrier/barrier.hpp"
#include "deepbarrier/evaluation.hpp"
#include "deepbarrier/sde_engine.hpp"
#include "deepbarrier/trainer.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace deepbarrier {

/// Everything a run needs. Field names match the config keys and CLI flags.
struct RunConfig {
  MarketModel model;
  /// Pairwise correlation matrix the model factor was built from.
  Eigen::MatrixXd correlation = Eigen::MatrixXd::Identity(1, 1);
  InstrumentSpec instrument;
  TrainConfig train;
  long eval_paths = 10000;
  std::uint64_t eval_seed = 1;
  AnalyticHedgeOptions hedge;
  std::filesystem::path out_dir = "out";

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Parses YAML text. Missing keys keep their defaults, unknown keys are
/// rejected. Errors carry the line number where one is known.
RunConfig parse_config(const std::string& text);
/// Same, after replacing the given keys with YAML-parsed values.
RunConfig parse_config(const std::string& text, const std::vector<std::pair<std::string, std::string>>& overrides);
RunConfig load_config(const std::filesystem::path& path);

/// Accepted keys in canonical order.
std::vector<std::string> config_keys();

/// Normalized YAML: every key, fixed order, shortest round-trip numbers.
std::string dump_config(const RunConfig& cfg);

/// FNV-1a 64 over the normalized dump, as 16 hex digits. Independent of key
/// order and formatting of the source file.
std::string config_hash(const RunConfig& cfg);

/// Output directory: the DEEPBARRIER_OUT_DIR environment variable wins.
std::filesystem::path resolve_out_dir(const RunConfig& cfg);

struct OutputFile {
  std::filesystem::path path;
  std::uintmax_t bytes = 0;
  std::string fnv1a;
};

struct RunManifest {
  std::string command;
  std::string version;
  std::string config_hash;
  std::string config_text;
  std::uint64_t master_seed = 0;
  std::uint64_t eval_seed = 0;
  std::string started_at;
  std::string finished_at;
  std::vector<OutputFile> outputs;

  /// Records a written file with its size and content hash.
  void add_output(const std::filesystem::path& path);
  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

std::string utc_timestamp();
std::string fnv1a_hex(const std::string& bytes);
std::string library_version();

}  // namespace deepbarrier
