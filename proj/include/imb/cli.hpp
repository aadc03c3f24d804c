#pragma once
// Command implementations behind the imb_dpgm executable. Every command is a pure function
// of its RunConfig: reruns with the same inputs write byte-identical artifacts.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <string>

#include "imb/adversary.hpp"
#include "imb/baseline.hpp"
#include "imb/model.hpp"

namespace imb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitIo = 4;

struct ReportConfig {
  std::string method = "pca";             // pca | tsne
  std::string representation = "latent";  // input | latent
  std::size_t subsample = 0;              // 0 = use every row
  double perplexity = 30.0;
  std::size_t iterations = 1000;
};

struct RunConfig {
  std::uint64_t seed = 42;  // authoritative; copied into model.seed
  std::string data;         // raw CSV read by prepare
  std::string data_dir;     // prepared splits; empty = out_dir
  std::string out_dir = "out";
  std::string label_col = "Class";
  std::string split = "test";  // evaluate, baseline and report
  std::string checkpoint;      // empty = <out_dir>/checkpoint.json
  dpgm::ModelConfig model;
  adversary::AdvConfig adversary;
  baseline::BaselineConfig baseline;
  ReportConfig report;

  std::filesystem::path splits_path() const { return data_dir.empty() ? out_dir : data_dir; }
  std::filesystem::path checkpoint_path() const;
};

// Unknown keys anywhere in the document raise ContractError.
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
// Every field, defaults included.
std::string run_config_to_json(const RunConfig& c);

// Writes train.csv, val.csv, test.csv, norm_stats.json, split_manifest.json.
int cmd_prepare(const RunConfig& c);
// Writes checkpoint.json, trace.csv, metrics_val.json. Returns kExitDivergence after saving
// the last good parameters if training diverges.
int cmd_train(const RunConfig& c);
// Writes metrics_<split>.json and sweep_<split>.csv.
int cmd_evaluate(const RunConfig& c);
// Writes baseline_<resampler>.json for each of the five resamplers.
int cmd_baseline(const RunConfig& c);
// Writes embedding_<method>_<representation>_<split>.csv.
int cmd_report(const RunConfig& c);

int exit_code_for(const std::exception& e);

// Full command-line entry point (argument parsing, dispatch, error reporting).
int run(int argc, const char* const* argv);

}  // namespace imb::cli
