#pragma once

// Experiment files are INI text (see ConfigFile). Sections and keys:
//
//   [experiment]  name, env (hetnet | pointmass), seeds (list), episodes, out,
//                 sweep_horizontal, sweep_vertical, sweep_noise (optional lists)
//   [env]         HetNet keys, as load_env_config
//   [pointmass]   toy keys, as load_point_mass_config
//   [trainer]     algo (sac | ddpg), gamma, critic_lr, actor_lr, alpha_lr, tau,
//                 batch_size, buffer_capacity, warmup_steps, update_every,
//                 gradient_steps, twin_critic, auto_alpha, alpha, target_entropy,
//                 entropy_in_target, exploration_std, reward_scale,
//                 max_episode_steps, actor_hidden (list), log_std_max, report_window
//   [critic]      kind (reacritic | mlp); ReaCritic: hidden_dim, horizontal,
//                 vertical, heads, ffn_dim, noise_std, noise_in_eval;
//                 MLP: mlp_hidden (list) or match_budget = true to size a
//                 two-layer MLP to the parameter count of the ReaCritic keys.
//
// Output layout under `out`, one directory per run and seed:
//
//   <label>/seed_<seed>/metrics.csv   per-episode rows, schema below
//   <label>/seed_<seed>/timing.csv    episode,wall_ms
//   <label>/seed_<seed>/summary.json  final-window means and a config echo
//
// Metrics are deterministic given the spec and seed; wall-clock time lives
// only in timing.csv so reruns produce byte-identical metrics and summaries.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "reacritic/config_file.hpp"
#include "reacritic/critic/reacritic.hpp"
#include "reacritic/drl/trainer.hpp"
#include "reacritic/env/hetnet.hpp"
#include "reacritic/env/point_mass.hpp"

namespace reacritic::harness {

inline constexpr int kMetricsSchemaVersion = 1;
inline constexpr const char* kMetricsHeader = "episode,return,critic_loss_mean,q_mean,steps,updates,alpha";

enum class EnvKind { kHetNet, kPointMass };
enum class CriticKind { kReaCritic, kMlp };

struct ExperimentSpec {
  std::string name = "experiment";
  EnvKind env = EnvKind::kPointMass;
  env::EnvConfig hetnet;
  env::PointMassConfig pointmass;
  drl::TrainerConfig trainer;
  CriticKind critic = CriticKind::kReaCritic;
  critic::CriticConfig reacritic;  // state and action sizes come from the environment
  std::vector<std::size_t> mlp_hidden{256, 256};
  bool mlp_match_budget = false;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path out = "runs";
  std::vector<std::size_t> sweep_horizontal;
  std::vector<std::size_t> sweep_vertical;
  std::vector<double> sweep_noise;

  void validate() const;
};

ExperimentSpec parse_experiment(const ConfigFile& file);
ExperimentSpec load_experiment(const std::filesystem::path& path);

/// One point of the sweep grid.
struct RunVariant {
  std::string label;
  std::size_t horizontal = 0;
  std::size_t vertical = 0;
  double noise_std = 0.0;
};

/// Cross-product of the sweep axes; a spec without axes yields one variant.
std::vector<RunVariant> expand_sweep(const ExperimentSpec& spec);

struct RunOptions {
  std::filesystem::path out;                 // empty: spec.out
  std::vector<std::uint64_t> seeds;          // empty: spec.seeds
  std::ostream* log = nullptr;               // one progress line per episode when set
};

struct RunOutcome {
  RunVariant variant;
  std::uint64_t seed = 0;
  drl::TrainingReport report;
  std::filesystem::path directory;
};

/// Trains every (variant, seed) pair in order and writes its files.
/// DivergenceError propagates after the rows completed so far are flushed.
std::vector<RunOutcome> run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// One CSV row in the metrics schema (17 significant digits).
std::string metrics_row(const drl::EpisodeStats& stats);

/// Reads `return` back out of a metrics file.
std::vector<double> read_returns(const std::filesystem::path& metrics_csv);

/// Mean final-window return for each (H, V[, noise]) found in summaries under
/// `directory`, as a text grid with H rows and V columns.
std::string sweep_report(const std::filesystem::path& directory);

}  // namespace reacritic::harness
