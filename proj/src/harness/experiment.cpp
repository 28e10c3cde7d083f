#include "reacritic/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "reacritic/critic/mlp.hpp"
#include "reacritic/errors.hpp"

namespace reacritic::harness {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kSections{"experiment", "env", "pointmass", "trainer", "critic"};

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Compact label text for sweep values: 0.1 rather than 0.10000000000000001.
std::string short_double(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

drl::TrainerConfig parse_trainer(const ConfigFile& f, std::size_t episodes) {
  f.reject_unknown("trainer", {"algo", "gamma", "critic_lr", "actor_lr", "alpha_lr", "tau", "batch_size",
                               "buffer_capacity", "warmup_steps", "update_every", "gradient_steps", "twin_critic",
                               "auto_alpha", "alpha", "target_entropy", "entropy_in_target", "exploration_std",
                               "reward_scale", "max_episode_steps", "actor_hidden", "log_std_max", "report_window"});
  drl::TrainerConfig t;
  const std::string algo = f.get_string("trainer.algo", "sac");
  if (algo == "sac") {
    t.algo = drl::Algo::kSac;
  } else if (algo == "ddpg") {
    t.algo = drl::Algo::kDdpg;
  } else {
    throw ConfigError(f.context("trainer.algo") + ": expected sac or ddpg, got '" + algo + "'");
  }
  t.gamma = f.get_double("trainer.gamma", t.gamma);
  t.critic_lr = f.get_double("trainer.critic_lr", t.critic_lr);
  t.actor_lr = f.get_double("trainer.actor_lr", t.actor_lr);
  t.alpha_lr = f.get_double("trainer.alpha_lr", t.alpha_lr);
  t.tau = f.get_double("trainer.tau", t.tau);
  t.batch_size = f.get_size("trainer.batch_size", t.batch_size);
  t.buffer_capacity = f.get_size("trainer.buffer_capacity", t.buffer_capacity);
  t.warmup_steps = f.get_size("trainer.warmup_steps", t.warmup_steps);
  t.update_every = f.get_size("trainer.update_every", t.update_every);
  t.gradient_steps = f.get_size("trainer.gradient_steps", t.gradient_steps);
  t.twin_critic = f.get_bool("trainer.twin_critic", t.twin_critic);
  t.auto_alpha = f.get_bool("trainer.auto_alpha", t.auto_alpha);
  t.alpha = f.get_double("trainer.alpha", t.alpha);
  if (f.has("trainer.target_entropy")) {
    t.target_entropy = f.get_double("trainer.target_entropy", 0.0);
    t.target_entropy_set = true;
  }
  t.entropy_in_target = f.get_bool("trainer.entropy_in_target", t.entropy_in_target);
  t.exploration_std = f.get_double("trainer.exploration_std", t.exploration_std);
  t.reward_scale = f.get_double("trainer.reward_scale", t.reward_scale);
  t.max_episode_steps = f.get_size("trainer.max_episode_steps", t.max_episode_steps);
  t.actor_hidden = f.get_sizes("trainer.actor_hidden", t.actor_hidden);
  t.log_std_max = f.get_double("trainer.log_std_max", t.log_std_max);
  t.report_window = f.get_size("trainer.report_window", t.report_window);
  t.episodes = episodes;
  return t;
}

void parse_critic(const ConfigFile& f, ExperimentSpec& spec) {
  f.reject_unknown("critic", {"kind", "hidden_dim", "horizontal", "vertical", "heads", "ffn_dim", "noise_std",
                              "noise_in_eval", "mlp_hidden", "match_budget"});
  const std::string kind = f.get_string("critic.kind", "reacritic");
  if (kind == "reacritic") {
    spec.critic = CriticKind::kReaCritic;
  } else if (kind == "mlp") {
    spec.critic = CriticKind::kMlp;
  } else {
    throw ConfigError(f.context("critic.kind") + ": expected reacritic or mlp, got '" + kind + "'");
  }
  auto& c = spec.reacritic;
  c.hidden_dim = f.get_size("critic.hidden_dim", c.hidden_dim);
  c.horizontal = f.get_size("critic.horizontal", c.horizontal);
  c.vertical = f.get_size("critic.vertical", c.vertical);
  c.heads = f.get_size("critic.heads", c.heads);
  c.ffn_dim = f.get_size("critic.ffn_dim", c.ffn_dim);
  c.noise_std = f.get_double("critic.noise_std", c.noise_std);
  c.noise_in_eval = f.get_bool("critic.noise_in_eval", c.noise_in_eval);
  spec.mlp_hidden = f.get_sizes("critic.mlp_hidden", spec.mlp_hidden);
  spec.mlp_match_budget = f.get_bool("critic.match_budget", spec.mlp_match_budget);
}

std::unique_ptr<env::Environment> make_env(const ExperimentSpec& spec) {
  if (spec.env == EnvKind::kHetNet) return std::make_unique<env::HetNetEnv>(spec.hetnet);
  return std::make_unique<env::PointMassEnv>(spec.pointmass);
}

std::size_t env_state_dim(const ExperimentSpec& spec) { return make_env(spec)->observation_dim(); }
std::size_t env_action_dim(const ExperimentSpec& spec) { return make_env(spec)->action_dim(); }

critic::CriticConfig variant_config(const ExperimentSpec& spec, const RunVariant& v) {
  critic::CriticConfig c = spec.reacritic;
  c.state_dim = env_state_dim(spec);
  c.action_dim = env_action_dim(spec);
  c.horizontal = v.horizontal;
  c.vertical = v.vertical;
  c.noise_std = v.noise_std;
  return c;
}

std::vector<std::size_t> mlp_widths(const ExperimentSpec& spec, const critic::CriticConfig& rea) {
  if (!spec.mlp_match_budget) return spec.mlp_hidden;
  const std::size_t w = critic::matched_mlp_width(critic::reacritic_parameter_count(rea), rea.state_dim + rea.action_dim);
  return {w, w};
}

ordered_json trainer_json(const drl::TrainerConfig& t) {
  ordered_json j;
  j["algo"] = t.algo == drl::Algo::kSac ? "sac" : "ddpg";
  j["gamma"] = t.gamma;
  j["critic_lr"] = t.critic_lr;
  j["actor_lr"] = t.actor_lr;
  j["alpha_lr"] = t.alpha_lr;
  j["tau"] = t.tau;
  j["batch_size"] = t.batch_size;
  j["buffer_capacity"] = t.buffer_capacity;
  j["warmup_steps"] = t.warmup_steps;
  j["update_every"] = t.update_every;
  j["gradient_steps"] = t.gradient_steps;
  j["twin_critic"] = t.twin_critic;
  j["auto_alpha"] = t.auto_alpha;
  j["alpha"] = t.alpha;
  if (t.target_entropy_set) j["target_entropy"] = t.target_entropy;
  j["entropy_in_target"] = t.entropy_in_target;
  j["exploration_std"] = t.exploration_std;
  j["reward_scale"] = t.reward_scale;
  j["episodes"] = t.episodes;
  j["max_episode_steps"] = t.max_episode_steps;
  j["actor_hidden"] = t.actor_hidden;
  j["log_std_max"] = t.log_std_max;
  j["report_window"] = t.report_window;
  return j;
}

ordered_json env_json(const ExperimentSpec& spec) {
  ordered_json j;
  if (spec.env == EnvKind::kPointMass) {
    const auto& p = spec.pointmass;
    j["kind"] = "pointmass";
    j["mass"] = p.mass;
    j["dt"] = p.dt;
    j["friction"] = p.friction;
    j["max_steps"] = p.max_steps;
    j["goal_radius"] = p.goal_radius;
    j["action_cost"] = p.action_cost;
    return j;
  }
  const auto& e = spec.hetnet;
  j["kind"] = "hetnet";
  j["users"] = e.users;
  j["episode_length"] = e.episode_length;
  j["mobility_std"] = e.mobility_std;
  j["path_loss_exponent"] = e.path_loss_exponent;
  j["rician_k"] = e.rician_k;
  j["uplink_power_max"] = e.uplink_power_max;
  j["downlink_power_max"] = e.downlink_power_max;
  j["uplink_bandwidth"] = e.uplink_bandwidth;
  j["downlink_bandwidth"] = e.downlink_bandwidth;
  j["uplink_noise"] = e.uplink_noise;
  j["downlink_noise"] = e.downlink_noise;
  j["compute_capacity"] = e.compute_capacity;
  j["distance_min"] = e.distance_min;
  j["distance_max"] = e.distance_max;
  j["latency_threshold_min"] = e.latency_threshold_min;
  j["latency_threshold_max"] = e.latency_threshold_max;
  j["demand_min"] = e.demand_min;
  j["demand_max"] = e.demand_max;
  j["type_count"] = e.type_count;
  j["cpu_freq_min"] = e.cpu_freq_min;
  j["cpu_freq_max"] = e.cpu_freq_max;
  j["capacitance_min"] = e.capacitance_min;
  j["capacitance_max"] = e.capacitance_max;
  j["latency_cap"] = e.latency_cap;
  j["uplink_rate_ref"] = e.uplink_reference();
  j["downlink_rate_ref"] = e.downlink_reference();
  return j;
}

// NaN is not representable in JSON; windows without data report null.
ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

void ExperimentSpec::validate() const {
  if (seeds.empty()) throw ConfigError("experiment: seeds must not be empty");
  if (trainer.episodes < 1) throw ConfigError("experiment: episodes must be >= 1");
  if (out.empty()) throw ConfigError("experiment: out must not be empty");
  trainer.validate();
  if (env == EnvKind::kHetNet) hetnet.validate();
  if (env == EnvKind::kPointMass) pointmass.validate();
  for (const auto& v : expand_sweep(*this)) {
    if (critic == CriticKind::kReaCritic || mlp_match_budget) variant_config(*this, v).validate();
  }
  if (critic == CriticKind::kMlp && !mlp_match_budget) {
    critic::MlpConfig m{env_state_dim(*this), env_action_dim(*this), mlp_hidden};
    m.validate();
  }
}

ExperimentSpec parse_experiment(const ConfigFile& file) {
  for (const auto& [key, entry] : file.entries()) {
    const auto dot = key.find('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
      throw ConfigError(file.source() + ":" + std::to_string(entry.line) + ": key '" + key +
                        "' is outside the known sections [experiment], [env], [pointmass], [trainer], [critic]");
    }
  }
  file.reject_unknown("experiment", {"name", "env", "seeds", "episodes", "out", "sweep_horizontal", "sweep_vertical",
                                     "sweep_noise"});
  ExperimentSpec spec;
  try {
    spec.name = file.get_string("experiment.name", spec.name);
    const std::string env = file.get_string("experiment.env", "pointmass");
    if (env == "hetnet") {
      spec.env = EnvKind::kHetNet;
    } else if (env == "pointmass") {
      spec.env = EnvKind::kPointMass;
    } else {
      throw ConfigError(file.context("experiment.env") + ": expected hetnet or pointmass, got '" + env + "'");
    }
    spec.hetnet = env::env_config_from(file, "env");
    spec.pointmass = env::point_mass_config_from(file);
    spec.trainer = parse_trainer(file, file.get_size("experiment.episodes", 100));
    parse_critic(file, spec);
    spec.seeds = file.get_u64s("experiment.seeds", spec.seeds);
    spec.out = file.get_string("experiment.out", spec.out.string());
    spec.sweep_horizontal = file.get_sizes("experiment.sweep_horizontal", {});
    spec.sweep_vertical = file.get_sizes("experiment.sweep_vertical", {});
    spec.sweep_noise = file.get_doubles("experiment.sweep_noise", {});
    spec.validate();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    // Validation messages carry no location; parse errors already do.
    if (what.rfind(file.source(), 0) == 0) throw;
    throw ConfigError(file.source() + ": " + what);
  }
  return spec;
}

ExperimentSpec load_experiment(const fs::path& path) { return parse_experiment(ConfigFile::load(path)); }

std::vector<RunVariant> expand_sweep(const ExperimentSpec& spec) {
  const auto hs = spec.sweep_horizontal.empty() ? std::vector<std::size_t>{spec.reacritic.horizontal} : spec.sweep_horizontal;
  const auto vs = spec.sweep_vertical.empty() ? std::vector<std::size_t>{spec.reacritic.vertical} : spec.sweep_vertical;
  const auto ns = spec.sweep_noise.empty() ? std::vector<double>{spec.reacritic.noise_std} : spec.sweep_noise;
  std::vector<RunVariant> out;
  for (std::size_t h : hs) {
    for (std::size_t v : vs) {
      for (double n : ns) {
        RunVariant r{"H" + std::to_string(h) + "_V" + std::to_string(v), h, v, n};
        if (!spec.sweep_noise.empty() || n != 0.0) r.label += "_noise" + short_double(n);
        if (spec.critic == CriticKind::kMlp) {
          const bool swept = !spec.sweep_horizontal.empty() || !spec.sweep_vertical.empty() || !spec.sweep_noise.empty();
          r.label = swept ? "mlp_" + r.label : "mlp";
        }
        out.push_back(r);
      }
    }
  }
  return out;
}

std::string metrics_row(const drl::EpisodeStats& s) {
  return std::to_string(s.episode) + "," + format_double(s.episode_return) + "," + format_double(s.critic_loss_mean) +
         "," + format_double(s.q_mean) + "," + std::to_string(s.steps) + "," + std::to_string(s.updates) + "," +
         format_double(s.alpha);
}

std::vector<RunOutcome> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  const fs::path root = options.out.empty() ? spec.out : options.out;
  const auto& seeds = options.seeds.empty() ? spec.seeds : options.seeds;
  std::vector<RunOutcome> outcomes;
  for (const auto& variant : expand_sweep(spec)) {
    const critic::CriticConfig rea = variant_config(spec, variant);
    critic::MlpConfig mlp{rea.state_dim, rea.action_dim, mlp_widths(spec, rea)};
    drl::CriticFactory factory = [&](std::uint64_t seed) -> std::unique_ptr<critic::Critic> {
      if (spec.critic == CriticKind::kMlp) return std::make_unique<critic::MlpCritic>(mlp, seed);
      return std::make_unique<critic::ReaCritic>(rea, seed);
    };
    const std::size_t parameters = spec.critic == CriticKind::kMlp
                                       ? critic::mlp_parameter_count(rea.state_dim + rea.action_dim, mlp.hidden)
                                       : critic::reacritic_parameter_count(rea);

    for (std::uint64_t seed : seeds) {
      const fs::path dir = root / variant.label / ("seed_" + std::to_string(seed));
      fs::create_directories(dir);
      std::ofstream metrics(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
      std::ofstream timing(dir / "timing.csv", std::ios::binary | std::ios::trunc);
      if (!metrics || !timing) throw ConfigError("cannot write to output directory '" + dir.string() + "'");
      metrics << kMetricsHeader << "\n";
      timing << "episode,wall_ms\n";

      drl::Callbacks callbacks;
      callbacks.on_episode = [&](const drl::EpisodeStats& s) {
        metrics << metrics_row(s) << "\n";
        metrics.flush();
        timing << s.episode << "," << format_double(s.wall_ms) << "\n";
        if (options.log != nullptr) {
          char line[200];
          std::snprintf(line, sizeof line, "[%s seed %llu] episode %zu return %.4f loss %.4g updates %zu\n",
                        variant.label.c_str(), static_cast<unsigned long long>(seed), s.episode, s.episode_return,
                        s.critic_loss_mean, s.updates);
          *options.log << line << std::flush;
        }
      };
      auto env = make_env(spec);
      RunOutcome outcome{variant, seed, drl::train(*env, spec.trainer, factory, seed, callbacks), dir};

      ordered_json summary;
      summary["schema_version"] = kMetricsSchemaVersion;
      summary["metrics_columns"] = kMetricsHeader;
      summary["name"] = spec.name;
      summary["label"] = variant.label;
      summary["seed"] = seed;
      summary["episodes"] = outcome.report.episodes.size();
      summary["total_steps"] = outcome.report.total_steps;
      summary["total_updates"] = outcome.report.total_updates;
      summary["report_window"] = spec.trainer.report_window;
      summary["first_window_mean_return"] = number_or_null(outcome.report.first_window_mean);
      summary["final_window_mean_return"] = number_or_null(outcome.report.final_window_mean);
      ordered_json critic_j;
      critic_j["kind"] = spec.critic == CriticKind::kMlp ? "mlp" : "reacritic";
      critic_j["parameters"] = parameters;
      if (spec.critic == CriticKind::kMlp) {
        critic_j["hidden"] = mlp.hidden;
        critic_j["match_budget"] = spec.mlp_match_budget;
      } else {
        critic_j["hidden_dim"] = rea.hidden_dim;
        critic_j["heads"] = rea.heads;
        critic_j["ffn_dim"] = rea.ffn_width();
        critic_j["noise_in_eval"] = rea.noise_in_eval;
      }
      critic_j["horizontal"] = variant.horizontal;
      critic_j["vertical"] = variant.vertical;
      critic_j["noise_std"] = variant.noise_std;
      summary["critic"] = critic_j;
      summary["trainer"] = trainer_json(spec.trainer);
      summary["env"] = env_json(spec);
      std::ofstream(dir / "summary.json", std::ios::binary | std::ios::trunc) << summary.dump(2) << "\n";
      timing << "total," << format_double(outcome.report.wall_ms) << "\n";
      outcomes.push_back(std::move(outcome));
    }
  }
  return outcomes;
}

std::vector<double> read_returns(const fs::path& metrics_csv) {
  std::ifstream in(metrics_csv);
  if (!in) throw ConfigError("cannot read metrics file '" + metrics_csv.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != kMetricsHeader) throw ConfigError("'" + metrics_csv.string() + "' does not have the metrics header");
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::string episode, value;
    std::getline(row, episode, ',');
    std::getline(row, value, ',');
    out.push_back(std::stod(value));
  }
  return out;
}

std::string sweep_report(const fs::path& directory) {
  if (!fs::is_directory(directory)) throw ConfigError("'" + directory.string() + "' is not a directory");
  struct Cell {
    double total = 0.0;
    std::size_t seeds = 0;
  };
  // (kind, noise) -> (H, V) -> mean over seeds
  std::map<std::pair<std::string, double>, std::map<std::pair<std::size_t, std::size_t>, Cell>> grids;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().filename() == "summary.json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("critic")) throw ConfigError("malformed summary '" + path.string() + "'");
    const auto& value = j["final_window_mean_return"];
    if (value.is_null()) continue;
    const auto& c = j["critic"];
    auto& cell = grids[{c["kind"].get<std::string>(), c["noise_std"].get<double>()}]
                      [{c["horizontal"].get<std::size_t>(), c["vertical"].get<std::size_t>()}];
    cell.total += value.get<double>();
    ++cell.seeds;
  }
  if (grids.empty()) throw ConfigError("no run summaries under '" + directory.string() + "'");

  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  for (const auto& [key, grid] : grids) {
    std::vector<std::size_t> hs, vs;
    for (const auto& [hv, cell] : grid) {
      if (std::find(hs.begin(), hs.end(), hv.first) == hs.end()) hs.push_back(hv.first);
      if (std::find(vs.begin(), vs.end(), hv.second) == vs.end()) vs.push_back(hv.second);
    }
    std::sort(vs.begin(), vs.end());
    out << "critic " << key.first << ", noise_std " << short_double(key.second)
        << ": mean final-window return over seeds (rows H, columns V)\n";
    out << std::setw(6) << "H\\V";
    for (std::size_t v : vs) out << std::setw(14) << v;
    out << "\n";
    for (std::size_t h : hs) {
      out << std::setw(6) << h;
      for (std::size_t v : vs) {
        auto it = grid.find({h, v});
        if (it == grid.end()) {
          out << std::setw(14) << "-";
        } else {
          out << std::setw(14) << it->second.total / static_cast<double>(it->second.seeds);
        }
      }
      out << "\n";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace reacritic::harness
