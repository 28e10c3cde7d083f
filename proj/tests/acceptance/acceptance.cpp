// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Pass criterion numbers as arguments to run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "reacritic/errors.hpp"
#include "reacritic/harness/experiment.hpp"
#include "reacritic/harness/verify.hpp"

namespace fs = std::filesystem;
using namespace reacritic;
using namespace reacritic::harness;

namespace {

const fs::path kConfigs = REACRITIC_CONFIG_DIR;
const fs::path kWork = REACRITIC_WORK_DIR;
const std::string kHarness = REACRITIC_HARNESS_PATH;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_harness(const std::string& args) {
  const std::string cmd = kHarness + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<fs::path> metrics_files(const fs::path& root) {
  std::vector<fs::path> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.path().filename() == "metrics.csv") out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CheckResult> filtered(const std::vector<CheckResult>& checks, const std::function<bool(const std::string&)>& keep) {
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    if (keep(c.name)) out.push_back(c);
  }
  return out;
}

Outcome summarize_checks(const std::vector<CheckResult>& checks) {
  Outcome o{!checks.empty() && all_passed(checks), ""};
  double worst_ratio = 0.0;
  std::string worst = "none";
  for (const auto& c : checks) {
    if (!c.passed) {
      o.detail += c.name + " measured " + fmt("%.3e", c.measured) + " > " + fmt("%.1e", c.tolerance) + "; ";
    }
    const double ratio = c.tolerance > 0.0 ? c.measured / c.tolerance : (c.measured > 0.0 ? 1e300 : 0.0);
    if (ratio >= worst_ratio) {
      worst_ratio = ratio;
      worst = c.name + " " + fmt("%.3e", c.measured) + " (tol " + fmt("%.1e", c.tolerance) + ")";
    }
  }
  o.detail += std::to_string(checks.size()) + " checks, worst " + worst;
  return o;
}

// Runs an experiment file and counts seeds whose final window beats the first.
struct LearningRun {
  std::size_t improved = 0;
  std::size_t seeds = 0;
  bool finite_losses = true;
  std::string per_seed;
};

LearningRun learning_run(const std::string& config, const fs::path& out) {
  const ExperimentSpec spec = load_experiment(kConfigs / config);
  fs::remove_all(out);
  RunOptions options;
  options.out = out;
  LearningRun r;
  for (const auto& o : run_experiment(spec, options)) {
    ++r.seeds;
    const double first = o.report.first_window_mean, last = o.report.final_window_mean;
    if (last > first) ++r.improved;
    for (const auto& e : o.report.episodes) {
      if (e.updates > 0 && !(std::isfinite(e.critic_loss_mean) && std::isfinite(e.q_mean))) r.finite_losses = false;
    }
    r.per_seed += fmt("[%.0f: %.2f -> %.2f] ", static_cast<double>(o.seed), first, last);
  }
  return r;
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const auto checks = filtered(grad_suite(), [](const std::string& n) { return n.rfind("reacritic.", 0) == 0; });
  const double t = seconds_since(start);
  Outcome o = summarize_checks(checks);
  o.passed = o.passed && t < 60.0;
  o.detail = "ReaCritic d_h=16 H=4 V=2 heads=2 B=3, " + o.detail + fmt(", %.1f s (limit 60 s)", t);
  return o;
}

Outcome criterion2() { return summarize_checks(norm_suite()); }

Outcome criterion3() {
  return summarize_checks(filtered(env_suite(), [](const std::string& n) {
    return n.rfind("projection", 0) != 0 && n.find("determinism") == std::string::npos;
  }));
}

Outcome criterion4() {
  return summarize_checks(filtered(env_suite(), [](const std::string& n) { return n.rfind("projection", 0) == 0; }));
}

Outcome criterion5() {
  const auto start = std::chrono::steady_clock::now();
  const fs::path a = kWork / "determinism_a", b = kWork / "determinism_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const std::string config = (kConfigs / "hetnet_determinism.ini").string();
  const int ea = run_harness("run --quiet --config " + config + " --out " + a.string());
  const int eb = run_harness("run --quiet --config " + config + " --out " + b.string());
  const double t = seconds_since(start);
  const auto fa = metrics_files(a), fb = metrics_files(b);
  bool same = ea == 0 && eb == 0 && !fa.empty() && fa == fb;
  std::size_t rows = 0;
  for (const auto& f : fa) {
    const std::string x = slurp(a / f);
    same = same && x == slurp(b / f);
    rows += static_cast<std::size_t>(std::count(x.begin(), x.end(), '\n')) - 1;
  }
  const ExperimentSpec spec = load_experiment(kConfigs / "hetnet_determinism.ini");
  const bool shape = spec.hetnet.users == 5 && spec.env == EnvKind::kHetNet && rows == 20 * fa.size();
  Outcome o{same && shape && t < 120.0, ""};
  o.detail = "two `harness run` invocations, HetNet M=" + std::to_string(spec.hetnet.users) + ", " +
             std::to_string(rows) + " episode rows in " + std::to_string(fa.size()) + " metrics file(s), " +
             (same ? "byte-identical" : "DIFFERENT or failed (exit " + std::to_string(ea) + "/" + std::to_string(eb) + ")") +
             fmt(", %.1f s (limit 120 s)", t);
  return o;
}

Outcome criterion6() {
  const auto start = std::chrono::steady_clock::now();
  const LearningRun r = learning_run("toy_sac.ini", kWork / "toy_sac");
  const double t = seconds_since(start);
  Outcome o{r.improved >= 4 && r.seeds == 5 && t < 600.0, ""};
  o.detail = "toy SAC+ReaCritic H=4 V=2 d_h=32, 150 episodes: final-20 > first-20 in " + std::to_string(r.improved) +
             "/" + std::to_string(r.seeds) + " seeds " + r.per_seed + fmt("%.0f s (limit 600 s)", t);
  return o;
}

Outcome criterion7() {
  const auto start = std::chrono::steady_clock::now();
  LearningRun r;
  std::string error;
  try {
    r = learning_run("hetnet_sac.ini", kWork / "hetnet_sac");
  } catch (const DivergenceError& e) {
    error = std::string("diverged: ") + e.what();
    r.finite_losses = false;
  }
  const double t = seconds_since(start);
  Outcome o{error.empty() && r.improved >= 4 && r.seeds == 5 && r.finite_losses && t < 1200.0, ""};
  o.detail = "HetNet M=5 SAC+ReaCritic H=4 V=2, 200 episodes: final-20 > first-20 in " + std::to_string(r.improved) +
             "/" + std::to_string(r.seeds) + " seeds " + r.per_seed + (r.finite_losses ? "losses finite, " : "NON-FINITE loss, ") +
             error + fmt("%.0f s (limit 1200 s)", t);
  return o;
}

Outcome criterion8() {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  for (const char* config : {"hetnet_baseline_h1v1.ini", "hetnet_mlp.ini"}) {
    const ExperimentSpec spec = load_experiment(kConfigs / config);
    const ExperimentSpec reference = load_experiment(kConfigs / "hetnet_sac.ini");
    // Same schedule as the HetNet learning run; only the critic differs.
    const bool same_schedule = spec.trainer.episodes == reference.trainer.episodes && spec.seeds == reference.seeds &&
                               spec.hetnet.users == reference.hetnet.users &&
                               spec.hetnet.episode_length == reference.hetnet.episode_length;
    try {
      const LearningRun r = learning_run(config, kWork / fs::path(config).stem());
      const bool pass = same_schedule && r.seeds == spec.seeds.size() && r.finite_losses;
      ok = ok && pass;
      detail += std::string(config) + (pass ? " completed " : " FAILED ") + std::to_string(r.seeds) + " seeds " +
                r.per_seed;
    } catch (const std::exception& e) {
      ok = false;
      detail += std::string(config) + " error: " + e.what() + " ";
    }
  }
  return {ok, detail + fmt("%.0f s", seconds_since(start))};
}

Outcome criterion9() { return summarize_checks(flops_suite()); }

Outcome criterion10() {
  const auto start = std::chrono::steady_clock::now();
  const fs::path a = kWork / "noise_a", b = kWork / "noise_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const std::string config = (kConfigs / "hetnet_noise_ablation.ini").string();
  const int ea = run_harness("run --quiet --config " + config + " --out " + a.string());
  const int eb = run_harness("run --quiet --config " + config + " --out " + b.string());
  const ExperimentSpec spec = load_experiment(kConfigs / "hetnet_noise_ablation.ini");
  bool ok = ea == 0 && eb == 0 && spec.hetnet.users == 5;
  std::size_t pairs = 0, differing = 0;
  for (std::uint64_t seed : spec.seeds) {
    const std::string s = "seed_" + std::to_string(seed);
    const fs::path off = fs::path("H4_V2_noise0") / s / "metrics.csv", on = fs::path("H4_V2_noise0.1") / s / "metrics.csv";
    const bool present = fs::exists(a / off) && fs::exists(a / on);
    ok = ok && present && slurp(a / off) == slurp(b / off) && slurp(a / on) == slurp(b / on);
    if (present) {
      ++pairs;
      differing += slurp(a / off) != slurp(a / on);
    }
  }
  ok = ok && pairs == spec.seeds.size();
  Outcome o{ok, ""};
  o.detail = "noise off/on at M=5: " + std::to_string(pairs) + " paired metrics files per rerun, reruns " +
             (ok ? "byte-identical" : "NOT identical or missing") + ", noise changed the trajectory in " +
             std::to_string(differing) + "/" + std::to_string(pairs) + fmt(" pairs, %.0f s", seconds_since(start));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient fidelity", criterion1},       {"normalization invariants", criterion2},
      {"environment closed forms", criterion3}, {"constraint feasibility", criterion4},
      {"determinism", criterion5},             {"learning progress (toy)", criterion6},
      {"learning progress (HetNet)", criterion7}, {"baseline critics", criterion8},
      {"complexity audit", criterion9},        {"noise ablation harness", criterion10},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::atoi(argv[i])));
  fs::create_directories(kWork);

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.passed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
