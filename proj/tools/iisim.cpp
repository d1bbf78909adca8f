// iisim: run AS<->IIS simulations, check trace files, drive fuzz campaigns.
//
// Exit status: 0 all checks pass, 1 check failure, 2 usage or parse error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "iisim/harness.hpp"

namespace {

using namespace iisim;

constexpr int kOk = 0;
constexpr int kCheckFailure = 1;
constexpr int kUsage = 2;

std::filesystem::path default_out_dir() {
  const char* env = std::getenv("IISIM_OUT_DIR");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path(".");
}

std::string default_name(const RunResult& res) {
  const auto& m = res.trace.meta;
  std::string name = to_string(m.direction);
  if (m.direction == Direction::iis_to_as) name += std::string("-") + to_string(m.mode);
  name += "-n" + std::to_string(m.n);
  if (m.seed) name += "-seed" + std::to_string(*m.seed);
  else name += "-script" + m.script_hash->substr(0, 8);
  return name + ".jsonl";
}

struct WindowFlags {
  std::optional<int> burn_in, width, output_width;

  void attach(CLI::App* app) {
    app->add_option("--burn-in", burn_in, "rounds skipped before windows start (default 2n)");
    app->add_option("--window", width, "awareness window width in rounds (default 2n+12)");
    app->add_option("--output-window", output_width, "output window width in rounds, iis-to-as (default 2n+16)");
  }
};

void print_run_summary(const RunResult& res, std::ostream& os) {
  const auto& tf = res.trace;
  const int n = tf.meta.n;
  if (tf.meta.direction == Direction::as_to_iis) {
    SimOutput out = views_output(n, tf.views);
    os << "activations " << tf.meta.steps << ", simulated rounds " << tf.rounds.size() << "\n";
    for (ProcessId p = 1; p <= n; ++p) {
      os << "  process " << p << ": " << out.rounds_completed(p) << " rounds completed";
      if (auto it = tf.meta.crashes.find(p); it != tf.meta.crashes.end() && it->second < tf.meta.steps)
        os << ", crashed at activation " << it->second;
      os << "\n";
    }
  } else {
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    for (const auto& o : tf.outputs) ++count[static_cast<std::size_t>(o.process - 1)];
    os << "rounds " << tf.rounds.size() << ", mode " << to_string(tf.meta.mode) << "\n";
    for (ProcessId p = 1; p <= n; ++p) os << "  process " << p << ": " << count[static_cast<std::size_t>(p - 1)] << " snapshots\n";
  }
  for (const auto& f : res.faults) os << "FAULT " << f << "\n";
}

int cmd_run(RunConfig cfg, const std::string& direction, const std::string& mode,
            const std::optional<std::string>& schedule_path, const std::optional<std::string>& out_path) {
  auto dir = parse_direction(direction);
  if (!dir) throw InvalidInput("unknown direction '" + direction + "'");
  cfg.direction = *dir;
  auto m = parse_mode(mode);
  if (!m) throw InvalidInput("unknown mode '" + mode + "'");
  cfg.mode = *m;
  if (schedule_path) cfg.script = read_file(*schedule_path);
  RunResult res;
  try {
    res = run_simulation(cfg);
  } catch (const ParseError& e) {
    // Re-attribute script errors to the file.
    std::string msg = e.what();
    if (schedule_path && msg.rfind("<schedule>", 0) == 0) msg = *schedule_path + msg.substr(10);
    throw InvalidInput(msg);
  } catch (const SimulationFault& e) {
    std::cerr << "simulation fault: " << e.what() << "\n";
    return kCheckFailure;
  }

  std::filesystem::path path = out_path ? std::filesystem::path(*out_path) : default_out_dir() / default_name(res);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_trace(out, res.trace);
  out.close();
  print_run_summary(res, std::cout);
  std::cout << "trace " << path.string() << "\n";
  return res.ok() ? kOk : kCheckFailure;
}

int cmd_check(const std::string& path, const WindowFlags& wf, bool as_json) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  TraceFile tf = read_trace(in, path);
  const int n = tf.meta.n;
  std::optional<WindowParams> w, ow;
  if (wf.burn_in || wf.width) w = WindowParams{wf.burn_in.value_or(tf.meta.window.burn_in), wf.width.value_or(tf.meta.window.width)};
  if (wf.burn_in || wf.output_width)
    ow = WindowParams{wf.burn_in.value_or(tf.meta.output_window.burn_in),
                      wf.output_width.value_or(tf.meta.output_window.width)};
  if (w && (w->width < 1 || w->burn_in < 0)) throw InvalidInput("bad window parameters");
  if (ow && ow->width < 1) throw InvalidInput("bad output window");
  CheckReport rep = check_trace(tf, w, ow);
  if (as_json) {
    std::cout << report_json(rep).dump(2) << "\n";
  } else {
    std::cout << to_string(tf.meta.direction) << " trace, n=" << n << ", " << tf.rounds.size() << " rounds\n";
    std::cout << format_report(rep);
    std::cout << (rep.ok() ? "all checks passed" : "checks failed") << "\n";
  }
  return rep.ok() ? kOk : kCheckFailure;
}

int cmd_fuzz(RunConfig base, std::uint64_t first, std::uint64_t last, const std::string& direction) {
  std::vector<Direction> dirs;
  if (direction == "both") dirs = {Direction::as_to_iis, Direction::iis_to_as};
  else if (auto d = parse_direction(direction)) dirs = {*d};
  else throw InvalidInput("unknown direction '" + direction + "'");
  if (first > last) throw InvalidInput("empty seed range");
  base.seed = first;
  validate_config(base);

  FuzzSummary sum = fuzz(base, first, last, dirs);
  std::cout << "direction    seeds  failures\n";
  for (Direction d : dirs) {
    std::size_t total = 0, failed = 0;
    for (const auto& c : sum.cases) {
      if (c.direction != d) continue;
      ++total;
      if (!c.failures.empty()) ++failed;
    }
    std::printf("%-11s  %5zu  %8zu\n", to_string(d), total, failed);
  }
  for (const auto& c : sum.cases) {
    if (c.failures.empty()) continue;
    std::cout << "FAIL " << to_string(c.direction) << " seed " << c.seed << ": " << c.failures.front() << "\n";
  }
  return sum.failed() == 0 ? kOk : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AS <-> IIS simulation toolkit"};
  app.require_subcommand(1);

  RunConfig run_cfg;
  std::string run_direction = "as-to-iis", run_mode = "helping";
  std::optional<std::string> schedule_path, out_path;
  std::optional<std::uint64_t> run_seed;
  WindowFlags run_windows;
  auto* run = app.add_subcommand("run", "run one simulation and write a trace file");
  run->add_option("--direction", run_direction, "as-to-iis | iis-to-as")->capture_default_str();
  run->add_option("--mode", run_mode, "helping | baseline (iis-to-as)")->capture_default_str();
  auto* sched_opt = run->add_option("--schedule", schedule_path, "schedule script file");
  run->add_option("--seed", run_seed, "seed for a fuzzed schedule")->excludes(sched_opt);
  run->add_option("--n", run_cfg.n, "number of processes (seeded runs)")->capture_default_str();
  run->add_option("--horizon", run_cfg.horizon, "activations (as-to-iis) or rounds (iis-to-as)")->required();
  run->add_option("--crash-prob", run_cfg.crash_prob, "per-process crash probability (seeded as-to-iis)");
  run->add_option("--out", out_path, "trace file (default $IISIM_OUT_DIR or current directory)");
  run_windows.attach(run);

  std::string check_path;
  bool check_json = false;
  WindowFlags check_windows;
  auto* check = app.add_subcommand("check", "run all applicable checkers on a trace file");
  check->add_option("trace", check_path, "trace file")->required();
  check->add_flag("--json", check_json, "machine-readable report");
  check_windows.attach(check);

  RunConfig fuzz_cfg;
  fuzz_cfg.horizon = 10000;
  std::uint64_t seed_from = 0, seed_to = 99;
  std::string fuzz_direction = "both";
  WindowFlags fuzz_windows;
  auto* fz = app.add_subcommand("fuzz", "run and check a range of seeds");
  fz->add_option("--n", fuzz_cfg.n, "number of processes")->capture_default_str();
  fz->add_option("--seed-from", seed_from, "first seed")->capture_default_str();
  fz->add_option("--seed-to", seed_to, "last seed (inclusive)")->capture_default_str();
  fz->add_option("--direction", fuzz_direction, "as-to-iis | iis-to-as | both")->capture_default_str();
  fz->add_option("--horizon", fuzz_cfg.horizon, "activations (as-to-iis) or rounds (iis-to-as)")->capture_default_str();
  fz->add_option("--crash-prob", fuzz_cfg.crash_prob, "per-process crash probability (as-to-iis)");
  fuzz_windows.attach(fz);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) {
      run_cfg.seed = run_seed;
      run_cfg.burn_in = run_windows.burn_in;
      run_cfg.width = run_windows.width;
      run_cfg.output_width = run_windows.output_width;
      return cmd_run(run_cfg, run_direction, run_mode, schedule_path, out_path);
    }
    if (*check) return cmd_check(check_path, check_windows, check_json);
    fuzz_cfg.burn_in = fuzz_windows.burn_in;
    fuzz_cfg.width = fuzz_windows.width;
    fuzz_cfg.output_width = fuzz_windows.output_width;
    return cmd_fuzz(fuzz_cfg, seed_from, seed_to, fuzz_direction);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
