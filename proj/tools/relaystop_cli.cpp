// relaystop: solve, simulate and compare opportunistic relay access policies.
//
//   relaystop solve    --config cfg.json
//   relaystop simulate --config cfg.json --packets 100000 --out results/
//   relaystop compare | sweep | oracle ...
//
// Exit status: 0 every verdict passed, 1 some verdict failed, 2 bad config
// or solver/simulator error.

#include <CLI11.hpp>

#include <iostream>

#include "relaystop/errors.hpp"
#include "relaystop/experiment.hpp"

using namespace relaystop;

namespace {

struct Flags {
  std::string config;
  Overrides ov;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.ov.seed, "master seed");
  cmd->add_option("--packets", f.ov.packets, "packets to simulate");
  cmd->add_option("--out", f.ov.out_dir, "output directory");
  cmd->add_option("--scenario", f.ov.scenario, "1 | 2-intuitive | 2-optimal");
}

void print(const ReportSummary& r) {
  const json j = r.to_json();
  for (const auto& t : j["results"].value("thresholds", json::array()))
    std::cout << t["name"].get<std::string>() << " = " << t["value"].dump()
              << "  (residual " << t["residual"].dump() << ", " << t["iterations"].dump()
              << " iterations)\n";
  for (const auto& item : j["results"].items()) {
    if (item.key() == "thresholds") continue;
    std::cout << item.key() << ": " << item.value().dump() << '\n';
  }
  for (const auto& v : r.verdicts)
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << '\n';
  std::cout << "runtime " << r.runtime_seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opportunistic relay channel-access solver and simulator"};
  app.require_subcommand(1);

  Flags f;
  std::vector<std::pair<std::string, ReportSummary (*)(const ExperimentConfig&)>> commands{
      {"solve", cmd_solve},     {"simulate", cmd_simulate}, {"compare", cmd_compare},
      {"sweep", cmd_sweep},     {"oracle", cmd_oracle}};
  const char* help[] = {"solve for the optimal threshold",
                        "solve, then simulate the protocol under the solved rule",
                        "intuitive vs optimal bi-level rules under common seeds",
                        "solve (and optionally simulate) along one parameter axis",
                        "brute-force threshold grid vs the solved threshold"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(commands[i].first, help[i]);
    add_common(cmd, f);
    subs.push_back(cmd);
  }
  subs[3]->add_option("--axis", f.ov.axis, "parameter to vary");
  subs[3]->add_option("--values", f.ov.values, "comma-separated values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;  // --help is not an error
  }

  try {
    ExperimentConfig cfg = f.config.empty() ? parse_config(json{{"schema_version", kSchemaVersion}})
                                            : load_config(f.config);
    apply(cfg, f.ov);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const ReportSummary r = commands[i].second(cfg);
      print(r);
      write_summary(cfg, r);
      return r.all_pass() ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
