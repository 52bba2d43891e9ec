// ctree-lab <command> <experiment> [--key value ...]
// Exit codes: 0 every check passed, 1 a check failed or a module raised an
// error, 2 bad configuration (unknown experiment, unknown or malformed setting).
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ctree/error.hpp"
#include "ctree/experiments.hpp"

namespace {

constexpr int kPass = 0, kFail = 1, kConfig = 2;

struct Globals {
  std::string seed;
  std::string reps;
  std::string out;
  std::string format = "json";
  std::string config;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ctree::Error(ctree::ErrorCode::ConfigError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "--key value" and "--key=value" pairs; dashes inside keys read as underscores.
void apply_extras(ctree::lab::Settings& s, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string arg = extras[i];
    if (arg.rfind("--", 0) != 0)
      throw ctree::Error(ctree::ErrorCode::ConfigError, "unexpected argument '" + arg + "'");
    arg = arg.substr(2);
    std::string value;
    if (auto eq = arg.find('='); eq != std::string::npos) {
      value = arg.substr(eq + 1);
      arg = arg.substr(0, eq);
    } else {
      if (i + 1 >= extras.size()) throw ctree::Error(ctree::ErrorCode::ConfigError, "--" + arg + " needs a value");
      value = extras[++i];
    }
    for (char& c : arg)
      if (c == '-') c = '_';
    s.set(arg, value);
  }
}

int list_experiments(const Globals& g) {
  std::string out;
  if (g.format == "csv") {
    out = "command,experiment,criterion,verifies\n";
    for (const auto& e : ctree::lab::catalog())
      out += e.command + "," + e.name + "," + std::to_string(e.criterion) + ",\"" + e.verifies + "\"\n";
  } else {
    for (const auto& e : ctree::lab::catalog()) {
      out += e.command + " " + e.name;
      out += e.criterion ? "  [criterion " + std::to_string(e.criterion) + "]" : "  [export]";
      out += "  " + e.verifies + "\n";
      for (const auto& [k, v] : e.defaults) out += "    --" + k + " " + (v.empty() ? "(derived)" : v) + "\n";
    }
  }
  std::cout << out;
  return kPass;
}

int run_experiment(const Globals& g, const std::string& command, const std::string& name,
                   const std::vector<std::string>& extras) {
  const auto* e = ctree::lab::find_experiment(command, name);
  if (!e) {
    std::cerr << "ctree-lab: unknown experiment '" << command << " " << name << "' (see ctree-lab list)\n";
    return kConfig;
  }
  ctree::lab::Settings s = e->settings();
  try {
    if (!g.config.empty()) ctree::lab::apply_config_text(s, read_file(g.config));
    if (!g.seed.empty()) {
      if (!e->stochastic) throw ctree::Error(ctree::ErrorCode::ConfigError, "this experiment takes no seed");
      s.set("seed", g.seed);
    }
    if (!g.reps.empty()) s.set("reps", g.reps);
    apply_extras(s, extras);
    if (e->stochastic) s.seed();
  } catch (const ctree::Error& err) {
    std::cerr << "ctree-lab: " << err.what() << "\n";
    return kConfig;
  }

  ctree::lab::Outcome outcome;
  try {
    outcome = e->run(s);
  } catch (const ctree::Error& err) {
    std::cerr << "ctree-lab: " << err.what() << "\n";
    return err.code() == ctree::ErrorCode::ConfigError ? kConfig : kFail;
  }
  const std::string text = g.format == "csv" ? ctree::lab::outcome_csv(outcome) : ctree::lab::outcome_json(*e, s, outcome);
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(g.out, std::ios::binary);
    if (!f) {
      std::cerr << "ctree-lab: cannot write " << g.out << "\n";
      return kConfig;
    }
    f << text;
  }
  std::cerr << (outcome.report.pass ? "PASS " : "FAIL ") << command << " " << name << "\n";
  for (const auto& n : outcome.notes) std::cerr << "  " << n << "\n";
  return outcome.report.pass ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random tree and Brownian snake laboratory"};
  app.require_subcommand(1);
  Globals g;
  // The global flags may come before or after the command.
  auto add_globals = [&g](CLI::App* a) {
    a->add_option("--seed", g.seed, "master seed (required by stochastic experiments)");
    a->add_option("--reps", g.reps, "replicate count, for experiments with a reps setting");
    a->add_option("--out", g.out, "output file (default stdout)");
    a->add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    a->add_option("--config", g.config, "flat key = value settings file, applied before other flags");
  };
  add_globals(&app);
  add_globals(app.add_subcommand("list", "print the experiment catalog"));
  std::string experiment;
  std::vector<CLI::App*> commands;
  for (const char* c : {"codings", "gw", "limits", "crt", "gh", "snake"}) {
    auto* sub = app.add_subcommand(c, std::string("experiments of the ") + c + " module");
    sub->add_option("experiment", experiment, "experiment name")->required();
    add_globals(sub);
    sub->allow_extras();
    commands.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  if (app.got_subcommand("list")) return list_experiments(g);
  for (auto* sub : commands)
    if (sub->parsed()) return run_experiment(g, sub->get_name(), experiment, sub->remaining());
  return kConfig;
}
