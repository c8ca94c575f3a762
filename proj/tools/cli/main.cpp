#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace mixlab::cli;

// Drops any `key = ...` line from `text` and appends `key = value`.
std::string override_key(const std::string& text, const std::string& key, double value) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    std::string name = eq == std::string::npos ? "" : line.substr(0, eq);
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    if (name != key) out += line + '\n';
  }
  return out + key + " = " + num(value) + '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixlab: mixing-time experiments for noising diffusions"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::uint64_t seed = 0;
    std::string out = ".";
    unsigned threads = 0;
    bool svg = false;
    bool show_keys = false;
    std::optional<double> p, ell;
  } opt;

  for (const auto& cmd : commands()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.summary);
    sub->footer("Config keys:\n" + describe(cmd.schema()));
    sub->add_option("--config", opt.config, "key = value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "master seed")->required();
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--threads", opt.threads, "worker threads (default: hardware concurrency)");
    sub->add_flag("--svg", opt.svg, "also write SVG charts");
    sub->add_flag("--keys", opt.show_keys, "print the resolved configuration and exit");
    if (cmd.name == "classify") {
      sub->add_option("--p", opt.p, "tail exponent");
      sub->add_option("--ell", opt.ell, "temperature");
    }
  }

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();

  std::string text;
  if (!opt.config.empty()) {
    std::ifstream in(opt.config, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  if (opt.p) text = override_key(text, "p", *opt.p);
  if (opt.ell) text = override_key(text, "ell", *opt.ell);

  if (opt.show_keys) {
    try {
      const auto cfg = Config::parse(text, find_command(name)->schema());
      for (const auto& [k, v] : cfg.entries()) std::cout << k << " = " << v << '\n';
      return kExitOk;
    } catch (const ConfigError& e) {
      std::cerr << "configuration error: " << e.what() << '\n';
      return kExitConfig;
    }
  }

  Invocation inv;
  inv.command = name;
  inv.config_text = text;
  inv.ctx = {opt.seed, opt.svg};
  inv.out_dir = opt.out;
  inv.threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  return execute(inv, std::cout, std::cerr);
}
