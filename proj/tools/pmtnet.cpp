// pmtnet: generate data, train, evaluate and plot from the command line.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "pmtnet/commands.hpp"
#include "pmtnet/errors.hpp"

namespace {

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (char& c : f)
    if (c == '_') c = '-';
  return "--" + f;
}

std::string quoted(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c == '\n' ? ' ' : c);
  }
  return out;
}

int fail(const std::string& kind, const std::string& message) {
  std::cerr << "error: kind=" << kind << " message=\"" << quoted(message) << "\"\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic PMT event classification and representation learning"};
  app.require_subcommand(1);

  struct Bound {
    CLI::App* sub;
    std::string config;
    std::map<std::string, std::string> values;
  };
  std::map<std::string, Bound> bound;
  for (const auto& cmd : pmtnet::command_table()) {
    Bound& b = bound[cmd.name];
    b.sub = app.add_subcommand(cmd.name, cmd.help);
    b.sub->add_option("--config", b.config, "key = value file; flags override it");
    for (const auto& p : cmd.params) {
      const std::string help = p.help + (p.default_value.empty() ? "" : " [" + p.default_value + "]");
      b.sub->add_option(flag_name(p.key), b.values[p.key], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("ConfigError", e.what());
  }

  for (auto& [name, b] : bound) {
    if (!b.sub->parsed()) continue;
    std::map<std::string, std::string> flags;
    for (const auto& [key, value] : b.values)
      if (b.sub->count(flag_name(key)) > 0) flags[key] = value;
    try {
      pmtnet::run_command(name, b.config, flags, std::cout);
    } catch (const pmtnet::Error& e) {
      return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
      return fail("InternalError", e.what());
    }
  }
  return 0;
}
