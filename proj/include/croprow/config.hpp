#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "croprow/sim.hpp"

namespace croprow {

/// Bad key or value in a config file or override; key() names the offender.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Sets one dotted key, e.g. "scan.s" or "ctrl.w2".
void apply_setting(SimSetup& setup, std::string_view key, std::string_view value);

/// "key=value" override as given on the command line.
void apply_override(SimSetup& setup, std::string_view assignment);

/// Flat key=value lines; blank lines and '#' comments are skipped.
void apply_config_text(SimSetup& setup, std::string_view text);
void apply_config_file(SimSetup& setup, const std::filesystem::path& path);

/// Every recognized key, in documentation order.
std::vector<std::string> config_keys();

/// Current values in config-file syntax; apply_config_text round-trips it.
std::string dump_config(const SimSetup& setup);

}  // namespace croprow
