#pragma once

// Flat settings structs shared by the command line, the resolved-config
// JSON and reruns from it.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "motseg/error.hpp"

namespace motseg::cli {

template <class S>
using Member = std::variant<std::string S::*, double S::*, int S::*, bool S::*, std::uint64_t S::*>;

template <class S>
struct Field {
  const char* key;  // JSON key; the flag is --key with '_' turned into '-'
  const char* help;
  Member<S> member;
  bool positional = false;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class S>
nlohmann::json to_json(const S& s, const std::vector<Field<S>>& fields) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields) std::visit([&](auto m) { j[f.key] = s.*m; }, f.member);
  return j;
}

// Unknown keys and wrong value types are ConfigErrors. Missing keys keep
// the struct defaults.
template <class S>
S from_json(const nlohmann::json& j, const std::vector<Field<S>>& fields) {
  if (!j.is_object()) throw ConfigError("settings must be a JSON object");
  S s{};
  for (const auto& [key, value] : j.items()) {
    const Field<S>* field = nullptr;
    for (const auto& f : fields) {
      if (key == f.key) field = &f;
    }
    if (!field) throw ConfigError("unknown setting '" + key + "'");
    std::visit(
        [&](auto m) {
          using T = std::remove_reference_t<decltype(s.*m)>;
          const bool ok = std::is_same_v<T, std::string>  ? value.is_string()
                          : std::is_same_v<T, bool>        ? value.is_boolean()
                          : std::is_same_v<T, double>      ? value.is_number()
                          : std::is_same_v<T, std::uint64_t> ? value.is_number_unsigned()
                                                             : value.is_number_integer();
          if (!ok) throw ConfigError("setting '" + key + "' has the wrong type");
          s.*m = value.template get<T>();
        },
        field->member);
  }
  return s;
}

// Binds every field to a CLI11 option and merges, after parsing, an
// optional --config file with the flags actually given.
template <class S>
class Settings {
 public:
  Settings(CLI::App* app, std::string command, std::vector<Field<S>> fields)
      : command_(std::move(command)), fields_(std::move(fields)) {
    app->add_option("--config", config_, "Resolved-config JSON of an earlier run; explicit flags override it");
    for (const auto& f : fields_) {
      std::visit([&](auto m) { options_.push_back(bind(app, f, cli_.*m)); }, f.member);
    }
  }
  Settings(const Settings&) = delete;
  Settings& operator=(const Settings&) = delete;

  S resolve() const {
    if (config_.empty()) return cli_;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(config_));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + config_ + "': " + e.what());
    }
    if (!j.is_object() || !j.contains("command") || !j.contains("settings")) {
      throw ConfigError("config '" + config_ + "' is not a resolved config");
    }
    for (const auto& [key, v] : j.items()) {
      if (key != "command" && key != "settings") throw ConfigError("unknown config key '" + key + "'");
    }
    if (j["command"] != command_) {
      throw ConfigError("config '" + config_ + "' belongs to '" + j["command"].dump() + "', not '" + command_ + "'");
    }
    S s = from_json(j["settings"], fields_);
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (options_[i]->count() == 0) continue;
      std::visit([&](auto m) { s.*m = cli_.*m; }, fields_[i].member);
    }
    return s;
  }

  nlohmann::json resolved(const S& s) const { return {{"command", command_}, {"settings", to_json(s, fields_)}}; }

 private:
  template <class T>
  static CLI::Option* bind(CLI::App* app, const Field<S>& f, T& value) {
    std::string name = f.key;
    if (!f.positional) {
      for (auto& ch : name) ch = ch == '_' ? '-' : ch;
      name = "--" + name;
    }
    if constexpr (std::is_same_v<T, bool>) {
      return app->add_flag(name, value, f.help);
    } else {
      return app->add_option(name, value, f.help)->capture_default_str();
    }
  }

  std::string command_;
  std::vector<Field<S>> fields_;
  S cli_{};
  std::string config_;
  std::vector<CLI::Option*> options_;
};

}  // namespace motseg::cli
