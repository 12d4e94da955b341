#include "cxr/log.hpp"

#include <array>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace cxr::log {

namespace {

constexpr std::array<std::string_view, 4> kNames = {"error", "warn", "info", "debug"};

Level from_environment() {
  const char* raw = std::getenv("CXR_LOG");
  if (!raw) return Level::Warn;
  const std::string_view value(raw);
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == value) return static_cast<Level>(i);
  return Level::Warn;
}

std::optional<Level>& override_level() {
  static std::optional<Level> level;
  return level;
}

}  // namespace

Level threshold() {
  static const Level env = from_environment();
  return override_level().value_or(env);
}

void set_threshold(Level level) { override_level() = level; }

bool enabled(Level level) { return static_cast<int>(level) <= static_cast<int>(threshold()); }

void write(Level level, std::string_view message) {
  if (!enabled(level)) return;
  std::cerr << '[' << kNames[static_cast<std::size_t>(level)] << "] " << message << '\n';
}

}  // namespace cxr::log
