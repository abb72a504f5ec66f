// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dggen {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* kind) {
  throw std::invalid_argument("config error: key '" + key + "' holds '" + value +
                              "', expected " + kind);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, const char* kind) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) bad_value(key, value, kind);
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config error: cannot open " + path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return from_string(buffer.str());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig config;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config error: line " + std::to_string(line_no) +
                                  " has no '='");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config error: line " + std::to_string(line_no) +
                                  " has an empty key");
    if (!config.values_.emplace(key, value).second)
      throw std::invalid_argument("config error: duplicate key '" + key + "'");
  }
  return config;
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  read_.insert(key);
  return it->second;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  read_.insert(key);
  return parse_number<int>(key, it->second, "an integer");
}

long long KeyValueConfig::get_int64(const std::string& key, long long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  read_.insert(key);
  return parse_number<long long>(key, it->second, "an integer");
}

std::uint64_t KeyValueConfig::get_uint64(const std::string& key,
                                         std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  read_.insert(key);
  return parse_number<std::uint64_t>(key, it->second, "a nonnegative integer");
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  read_.insert(key);
  try {
    std::size_t used = 0;
    const double out = std::stod(it->second, &used);
    if (used != it->second.size()) bad_value(key, it->second, "a real number");
    return out;
  } catch (const std::invalid_argument&) {
    bad_value(key, it->second, "a real number");
  } catch (const std::out_of_range&) {
    bad_value(key, it->second, "a real number");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  read_.insert(key);
  const std::string& v = it->second;
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "a boolean (true/false/1/0)");
}

std::vector<std::string> KeyValueConfig::unused() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (read_.count(key) == 0) out.push_back(key);
  }
  return out;
}

}  // namespace dggen
