// Copyright 2026 The infotraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "infotraj/kv.hpp"

#include "infotraj/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace infotraj {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(trim(current));
  return parts;
}

bool parse_number(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

ConfigError::ConfigError(const std::string& key, int line, const std::string& message)
    : InputError(line > 0 ? "line " + std::to_string(line) + ", key '" + key + "': " + message
                          : "key '" + key + "': " + message),
      key_(key),
      line_(line) {}

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw InputError("format_double: conversion failed");
  return std::string(buffer, ptr);
}

std::string format_vector(const VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(v(i));
  }
  return out;
}

std::string format_matrix(const MatrixXd& m) {
  std::string out = "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "] ";
  bool first = true;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!first) out += ",";
      out += format_double(m(r, c));
      first = false;
    }
  }
  return out;
}

KeyValue KeyValue::parse(const std::string& text) {
  KeyValue kv;
  std::istringstream in(text);
  std::string raw;
  int line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line, line_number, "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("", line_number, "empty key");
    if (kv.entries_.count(key)) throw ConfigError(key, line_number, "duplicate key");
    kv.entries_[key] = trim(line.substr(eq + 1));
    kv.lines_[key] = line_number;
  }
  return kv;
}

KeyValue KeyValue::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

int KeyValue::line_of(const std::string& key) const {
  auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

const std::string& KeyValue::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(key, 0, "missing required key");
  return it->second;
}

std::string KeyValue::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double KeyValue::get_double(const std::string& key) const {
  double value = 0.0;
  if (!parse_number(get(key), value)) {
    throw ConfigError(key, line_of(key), "expected a number, got '" + get(key) + "'");
  }
  return value;
}

double KeyValue::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t KeyValue::get_int(const std::string& key) const {
  const std::string& text = get(key);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(key, line_of(key), "expected an integer, got '" + text + "'");
  }
  return value;
}

std::int64_t KeyValue::get_int_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool KeyValue::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, line_of(key), "expected a boolean, got '" + v + "'");
}

VectorXd KeyValue::get_vector(const std::string& key) const {
  const auto parts = split(get(key), ',');
  VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!parse_number(parts[i], v(static_cast<Eigen::Index>(i)))) {
      throw ConfigError(key, line_of(key), "bad number '" + parts[i] + "'");
    }
  }
  return v;
}

std::vector<std::int64_t> KeyValue::get_int_list(const std::string& key) const {
  std::vector<std::int64_t> out;
  for (const auto& part : split(get(key), ',')) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw ConfigError(key, line_of(key), "bad integer '" + part + "'");
    }
    out.push_back(value);
  }
  return out;
}

std::vector<std::string> KeyValue::get_list(const std::string& key) const {
  return split(get(key), ',');
}

MatrixXd KeyValue::get_matrix(const std::string& key) const {
  const std::string& text = get(key);
  const auto close = text.find(']');
  if (text.empty() || text[0] != '[' || close == std::string::npos) {
    throw ConfigError(key, line_of(key), "expected '[RxC] values'");
  }
  const std::string dims = text.substr(1, close - 1);
  const auto x = dims.find('x');
  if (x == std::string::npos) throw ConfigError(key, line_of(key), "bad matrix shape");
  const long rows = std::stol(dims.substr(0, x));
  const long cols = std::stol(dims.substr(x + 1));
  const std::string body = trim(text.substr(close + 1));
  MatrixXd m(rows, cols);
  if (rows * cols == 0) return m;
  const auto parts = split(body, ',');
  if (static_cast<long>(parts.size()) != rows * cols) {
    throw ConfigError(key, line_of(key), "matrix has wrong number of entries");
  }
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      if (!parse_number(parts[static_cast<std::size_t>(r * cols + c)], m(r, c))) {
        throw ConfigError(key, line_of(key), "bad matrix entry");
      }
    }
  }
  return m;
}

void KeyValue::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::vector<std::string> KeyValue::keys() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [key, value] : entries_) out.push_back(key);
  return out;
}

std::string KeyValue::to_string() const {
  std::string out;
  for (const auto& [key, value] : entries_) out += key + " = " + value + "\n";
  return out;
}

void KeyValue::save(const std::string& path) const {
  write_text(path, to_string());
}

std::uint64_t KeyValue::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_string()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

}  // namespace infotraj
