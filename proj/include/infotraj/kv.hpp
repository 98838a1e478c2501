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

// Flat key-value text used for configs, kernels, gains, plant dumps and run
// metadata. One `key = value` per line, `#` starts a comment. Matrices are
// written as `[RxC] a,b,c,...` in row-major order. Doubles are printed in
// shortest round-trip form so that dump/load is bit-exact.

#ifndef INFOTRAJ_KV_HPP_
#define INFOTRAJ_KV_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "infotraj/common.hpp"

namespace infotraj {

class ConfigError : public InputError {
 public:
  ConfigError(const std::string& key, int line, const std::string& message);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

std::string format_double(double value);
std::string format_vector(const VectorXd& v);
std::string format_matrix(const MatrixXd& m);

class KeyValue {
 public:
  static KeyValue parse(const std::string& text);
  static KeyValue load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  int line_of(const std::string& key) const;

  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  VectorXd get_vector(const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;
  MatrixXd get_matrix(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, const VectorXd& value) { set(key, format_vector(value)); }
  void set(const std::string& key, const MatrixXd& value) { set(key, format_matrix(value)); }

  // Keys in sorted order; serialization and hashing use this order.
  std::vector<std::string> keys() const;
  std::string to_string() const;
  void save(const std::string& path) const;

  // FNV-1a over the sorted serialization.
  std::uint64_t hash() const;

 private:
  std::map<std::string, std::string> entries_;
  std::map<std::string, int> lines_;
};

std::string hex64(std::uint64_t value);

}  // namespace infotraj

#endif  // INFOTRAJ_KV_HPP_
