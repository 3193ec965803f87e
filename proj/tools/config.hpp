// Copyright 2026 The QEstLab Authors
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

#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qestlab::cli {

/// Any problem with the configuration file or flags (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text grouped in `[section]` blocks. `#` and `;` start
/// comments. Every lookup marks the key as used so leftovers can be reported
/// as unknown.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    Config c;
    c.path_ = path;
    std::string raw, section;
    int lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      const std::string s = trim(strip_comment(raw));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw c.error(lineno, "malformed section header '" + s + "'");
        section = trim(s.substr(1, s.size() - 2));
        if (section.empty()) throw c.error(lineno, "empty section name");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw c.error(lineno, "expected 'key = value', got '" + s + "'");
      const std::string key = trim(s.substr(0, eq));
      if (key.empty()) throw c.error(lineno, "missing key before '='");
      const std::string full = section.empty() ? key : section + "." + key;
      if (c.entries_.count(full)) throw c.error(lineno, "duplicate key '" + full + "'");
      c.entries_[full] = {trim(s.substr(eq + 1)), lineno};
    }
    return c;
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& def) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return record(key, def);
    used_.insert(key);
    return record(key, it->second.value);
  }

  double num(const std::string& key, double def) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
      record(key, fmt(def));
      return def;
    }
    used_.insert(key);
    const double v = parse_number(it->second, key);
    record(key, it->second.value);
    return v;
  }

  long long integer(const std::string& key, long long def) {
    const double v = num(key, static_cast<double>(def));
    if (v != std::floor(v) || std::abs(v) > 9.0e15) throw error_at(key, "must be an integer");
    return static_cast<long long>(v);
  }

  bool flag(const std::string& key, bool def) {
    const std::string v = lower(str(key, def ? "true" : "false"));
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw error_at(key, "expected a boolean, got '" + v + "'");
  }

  std::vector<double> list(const std::string& key, const std::vector<double>& def) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
      std::string echo;
      for (double d : def) echo += (echo.empty() ? "" : ", ") + fmt(d);
      record(key, echo);
      return def;
    }
    used_.insert(key);
    std::vector<double> out;
    std::stringstream ss(it->second.value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number({trim(item), it->second.line}, key));
    if (out.empty()) throw error_at(key, "empty list");
    record(key, it->second.value);
    return out;
  }

  std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& allowed) {
    const std::string v = lower(str(key, def));
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
      throw error_at(key, "must be one of " + opts + ", got '" + v + "'");
    }
    return v;
  }

  /// Raises for the first key that no lookup consumed.
  void reject_unknown() const {
    const Entry* first = nullptr;
    std::string name;
    for (const auto& [k, e] : entries_)
      if (!used_.count(k) && (!first || e.line < first->line)) first = &e, name = k;
    if (first) throw error(first->line, "unknown key '" + name + "'");
  }

  ConfigError error_at(const std::string& key, const std::string& msg) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? ConfigError(path_ + ": " + key + ": " + msg)
                                : error(it->second.line, key + ": " + msg);
  }

  ConfigError error(int line, const std::string& msg) const {
    return ConfigError(path_ + ":" + std::to_string(line) + ": " + msg);
  }

  /// Effective settings (defaults included), sorted by key.
  const std::map<std::string, std::string>& effective() const { return effective_; }

  /// Canonical text of the effective settings, one `key=value` per line.
  std::string canonical() const {
    std::string s;
    for (const auto& [k, v] : effective_) s += k + "=" + v + "\n";
    return s;
  }

  void set_effective(const std::string& key, const std::string& value) { effective_[key] = value; }

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

 private:
  std::string record(const std::string& key, const std::string& v) {
    effective_[key] = v;
    return v;
  }

  /// Plain numbers plus products/quotients involving `pi`, e.g. `pi/2`, `0.3*pi`, `0.3pi`.
  double parse_number(const Entry& e, const std::string& key) const {
    std::string s;
    for (char ch : e.value)
      if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw error(e.line, key + ": missing value");
    double acc = 1.0;
    char op = '*';
    std::size_t pos = 0;
    while (pos <= s.size()) {
      std::size_t end = s.find_first_of("*/", pos);
      if (end == std::string::npos) end = s.size();
      std::string tok = s.substr(pos, end - pos);
      double v = 0.0;
      if (tok.size() > 2 && tok.compare(tok.size() - 2, 2, "pi") == 0 && tok != "pi") {
        v = factor(tok.substr(0, tok.size() - 2), e, key) * std::numbers::pi;
      } else {
        v = factor(tok, e, key);
      }
      acc = op == '*' ? acc * v : acc / v;
      if (end == s.size()) break;
      op = s[end];
      pos = end + 1;
    }
    if (!std::isfinite(acc)) throw error(e.line, key + ": value is not finite");
    return acc;
  }

  double factor(const std::string& tok, const Entry& e, const std::string& key) const {
    if (tok == "pi") return std::numbers::pi;
    if (tok == "-pi") return -std::numbers::pi;
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw error(e.line, key + ": cannot parse number '" + e.value + "'");
    return v;
  }

  static std::string strip_comment(const std::string& s) {
    const auto p = s.find_first_of("#;");
    return p == std::string::npos ? s : s.substr(0, p);
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
  }

  static std::string lower(std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
  }

  std::string path_;
  std::map<std::string, Entry> entries_;
  std::set<std::string> used_;
  std::map<std::string, std::string> effective_;
};

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

/// CSV with a header row; numbers at 17 significant digits.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(const std::vector<double>& v) {
    if (v.size() != header_.size()) throw std::logic_error("Table: row width mismatch");
    rows_.push_back(v);
  }

  std::size_t size() const { return rows_.size(); }

  std::string text() const {
    std::string s;
    for (std::size_t i = 0; i < header_.size(); ++i) s += (i ? "," : "") + header_[i];
    s += "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + Config::fmt(r[i]);
      s += "\n";
    }
    return s;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace qestlab::cli
