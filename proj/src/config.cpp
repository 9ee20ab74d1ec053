#include "ciw/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ciw {
namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' &&
        c != '-')
      return false;
  return true;
}

}  // namespace

Config Config::from_text(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) +
                       ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!valid_key(key))
      throw UsageError("config line " + std::to_string(lineno) +
                       ": bad key '" + key + "'");
    if (c.kv_.count(key))
      throw UsageError("config line " + std::to_string(lineno) +
                       ": duplicate key '" + key + "'");
    c.kv_[key] = val;
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

std::string Config::str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw UsageError("missing config key '" + key + "'");
  return it->second;
}

std::string Config::str(const std::string& key, const std::string& def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double Config::num(const std::string& key) const {
  std::string v = str(key);
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw UsageError("config key '" + key + "': not a number: '" + v + "'");
  return x;
}

double Config::num(const std::string& key, double def) const {
  return has(key) ? num(key) : def;
}

long Config::integer(const std::string& key) const {
  std::string v = str(key);
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw UsageError("config key '" + key + "': not an integer: '" + v + "'");
  return x;
}

long Config::integer(const std::string& key, long def) const {
  return has(key) ? integer(key) : def;
}

std::vector<int> Config::int_list(const std::string& key,
                                  const std::vector<int>& def) const {
  if (!has(key)) return def;
  std::vector<int> out;
  std::istringstream in(str(key));
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    char* end = nullptr;
    long x = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
      throw UsageError("config key '" + key + "': bad integer list");
    out.push_back(static_cast<int>(x));
  }
  if (out.empty()) throw UsageError("config key '" + key + "': empty list");
  return out;
}

std::vector<double> Config::num_list(const std::string& key) const {
  std::vector<double> out;
  std::istringstream in(str(key));
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    char* end = nullptr;
    double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw UsageError("config key '" + key + "': bad number list");
    out.push_back(x);
  }
  if (out.empty()) throw UsageError("config key '" + key + "': empty list");
  return out;
}

}  // namespace ciw
