#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ciw {

// command-line / config mistakes the user can fix; mapped to exit code 2
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "key = value" per line, '#' starts a comment, keys may be dotted
// (solver.tol_grad); duplicate keys are an error
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string str(const std::string& key) const;  // throws if missing
  std::string str(const std::string& key, const std::string& def) const;
  double num(const std::string& key) const;
  double num(const std::string& key, double def) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long def) const;
  // comma-separated list of integers
  std::vector<int> int_list(const std::string& key,
                            const std::vector<int>& def) const;
  // comma-separated list of reals
  std::vector<double> num_list(const std::string& key) const;

  const std::map<std::string, std::string>& items() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace ciw
