#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace duallif {

/// Bad parameters, topology or configuration. Carries every violation found.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
  explicit ValidationError(const std::string& violation)
      : ValidationError(std::vector<std::string>{violation}) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "; " : "") + v[i];
    return out;
  }

  std::vector<std::string> violations_;
};

/// An operation was invoked in a state that forbids it (e.g. integrating a firing neuron).
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace duallif
