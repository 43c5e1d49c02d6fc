#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ipsd {

// Filesystem failure with the offending path attached.
class IoError : public std::runtime_error {
 public:
  IoError(std::string path, const std::string& message)
      : std::runtime_error(message + " (" + path + ")"), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// An operation was called on an object in the wrong lifecycle state,
// e.g. selecting a bandit arm before every arm has been pulled once.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ipsd
