#ifndef SIGCD_ERRORS_HPP
#define SIGCD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sigcd {

// Exit-code mapping for the CLI: ConfigError -> 1, DataError -> 2,
// NumericError -> 3.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sigcd

#endif
