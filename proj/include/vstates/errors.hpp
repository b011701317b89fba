#pragma once

#include <stdexcept>
#include <string>

namespace vstates {

// Exit status mapping used by the command-line tool.
enum class ExitCode : int { ok = 0, domain = 2, convergence = 3, geometry = 4 };

class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

class ConvergenceError : public std::runtime_error {
public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

class GeometryError : public std::runtime_error {
public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const char* what) {
  if (!cond) throw DomainError(what);
}

}  // namespace vstates
