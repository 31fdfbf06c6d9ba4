#pragma once

#include <stdexcept>
#include <string>

namespace relaynet {

// Input data could not be parsed (bad syntax, bad numbers).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Input parsed but violates a structural invariant (conflicting edges,
// unknown ASNs, inconsistent scenario files).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A placement round had no eligible candidate.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(int round, const std::string& what)
      : std::runtime_error(what), round_(round) {}
  int round() const { return round_; }

 private:
  int round_;
};

// A finished plan failed independent connectivity verification.
class ConnectivityError : public std::runtime_error {
 public:
  explicit ConnectivityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace relaynet
