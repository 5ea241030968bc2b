#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hjqp {

enum class ErrorKind {
  invalid_suspension,
  resonant_frequency,
  divergence_suspected,
  singular_interval,
  out_of_table,
  flat_fit,
  saturated_fit,
  hypothesis_failed,
  not_found,
  stationary,
  config,
  cfl_violation,
  numerical
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DivergenceSuspected : public Error {
 public:
  DivergenceSuspected(const std::string& what, std::vector<double> partial_sums)
      : Error(ErrorKind::divergence_suspected, what), partial_sums_(std::move(partial_sums)) {}
  const std::vector<double>& partial_sums() const noexcept { return partial_sums_; }

 private:
  std::vector<double> partial_sums_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace hjqp
