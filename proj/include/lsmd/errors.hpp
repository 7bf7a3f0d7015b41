#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lsmd {

// Validation errors map to CLI exit code 2, numerical failures to 3.
enum class ErrorClass { validation, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorClass::validation, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorClass::numerical, what) {}
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SampleTooShort : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingComponents : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, long line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class UnbalancedPanel : public ValidationError {
 public:
  UnbalancedPanel(const std::string& what, std::vector<long> units)
      : ValidationError(what), units_(std::move(units)) {}
  const std::vector<long>& units() const noexcept { return units_; }

 private:
  std::vector<long> units_;
};

class TimeGap : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RankDeficiency : public NumericalError {
 public:
  RankDeficiency(const std::string& what, double smallest_singular_value)
      : NumericalError(what), smallest_(smallest_singular_value) {}
  double smallest_singular_value() const noexcept { return smallest_; }

 private:
  double smallest_;
};

class CollinearRegressors : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class WeakIdentification : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Raised by variance-component recovery when |alpha_hat| is too small to
// divide by; carries the raw residual autocovariances instead.
class NearZeroAlpha : public NumericalError {
 public:
  NearZeroAlpha(const std::string& what, double var0, double cov1)
      : NumericalError(what), var0_(var0), cov1_(cov1) {}
  double var0() const noexcept { return var0_; }
  double cov1() const noexcept { return cov1_; }

 private:
  double var0_;
  double cov1_;
};

}  // namespace lsmd
