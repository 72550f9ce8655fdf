#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace adaptive_rd {

// Base for every error this library throws. Callers that only care about
// "something went wrong in the pipeline" catch this.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad user configuration (scenario JSON, strategy parameters, sampler params).
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Cohort / trial / matrix file rejected while reading.
class IngestionError : public Error {
  public:
    IngestionError(const std::string &message, std::size_t row, std::string field);
    std::size_t row() const noexcept { return row_; }
    const std::string &field() const noexcept { return field_; }

  private:
    std::size_t row_;
    std::string field_;
};

// Covariate invariant violations, one message per violated field.
class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<std::string> problems);
    const std::vector<std::string> &problems() const noexcept { return problems_; }

  private:
    std::vector<std::string> problems_;
};

class NumericError : public Error {
  public:
    using Error::Error;
};

class DomainError : public Error {
  public:
    using Error::Error;
};

class ShapeError : public Error {
  public:
    using Error::Error;
};

class InsufficientDataError : public Error {
  public:
    using Error::Error;
};

class DegenerateSupportError : public Error {
  public:
    using Error::Error;
};

// No observation within the kernel's 12h support around the evaluation point.
class EffectiveSupportError : public Error {
  public:
    using Error::Error;
};

class RankDeficiencyError : public Error {
  public:
    using Error::Error;
};

class NonConvergenceError : public Error {
  public:
    NonConvergenceError(const std::string &message, std::vector<double> last_iterate);
    const std::vector<double> &last_iterate() const noexcept { return last_; }

  private:
    std::vector<double> last_;
};

class CovarianceError : public Error {
  public:
    using Error::Error;
};

} // namespace adaptive_rd
