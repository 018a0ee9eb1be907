#pragma once

#include <stdexcept>
#include <string>

namespace lscd {

// Process exit codes: 0 success, 1 usage/configuration, 2 data, 3 numeric.
enum class ExitCode : int {
    ok = 0,
    usage = 1,
    data = 2,
    numeric = 3,
};

class Error : public std::runtime_error {
  public:
    Error(ExitCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}
    ExitCode exit_code() const { return code_; }

  private:
    ExitCode code_;
};

class UsageError : public Error {
  public:
    explicit UsageError(const std::string& msg) : Error(ExitCode::usage, msg) {}
};

// Invalid option values (dim=0, min_count<1, unknown preset, ...).
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& msg) : Error(ExitCode::usage, msg) {}
};

class DataError : public Error {
  public:
    explicit DataError(const std::string& msg) : Error(ExitCode::data, msg) {}
};

class IoError : public DataError {
  public:
    explicit IoError(const std::string& msg) : DataError(msg) {}
};

class EncodingError : public DataError {
  public:
    explicit EncodingError(const std::string& msg) : DataError(msg) {}
};

class FormatError : public DataError {
  public:
    explicit FormatError(const std::string& msg) : DataError(msg) {}
};

// A gold word without a prediction, or a language without an answer file.
class CoverageError : public DataError {
  public:
    explicit CoverageError(const std::string& msg) : DataError(msg) {}
};

// No usable seed dictionary: empty intersection, exhaustive exclusion, or a
// failed unsupervised initialization.
class AlignmentError : public DataError {
  public:
    explicit AlignmentError(const std::string& msg) : DataError(msg) {}
};

class NumericError : public Error {
  public:
    explicit NumericError(const std::string& msg) : Error(ExitCode::numeric, msg) {}
};

class SingularityError : public NumericError {
  public:
    explicit SingularityError(const std::string& msg) : NumericError(msg) {}
};

class DegenerateVectorError : public NumericError {
  public:
    explicit DegenerateVectorError(const std::string& msg) : NumericError(msg) {}
};

// Threshold rules need at least one scored (non-missing) target.
class UnthresholdableError : public DataError {
  public:
    explicit UnthresholdableError(const std::string& msg) : DataError(msg) {}
};

} // namespace lscd
