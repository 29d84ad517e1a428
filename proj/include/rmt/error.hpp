#pragma once

#include <stdexcept>
#include <string>

namespace rmt {

// Failure classes map one-to-one onto CLI exit codes.
enum class ErrorClass { config, numeric, io };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorClass::numeric, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorClass::config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorClass::io, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorClass::numeric, what) {}
};

// Raised when a quadrature exhausts its subdivision budget.
class QuadratureError : public NumericError {
public:
    QuadratureError(const std::string& what, double best_re, double best_im, double achieved)
        : NumericError(what), best_re(best_re), best_im(best_im), achieved_error(achieved) {}
    double best_re;
    double best_im;
    double achieved_error;
};

class BracketError : public NumericError {
public:
    explicit BracketError(const std::string& what) : NumericError(what) {}
};

class UnsupportedParameters : public ConfigError {
public:
    explicit UnsupportedParameters(const std::string& what) : ConfigError(what) {}
};

}  // namespace rmt
