#pragma once

#include <stdexcept>

namespace raf {

class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotAdmissibleKernel : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NoSolution : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularPoint : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace raf
