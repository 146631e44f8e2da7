#ifndef VCIR_ERRORS_HPP
#define VCIR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vcir {

// Invalid configuration or argument values detected at load/entry time.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A numerical method failed to reach its tolerance or went unstable.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Every evaluated quantity was degenerate (e.g. all Monte Carlo paths
// rejected by an estimator's denominator checks).
class degenerate_error : public std::runtime_error {
public:
    explicit degenerate_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace vcir

#endif
