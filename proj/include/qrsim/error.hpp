#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qrsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numeric argument outside its physical range (fidelity, probability, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A conditional branch whose probability is numerically zero.
class ImpossibleBranch : public Error {
public:
    explicit ImpossibleBranch(double probability)
        : Error("impossible measurement branch (p=" + std::to_string(probability) + ")"),
          probability_(probability) {}
    double probability() const { return probability_; }

private:
    double probability_;
};

/// Reference to a pair record that has already been consumed or never existed.
class ConsumedPairError : public Error {
public:
    using Error::Error;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

struct Violation {
    std::string rule;     // machine-readable rule id, e.g. "degree.rnode"
    std::string subject;  // node / link / attack the rule applies to
    std::string message;
};

/// Scenario or topology failed structural validation; carries every violation found.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error(summarize(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const { return violations_; }

private:
    static std::string summarize(const std::vector<Violation>& v) {
        std::string out = "validation failed:";
        for (const auto& x : v) out += " [" + x.rule + " " + x.subject + "]";
        return out;
    }
    std::vector<Violation> violations_;
};

}  // namespace qrsim
