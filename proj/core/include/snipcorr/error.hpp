#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace snipcorr {

// Every failure raised by the library derives from Error and carries a short
// machine-readable kind, which the CLI forwards in its JSON error report.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain_error", what) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error("shape_error", what) {}
};

class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::size_t index)
        : Error("simulation_error", what + " (first bad sample " + std::to_string(index) + ")"),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class TrainingDivergence : public Error {
public:
    explicit TrainingDivergence(int epoch)
        : Error("training_divergence", "non-finite loss at epoch " + std::to_string(epoch)),
          epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io_error", what) {}
};

class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& what) : Error("integrity_error", what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config_error", what) {}
};

class StatsError : public Error {
public:
    explicit StatsError(const std::string& what) : Error("stats_error", what) {}
};

}  // namespace snipcorr
