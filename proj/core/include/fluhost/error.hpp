#pragma once

#include <stdexcept>
#include <string>

namespace fluhost {

// Invalid flags, configuration values or API preconditions the caller controls.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unusable input data: bad FASTA/PSSM text, unknown labels,
// sequences too short for an encoder, shape mismatches in supplied data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
class DivergedTraining : public std::runtime_error {
public:
    DivergedTraining(const std::string& what, int epoch)
        : std::runtime_error(what), epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

}  // namespace fluhost
