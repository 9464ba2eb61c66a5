#pragma once

#include <stdexcept>
#include <string>

namespace hpcal {

// Invalid or unsupported configuration (sample rate, manifest contents, file format).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A file's schema_version does not match what this build reads.
class SchemaVersionError : public ConfigError {
public:
    SchemaVersionError(const std::string& what_file, int found, int expected)
        : ConfigError(what_file + ": schema_version " + std::to_string(found) +
                      " is not supported (expected " + std::to_string(expected) + ")"),
          found_(found), expected_(expected) {}

    int found() const noexcept { return found_; }
    int expected() const noexcept { return expected_; }

private:
    int found_;
    int expected_;
};

// The soundcard cannot deliver the requested voltage at full analog gain.
class HeadroomError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hpcal
