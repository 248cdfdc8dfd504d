#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mtlab {

// Every failure raised by the library derives from mtlab::error so callers
// (the CLI in particular) can map them to exit codes in one place.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct capacity_error : error {
    using error::error;
};

struct interiority_error : error {
    using error::error;
};

struct invalid_cycle_error : error {
    using error::error;
};

struct parameter_error : error {
    using error::error;
};

struct label_range_error : error {
    using error::error;
};

/// Raised when expected cell counts are too small for a chi-square test.
struct test_power_error : error {
    using error::error;
};

struct coarsening_error : error {
    using error::error;
};

struct nonlocal_transport_error : error {
    using error::error;
};

/// A replicate job threw; carries the index of the lowest failing replicate.
struct replicate_error : error {
    replicate_error(std::uint64_t index, const std::string& what)
        : error("replicate " + std::to_string(index) + ": " + what), replicate(index)
    {
    }
    std::uint64_t replicate;
};

} // namespace mtlab
