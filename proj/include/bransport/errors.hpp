#pragma once

#include <stdexcept>
#include <string>

namespace bransport {

// Enumeration/search budget exhausted; caller must shrink the instance.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// A certified invariant failed (construction bug or falsified bound).
struct CertificateError : std::runtime_error {
    explicit CertificateError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bransport
