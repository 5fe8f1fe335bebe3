#pragma once

#include <stdexcept>
#include <string>

namespace jc {

// Numerical failure: non-finite values, trace drift, norm underflow.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// A correction condition that was assumed to hold does not.
class condition_violation : public std::runtime_error {
public:
    explicit condition_violation(const std::string& what) : std::runtime_error(what) {}
};

} // namespace jc
