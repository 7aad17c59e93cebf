#pragma once

#include <stdexcept>
#include <string>

namespace dynmem {

/// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Gamma evaluated at a non-positive integer.
class pole_error : public domain_error {
public:
    using domain_error::domain_error;
};

/// A sampled representation is too coarse for the requested input.
class resolution_error : public domain_error {
public:
    using domain_error::domain_error;
};

/// The kernel is not integrable on (0, t), or is a distribution with no pointwise value.
class integrability_error : public domain_error {
public:
    using domain_error::domain_error;
};

/// An operator needs derivatives of the input that the signal cannot supply.
class missing_derivative_error : public domain_error {
public:
    using domain_error::domain_error;
};

/// The requested order range is outside what the operator supports.
class unsupported_range_error : public domain_error {
public:
    using domain_error::domain_error;
};

/// An iterative or adaptive scheme failed to reach its tolerance.
/// The CLI maps this family to exit code 2.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration or input data (CLI exit code 1).
class input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw domain_error(what);
}

}  // namespace detail
}  // namespace dynmem
