#pragma once

#include <stdexcept>
#include <string>

namespace folp {

/// Dimension or grid mismatch between operands.
class shape_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A dense solver failed to converge or produced non-finite output.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates positive semidefiniteness beyond the tolerated floor.
class not_psd_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested rank is not supported by the spectrum (zero or negative
/// eigenvalue at the cut, or no usable eigenvalues at all).
class rank_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A covariance triple (C_YY, C_XX, C_XY) is not mutually consistent,
/// i.e. C_XY cannot have arisen jointly with the given marginals at the
/// requested tolerance.
class inconsistent_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace folp
