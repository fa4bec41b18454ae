#pragma once

#include "kvwave/common.hpp"

// Thin LAPACK wrappers for the dense desk-scale paths.
namespace kvwave::dense {

struct EigenPairs {
  CVec values;
  CMat vectors;  ///< right eigenvectors, one per column
};

/// Right eigenpairs of a real square matrix (xGEEV).
EigenPairs eig(const Mat& a);

/// Right eigenpairs of the real pencil a x = lambda b x (xGGEV). Throws when
/// an eigenvalue is infinite (b singular).
EigenPairs eig(const Mat& a, const Mat& b);

/// Singular values of a complex matrix, descending (xGESDD).
Vec singular_values(const CMat& a);

}  // namespace kvwave::dense
