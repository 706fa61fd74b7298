#pragma once

#include <Eigen/Sparse>

#include <cstdint>
#include <vector>

namespace chb {

/// Assembled sparse system for one solver block. DOFs are interleaved per
/// node: (phi, mu) for the phase block, (ux, uy, p, theta) for the
/// poroelastic block; global index = node * components_per_node + component.
/// Dirichlet-constrained rows carry exactly a unit diagonal (the remaining
/// stored entries of the row are explicit zeros, keeping the sparsity
/// pattern symmetric).
struct DiscreteSystem {
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
    Eigen::VectorXd rhs;
    int components_per_node = 0;
    std::vector<std::uint8_t> constrained; // 1 per constrained DOF, may be empty
};

} // namespace chb
