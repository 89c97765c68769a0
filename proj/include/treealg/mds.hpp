#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace treealg {

struct SymmetricEigen {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // columns match `values`
    int sweeps = 0;
};

/** Cyclic Jacobi eigendecomposition of a symmetric matrix. */
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double tol = 1e-12, int max_sweeps = 100);

struct MdsResult {
    Eigen::MatrixXd coords;       // n x dims; columns past effective_dims are zero
    Eigen::VectorXd eigenvalues;  // all eigenvalues of the centred Gram matrix, descending
    std::size_t effective_dims = 0;
};

/** Classical (Torgerson) scaling. Non-positive eigenvalues are truncated to
 *  zero, so only the first `effective_dims` columns can be non-zero. */
MdsResult classical_mds(const Eigen::MatrixXd& dist, std::size_t dims);

/** sum (d_ij - e_ij)^2 / sum d_ij^2 over i < j, e being embedded distances. */
double mds_stress(const Eigen::MatrixXd& dist, const Eigen::MatrixXd& coords);

} // namespace treealg
