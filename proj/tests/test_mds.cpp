#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "treealg/error.hpp"
#include "treealg/mds.hpp"

#include <Eigen/Eigenvalues>

#include <random>

using namespace treealg;

namespace {

Eigen::MatrixXd random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
    return a;
}

Eigen::MatrixXd pairwise(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd d(x.rows(), x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.rows(); ++j) d(i, j) = (x.row(i) - x.row(j)).norm();
    return d;
}

} // namespace

TEST_CASE("Jacobi agrees with a reference eigensolver") {
    std::mt19937_64 rng(3);
    for (Eigen::Index n : {1, 2, 3, 7, 20, 40}) {
        Eigen::MatrixXd a = random_symmetric(n, rng);
        SymmetricEigen mine = jacobi_eigen(a);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
        Eigen::VectorXd expected = ref.eigenvalues().reverse();
        CHECK((mine.values - expected).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, a.norm()));
        for (Eigen::Index i = 1; i < n; ++i) CHECK(mine.values(i - 1) >= mine.values(i));
        // Orthonormal vectors that reconstruct the matrix.
        CHECK((mine.vectors.transpose() * mine.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
        Eigen::MatrixXd back = mine.vectors * mine.values.asDiagonal() * mine.vectors.transpose();
        CHECK((back - a).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, a.norm()));
        CHECK(mine.sweeps <= 100);
    }
}

TEST_CASE("classical MDS recovers Euclidean configurations") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (Eigen::Index dim : {1, 2, 3}) {
        Eigen::MatrixXd x(20, dim);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
        Eigen::MatrixXd d = pairwise(x);
        MdsResult r = classical_mds(d, static_cast<std::size_t>(dim));
        CHECK(r.effective_dims == static_cast<std::size_t>(dim));
        CHECK((pairwise(r.coords) - d).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK(mds_stress(d, r.coords) <= 1e-12);
    }
}

TEST_CASE("non-Euclidean input truncates negative eigenvalues") {
    // Three points violating the triangle inequality: the Gram matrix has a negative eigenvalue.
    Eigen::MatrixXd d(3, 3);
    d << 0, 1, 5, 1, 0, 1, 5, 1, 0;
    MdsResult r = classical_mds(d, 3);
    CHECK(r.eigenvalues.minCoeff() < 0);
    CHECK(r.effective_dims < 3);
    CHECK(r.coords.col(2).isZero());
    CHECK(std::isfinite(mds_stress(d, r.coords)));
}

TEST_CASE("invalid distance matrices") {
    Eigen::MatrixXd rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(classical_mds(rect, 1), Error);
    Eigen::MatrixXd asym(2, 2);
    asym << 0, 1, 2, 0;
    CHECK_THROWS_AS(classical_mds(asym, 1), Error);
    Eigen::MatrixXd diag(2, 2);
    diag << 1, 1, 1, 0;
    CHECK_THROWS_AS(classical_mds(diag, 1), Error);
    Eigen::MatrixXd ok(2, 2);
    ok << 0, 1, 1, 0;
    CHECK_THROWS_AS(classical_mds(ok, 0), Error);
    CHECK_THROWS_AS(classical_mds(ok, 3), Error);
    CHECK(classical_mds(ok, 1).coords.rows() == 2);
}
