#include "treealg/mds.hpp"

#include "treealg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace treealg {

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, double tol, int max_sweeps) {
    if (input.rows() != input.cols()) throw Error(ErrorCode::InvalidArgument, "matrix is not square");
    const Eigen::Index n = input.rows();
    Eigen::MatrixXd a = input;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double scale = a.norm();

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= tol * scale) break;

        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (apq == 0.0) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    double akp = a(k, p);
                    double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    double apk = a(p, k);
                    double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    double vkp = v(k, p);
                    double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = a(order[k], order[k]);
        out.vectors.col(k) = v.col(order[k]);
    }
    out.sweeps = sweep;
    return out;
}

MdsResult classical_mds(const Eigen::MatrixXd& dist, std::size_t dims) {
    const Eigen::Index n = dist.rows();
    if (dist.cols() != n) throw Error(ErrorCode::InvalidArgument, "distance matrix is not square");
    if (dims == 0 || static_cast<Eigen::Index>(dims) > n)
        throw Error(ErrorCode::InvalidArgument, "dims must be between 1 and the matrix order");
    const double scale = std::max(1.0, dist.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (dist(i, i) != 0.0) throw Error(ErrorCode::InvalidArgument, "distance matrix has a non-zero diagonal");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!(dist(i, j) >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative distance");
            if (std::abs(dist(i, j) - dist(j, i)) > 1e-12 * scale)
                throw Error(ErrorCode::InvalidArgument, "distance matrix is not symmetric");
        }
    }

    // Double centring: B = -1/2 J D^2 J with J = I - 11'/n.
    Eigen::MatrixXd sq = dist.cwiseProduct(dist);
    Eigen::VectorXd row_mean = sq.rowwise().mean();
    Eigen::VectorXd col_mean = sq.colwise().mean().transpose();
    double grand = sq.mean();
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - col_mean(j) + grand);
    b = 0.5 * (b + b.transpose());

    SymmetricEigen eig = jacobi_eigen(b);
    const double top = eig.values.cwiseAbs().maxCoeff();
    MdsResult out;
    out.eigenvalues = eig.values;
    out.coords = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(dims));
    for (std::size_t k = 0; k < dims; ++k) {
        double lambda = eig.values(static_cast<Eigen::Index>(k));
        if (!(lambda > 1e-12 * top)) continue;
        out.coords.col(static_cast<Eigen::Index>(k)) = eig.vectors.col(static_cast<Eigen::Index>(k)) * std::sqrt(lambda);
        ++out.effective_dims;
    }
    return out;
}

double mds_stress(const Eigen::MatrixXd& dist, const Eigen::MatrixXd& coords) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < dist.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < dist.rows(); ++j) {
            double e = (coords.row(i) - coords.row(j)).norm();
            num += (dist(i, j) - e) * (dist(i, j) - e);
            den += dist(i, j) * dist(i, j);
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

} // namespace treealg
