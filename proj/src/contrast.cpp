#include "glht/contrast.hpp"

namespace glht {

Contrast build_contrast(const ContrastInput& input, std::span<const long> n_sizes) {
    const Eigen::MatrixXd& gt = input.g_tilde;
    const Eigen::Index q = gt.rows();
    const Eigen::Index k = gt.cols();
    if (k != static_cast<Eigen::Index>(n_sizes.size())) {
        throw Error(ErrorKind::InvalidDimension, "contrast has " + std::to_string(k) +
                                                     " columns but there are " +
                                                     std::to_string(n_sizes.size()) + " groups");
    }
    if (q < 1 || q >= k) {
        throw Error(ErrorKind::InvalidDimension, "contrast needs 1 <= q < K rows (q=" + std::to_string(q) +
                                                     ", K=" + std::to_string(k) + ")");
    }
    if (!gt.allFinite()) {
        throw Error(ErrorKind::InvalidInput, "contrast coefficients must be finite");
    }
    long n = 0;
    for (std::size_t i = 0; i < n_sizes.size(); ++i) {
        if (n_sizes[i] < 4) {
            throw Error(ErrorKind::SampleTooSmall, "group " + std::to_string(i + 1) + " has " +
                                                       std::to_string(n_sizes[i]) +
                                                       " observations, at least 4 are required");
        }
        n += n_sizes[i];
    }

    Contrast c;
    c.n_total = n;
    c.n_sizes.assign(n_sizes.begin(), n_sizes.end());
    c.exponent_mode = input.exponent_mode;
    c.scaling.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) c.scaling(i) = double(n) / double(n_sizes[i]);

    const Eigen::MatrixXd m = gt * c.scaling.asDiagonal() * gt.transpose();
    const Eigen::VectorXd lambda = jacobi_eigen(m).first;
    if (!(lambda.maxCoeff() > 0) || lambda.minCoeff() < 1e-10 * lambda.maxCoeff()) {
        throw Error(ErrorKind::RankDeficiency, "contrast matrix does not have full row rank");
    }
    const double e = input.exponent_mode == ExponentMode::PaperLiteral ? 0.5 : -0.5;
    c.g = sym_matrix_power(m, e) * gt;
    const Eigen::MatrixXd d = c.g.transpose() * c.g;
    c.d = (d + d.transpose()) / 2.0;
    return c;
}

Eigen::MatrixXd manova_contrast(Eigen::Index groups) {
    if (groups < 2) throw Error(ErrorKind::InvalidDimension, "MANOVA contrast needs at least 2 groups");
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(groups - 1, groups);
    g.leftCols(groups - 1).setIdentity();
    g.col(groups - 1).setConstant(-1.0);
    return g;
}

Eigen::MatrixXd pairwise_contrast(Eigen::Index groups, Eigen::Index first, Eigen::Index second) {
    if (first < 0 || second < 0 || first >= groups || second >= groups || first == second) {
        throw Error(ErrorKind::InvalidInput, "pairwise contrast needs two distinct valid group indices");
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(1, groups);
    g(0, first) = 1.0;
    g(0, second) = -1.0;
    return g;
}

}  // namespace glht
