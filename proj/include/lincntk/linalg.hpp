#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace lincntk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// max |A_ij - A_ji| <= rel_tol * ||A||_F
bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& sym);

/// Symmetric and smallest eigenvalue >= -rel_tol * ||A||_F.
bool is_psd(const Matrix& sym, double rel_tol = 1e-10);

/// Throws std::invalid_argument naming `what` unless `m` is square, symmetric
/// and PSD within the tolerances above.
void require_psd(const Matrix& m, std::string_view what);

/// Symmetric PSD square root; eigenvalues below zero are clamped to zero.
Matrix sym_sqrt_psd(const Matrix& sym);

/// Pseudo-inverse of a symmetric PSD matrix K through its eigendecomposition.
/// Eigenvalues at or below dim(K) * lambda_max(K) * 1e-12 are discarded.
class SpectralPinv {
public:
    static constexpr double kRelativeCutoff = 1e-12;

    explicit SpectralPinv(const Matrix& k);

    Vector solve(const Vector& rhs) const;
    Matrix solve(const Matrix& rhs) const;
    Matrix pinv() const;

    Eigen::Index rank() const { return rank_; }
    double cutoff() const { return cutoff_; }
    double max_eigenvalue() const { return max_eigenvalue_; }

private:
    Matrix vectors_;    // retained eigenvectors only
    Vector inv_values_; // reciprocals of retained eigenvalues
    Eigen::Index rank_ = 0;
    double cutoff_ = 0.0;
    double max_eigenvalue_ = 0.0;
};

}  // namespace lincntk
