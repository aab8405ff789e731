#include <lincntk/linalg.hpp>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace lincntk {

bool is_symmetric(const Matrix& a, double rel_tol)
{
    if (a.rows() != a.cols())
        return false;
    if (a.size() == 0)
        return true;
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    return asym <= rel_tol * a.norm();
}

double min_eigenvalue(const Matrix& sym)
{
    if (sym.size() == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

bool is_psd(const Matrix& sym, double rel_tol)
{
    if (!is_symmetric(sym))
        return false;
    return min_eigenvalue(sym) >= -rel_tol * sym.norm();
}

void require_psd(const Matrix& m, std::string_view what)
{
    if (m.rows() != m.cols())
        throw std::invalid_argument(std::string(what) + " must be square");
    if (!is_symmetric(m))
        throw std::invalid_argument(std::string(what) + " is not symmetric");
    if (min_eigenvalue(m) < -1e-10 * m.norm())
        throw std::invalid_argument(std::string(what) + " is not positive semidefinite");
}

Matrix sym_sqrt_psd(const Matrix& sym)
{
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    const Vector roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix& v = solver.eigenvectors();
    Matrix root = v * roots.asDiagonal() * v.transpose();
    return 0.5 * (root + root.transpose());
}

SpectralPinv::SpectralPinv(const Matrix& k)
{
    if (k.rows() != k.cols())
        throw std::invalid_argument("pseudo-inverse needs a square matrix");
    const Eigen::Index n = k.rows();
    if (n == 0) {
        vectors_.resize(0, 0);
        return;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(k);
    const Vector& values = solver.eigenvalues();
    max_eigenvalue_ = values(n - 1);
    cutoff_ = static_cast<double>(n) * std::max(max_eigenvalue_, 0.0) * kRelativeCutoff;

    // eigenvalues ascend, so the retained ones are a trailing block
    Eigen::Index first = n;
    while (first > 0 && values(first - 1) > cutoff_)
        --first;
    rank_ = n - first;
    vectors_ = solver.eigenvectors().rightCols(rank_);
    inv_values_ = values.tail(rank_).cwiseInverse();
}

Vector SpectralPinv::solve(const Vector& rhs) const
{
    if (rank_ == 0)
        return Vector::Zero(rhs.size());
    return vectors_ * (inv_values_.asDiagonal() * (vectors_.transpose() * rhs));
}

Matrix SpectralPinv::solve(const Matrix& rhs) const
{
    if (rank_ == 0)
        return Matrix::Zero(rhs.rows(), rhs.cols());
    return vectors_ * (inv_values_.asDiagonal() * (vectors_.transpose() * rhs));
}

Matrix SpectralPinv::pinv() const
{
    if (rank_ == 0)
        return Matrix::Zero(vectors_.rows(), vectors_.rows());
    return vectors_ * inv_values_.asDiagonal() * vectors_.transpose();
}

}  // namespace lincntk
