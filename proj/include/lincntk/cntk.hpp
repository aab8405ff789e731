#pragma once

#include <lincntk/geometry.hpp>
#include <lincntk/linalg.hpp>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace lincntk {

/// How Theta_D is evaluated.
///
/// Stencil applies the operator D times. Spectral expands Theta_0 in the
/// closed-form eigenbasis of the operator (zero padding acts on each
/// diagonal offset as a tridiagonal Toeplitz matrix, or a Kronecker product
/// of two in 2-D) and scales each mode by its eigenvalue ratio to the power D,
/// which costs the same for every depth.
enum class Route { Stencil, Spectral };

/// The feature transformation Theta of a linear CNTK, K(x, y) = x^T Theta y,
/// together with how it was produced. Immutable.
class FeatureTransform {
public:
    /// Throws std::invalid_argument when theta is not square p x p, not
    /// symmetric to 1e-12 relative, or `normalized` is set but ||theta||_F
    /// is not 1 to 1e-10. Positive semidefiniteness is checked by
    /// check_psd(), which needs an eigendecomposition.
    FeatureTransform(Matrix theta, ConvGeometry geometry, Padding padding,
                     Architecture architecture, std::optional<std::size_t> depth,
                     bool normalized);

    const Matrix& theta() const { return theta_; }
    const ConvGeometry& geometry() const { return geometry_; }
    Padding padding() const { return padding_; }
    Architecture architecture() const { return architecture_; }
    /// std::nullopt marks the infinite-depth limit.
    const std::optional<std::size_t>& depth() const { return depth_; }
    bool is_limit() const { return !depth_.has_value(); }
    bool normalized() const { return normalized_; }

    void check_psd() const;

private:
    Matrix theta_;
    ConvGeometry geometry_;
    Padding padding_;
    Architecture architecture_;
    std::optional<std::size_t> depth_;
    bool normalized_;
};

struct SpectralSummary {
    std::vector<double> eigenvalues;  // descending
    Vector leading_eigenvector;       // unit norm, first nonzero entry positive
    double spectral_gap = 0.0;
};

/// Shift matrices B_k of the convolution. r = 3 in 1-D, 9 in 2-D, ordered
/// by filter offset in row-major order over (-1, 0, 1) per axis. Entry
/// (i, j) of the offset-k matrix is 1 when j = i + k (wrapped under circular
/// padding, dropped when out of range under zero padding).
std::vector<Matrix> basis_matrices(const ConvGeometry& geometry, Padding padding);

/// A(X) = sum_k B_k^T X B_k, evaluated as an index-shift stencil.
Matrix apply_a(const Matrix& x, const ConvGeometry& geometry, Padding padding);

/// I_p for flattening, the all-ones J_p for pooling. Not normalized.
Matrix initial_theta(const ConvGeometry& geometry, Architecture architecture);

/// Theta_D, normalized to unit Frobenius norm.
FeatureTransform feature_transform(std::size_t depth, const ConvGeometry& geometry,
                                   Padding padding, Architecture architecture,
                                   Route route = Route::Stencil);

/// Incremental stencil iteration for sweeps over increasing depths.
class TransformSequence {
public:
    TransformSequence(const ConvGeometry& geometry, Padding padding, Architecture architecture);

    /// Throws std::invalid_argument if depth is below the current depth.
    FeatureTransform advance_to(std::size_t depth);

    std::size_t depth() const { return depth_; }
    /// Frobenius distance covered by the most recent single step.
    double last_step() const { return last_step_; }

private:
    ConvGeometry geometry_;
    Padding padding_;
    Architecture architecture_;
    Matrix theta_;
    std::size_t depth_ = 0;
    double last_step_ = 0.0;
};

struct ConvergedTransform {
    FeatureTransform transform;
    std::size_t iterations;
    double last_step;
    bool converged;
};

/// Iterates until successive normalized iterates differ by less than
/// `tolerance` in Frobenius norm, or `max_iterations` applications.
ConvergedTransform iterate_to_convergence(const ConvGeometry& geometry, Padding padding,
                                          Architecture architecture, double tolerance = 1e-12,
                                          std::size_t max_iterations = 100000);

/// All-ones tridiagonal Toeplitz matrix of size dim.
Matrix tridiagonal_ones(std::size_t dim);

/// 1 + 2 cos(h pi / (dim + 1)) for h in [1, dim].
double toeplitz_eigenvalue(std::size_t dim, std::size_t h);

/// Unit eigenvector with entries sqrt(2 / (dim + 1)) sin(h j pi / (dim + 1)).
Vector toeplitz_eigenvector(std::size_t dim, std::size_t h);

/// Closed-form spectrum of tridiagonal_ones(dim).
SpectralSummary toeplitz_spectrum(std::size_t dim);

/// Largest eigenvalue of the operator A: 1 + 2cos(pi/(p+1)) in 1-D, its
/// square in 2-D under zero padding; 3 or 9 under circular padding.
double operator_leading_eigenvalue(const ConvGeometry& geometry, Padding padding);

/// Infinite-depth limit of the normalized Theta_D.
FeatureTransform limiting_transform(const ConvGeometry& geometry, Padding padding,
                                    Architecture architecture);

SpectralSummary spectral_summary(const Matrix& sym);
SpectralSummary spectral_summary(const FeatureTransform& ft);

/// (sum v_i^2)^2 / sum v_i^4: roughly the number of entries carrying the vector.
double participation_ratio(const Vector& v);

/// Dense CSV dump, one matrix row per line, 17 significant digits.
void write_matrix_csv(std::ostream& out, const Matrix& m);

}  // namespace lincntk
