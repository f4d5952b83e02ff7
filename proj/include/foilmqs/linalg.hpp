#pragma once

// Sparse and dense linear algebra used throughout the field/circuit engine.
//
// Dense objects are plain Eigen types. Sparse matrices use an in-house CSR
// container because the assembly code needs deterministic accumulation and
// exact control over stored zeros; the direct solver is a left-looking sparse
// LU (Gilbert-Peierls) with reverse Cuthill-McKee ordering.

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace foil {

using Index = std::ptrdiff_t;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Compressed sparse row matrix. Immutable once built.
///
/// Invariants: column indices strictly increasing within a row, no stored
/// entry equal to 0.0, all indices inside [0, rows) x [0, cols).
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(Index rows, Index cols);

    /// Duplicates are summed in insertion order; entries summing to exactly
    /// zero are dropped.
    static SparseMatrix from_triplets(Index rows, Index cols, std::span<const Triplet> triplets);
    static SparseMatrix identity(Index n);
    static SparseMatrix from_dense(const DenseMatrix& dense);

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    Index nnz() const noexcept { return static_cast<Index>(values_.size()); }

    std::span<const Index> row_offsets() const noexcept { return offsets_; }
    std::span<const Index> col_indices() const noexcept { return cols_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    double coeff(Index row, Index col) const;
    double max_abs() const noexcept;
    double frobenius_norm() const noexcept;

    Vector operator*(const Vector& x) const;
    SparseMatrix transpose() const;
    SparseMatrix scaled(double factor) const;
    DenseMatrix to_dense() const;

    /// Rows and columns picked (and renumbered) by the given index lists.
    SparseMatrix submatrix(std::span<const Index> row_set, std::span<const Index> col_set) const;

    /// max |A_ij - A_ji|; requires a square matrix.
    double symmetry_defect() const;

    std::vector<Triplet> to_triplets() const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Index> offsets_{0};
    std::vector<Index> cols_idx_;
    std::vector<double> values_;
};

/// alpha*A + beta*B (same shape).
SparseMatrix add(const SparseMatrix& a, double alpha, const SparseMatrix& b, double beta);

struct FactorizeOptions {
    /// Pivots with |p| below pivot_tolerance * max|A| signal a singular matrix.
    double pivot_tolerance = 1e-14;
    /// A diagonal entry is kept as pivot when |a_jj| >= diagonal_preference * max|column|.
    double diagonal_preference = 0.1;
    /// Restrict pivots to the diagonal and require them to be positive
    /// (an LDL^T-type factorization of an SPD matrix).
    bool symmetric_positive_definite = false;
};

/// Reusable sparse LU factorization P*A*Q = L*U. Immutable after construction
/// and safe to share read-only between threads.
class Factorization {
public:
    Index size() const noexcept { return n_; }
    Index fill() const noexcept;
    Vector solve(const Vector& rhs) const;
    double min_abs_pivot() const noexcept { return min_pivot_; }

private:
    friend Factorization sparse_factorize(const SparseMatrix& a, const FactorizeOptions& options);

    Index n_ = 0;
    std::vector<Index> col_perm_;   // k-th factor column is original column col_perm_[k]
    std::vector<Index> row_pinv_;   // original row i is pivot row row_pinv_[i]
    std::vector<Index> l_ptr_, l_idx_;
    std::vector<double> l_val_;
    std::vector<Index> u_ptr_, u_idx_;
    std::vector<double> u_val_;
    double min_pivot_ = 0.0;
};

/// Throws SingularMatrix when a pivot falls below the tolerance.
Factorization sparse_factorize(const SparseMatrix& a, const FactorizeOptions& options = {});

/// Reverse Cuthill-McKee ordering of the symmetrized pattern of a square matrix.
std::vector<Index> reverse_cuthill_mckee(const SparseMatrix& a);

/// Applies the Moore-Penrose pseudo-inverse of a symmetric PSD matrix whose
/// range is spanned by the unit vectors in `support`: the support block is
/// factorized once and reused for any number of right-hand sides.
class RestrictedSpdSolver {
public:
    RestrictedSpdSolver(const SparseMatrix& m, std::vector<Index> support, const FactorizeOptions& options = {});

    /// Throws InconsistentRhs if rhs has weight outside the support.
    Vector solve(const Vector& rhs) const;

    std::span<const Index> support() const noexcept { return support_; }
    Index dimension() const noexcept { return n_; }

    double rhs_tolerance = 1e-12;

private:
    Index n_;
    std::vector<Index> support_;
    Factorization factor_;
};

Vector restricted_spd_solve(const SparseMatrix& m, const Vector& rhs, std::span<const Index> support);

/// Indices i with a nonzero diagonal entry; for a PSD matrix these span its range.
std::vector<Index> diagonal_support(const SparseMatrix& m);

/// Orthonormal basis of the eigenvectors of symmetric `a` with
/// |lambda| <= tol * max|lambda|. Empty (n x 0) when `a` has full rank.
DenseMatrix nullspace_basis(const DenseMatrix& a, double tol);

/// Numerical rank: number of singular values >= tol * sigma_max.
Index rank(const DenseMatrix& a, double tol);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const DenseMatrix& a);

bool all_finite(const DenseMatrix& a);

// Matrix Market (coordinate real general/symmetric).
void write_matrix_market(std::ostream& out, const SparseMatrix& a);
void write_matrix_market(std::ostream& out, const DenseMatrix& a);
SparseMatrix read_matrix_market(std::istream& in);

}  // namespace foil
