#include "foilmqs/linalg.hpp"

#include "foilmqs/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace foil {

SparseMatrix::SparseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), offsets_(static_cast<std::size_t>(rows) + 1, 0) {
    if (rows < 0 || cols < 0) {
        throw ValidationError("negative matrix dimension");
    }
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::span<const Triplet> triplets) {
    SparseMatrix m(rows, cols);
    std::vector<std::size_t> order(triplets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
            throw ValidationError("triplet index out of range");
        }
        if (!std::isfinite(t.value)) {
            throw ValidationError("non-finite matrix entry");
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ta = triplets[a];
        const auto& tb = triplets[b];
        return ta.row != tb.row ? ta.row < tb.row : ta.col < tb.col;
    });

    std::vector<Index> counts(static_cast<std::size_t>(rows), 0);
    std::size_t k = 0;
    while (k < order.size()) {
        const auto& first = triplets[order[k]];
        double sum = 0.0;
        std::size_t j = k;
        while (j < order.size() && triplets[order[j]].row == first.row && triplets[order[j]].col == first.col) {
            sum += triplets[order[j]].value;
            ++j;
        }
        if (sum != 0.0) {
            m.cols_idx_.push_back(first.col);
            m.values_.push_back(sum);
            ++counts[static_cast<std::size_t>(first.row)];
        }
        k = j;
    }
    for (Index r = 0; r < rows; ++r) {
        m.offsets_[static_cast<std::size_t>(r) + 1] = m.offsets_[static_cast<std::size_t>(r)] + counts[static_cast<std::size_t>(r)];
    }
    return m;
}

SparseMatrix SparseMatrix::identity(Index n) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        t.push_back({i, i, 1.0});
    }
    return from_triplets(n, n, t);
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
    std::vector<Triplet> t;
    for (Index i = 0; i < dense.rows(); ++i) {
        for (Index j = 0; j < dense.cols(); ++j) {
            if (dense(i, j) != 0.0) {
                t.push_back({i, j, dense(i, j)});
            }
        }
    }
    return from_triplets(dense.rows(), dense.cols(), t);
}

double SparseMatrix::coeff(Index row, Index col) const {
    const auto begin = cols_idx_.begin() + offsets_[static_cast<std::size_t>(row)];
    const auto end = cols_idx_.begin() + offsets_[static_cast<std::size_t>(row) + 1];
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) {
        return 0.0;
    }
    return values_[static_cast<std::size_t>(it - cols_idx_.begin())];
}

double SparseMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double SparseMatrix::frobenius_norm() const noexcept {
    double s = 0.0;
    for (double v : values_) {
        s += v * v;
    }
    return std::sqrt(s);
}

Vector SparseMatrix::operator*(const Vector& x) const {
    if (x.size() != cols_) {
        throw ValidationError("dimension mismatch in sparse matrix-vector product");
    }
    Vector y = Vector::Zero(rows_);
    for (Index r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (Index p = offsets_[static_cast<std::size_t>(r)]; p < offsets_[static_cast<std::size_t>(r) + 1]; ++p) {
            s += values_[static_cast<std::size_t>(p)] * x[cols_idx_[static_cast<std::size_t>(p)]];
        }
        y[r] = s;
    }
    return y;
}

SparseMatrix SparseMatrix::transpose() const {
    SparseMatrix t(cols_, rows_);
    std::vector<Index> counts(static_cast<std::size_t>(cols_) + 1, 0);
    for (Index c : cols_idx_) {
        ++counts[static_cast<std::size_t>(c) + 1];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    t.offsets_.assign(counts.begin(), counts.end());
    t.cols_idx_.resize(cols_idx_.size());
    t.values_.resize(values_.size());
    std::vector<Index> next(counts.begin(), counts.end() - 1);
    for (Index r = 0; r < rows_; ++r) {
        for (Index p = offsets_[static_cast<std::size_t>(r)]; p < offsets_[static_cast<std::size_t>(r) + 1]; ++p) {
            const auto c = static_cast<std::size_t>(cols_idx_[static_cast<std::size_t>(p)]);
            const auto dst = static_cast<std::size_t>(next[c]++);
            t.cols_idx_[dst] = r;
            t.values_[dst] = values_[static_cast<std::size_t>(p)];
        }
    }
    return t;
}

SparseMatrix SparseMatrix::scaled(double factor) const {
    if (factor == 0.0) {
        return SparseMatrix(rows_, cols_);
    }
    SparseMatrix s = *this;
    for (double& v : s.values_) {
        v *= factor;
    }
    return s;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d = DenseMatrix::Zero(rows_, cols_);
    for (Index r = 0; r < rows_; ++r) {
        for (Index p = offsets_[static_cast<std::size_t>(r)]; p < offsets_[static_cast<std::size_t>(r) + 1]; ++p) {
            d(r, cols_idx_[static_cast<std::size_t>(p)]) = values_[static_cast<std::size_t>(p)];
        }
    }
    return d;
}

SparseMatrix SparseMatrix::submatrix(std::span<const Index> row_set, std::span<const Index> col_set) const {
    std::vector<Index> col_map(static_cast<std::size_t>(cols_), -1);
    for (std::size_t k = 0; k < col_set.size(); ++k) {
        col_map[static_cast<std::size_t>(col_set[k])] = static_cast<Index>(k);
    }
    std::vector<Triplet> t;
    for (std::size_t k = 0; k < row_set.size(); ++k) {
        const auto r = static_cast<std::size_t>(row_set[k]);
        for (Index p = offsets_[r]; p < offsets_[r + 1]; ++p) {
            const Index c = col_map[static_cast<std::size_t>(cols_idx_[static_cast<std::size_t>(p)])];
            if (c >= 0) {
                t.push_back({static_cast<Index>(k), c, values_[static_cast<std::size_t>(p)]});
            }
        }
    }
    return from_triplets(static_cast<Index>(row_set.size()), static_cast<Index>(col_set.size()), t);
}

double SparseMatrix::symmetry_defect() const {
    if (rows_ != cols_) {
        throw ValidationError("symmetry check on a non-square matrix");
    }
    double defect = 0.0;
    for (Index r = 0; r < rows_; ++r) {
        for (Index p = offsets_[static_cast<std::size_t>(r)]; p < offsets_[static_cast<std::size_t>(r) + 1]; ++p) {
            const Index c = cols_idx_[static_cast<std::size_t>(p)];
            defect = std::max(defect, std::abs(values_[static_cast<std::size_t>(p)] - coeff(c, r)));
        }
    }
    return defect;
}

std::vector<Triplet> SparseMatrix::to_triplets() const {
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (Index r = 0; r < rows_; ++r) {
        for (Index p = offsets_[static_cast<std::size_t>(r)]; p < offsets_[static_cast<std::size_t>(r) + 1]; ++p) {
            t.push_back({r, cols_idx_[static_cast<std::size_t>(p)], values_[static_cast<std::size_t>(p)]});
        }
    }
    return t;
}

SparseMatrix add(const SparseMatrix& a, double alpha, const SparseMatrix& b, double beta) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ValidationError("dimension mismatch in sparse matrix sum");
    }
    std::vector<Triplet> t = a.scaled(alpha).to_triplets();
    const auto tb = b.scaled(beta).to_triplets();
    t.insert(t.end(), tb.begin(), tb.end());
    return SparseMatrix::from_triplets(a.rows(), a.cols(), t);
}

// ---------------------------------------------------------------------------
// Pseudo-inverse application on the range of a PSD matrix

std::vector<Index> diagonal_support(const SparseMatrix& m) {
    std::vector<Index> s;
    for (Index i = 0; i < m.rows(); ++i) {
        if (m.coeff(i, i) != 0.0) {
            s.push_back(i);
        }
    }
    return s;
}

namespace {

Factorization factorize_support_block(const SparseMatrix& m, std::span<const Index> support, const FactorizeOptions& options) {
    if (m.rows() != m.cols()) {
        throw ValidationError("restricted solve needs a square matrix");
    }
    FactorizeOptions spd = options;
    spd.symmetric_positive_definite = true;
    try {
        return sparse_factorize(m.submatrix(support, support), spd);
    } catch (const SingularMatrix& e) {
        throw SingularMatrix(std::string("restricted block is not SPD: ") + e.what());
    }
}

}  // namespace

RestrictedSpdSolver::RestrictedSpdSolver(const SparseMatrix& m, std::vector<Index> support, const FactorizeOptions& options)
    : n_(m.rows()), support_(std::move(support)), factor_(factorize_support_block(m, support_, options)) {}

Vector RestrictedSpdSolver::solve(const Vector& rhs) const {
    if (rhs.size() != n_) {
        throw ValidationError("rhs dimension mismatch in restricted solve");
    }
    std::vector<char> inside(static_cast<std::size_t>(n_), 0);
    for (Index i : support_) {
        inside[static_cast<std::size_t>(i)] = 1;
    }
    double outside = 0.0;
    for (Index i = 0; i < n_; ++i) {
        if (!inside[static_cast<std::size_t>(i)]) {
            outside += rhs[i] * rhs[i];
        }
    }
    if (std::sqrt(outside) > rhs_tolerance * rhs.norm()) {
        throw InconsistentRhs("right-hand side has weight outside the support of the matrix");
    }
    Vector local(static_cast<Index>(support_.size()));
    for (std::size_t k = 0; k < support_.size(); ++k) {
        local[static_cast<Index>(k)] = rhs[support_[k]];
    }
    Vector y = Vector::Zero(n_);
    if (local.size() == 0) {
        return y;
    }
    const Vector ys = factor_.solve(local);
    for (std::size_t k = 0; k < support_.size(); ++k) {
        y[support_[k]] = ys[static_cast<Index>(k)];
    }
    return y;
}

Vector restricted_spd_solve(const SparseMatrix& m, const Vector& rhs, std::span<const Index> support) {
    return RestrictedSpdSolver(m, std::vector<Index>(support.begin(), support.end())).solve(rhs);
}

// ---------------------------------------------------------------------------
// Dense helpers

bool all_finite(const DenseMatrix& a) {
    return a.allFinite();
}

DenseMatrix nullspace_basis(const DenseMatrix& a, double tol) {
    if (a.rows() != a.cols()) {
        throw ValidationError("nullspace_basis expects a square symmetric matrix");
    }
    if (!a.allFinite()) {
        throw ValidationError("non-finite matrix in nullspace_basis");
    }
    const Index n = a.rows();
    if (n == 0) {
        return DenseMatrix(0, 0);
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(a);
    const Vector& lambda = eig.eigenvalues();
    const double scale = lambda.cwiseAbs().maxCoeff();
    std::vector<Index> kernel;
    for (Index i = 0; i < n; ++i) {
        if (std::abs(lambda[i]) <= tol * scale) {
            kernel.push_back(i);
        }
    }
    DenseMatrix basis(n, static_cast<Index>(kernel.size()));
    for (std::size_t k = 0; k < kernel.size(); ++k) {
        basis.col(static_cast<Index>(k)) = eig.eigenvectors().col(kernel[k]);
    }
    return basis;
}

Index rank(const DenseMatrix& a, double tol) {
    if (a.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<DenseMatrix> svd(a);
    const Vector& s = svd.singularValues();
    const double smax = s.size() > 0 ? s[0] : 0.0;
    if (smax == 0.0) {
        return 0;
    }
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i) {
        if (s[i] >= tol * smax) {
            ++r;
        }
    }
    return r;
}

double min_eigenvalue(const DenseMatrix& a) {
    if (a.rows() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(a, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()[0];
}

}  // namespace foil
