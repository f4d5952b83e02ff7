#include "foilmqs/errors.hpp"
#include "foilmqs/linalg.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace foil;

namespace {

DenseMatrix random_spd(int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseMatrix b(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            b(i, j) = u(gen);
        }
    }
    return b * b.transpose() + n * DenseMatrix::Identity(n, n);
}

DenseMatrix dense_pinv_symmetric(const DenseMatrix& a) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
    const double cut = 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff();
    Vector inv = es.eigenvalues().unaryExpr([cut](double l) { return std::abs(l) > cut ? 1.0 / l : 0.0; });
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

TEST_CASE("csr construction sums duplicates and drops zeros") {
    std::vector<Triplet> t{{0, 1, 2.0}, {0, 1, 3.0}, {1, 0, 1.0}, {1, 0, -1.0}, {1, 1, 4.0}};
    auto a = SparseMatrix::from_triplets(2, 2, t);
    CHECK(a.nnz() == 2);
    CHECK(a.coeff(0, 1) == 5.0);
    CHECK(a.coeff(1, 0) == 0.0);
    CHECK(a.transpose().coeff(1, 0) == 5.0);
    CHECK(add(a, 2.0, a, -2.0).nnz() == 0);
}

TEST_CASE("factorize identity and diagonal") {
    auto f = sparse_factorize(SparseMatrix::identity(3));
    Vector b(3);
    b << 1, 2, 3;
    CHECK((f.solve(b) - b).norm() == 0.0);

    DenseMatrix d(2, 2);
    d << 2, 0, 0, 4;
    Vector rhs(2);
    rhs << 2, 4;
    auto y = sparse_factorize(SparseMatrix::from_dense(d)).solve(rhs);
    CHECK(y(0) == Catch::Approx(1.0));
    CHECK(y(1) == Catch::Approx(1.0));
}

TEST_CASE("factorize random spd meets residual bound") {
    const DenseMatrix a = random_spd(5, 42);
    std::mt19937 gen(7);
    std::normal_distribution<double> n01;
    Vector b(5);
    for (int i = 0; i < 5; ++i) {
        b(i) = n01(gen);
    }
    const auto sa = SparseMatrix::from_dense(a);
    for (bool spd : {false, true}) {
        FactorizeOptions opt;
        opt.symmetric_positive_definite = spd;
        const Vector y = sparse_factorize(sa, opt).solve(b);
        const double res = (a * y - b).norm();
        CHECK(res <= 1e-10 * (a.norm() * y.norm() + b.norm()));
    }
}

TEST_CASE("factorize nonsymmetric matrix needing pivoting") {
    DenseMatrix a(4, 4);
    a << 0, 1, 0, 2,  //
        3, 0, 1, 0,   //
        0, 0, 0, 5,   //
        1, 2, 7, 0;
    Vector b(4);
    b << 1, -2, 3, 0.5;
    const Vector y = sparse_factorize(SparseMatrix::from_dense(a)).solve(b);
    CHECK((a * y - b).norm() < 1e-12);
}

TEST_CASE("singular matrix is reported") {
    DenseMatrix a(2, 2);
    a << 1, 2, 2, 4;
    CHECK_THROWS_AS(sparse_factorize(SparseMatrix::from_dense(a)), SingularMatrix);
    DenseMatrix indefinite(2, 2);
    indefinite << 1, 0, 0, -1;
    FactorizeOptions opt;
    opt.symmetric_positive_definite = true;
    CHECK_THROWS_AS(sparse_factorize(SparseMatrix::from_dense(indefinite), opt), SingularMatrix);
}

TEST_CASE("reverse cuthill mckee is a permutation") {
    const auto a = SparseMatrix::from_dense(random_spd(9, 3));
    auto p = reverse_cuthill_mckee(a);
    std::sort(p.begin(), p.end());
    for (Index i = 0; i < 9; ++i) {
        CHECK(p[static_cast<std::size_t>(i)] == i);
    }
}

TEST_CASE("restricted spd solve on a diagonal") {
    DenseMatrix d = DenseMatrix::Zero(3, 3);
    d(0, 0) = 2;
    d(2, 2) = 3;
    const auto m = SparseMatrix::from_dense(d);
    CHECK(diagonal_support(m) == std::vector<Index>{0, 2});
    Vector b(3);
    b << 4, 0, 9;
    const Vector y = restricted_spd_solve(m, b, diagonal_support(m));
    CHECK(y(0) == Catch::Approx(2.0));
    CHECK(y(1) == 0.0);
    CHECK(y(2) == Catch::Approx(3.0));

    Vector bad(3);
    bad << 4, 1, 9;
    CHECK_THROWS_AS(restricted_spd_solve(m, bad, diagonal_support(m)), InconsistentRhs);
}

TEST_CASE("restricted spd solve zero rhs") {
    DenseMatrix d = DenseMatrix::Zero(2, 2);
    d(0, 0) = 1;
    const Vector y = restricted_spd_solve(SparseMatrix::from_dense(d), Vector::Zero(2), std::vector<Index>{0});
    CHECK(y.norm() == 0.0);
}

TEST_CASE("restricted spd solve matches dense pseudo-inverse") {
    DenseMatrix m = DenseMatrix::Zero(4, 4);
    const DenseMatrix block = random_spd(2, 11);
    const std::vector<Index> support{1, 3};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            m(support[i], support[j]) = block(i, j);
        }
    }
    Vector b = Vector::Zero(4);
    b(1) = 0.7;
    b(3) = -1.3;
    const auto sm = SparseMatrix::from_dense(m);
    const Vector y = restricted_spd_solve(sm, b, support);
    CHECK((y - dense_pinv_symmetric(m) * b).norm() < 1e-9);

    // pseudo-inverse idempotence on the range
    Vector w = Vector::Zero(4);
    w(1) = 2.0;
    w(3) = 0.25;
    const Vector mw = m * w;
    CHECK((m * restricted_spd_solve(sm, mw, support) - mw).norm() <= 1e-9 * mw.norm());
}

TEST_CASE("restricted solver rejects non spd block") {
    DenseMatrix m(2, 2);
    m << 1, 2, 2, 1;
    CHECK_THROWS_AS(RestrictedSpdSolver(SparseMatrix::from_dense(m), {0, 1}), SingularMatrix);
}

TEST_CASE("nullspace basis") {
    DenseMatrix a = DenseMatrix::Zero(2, 2);
    a(0, 0) = 1;
    const DenseMatrix q = nullspace_basis(a, 1e-10);
    REQUIRE(q.cols() == 1);
    CHECK(std::abs(q(0, 0)) < 1e-14);
    CHECK(std::abs(std::abs(q(1, 0)) - 1.0) < 1e-14);

    CHECK(nullspace_basis(DenseMatrix::Identity(3, 3), 1e-10).cols() == 0);

    std::mt19937 gen(5);
    std::normal_distribution<double> n01;
    Vector v(3);
    for (int i = 0; i < 3; ++i) {
        v(i) = n01(gen);
    }
    v.normalize();
    const DenseMatrix vvt = v * v.transpose();
    const DenseMatrix qv = nullspace_basis(vvt, 1e-10);
    REQUIRE(qv.cols() == 2);
    CHECK((qv.transpose() * v).norm() < 1e-10);
    CHECK((qv.transpose() * qv - DenseMatrix::Identity(2, 2)).norm() < 1e-10);
    CHECK((vvt * qv).norm() <= 10 * 1e-10 * vvt.norm());
}

TEST_CASE("numerical rank") {
    CHECK(rank(DenseMatrix::Identity(3, 3), 1e-12) == 3);
    CHECK(rank(DenseMatrix::Zero(3, 3), 1e-12) == 0);
    DenseMatrix a(2, 2);
    a << 1, 2, 2, 4;
    CHECK(rank(a, 1e-12) == 1);
}

TEST_CASE("matrix market round trip") {
    const auto a = SparseMatrix::from_dense(random_spd(4, 9));
    std::stringstream ss;
    write_matrix_market(ss, a);
    CHECK(read_matrix_market(ss) == a);
    std::stringstream bad("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
    CHECK_THROWS_AS(read_matrix_market(bad), ParseError);
}
