#include "foilmqs/errors.hpp"
#include "foilmqs/linalg.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace foil {

namespace {

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    for (const auto& t : a.to_triplets()) {
        out << t.row + 1 << ' ' << t.col + 1 << ' ' << shortest(t.value) << '\n';
    }
}

void write_matrix_market(std::ostream& out, const DenseMatrix& a) {
    write_matrix_market(out, SparseMatrix::from_dense(a));
}

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError(1, "empty Matrix Market stream");
    }
    ++line_no;
    std::istringstream banner(lower(line));
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%matrixmarket" || object != "matrix" || format != "coordinate") {
        throw ParseError(line_no, "unsupported Matrix Market banner");
    }
    if (field != "real" && field != "integer") {
        throw ParseError(line_no, "only real coordinate matrices are supported");
    }
    if (symmetry != "general" && symmetry != "symmetric") {
        throw ParseError(line_no, "only general or symmetric matrices are supported");
    }
    const bool symmetric = symmetry == "symmetric";

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] != '%') {
            break;
        }
    }
    Index rows = 0, cols = 0, nnz = 0;
    {
        std::istringstream size_line(line);
        if (!(size_line >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
            throw ParseError(line_no, "bad size line");
        }
    }
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    for (Index k = 0; k < nnz; ++k) {
        if (!std::getline(in, line)) {
            throw ParseError(line_no + 1, "unexpected end of entries");
        }
        ++line_no;
        std::istringstream entry(line);
        Index i = 0, j = 0;
        double v = 0.0;
        if (!(entry >> i >> j >> v) || i < 1 || j < 1 || i > rows || j > cols) {
            throw ParseError(line_no, "malformed entry");
        }
        t.push_back({i - 1, j - 1, v});
        if (symmetric && i != j) {
            t.push_back({j - 1, i - 1, v});
        }
    }
    return SparseMatrix::from_triplets(rows, cols, t);
}

}  // namespace foil
