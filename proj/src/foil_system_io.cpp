#include "foilmqs/errors.hpp"
#include "foilmqs/winding.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace foil {

namespace {

constexpr char kMagic[8] = {'F', 'O', 'I', 'L', 'S', 'Y', 'S', '1'};

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) {
            throw Error("cannot open '" + path + "' for writing");
        }
    }
    void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void i64(std::int64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void sparse(const SparseMatrix& a) {
        i64(a.rows());
        i64(a.cols());
        const auto t = a.to_triplets();
        i64(static_cast<std::int64_t>(t.size()));
        for (const auto& e : t) {
            i64(e.row);
            i64(e.col);
            f64(e.value);
        }
    }
    void dense(const DenseMatrix& a) {
        i64(a.rows());
        i64(a.cols());
        for (Index j = 0; j < a.cols(); ++j) {
            for (Index i = 0; i < a.rows(); ++i) {
                f64(a(i, j));
            }
        }
    }
    void finish(const std::string& path) {
        out_.flush();
        if (!out_) {
            throw Error("write to '" + path + "' failed");
        }
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) {
            throw Error("cannot open '" + path + "'");
        }
    }
    void raw(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n)) {
            throw ValidationError("foil system file '" + path_ + "' is truncated");
        }
    }
    std::int64_t i64() {
        std::int64_t v;
        raw(&v, sizeof v);
        return v;
    }
    double f64() {
        double v;
        raw(&v, sizeof v);
        return v;
    }
    Index count(std::int64_t limit = std::int64_t{1} << 40) {
        const auto v = i64();
        if (v < 0 || v > limit) {
            throw ValidationError("foil system file '" + path_ + "' has an invalid size field");
        }
        return static_cast<Index>(v);
    }
    SparseMatrix sparse() {
        const Index rows = count(), cols = count(), nnz = count();
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(nnz));
        for (Index k = 0; k < nnz; ++k) {
            const Index i = count(), j = count();
            const double v = f64();
            if (i >= rows || j >= cols) {
                throw ValidationError("foil system file '" + path_ + "' has an out-of-range entry");
            }
            t.push_back({i, j, v});
        }
        return SparseMatrix::from_triplets(rows, cols, t);
    }
    DenseMatrix dense() {
        const Index rows = count(1 << 26), cols = count(1 << 26);
        DenseMatrix a(rows, cols);
        for (Index j = 0; j < cols; ++j) {
            for (Index i = 0; i < rows; ++i) {
                a(i, j) = f64();
            }
        }
        return a;
    }

private:
    std::ifstream in_;
    std::string path_;
};

}  // namespace

void save_foil_system(const AssembledFoilSystem& sys, const std::string& path) {
    Writer w(path);
    w.raw(kMagic, sizeof kMagic);
    w.i64(sys.turns);
    w.sparse(sys.K);
    w.sparse(sys.M);
    w.dense(sys.X);
    w.dense(sys.G);
    w.dense(sys.G_e);
    w.dense(sys.c);
    w.dense(sys.x);
    w.dense(sys.E);
    w.finish(path);
}

AssembledFoilSystem load_foil_system(const std::string& path) {
    Reader r(path);
    char magic[8];
    r.raw(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw ValidationError("'" + path + "' is not a foil system file");
    }
    AssembledFoilSystem sys;
    sys.turns = static_cast<int>(r.count(1 << 30));
    sys.K = r.sparse();
    sys.M = r.sparse();
    sys.X = r.dense();
    sys.G = r.dense();
    sys.G_e = r.dense();
    sys.c = r.dense();
    sys.x = r.dense();
    sys.E = r.dense();
    const Index nw = sys.K.rows();
    const Index np = sys.X.cols();
    const bool ok = sys.K.cols() == nw && sys.M.rows() == nw && sys.M.cols() == nw && sys.X.rows() == nw &&
                    sys.G.rows() == np && sys.G.cols() == np && sys.G_e.rows() == np && sys.G_e.cols() == np &&
                    sys.c.size() == np && sys.x.size() == nw && (sys.E.size() == 0 || (sys.E.rows() == nw && sys.E.cols() == np));
    if (!ok) {
        throw ValidationError("foil system file '" + path + "' has inconsistent block sizes");
    }
    return sys;
}

}  // namespace foil
