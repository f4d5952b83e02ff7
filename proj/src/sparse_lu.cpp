// Left-looking sparse LU with partial pivoting (Gilbert-Peierls), in the
// style of CSparse's cs_lu. Columns are processed in reverse Cuthill-McKee
// order; a diagonal pivot is preferred whenever it is not too small relative
// to the column maximum, which keeps fill close to the symmetric envelope.

#include "foilmqs/errors.hpp"
#include "foilmqs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

namespace foil {

namespace {

std::vector<std::vector<Index>> symmetric_adjacency(const SparseMatrix& a) {
    const Index n = a.rows();
    std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
    const auto off = a.row_offsets();
    const auto col = a.col_indices();
    for (Index r = 0; r < n; ++r) {
        for (Index p = off[static_cast<std::size_t>(r)]; p < off[static_cast<std::size_t>(r) + 1]; ++p) {
            const Index c = col[static_cast<std::size_t>(p)];
            if (c != r) {
                adj[static_cast<std::size_t>(r)].push_back(c);
                adj[static_cast<std::size_t>(c)].push_back(r);
            }
        }
    }
    for (auto& nb : adj) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return adj;
}

// BFS levels from `start` restricted to unvisited nodes; returns nodes of the last level.
std::vector<Index> last_level(const std::vector<std::vector<Index>>& adj, const std::vector<char>& visited, Index start,
                              Index& depth) {
    std::vector<Index> level(adj.size(), -1);
    std::vector<Index> frontier{start};
    level[static_cast<std::size_t>(start)] = 0;
    depth = 0;
    while (true) {
        std::vector<Index> next;
        for (Index v : frontier) {
            for (Index w : adj[static_cast<std::size_t>(v)]) {
                if (!visited[static_cast<std::size_t>(w)] && level[static_cast<std::size_t>(w)] < 0) {
                    level[static_cast<std::size_t>(w)] = depth + 1;
                    next.push_back(w);
                }
            }
        }
        if (next.empty()) {
            return frontier;
        }
        frontier = std::move(next);
        ++depth;
    }
}

}  // namespace

std::vector<Index> reverse_cuthill_mckee(const SparseMatrix& a) {
    if (a.rows() != a.cols()) {
        throw ValidationError("ordering requires a square matrix");
    }
    const auto adj = symmetric_adjacency(a);
    const std::size_t n = adj.size();
    auto degree = [&](Index v) { return adj[static_cast<std::size_t>(v)].size(); };

    std::vector<char> visited(n, 0);
    std::vector<Index> order;
    order.reserve(n);
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (visited[seed]) {
            continue;
        }
        // minimum-degree node of this component as initial guess
        Index start = static_cast<Index>(seed);
        {
            std::vector<char> seen(n, 0);
            std::vector<Index> todo{start};
            seen[seed] = 1;
            while (!todo.empty()) {
                const Index v = todo.back();
                todo.pop_back();
                if (degree(v) < degree(start) || (degree(v) == degree(start) && v < start)) {
                    start = v;
                }
                for (Index w : adj[static_cast<std::size_t>(v)]) {
                    if (!seen[static_cast<std::size_t>(w)] && !visited[static_cast<std::size_t>(w)]) {
                        seen[static_cast<std::size_t>(w)] = 1;
                        todo.push_back(w);
                    }
                }
            }
        }
        // pseudo-peripheral node search
        Index depth = 0;
        for (int iter = 0; iter < 8; ++iter) {
            Index new_depth = 0;
            auto last = last_level(adj, visited, start, new_depth);
            if (iter > 0 && new_depth <= depth) {
                break;
            }
            depth = new_depth;
            Index best = last.front();
            for (Index v : last) {
                if (degree(v) < degree(best) || (degree(v) == degree(best) && v < best)) {
                    best = v;
                }
            }
            if (best == start) {
                break;
            }
            start = best;
        }

        std::queue<Index> queue;
        queue.push(start);
        visited[static_cast<std::size_t>(start)] = 1;
        while (!queue.empty()) {
            const Index v = queue.front();
            queue.pop();
            order.push_back(v);
            std::vector<Index> next;
            for (Index w : adj[static_cast<std::size_t>(v)]) {
                if (!visited[static_cast<std::size_t>(w)]) {
                    visited[static_cast<std::size_t>(w)] = 1;
                    next.push_back(w);
                }
            }
            std::sort(next.begin(), next.end(), [&](Index x, Index y) {
                return degree(x) != degree(y) ? degree(x) < degree(y) : x < y;
            });
            for (Index w : next) {
                queue.push(w);
            }
        }
    }
    std::reverse(order.begin(), order.end());
    return order;
}

Factorization sparse_factorize(const SparseMatrix& a, const FactorizeOptions& options) {
    if (a.rows() != a.cols()) {
        throw ValidationError("sparse_factorize requires a square matrix");
    }
    const Index n = a.rows();
    Factorization f;
    f.n_ = n;
    f.col_perm_ = reverse_cuthill_mckee(a);
    f.row_pinv_.assign(static_cast<std::size_t>(n), -1);
    f.l_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    f.u_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    f.min_pivot_ = n > 0 ? std::numeric_limits<double>::infinity() : 0.0;

    // compressed columns of A are the rows of A^T
    const SparseMatrix at = a.transpose();
    const auto cptr = at.row_offsets();
    const auto cidx = at.col_indices();
    const auto cval = at.values();

    const double threshold = options.pivot_tolerance * a.max_abs();

    auto& pinv = f.row_pinv_;
    auto& lp = f.l_ptr_;
    auto& li = f.l_idx_;
    auto& lx = f.l_val_;
    auto& up = f.u_ptr_;
    auto& ui = f.u_idx_;
    auto& ux = f.u_val_;

    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    std::vector<Index> xi(static_cast<std::size_t>(n));
    std::vector<Index> stack(static_cast<std::size_t>(n));
    std::vector<Index> pstack(static_cast<std::size_t>(n));
    std::vector<char> marked(static_cast<std::size_t>(n), 0);

    for (Index k = 0; k < n; ++k) {
        lp[static_cast<std::size_t>(k)] = static_cast<Index>(li.size());
        up[static_cast<std::size_t>(k)] = static_cast<Index>(ui.size());
        const Index col = f.col_perm_[static_cast<std::size_t>(k)];

        // symbolic: rows reachable from the pattern of A(:,col) through L
        Index top = n;
        for (Index p = cptr[static_cast<std::size_t>(col)]; p < cptr[static_cast<std::size_t>(col) + 1]; ++p) {
            const Index root = cidx[static_cast<std::size_t>(p)];
            if (marked[static_cast<std::size_t>(root)]) {
                continue;
            }
            Index head = 0;
            stack[0] = root;
            while (head >= 0) {
                const Index j = stack[static_cast<std::size_t>(head)];
                const Index jnew = pinv[static_cast<std::size_t>(j)];
                if (!marked[static_cast<std::size_t>(j)]) {
                    marked[static_cast<std::size_t>(j)] = 1;
                    pstack[static_cast<std::size_t>(head)] = jnew < 0 ? 0 : lp[static_cast<std::size_t>(jnew)] + 1;
                }
                bool done = true;
                const Index pend = jnew < 0 ? 0 : lp[static_cast<std::size_t>(jnew) + 1];
                for (Index q = pstack[static_cast<std::size_t>(head)]; q < pend; ++q) {
                    const Index i = li[static_cast<std::size_t>(q)];
                    if (marked[static_cast<std::size_t>(i)]) {
                        continue;
                    }
                    pstack[static_cast<std::size_t>(head)] = q + 1;
                    stack[static_cast<std::size_t>(++head)] = i;
                    done = false;
                    break;
                }
                if (done) {
                    --head;
                    xi[static_cast<std::size_t>(--top)] = j;
                }
            }
        }

        // numeric: x = L \ A(:,col) on the reach
        for (Index p = top; p < n; ++p) {
            x[static_cast<std::size_t>(xi[static_cast<std::size_t>(p)])] = 0.0;
        }
        for (Index p = cptr[static_cast<std::size_t>(col)]; p < cptr[static_cast<std::size_t>(col) + 1]; ++p) {
            x[static_cast<std::size_t>(cidx[static_cast<std::size_t>(p)])] = cval[static_cast<std::size_t>(p)];
        }
        for (Index p = top; p < n; ++p) {
            const Index i = xi[static_cast<std::size_t>(p)];
            const Index jcol = pinv[static_cast<std::size_t>(i)];
            if (jcol < 0) {
                continue;
            }
            const double xj = x[static_cast<std::size_t>(i)];
            for (Index q = lp[static_cast<std::size_t>(jcol)] + 1; q < lp[static_cast<std::size_t>(jcol) + 1]; ++q) {
                x[static_cast<std::size_t>(li[static_cast<std::size_t>(q)])] -= lx[static_cast<std::size_t>(q)] * xj;
            }
        }

        // pivot selection
        Index ipiv = -1;
        double amax = -1.0;
        bool diagonal_in_pattern = false;
        for (Index p = top; p < n; ++p) {
            const Index i = xi[static_cast<std::size_t>(p)];
            marked[static_cast<std::size_t>(i)] = 0;
            if (i == col) {
                diagonal_in_pattern = true;
            }
            if (pinv[static_cast<std::size_t>(i)] < 0) {
                const double t = std::abs(x[static_cast<std::size_t>(i)]);
                if (t > amax) {
                    amax = t;
                    ipiv = i;
                }
            } else {
                ui.push_back(pinv[static_cast<std::size_t>(i)]);
                ux.push_back(x[static_cast<std::size_t>(i)]);
            }
        }
        if (options.symmetric_positive_definite) {
            const double d = diagonal_in_pattern && pinv[static_cast<std::size_t>(col)] < 0 ? x[static_cast<std::size_t>(col)] : 0.0;
            if (!(d > threshold)) {
                throw SingularMatrix("non-positive pivot " + std::to_string(d) + " at column " + std::to_string(col));
            }
            ipiv = col;
        } else {
            if (ipiv < 0 || amax <= threshold) {
                throw SingularMatrix("pivot below tolerance at column " + std::to_string(col));
            }
            if (diagonal_in_pattern && pinv[static_cast<std::size_t>(col)] < 0 &&
                std::abs(x[static_cast<std::size_t>(col)]) >= options.diagonal_preference * amax) {
                ipiv = col;
            }
        }

        const double pivot = x[static_cast<std::size_t>(ipiv)];
        f.min_pivot_ = std::min(f.min_pivot_, std::abs(pivot));
        ui.push_back(k);
        ux.push_back(pivot);
        pinv[static_cast<std::size_t>(ipiv)] = k;
        li.push_back(ipiv);
        lx.push_back(1.0);
        for (Index p = top; p < n; ++p) {
            const Index i = xi[static_cast<std::size_t>(p)];
            if (pinv[static_cast<std::size_t>(i)] < 0) {
                li.push_back(i);
                lx.push_back(x[static_cast<std::size_t>(i)] / pivot);
            }
            x[static_cast<std::size_t>(i)] = 0.0;
        }
    }
    lp[static_cast<std::size_t>(n)] = static_cast<Index>(li.size());
    up[static_cast<std::size_t>(n)] = static_cast<Index>(ui.size());
    for (auto& i : li) {
        i = pinv[static_cast<std::size_t>(i)];
    }
    return f;
}

Index Factorization::fill() const noexcept {
    return static_cast<Index>(l_val_.size() + u_val_.size()) - n_;
}

Vector Factorization::solve(const Vector& rhs) const {
    if (rhs.size() != n_) {
        throw ValidationError("rhs dimension mismatch");
    }
    std::vector<double> y(static_cast<std::size_t>(n_));
    for (Index i = 0; i < n_; ++i) {
        y[static_cast<std::size_t>(row_pinv_[static_cast<std::size_t>(i)])] = rhs[i];
    }
    for (Index j = 0; j < n_; ++j) {
        const double yj = y[static_cast<std::size_t>(j)];
        for (Index p = l_ptr_[static_cast<std::size_t>(j)] + 1; p < l_ptr_[static_cast<std::size_t>(j) + 1]; ++p) {
            y[static_cast<std::size_t>(l_idx_[static_cast<std::size_t>(p)])] -= l_val_[static_cast<std::size_t>(p)] * yj;
        }
    }
    for (Index j = n_ - 1; j >= 0; --j) {
        const Index last = u_ptr_[static_cast<std::size_t>(j) + 1] - 1;
        y[static_cast<std::size_t>(j)] /= u_val_[static_cast<std::size_t>(last)];
        const double yj = y[static_cast<std::size_t>(j)];
        for (Index p = u_ptr_[static_cast<std::size_t>(j)]; p < last; ++p) {
            y[static_cast<std::size_t>(u_idx_[static_cast<std::size_t>(p)])] -= u_val_[static_cast<std::size_t>(p)] * yj;
        }
    }
    Vector out(n_);
    for (Index k = 0; k < n_; ++k) {
        out[col_perm_[static_cast<std::size_t>(k)]] = y[static_cast<std::size_t>(k)];
    }
    return out;
}

}  // namespace foil
